#include <doctest.h>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "evolmath/serialize.hpp"
#include "reference_weights.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int status = -1;
  std::string out;
};

fs::path work_dir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() /
             ("evolmath-cli-" + std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

Result cli(const std::string& args) {
  const std::string cmd = std::string("env -u EVOLMATH_API_KEY -u EVOLMATH_MODEL \"") + EVOLMATH_CLI + "\" " + args +
                          " 2>/dev/null";
  Result r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), static_cast<int>(buf.size()), pipe)) r.out += buf.data();
  const int raw = ::pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string path(const std::string& name) { return (work_dir() / name).string(); }

std::string fixture(const std::string& name) { return (fs::path(EVOLMATH_FIXTURE_DIR) / name).string(); }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("evolve is reproducible from its seed and from its header") {
  const auto a = cli("evolve --population 4 --seed 7 --offline-referee 5 -o " + path("a.evolmath.jsonl"));
  const auto b = cli("evolve --population 4 --seed 7 --offline-referee 5 -j 3 -o " + path("b.evolmath.jsonl"));
  REQUIRE(a.status == 0);
  REQUIRE(b.status == 0);
  const auto bytes = evolmath::read_text_file(path("a.evolmath.jsonl"));
  CHECK(bytes == evolmath::read_text_file(path("b.evolmath.jsonl")));
  CHECK(bytes.rfind("{\"evolmath_header\"", 0) == 0);

  const auto c = cli("evolve --from-header " + path("a.evolmath.jsonl") + " -o " + path("c.evolmath.jsonl"));
  REQUIRE(c.status == 0);
  CHECK(bytes == evolmath::read_text_file(path("c.evolmath.jsonl")));
}

TEST_CASE("exit codes") {
  CHECK(cli("--no-such-flag").status == 1);
  CHECK(cli("evolve --mode three_gen --offline-referee 5 -o " + path("x.jsonl")).status == 1);
  CHECK(cli("evolve --population 2 --seed 1 -o " + path("y.jsonl")).status == 1);  // no key, no offline referee
  evolmath::write_text_file(path("broken.jsonl"), "{\"evolmath_header\":{}}\n{\"id\":3}\n");
  CHECK(cli("score " + path("broken.jsonl") + " --offline-referee 5 -o " + path("z.jsonl")).status == 2);
  CHECK(cli("evolve --population 2 --seed 1 --vars 2 --eqs 2 --sparsity 3 --offline-referee 5 -o " +
            path("w.jsonl")).status == 1);
}

TEST_CASE("calibrate reproduces the reference weights") {
  evolmath::write_text_file(path("reference.csv"), reference_weights::to_csv(reference_weights::make_dataset()));
  const auto r = cli("calibrate --features " + path("reference.csv") + " -o " + path("weights.jsonl"));
  REQUIRE(r.status == 0);
  std::istringstream lines(r.out);
  std::string name, value;
  std::size_t seen = 0;
  while (lines >> name >> value) {
    for (const auto& row : reference_weights::kRows) {
      if (name != row.feature) continue;
      ++seen;
      CAPTURE(name);
      if (row.retained) {
        CHECK(std::abs(std::stod(value) - row.weight) <= reference_weights::kWeightTolerance);
      } else {
        CHECK(value == "excluded");
      }
    }
  }
  CHECK(seen == reference_weights::kRows.size());
  const auto sidecar = evolmath::read_text_file(path("weights.jsonl"));
  CHECK(sidecar.find("\"feature\":\"noise_ratio\"") != std::string::npos);
}

TEST_CASE("evaluate and attribute with stub solvers") {
  REQUIRE(cli("evolve --population 8 --seed 3 --offline-referee 5 --generations 1 -o " + path("bench.evolmath.jsonl"))
              .status == 0);
  REQUIRE(cli("eval " + path("bench.evolmath.jsonl") + " --stub shortcut --model shortcut -o " +
              path("shortcut.evalrecords.jsonl")).status == 0);
  const auto attr = cli("attribute " + path("shortcut.evalrecords.jsonl") + " --benchmark " +
                        path("bench.evolmath.jsonl"));
  REQUIRE(attr.status == 0);
  CHECK(attr.out.find("100.0%") != std::string::npos);

  REQUIRE(cli("eval " + path("bench.evolmath.jsonl") + " --stub oracle --model oracle -o " +
              path("oracle.evalrecords.jsonl")).status == 0);
  const auto report = cli("report " + path("oracle.evalrecords.jsonl"));
  REQUIRE(report.status == 0);
  CHECK(report.out.find("100.0%") != std::string::npos);
  const auto undefined = cli("attribute " + path("oracle.evalrecords.jsonl") + " --benchmark " +
                             path("bench.evolmath.jsonl"));
  CHECK(undefined.out.find("undefined") != std::string::npos);
}

TEST_CASE("import fixture evolves offline") {
  const auto r = cli("import " + fixture("gsm8k_style_cores.jsonl") + " --evolve --offline-referee 5 --seed 2 -o " +
                     path("imported.evolmath.jsonl"));
  CHECK(r.status == 0);
  const auto file = evolmath::read_benchmark(path("imported.evolmath.jsonl"));
  CHECK_FALSE(file.items.empty());
  CHECK(file.header["evolmath_header"]["config"]["origin"] == "import");
}

TEST_CASE("score and select round trip") {
  REQUIRE(cli("evolve --population 6 --seed 9 --offline-referee 5 -o " + path("s.evolmath.jsonl")).status == 0);
  REQUIRE(cli("score " + path("s.evolmath.jsonl") + " --offline-referee 5 --percentile off -o " +
              path("s2.evolmath.jsonl")).status == 0);
  REQUIRE(cli("select " + path("s2.evolmath.jsonl") + " --qualified " + path("q.jsonl") + " --rejected " +
              path("r.jsonl")).status == 0);
  const auto all = evolmath::read_benchmark(path("s2.evolmath.jsonl")).items.size();
  const auto q = evolmath::read_benchmark(path("q.jsonl")).items.size();
  const auto rj = evolmath::read_benchmark(path("r.jsonl")).items.size();
  CHECK(q + rj == all);
  fs::remove_all(work_dir());
}

}  // TEST_SUITE
