// evolmath: command-line front end for generation, scoring and evaluation.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 validation or
// input error, 3 gateway error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "evolmath/error.hpp"
#include "evolmath/eval.hpp"
#include "evolmath/evolve.hpp"
#include "evolmath/fitness.hpp"
#include "evolmath/gateway.hpp"
#include "evolmath/render.hpp"
#include "evolmath/seedgen.hpp"
#include "evolmath/serialize.hpp"

namespace fs = std::filesystem;
using namespace evolmath;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitValidation = 2;
constexpr int kExitGateway = 3;

IntRange parse_range(const std::string& text, const char* flag) {
  const auto colon = text.find(':', text.front() == '-' ? 1 : 0);
  try {
    if (colon == std::string::npos) throw std::invalid_argument(text);
    std::size_t used = 0;
    const auto lo = std::stoll(text.substr(0, colon), &used);
    if (used != colon) throw std::invalid_argument(text);
    const std::string hi_text = text.substr(colon + 1);
    const auto hi = std::stoll(hi_text, &used);
    if (used != hi_text.size()) throw std::invalid_argument(text);
    return {lo, hi};
  } catch (const std::exception&) {
    throw ConfigError(std::string(flag) + " expects LO:HI, got \"" + text + "\"");
  }
}

std::optional<double> parse_percentile(const std::string& text) {
  if (text == "off") return std::nullopt;
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("--percentile expects a number or \"off\", got \"" + text + "\"");
  }
}

std::uint64_t auto_seed() {
  std::random_device rd;
  const std::uint64_t seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  spdlog::info("no --seed given; using {} (recorded in the output header)", seed);
  return seed;
}

// Options shared by every command that talks to the LLM gateway.
struct GatewayOptions {
  std::string cache_dir;
  std::size_t retries = 3;

  void add(CLI::App* app) {
    app->add_option("--cache-dir", cache_dir, "Directory for the response cache");
    app->add_option("--retries", retries, "Retry limit for transient gateway failures");
  }

  std::unique_ptr<Gateway> make(std::size_t jobs) const {
    GatewayConfig cfg = GatewayConfig::from_environment();
    cfg.max_in_flight = std::max<std::size_t>(1, jobs);
    cfg.retry_limit = retries;
    if (!cache_dir.empty()) cfg.cache_dir = cache_dir;
    auto backend = std::make_shared<HttpBackend>(cfg);
    return std::make_unique<Gateway>(std::move(cfg), std::move(backend));
  }
};

struct BankOptions {
  std::string misleading;
  std::string irrelevant;
  std::string themes;

  void add(CLI::App* app) {
    app->add_option("--misleading-bank", misleading, "Misleading-sentence bank, one entry per line")
        ->check(CLI::ExistingFile);
    app->add_option("--irrelevant-bank", irrelevant, "Irrelevant-fragment bank, one entry per line")
        ->check(CLI::ExistingFile);
    app->add_option("--themes", themes, "Theme bank: id | intro | entity; entity; ...")->check(CLI::ExistingFile);
  }

  Banks load() const {
    Banks banks = Banks::builtin();
    if (!misleading.empty()) banks.misleading_text = load_bank_file(misleading);
    if (!irrelevant.empty()) banks.irrelevant_fragments = load_bank_file(irrelevant);
    if (!themes.empty()) banks.themes = load_themes_file(themes);
    banks.check();
    return banks;
  }

  Json to_json() const {
    Json j = Json::object();
    if (!misleading.empty()) j["misleading_bank"] = misleading;
    if (!irrelevant.empty()) j["irrelevant_bank"] = irrelevant;
    if (!themes.empty()) j["themes"] = themes;
    return j;
  }
};

struct Globals {
  std::size_t jobs = 1;
  std::string log_level = "info";
};

// ---------------------------------------------------------------------------
// seed

struct SeedCommand {
  std::string output;
  std::size_t count = 300;
  int vars = 5;
  int eqs = 5;
  std::string range = "1:20";
  std::string coef_range = "-9:9";
  int sparsity = 2;
  std::optional<std::uint64_t> seed;

  void add(CLI::App& root, std::function<void()>& action) {
    auto* app = root.add_subcommand("seed", "Generate seed cores as unrendered atomic items");
    app->add_option("-o,--output", output, "Output benchmark file")->required();
    app->add_option("--count", count, "Number of seeds")->check(CLI::PositiveNumber);
    app->add_option("--vars", vars, "Variables per seed");
    app->add_option("--eqs", eqs, "Equations per seed");
    app->add_option("--range", range, "Solution range LO:HI");
    app->add_option("--coef-range", coef_range, "Coefficient range LO:HI");
    app->add_option("--sparsity", sparsity, "Variables per equation");
    app->add_option("--seed", seed, "Random seed");
    app->callback([&action, this] { action = [this] { run(); }; });
  }

  void run() {
    SeedConfig cfg;
    cfg.num_variables = vars;
    cfg.num_equations = eqs;
    cfg.solution_range = parse_range(range, "--range");
    cfg.coefficient_range = parse_range(coef_range, "--coef-range");
    cfg.sparsity = sparsity;
    cfg.rng_seed = seed ? *seed : auto_seed();
    cfg.validate();

    std::vector<BenchmarkItem> items;
    const std::size_t width = std::max<std::size_t>(5, std::to_string(count).size());
    for (std::size_t i = 0; i < count; ++i) {
      std::string digits = std::to_string(i + 1);
      Problem p;
      p.id = "s" + std::string(width - digits.size(), '0') + digits;
      Rng rng(derive_seed(cfg.rng_seed, "seed:" + p.id));
      p.core = generate_seed(cfg, rng);
      p.answer = p.core.solution.at(p.core.target);
      items.push_back(BenchmarkItem{std::move(p), {}, {}, {}});
    }
    const Json config{{"command", "seed"},
                      {"count", count},
                      {"num_variables", vars},
                      {"num_equations", eqs},
                      {"solution_range", {cfg.solution_range.lo, cfg.solution_range.hi}},
                      {"coefficient_range", {cfg.coefficient_range.lo, cfg.coefficient_range.hi}},
                      {"sparsity", sparsity},
                      {"rng_seed", cfg.rng_seed}};
    write_benchmark(output, make_header("benchmark", config), std::move(items));
    spdlog::info("wrote {} seeds to {}", count, output);
  }
};

// ---------------------------------------------------------------------------
// evolve / import

// Evolution flags; only flags given on the command line override a config
// loaded with --from-header.
struct EvolveFlags {
  CLI::App* app = nullptr;
  std::size_t population = 300;
  int vars = 5;
  int eqs = 5;
  std::string range = "1:20";
  int sparsity = 2;
  double threshold = kDefaultThreshold;
  std::string percentile = "1";
  int generations = 2;
  std::optional<std::uint64_t> seed;
  std::string mode;
  std::string weights{kReferencePreset};
  std::optional<int> offline_referee;
  bool polish = false;
  std::string from_header;

  void add(CLI::App* a, bool seeds) {
    app = a;
    if (seeds) {
      app->add_option("--population", population, "Items emitted by the first generation");
      app->add_option("--vars", vars, "Variables per seed");
      app->add_option("--eqs", eqs, "Equations per seed");
      app->add_option("--range", range, "Solution range LO:HI");
      app->add_option("--sparsity", sparsity, "Variables per equation");
    }
    app->add_option("--threshold", threshold, "Composite score threshold (inf forces re-evolution)");
    app->add_option("--percentile", percentile, "Deficiency-filter percentile, or \"off\"");
    app->add_option("--generations", generations, "Maximum number of generations");
    app->add_option("--seed", seed, "Random seed");
    app->add_option("--mode", mode, "Ablation mode")
        ->check(CLI::IsMember({"full", "no_fm", "no_lm", "no_co", "two_gen"}));
    app->add_option("--weights", weights, "Weight preset (paper-table1) or sidecar file");
    app->add_option("--offline-referee", offline_referee, "Constant referee score 0-10; no network")
        ->check(CLI::Range(0, 10));
    app->add_flag("--polish", polish, "Polish drafts through the gateway");
    app->add_option("--from-header", from_header, "Start from the config recorded in a file's header")
        ->check(CLI::ExistingFile);
  }

  bool given(const char* name) const { return app->count(name) > 0; }

  EvolutionConfig config() const {
    EvolutionConfig cfg;
    if (!from_header.empty()) {
      const auto file = read_benchmark(from_header);
      if (!is_header(file.header)) throw InvalidInput(from_header + " has no header line");
      cfg = EvolutionConfig::from_json(file.header.at("evolmath_header").at("config"));
    }
    const bool fresh = from_header.empty();
    if (fresh || given("--population")) cfg.population_size = population;
    if (fresh || given("--vars")) cfg.seed_config.num_variables = vars;
    if (fresh || given("--eqs")) cfg.seed_config.num_equations = eqs;
    if (fresh || given("--range")) cfg.seed_config.solution_range = parse_range(range, "--range");
    if (fresh || given("--sparsity")) cfg.seed_config.sparsity = sparsity;
    if (fresh || given("--threshold")) cfg.threshold = threshold;
    if (fresh || given("--percentile")) cfg.percentile = parse_percentile(percentile);
    if (fresh || given("--generations")) cfg.max_generations = generations;
    if (fresh || given("--weights")) cfg.weights = weights;
    if (fresh || given("--offline-referee")) cfg.offline_referee = offline_referee;
    if (fresh || given("--polish")) cfg.polish = polish;
    if (seed) cfg.rng_seed = *seed;
    else if (fresh) cfg.rng_seed = auto_seed();
    if (!mode.empty()) {
      cfg = apply_mode(cfg, parse_ablation_mode(mode));
      // An explicit --generations still wins over the mode's cycle count,
      // except for two_gen which fixes it.
      if (given("--generations") && mode != "two_gen") cfg.max_generations = generations;
    } else if (cfg.mode && !fresh) {
      cfg = apply_mode(cfg, *cfg.mode);
      if (given("--generations") && *cfg.mode != AblationMode::TwoGen) cfg.max_generations = generations;
    }
    return cfg;
  }
};

void report_run(const RunResult& result, const std::string& output) {
  std::size_t compounds = 0;
  std::size_t selected = 0;
  for (const auto& item : result.items) {
    compounds += item.is_compound() ? 1 : 0;
    selected += item.fitness && item.fitness->selected ? 1 : 0;
  }
  spdlog::info("wrote {} items ({} compound, {} selected) to {}", result.items.size(), compounds, selected, output);
  spdlog::info("operator skips: {}, crossover skips: {}, polish fallbacks: {}", result.stats.operator_skips,
               result.stats.crossover_skips, result.stats.polish_fallbacks);
}

struct EvolveCommand {
  std::string output;
  EvolveFlags flags;
  GatewayOptions gateway;
  BankOptions banks;
  Globals* globals = nullptr;

  void add(CLI::App& root, Globals& g, std::function<void()>& action) {
    globals = &g;
    auto* app = root.add_subcommand("evolve", "Run the evolutionary pipeline from fresh seeds");
    app->add_option("-o,--output", output, "Output benchmark file")->required();
    flags.add(app, true);
    gateway.add(app);
    banks.add(app);
    app->callback([&action, this] { action = [this] { run(); }; });
  }

  void run() {
    EvolutionConfig cfg = flags.config();
    cfg.jobs = globals->jobs;
    cfg.validate();
    const Banks b = banks.load();
    std::unique_ptr<Gateway> gw;
    if (!cfg.offline_referee || cfg.polish) gw = gateway.make(cfg.jobs);
    RunResult result = evolmath::run(cfg, gw.get(), b);
    Json header = result.header;
    if (!banks.to_json().empty()) header["evolmath_header"]["config"]["banks"] = banks.to_json();
    report_run(result, output);
    write_benchmark(output, header, std::move(result.items));
  }
};

struct ImportCommand {
  std::string input;
  std::string output;
  bool evolve = false;
  EvolveFlags flags;
  GatewayOptions gateway;
  BankOptions banks;
  Globals* globals = nullptr;

  void add(CLI::App& root, Globals& g, std::function<void()>& action) {
    globals = &g;
    auto* app = root.add_subcommand("import", "Validate pre-annotated cores and optionally evolve them");
    app->add_option("input", input, "Import file (one core per line)")->required()->check(CLI::ExistingFile);
    app->add_option("-o,--output", output, "Output benchmark file")->required();
    app->add_flag("--evolve", evolve, "Run the evolutionary pipeline on the imported cores");
    flags.add(app, false);
    gateway.add(app);
    banks.add(app);
    app->callback([&action, this] { action = [this] { run(); }; });
  }

  int run_and_status() {
    const auto cores = parse_imports(read_text_file(input));
    if (cores.empty()) spdlog::warn("{} contains no cores", input);
    if (!evolve) {
      std::vector<BenchmarkItem> items;
      std::size_t rejected = 0;
      for (const auto& core : cores) {
        try {
          items.push_back(BenchmarkItem{problem_from_import(core), {}, {}, {}});
        } catch (const ValidationError& e) {
          std::cerr << e.what() << "\n";
          ++rejected;
        }
      }
      const Json config{{"command", "import"}, {"input", input}, {"rejected", rejected}};
      const std::size_t n = items.size();
      write_benchmark(output, make_header("benchmark", config), std::move(items));
      spdlog::info("wrote {} imported cores to {}", n, output);
      return rejected == 0 ? 0 : kExitValidation;
    }
    EvolutionConfig cfg = flags.config();
    cfg.jobs = globals->jobs;
    cfg.validate();
    const Banks b = banks.load();
    std::unique_ptr<Gateway> gw;
    if (!cfg.offline_referee || cfg.polish) gw = gateway.make(cfg.jobs);
    RunResult result = evolve_imported(cores, cfg, gw.get(), b);
    for (const auto& r : result.import_rejections) std::cerr << r << "\n";
    Json header = result.header;
    header["evolmath_header"]["config"]["input"] = input;
    const bool clean = result.import_rejections.empty();
    report_run(result, output);
    write_benchmark(output, header, std::move(result.items));
    return clean ? 0 : kExitValidation;
  }

  int status = 0;
  void run() { status = run_and_status(); }
};

// ---------------------------------------------------------------------------
// score / select / calibrate / render

struct ScoreCommand {
  std::string input;
  std::string output;
  std::string weights{kReferencePreset};
  double threshold = kDefaultThreshold;
  std::string percentile = "1";
  std::optional<int> offline_referee;
  GatewayOptions gateway;
  Globals* globals = nullptr;

  void add(CLI::App& root, Globals& g, std::function<void()>& action) {
    globals = &g;
    auto* app = root.add_subcommand("score", "Extract features and fitness for a rendered benchmark");
    app->add_option("input", input, "Benchmark file")->required()->check(CLI::ExistingFile);
    app->add_option("-o,--output", output, "Output benchmark file")->required();
    app->add_option("--weights", weights, "Weight preset (paper-table1) or sidecar file");
    app->add_option("--threshold", threshold, "Composite score threshold");
    app->add_option("--percentile", percentile, "Deficiency-filter percentile, or \"off\"");
    app->add_option("--offline-referee", offline_referee, "Constant referee score 0-10; no network")
        ->check(CLI::Range(0, 10));
    gateway.add(app);
    app->callback([&action, this] { action = [this] { run(); }; });
  }

  void run() {
    auto file = read_benchmark(input);
    const WeightVector w = load_weights(weights);
    std::unique_ptr<Gateway> gw;
    std::unique_ptr<Referee> referee;
    if (offline_referee) {
      referee = std::make_unique<ConstantReferee>(*offline_referee);
    } else {
      gw = gateway.make(globals->jobs);
      referee = std::make_unique<GatewayReferee>(*gw);
    }
    const SelectionOptions opts{threshold, parse_percentile(percentile)};
    const Selection sel = score_population(file.items, w, *referee, opts, globals->jobs);
    const Json config{{"command", "score"},
                      {"input", input},
                      {"weights", weights},
                      {"threshold", number_to_json(threshold)},
                      {"percentile", percentile},
                      {"offline_referee", offline_referee ? Json(*offline_referee) : Json(nullptr)}};
    write_benchmark(output, make_header("benchmark", config), std::move(file.items));
    spdlog::info("scored {} items: {} qualified, {} rejected", sel.qualified.size() + sel.rejected.size(),
                 sel.qualified.size(), sel.rejected.size());
  }
};

struct SelectCommand {
  std::string input;
  std::string qualified;
  std::string rejected;
  std::string weights{kReferencePreset};
  double threshold = kDefaultThreshold;
  std::string percentile = "1";

  void add(CLI::App& root, std::function<void()>& action) {
    auto* app = root.add_subcommand("select", "Apply the dual filter to a scored benchmark");
    app->add_option("input", input, "Scored benchmark file")->required()->check(CLI::ExistingFile);
    app->add_option("--qualified", qualified, "Output file for qualified items")->required();
    app->add_option("--rejected", rejected, "Output file for rejected items")->required();
    app->add_option("--weights", weights, "Weight preset (paper-table1) or sidecar file");
    app->add_option("--threshold", threshold, "Composite score threshold");
    app->add_option("--percentile", percentile, "Deficiency-filter percentile, or \"off\"");
    app->callback([&action, this] { action = [this] { run(); }; });
  }

  void run() {
    auto file = read_benchmark(input);
    const SelectionOptions opts{threshold, parse_percentile(percentile)};
    rescore(file.items, load_weights(weights), opts);
    auto part = partition_by_difficulty(std::move(file.items));
    Json config{{"command", "select"},
                {"input", input},
                {"weights", weights},
                {"threshold", number_to_json(threshold)},
                {"percentile", percentile}};
    const std::size_t nq = part.hard.size();
    const std::size_t nr = part.easy.size();
    config["subset"] = "qualified";
    write_benchmark(qualified, make_header("benchmark", config), std::move(part.hard));
    config["subset"] = "rejected";
    write_benchmark(rejected, make_header("benchmark", config), std::move(part.easy));
    spdlog::info("{} qualified, {} rejected", nq, nr);
  }
};

struct CalibrateCommand {
  std::string benchmark;
  std::vector<std::string> records;
  std::string features_csv;
  std::string output;
  std::string normalization = "all";

  void add(CLI::App& root, std::function<void()>& action) {
    auto* app = root.add_subcommand("calibrate", "Compute feature weights from accuracy data");
    app->add_option("--benchmark", benchmark, "Scored benchmark file")->check(CLI::ExistingFile);
    app->add_option("--records", records, "Evaluation record files")->check(CLI::ExistingFile);
    app->add_option("--features", features_csv, "CSV with an accuracy column and one column per feature")
        ->check(CLI::ExistingFile);
    app->add_option("-o,--output", output, "Output weight sidecar file")->required();
    app->add_option("--normalization", normalization, "Denominator: all candidates or retained only")
        ->check(CLI::IsMember({"all", "retained"}));
    app->callback([&action, this] { action = [this] { run(); }; });
  }

  static std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
      out.push_back(cell);
    }
    return out;
  }

  void run() {
    const Normalization norm = normalization == "all" ? Normalization::AllCandidates : Normalization::RetainedOnly;
    WeightVector w;
    Json config{{"command", "calibrate"}, {"normalization", normalization}};
    if (!features_csv.empty()) {
      if (!benchmark.empty() || !records.empty()) throw ConfigError("--features excludes --benchmark/--records");
      std::ifstream in(features_csv);
      std::string line;
      if (!std::getline(in, line)) throw InvalidInput(features_csv + " is empty");
      const auto names = split_csv_line(line);
      const auto acc_col = std::find(names.begin(), names.end(), "accuracy");
      if (acc_col == names.end()) throw InvalidInput(features_csv + " has no accuracy column");
      const auto acc_index = static_cast<std::size_t>(acc_col - names.begin());
      std::vector<double> accuracy;
      std::vector<FeatureColumn> columns;
      for (std::size_t c = 0; c < names.size(); ++c) {
        if (c != acc_index) columns.push_back({names[c], {}});
      }
      std::size_t line_no = 1;
      while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \r") == std::string::npos) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != names.size()) {
          throw InvalidInput(features_csv + ":" + std::to_string(line_no) + ": expected " +
                             std::to_string(names.size()) + " cells");
        }
        std::size_t k = 0;
        for (std::size_t c = 0; c < cells.size(); ++c) {
          const double v = std::stod(cells[c]);
          if (c == acc_index) accuracy.push_back(v);
          else columns[k++].values.push_back(v);
        }
      }
      w = calibrate_weights(columns, accuracy, norm);
      config["features"] = features_csv;
    } else {
      if (benchmark.empty() || records.empty()) {
        throw ConfigError("calibrate needs --features, or --benchmark with --records");
      }
      const auto file = read_benchmark(benchmark);
      std::vector<EvalRecord> all;
      for (const auto& r : records) {
        auto part = read_records(r);
        all.insert(all.end(), part.begin(), part.end());
      }
      const auto acc = per_problem_accuracy(all);
      std::vector<FeatureVector> features;
      std::vector<double> accuracy;
      for (const auto& item : file.items) {
        auto it = acc.find(item.id());
        if (it == acc.end()) continue;
        if (!item.features) throw InvalidInput("item " + item.id() + " has no features; run score first");
        features.push_back(*item.features);
        accuracy.push_back(it->second);
      }
      w = calibrate_weights(std::span<const FeatureVector>(features), accuracy, norm);
      config["benchmark"] = benchmark;
      config["records"] = records;
    }
    save_weights(output, w, config);
    for (const auto& e : w.entries) {
      std::cout << e.feature << "\t" << (e.retained ? fmt::format("{:+.4f}", e.weight) : std::string("excluded"))
                << "\n";
    }
  }
};

struct RenderCommand {
  std::string input;
  std::string output;
  bool polish = false;
  GatewayOptions gateway;
  BankOptions banks;
  Globals* globals = nullptr;

  void add(CLI::App& root, Globals& g, std::function<void()>& action) {
    globals = &g;
    auto* app = root.add_subcommand("render", "Re-render drafts for a benchmark");
    app->add_option("input", input, "Benchmark file")->required()->check(CLI::ExistingFile);
    app->add_option("-o,--output", output, "Output benchmark file")->required();
    app->add_flag("--polish", polish, "Polish drafts through the gateway");
    gateway.add(app);
    banks.add(app);
    app->callback([&action, this] { action = [this] { run(); }; });
  }

  void run() {
    auto file = read_benchmark(input);
    const Banks b = banks.load();
    std::unique_ptr<Gateway> gw;
    if (polish) gw = gateway.make(globals->jobs);
    std::size_t fallbacks = 0;
    for (auto& item : file.items) {
      const std::string draft = render_draft(item, b);
      item.draft_text() = draft;
      item.final_text().reset();
      std::erase(item.flags, std::string("polish-fallback"));
      if (!gw) continue;
      const auto entities = entity_phrases(item);
      auto outcome = evolmath::polish(draft, *gw, entities);
      if (outcome.accepted) {
        item.final_text() = std::move(outcome.text);
      } else {
        item.add_flag("polish-fallback");
        ++fallbacks;
      }
    }
    Json config{{"command", "render"}, {"input", input}, {"polish", polish}};
    if (!banks.to_json().empty()) config["banks"] = banks.to_json();
    const std::size_t n = file.items.size();
    write_benchmark(output, make_header("benchmark", config), std::move(file.items));
    spdlog::info("rendered {} items ({} polish fallbacks)", n, fallbacks);
  }
};

// ---------------------------------------------------------------------------
// eval / report / attribute

struct EvalCommand {
  std::string input;
  std::string output;
  std::string model;
  std::string stub;
  GatewayOptions gateway;
  Globals* globals = nullptr;

  void add(CLI::App& root, Globals& g, std::function<void()>& action) {
    globals = &g;
    auto* app = root.add_subcommand("eval", "Run a solver over a benchmark and grade it");
    app->add_option("input", input, "Rendered benchmark file")->required()->check(CLI::ExistingFile);
    app->add_option("-o,--output", output, "Record file (default: <input stem>.evalrecords.jsonl)");
    app->add_option("--model", model, "Model id recorded with each answer");
    app->add_option("--stub", stub, "Built-in solver instead of the gateway")
        ->check(CLI::IsMember({"oracle", "shortcut", "trap_plus_one"}));
    gateway.add(app);
    app->callback([&action, this] { action = [this] { run(); }; });
  }

  void run() {
    const auto file = read_benchmark(input);
    std::unique_ptr<Gateway> gw;
    Solver solver;
    if (stub == "oracle") solver = oracle_solver();
    else if (stub == "shortcut") solver = shortcut_solver();
    else if (stub == "trap_plus_one") solver = trap_plus_one_solver();
    else {
      gw = gateway.make(globals->jobs);
      solver = gateway_solver(*gw);
    }
    const std::string model_id = !model.empty() ? model : !stub.empty() ? "stub-" + stub : gw->config().model_id;
    const auto records = evaluate(file.items, model_id, solver, globals->jobs);
    std::string out = output;
    if (out.empty()) {
      fs::path p(input);
      std::string stem = p.filename().string();
      if (auto dot = stem.find('.'); dot != std::string::npos) stem.resize(dot);
      out = (p.parent_path() / (stem + std::string(kEvalRecordsExtension))).string();
    }
    write_records(out, records, Json{{"command", "eval"}, {"input", input}, {"model_id", model_id}});
    std::size_t correct = 0;
    for (const auto& r : records) correct += r.final_correct ? 1 : 0;
    spdlog::info("{}: {} of {} final answers correct; records in {}", model_id, correct, records.size(), out);
  }
};

std::vector<EvalRecord> read_all_records(const std::vector<std::string>& paths) {
  std::vector<EvalRecord> all;
  for (const auto& p : paths) {
    auto part = read_records(p);
    all.insert(all.end(), part.begin(), part.end());
  }
  return all;
}

struct ReportCommand {
  std::vector<std::string> records;
  std::vector<std::string> baseline;
  bool csv = false;
  std::string json_out;

  void add(CLI::App& root, std::function<void()>& action) {
    auto* app = root.add_subcommand("report", "Accuracy and relative-drop tables");
    app->add_option("records", records, "Evaluation record files")->required()->check(CLI::ExistingFile);
    app->add_option("--baseline", baseline, "Record files for the original benchmark")->check(CLI::ExistingFile);
    app->add_flag("--csv", csv, "Comma-separated output");
    app->add_option("--json", json_out, "Also write the report as JSON");
    app->callback([&action, this] { action = [this] { run(); }; });
  }

  void run() {
    const auto evolved = read_all_records(records);
    const auto base = read_all_records(baseline);
    const auto report = baseline.empty()
                            ? accuracy_report(evolved)
                            : accuracy_report(evolved, std::span<const EvalRecord>(base));
    std::cout << (csv ? format_csv(report) : format_table(report));
    if (!json_out.empty()) write_text_file(json_out, to_json(report).dump(2) + "\n");
  }
};

struct AttributeCommand {
  std::vector<std::string> records;
  std::string benchmark;
  bool csv = false;
  std::string json_out;

  void add(CLI::App& root, std::function<void()>& action) {
    auto* app = root.add_subcommand("attribute", "Pseudo-Aha share of errors on trap items");
    app->add_option("records", records, "Evaluation record files")->required()->check(CLI::ExistingFile);
    app->add_option("--benchmark", benchmark, "Benchmark the records were graded on")
        ->required()
        ->check(CLI::ExistingFile);
    app->add_flag("--csv", csv, "Comma-separated output");
    app->add_option("--json", json_out, "Also write the rates as JSON");
    app->callback([&action, this] { action = [this] { run(); }; });
  }

  void run() {
    const auto file = read_benchmark(benchmark);
    const auto rows = attribute(read_all_records(records), file.items);
    std::cout << (csv ? format_csv(rows) : format_table(rows));
    if (!json_out.empty()) write_text_file(json_out, to_json(rows).dump(2) + "\n");
  }
};

void configure_logging(const std::string& level) {
  auto logger = spdlog::stderr_color_mt("evolmath");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::from_str(level));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evolutionary generator and evaluator for math word-problem benchmarks"};
  app.require_subcommand(1);
  app.fallthrough();  // global options may follow the subcommand
  Globals globals;
  app.add_option("-j,--jobs", globals.jobs, "Concurrent per-item tasks and gateway requests")
      ->check(CLI::PositiveNumber);
  app.add_option("--log-level", globals.log_level, "trace, debug, info, warn, error or off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

  std::function<void()> action;
  SeedCommand seed;
  EvolveCommand evolve;
  ImportCommand import;
  ScoreCommand score;
  CalibrateCommand calibrate;
  SelectCommand select;
  RenderCommand render;
  EvalCommand eval;
  ReportCommand report;
  AttributeCommand attribute;
  seed.add(app, action);
  evolve.add(app, globals, action);
  import.add(app, globals, action);
  score.add(app, globals, action);
  calibrate.add(app, action);
  select.add(app, action);
  render.add(app, globals, action);
  eval.add(app, globals, action);
  report.add(app, action);
  attribute.add(app, action);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  configure_logging(globals.log_level);
  try {
    action();
    return import.status;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const GatewayError& e) {
    std::cerr << "gateway error: " << e.what() << "\n";
    return kExitGateway;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
}
