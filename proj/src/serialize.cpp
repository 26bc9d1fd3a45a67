#include "evolmath/serialize.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <system_error>

#include "evolmath/error.hpp"

namespace evolmath {

namespace {

template <class T>
Json optional_to_json(const std::optional<T>& value) {
  return value ? Json(*value) : Json(nullptr);
}

template <class T>
std::optional<T> optional_from_json(const Json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<T>();
}

Json strings_to_json(const std::vector<std::string>& values) {
  Json arr = Json::array();
  for (const auto& s : values) arr.push_back(s);
  return arr;
}

Json lineage_to_json(const std::vector<LineageEntry>& lineage) {
  Json arr = Json::array();
  for (const auto& e : lineage) {
    Json j;
    j["op"] = e.op;
    j["parent"] = e.parent;
    j["generation"] = e.generation;
    arr.push_back(std::move(j));
  }
  return arr;
}

std::vector<LineageEntry> lineage_from_json(const Json& j) {
  std::vector<LineageEntry> out;
  for (const auto& e : j) {
    out.push_back({e.at("op").get<std::string>(), e.at("parent").get<std::string>(),
                   e.at("generation").get<int>()});
  }
  return out;
}

Json standardized_to_json(const std::array<double, kFeatureCount>& z) {
  Json j;
  for (Feature f : kAllFeatures) {
    j[std::string(feature_name(f))] = number_to_json(z[static_cast<std::size_t>(f)]);
  }
  return j;
}

std::array<double, kFeatureCount> standardized_from_json(const Json& j) {
  std::array<double, kFeatureCount> z{};
  for (Feature f : kAllFeatures) {
    z[static_cast<std::size_t>(f)] = number_from_json(j.at(std::string(feature_name(f))));
  }
  return z;
}

}  // namespace

Json number_to_json(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  return value;
}

double number_from_json(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  throw ParseError("expected a number, got " + j.dump());
}

Json to_json(const LinearCondition& cond) {
  Json j;
  Json terms = Json::object();
  for (const auto& [var, coef] : cond.terms) terms[var.str()] = coef;
  j["terms"] = std::move(terms);
  j["relation"] = std::string(to_string(cond.relation));
  j["rhs"] = cond.rhs;
  j["tag"] = std::string(to_string(cond.tag));
  return j;
}

LinearCondition condition_from_json(const Json& j) {
  LinearCondition cond;
  for (const auto& [key, value] : j.at("terms").items()) {
    cond.terms[VarId::parse(key)] = value.get<std::int64_t>();
  }
  cond.relation = j.contains("relation") ? parse_relation(j.at("relation").get<std::string>())
                                         : Relation::Equal;
  cond.rhs = j.at("rhs").get<std::int64_t>();
  cond.tag = j.contains("tag") ? parse_tag(j.at("tag").get<std::string>()) : ConditionTag::Core;
  return cond;
}

Json to_json(const Assignment& values) {
  Json j = Json::object();
  for (const auto& [var, value] : values) j[var.str()] = value;
  return j;
}

Assignment assignment_from_json(const Json& j) {
  Assignment out;
  for (const auto& [key, value] : j.items()) out[VarId::parse(key)] = value.get<std::int64_t>();
  return out;
}

Json to_json(const Problem& p) {
  Json j;
  j["kind"] = "atomic";
  j["id"] = p.id;
  j["generation"] = p.generation;
  j["lineage"] = lineage_to_json(p.lineage);

  Json core;
  Json vars = Json::array();
  for (const auto& v : p.core.variables) vars.push_back(v.str());
  core["variables"] = std::move(vars);
  Json conds = Json::array();
  for (const auto& c : p.core.conditions) conds.push_back(to_json(c));
  core["conditions"] = std::move(conds);
  core["solution"] = to_json(p.core.solution);
  core["target"] = p.core.target.str();
  j["core"] = std::move(core);

  Json noise = Json::array();
  for (const auto& c : p.noise_conditions) noise.push_back(to_json(c));
  j["noise_conditions"] = std::move(noise);
  j["noise_solution"] = to_json(p.noise_solution);

  Json nar;
  nar["theme"] = optional_to_json(p.narrative.theme);
  Json entities = Json::object();
  for (const auto& [var, name] : p.narrative.entity_names) entities[var.str()] = name;
  nar["entities"] = std::move(entities);
  nar["misleading"] = strings_to_json(p.narrative.misleading_sentences);
  nar["irrelevant"] = strings_to_json(p.narrative.irrelevant_fragments);
  j["narrative"] = std::move(nar);

  j["draft_text"] = optional_to_json(p.draft_text);
  j["final_text"] = optional_to_json(p.final_text);
  j["answer"] = p.answer;
  j["trap_answer"] = optional_to_json(p.trap_answer);
  return j;
}

Problem problem_from_json(const Json& j) {
  Problem p;
  p.id = j.at("id").get<std::string>();
  p.generation = j.at("generation").get<int>();
  p.lineage = lineage_from_json(j.at("lineage"));
  const auto& core = j.at("core");
  for (const auto& v : core.at("variables")) p.core.variables.push_back(VarId::parse(v.get<std::string>()));
  for (const auto& c : core.at("conditions")) p.core.conditions.push_back(condition_from_json(c));
  p.core.solution = assignment_from_json(core.at("solution"));
  p.core.target = VarId::parse(core.at("target").get<std::string>());
  for (const auto& c : j.at("noise_conditions")) p.noise_conditions.push_back(condition_from_json(c));
  p.noise_solution = assignment_from_json(j.at("noise_solution"));
  const auto& nar = j.at("narrative");
  p.narrative.theme = optional_from_json<std::string>(nar.at("theme"));
  for (const auto& [key, value] : nar.at("entities").items()) {
    p.narrative.entity_names[VarId::parse(key)] = value.get<std::string>();
  }
  p.narrative.misleading_sentences = nar.at("misleading").get<std::vector<std::string>>();
  p.narrative.irrelevant_fragments = nar.at("irrelevant").get<std::vector<std::string>>();
  p.draft_text = optional_from_json<std::string>(j.at("draft_text"));
  p.final_text = optional_from_json<std::string>(j.at("final_text"));
  p.answer = j.at("answer").get<std::int64_t>();
  p.trap_answer = optional_from_json<std::int64_t>(j.at("trap_answer"));
  return p;
}

Json to_json(const FeatureVector& f) {
  Json j;
  j["referee_score"] = f.referee_score;
  j["word_count"] = f.word_count;
  j["readability"] = number_to_json(f.readability);
  j["syntactic_complexity"] = number_to_json(f.syntactic_complexity);
  j["lexical_entropy"] = number_to_json(f.lexical_entropy);
  j["num_variables"] = f.num_variables;
  j["num_equations"] = f.num_equations;
  j["noise_ratio"] = number_to_json(f.noise_ratio);
  return j;
}

FeatureVector features_from_json(const Json& j) {
  FeatureVector f;
  f.referee_score = j.at("referee_score").get<int>();
  f.word_count = j.at("word_count").get<int>();
  f.readability = number_from_json(j.at("readability"));
  f.syntactic_complexity = number_from_json(j.at("syntactic_complexity"));
  f.lexical_entropy = number_from_json(j.at("lexical_entropy"));
  f.num_variables = j.at("num_variables").get<int>();
  f.num_equations = j.at("num_equations").get<int>();
  f.noise_ratio = number_from_json(j.at("noise_ratio"));
  return f;
}

Json to_json(const BenchmarkItem& item) {
  Json j;
  if (!item.is_compound()) {
    j = to_json(item.atomic());
  } else {
    const auto& c = item.compound();
    j["kind"] = "compound";
    j["id"] = c.id;
    j["generation"] = c.generation;
    j["lineage"] = lineage_to_json(c.lineage);
    j["part1"] = to_json(c.part1);
    j["part2"] = to_json(c.part2);
    j["bridge_ratio"] = c.bridge_ratio.str();
    j["bridged_condition_index"] = c.bridged_condition_index;
    j["q1_answer"] = c.q1_answer;
    j["final_answer"] = c.final_answer;
    j["draft_text"] = optional_to_json(c.draft_text);
    j["final_text"] = optional_to_json(c.final_text);
  }
  j["features"] = item.features ? to_json(*item.features) : Json(nullptr);
  if (item.fitness) {
    Json f;
    f["standardized"] = standardized_to_json(item.fitness->standardized);
    f["composite"] = number_to_json(item.fitness->composite);
    f["composite_pass"] = item.fitness->composite_pass;
    f["deficiency_pass"] = item.fitness->deficiency_pass;
    f["selected"] = item.fitness->selected;
    j["fitness"] = std::move(f);
  } else {
    j["fitness"] = nullptr;
  }
  j["flags"] = strings_to_json(item.flags);
  return j;
}

BenchmarkItem item_from_json(const Json& j) {
  BenchmarkItem item;
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "atomic") {
    item.body = problem_from_json(j);
  } else if (kind == "compound") {
    CompoundProblem c;
    c.id = j.at("id").get<std::string>();
    c.generation = j.at("generation").get<int>();
    c.lineage = lineage_from_json(j.at("lineage"));
    c.part1 = problem_from_json(j.at("part1"));
    c.part2 = problem_from_json(j.at("part2"));
    c.bridge_ratio = algebra::Rational::parse(j.at("bridge_ratio").get<std::string>());
    c.bridged_condition_index = j.at("bridged_condition_index").get<std::size_t>();
    c.q1_answer = j.at("q1_answer").get<std::int64_t>();
    c.final_answer = j.at("final_answer").get<std::int64_t>();
    c.draft_text = optional_from_json<std::string>(j.at("draft_text"));
    c.final_text = optional_from_json<std::string>(j.at("final_text"));
    item.body = std::move(c);
  } else {
    throw ParseError("unknown item kind \"" + kind + "\"");
  }
  if (j.contains("features") && !j.at("features").is_null()) {
    item.features = features_from_json(j.at("features"));
  }
  if (j.contains("fitness") && !j.at("fitness").is_null()) {
    const auto& f = j.at("fitness");
    FitnessReport report;
    if (item.features) report.raw = *item.features;
    report.standardized = standardized_from_json(f.at("standardized"));
    report.composite = number_from_json(f.at("composite"));
    report.composite_pass = f.at("composite_pass").get<bool>();
    report.deficiency_pass = f.at("deficiency_pass").get<bool>();
    report.selected = f.at("selected").get<bool>();
    item.fitness = report;
  }
  if (j.contains("flags")) item.flags = j.at("flags").get<std::vector<std::string>>();
  return item;
}

std::string canonical_serialize(const BenchmarkItem& item) {
  const auto violations = validate(item);
  if (!violations.empty()) {
    std::string msg = "item " + item.id() + " violates invariants:";
    for (const auto& v : violations) msg += "\n  - " + v;
    throw ValidationError(msg);
  }
  return to_json(item).dump();
}

BenchmarkItem deserialize_item(std::string_view line) {
  try {
    return item_from_json(Json::parse(line));
  } catch (const Json::exception& e) {
    throw ParseError(std::string("malformed benchmark item: ") + e.what());
  }
}

Json make_header(std::string_view format, Json config) {
  Json inner;
  inner["format"] = format;
  inner["version"] = kVersion;
  inner["config"] = std::move(config);
  Json j;
  j["evolmath_header"] = std::move(inner);
  return j;
}

bool is_header(const Json& line) {
  return line.is_object() && line.contains("evolmath_header");
}

std::string benchmark_to_string(const Json& header, std::vector<BenchmarkItem> items) {
  std::sort(items.begin(), items.end(),
            [](const BenchmarkItem& a, const BenchmarkItem& b) { return a.id() < b.id(); });
  std::string out = header.dump();
  out += '\n';
  for (const auto& item : items) {
    out += canonical_serialize(item);
    out += '\n';
  }
  return out;
}

void write_benchmark(const std::filesystem::path& path, const Json& header,
                     std::vector<BenchmarkItem> items) {
  write_text_file(path, benchmark_to_string(header, std::move(items)));
}

BenchmarkFile parse_benchmark(std::string_view text) {
  BenchmarkFile file;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::exception& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
    if (is_header(j)) {
      file.header = std::move(j);
      continue;
    }
    try {
      file.items.push_back(item_from_json(j));
    } catch (const Json::exception& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return file;
}

BenchmarkFile read_benchmark(const std::filesystem::path& path) {
  return parse_benchmark(read_text_file(path));
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidInput("cannot write " + tmp.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw InvalidInput("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw InvalidInput("cannot rename " + tmp.string() + ": " + ec.message());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace evolmath
