#include "evolmath/eval.hpp"

#include <algorithm>
#include <regex>
#include <set>

#include <spdlog/fmt/fmt.h>
#include <spdlog/spdlog.h>

#include "evolmath/error.hpp"
#include "evolmath/gateway.hpp"
#include "evolmath/parallel.hpp"

namespace evolmath {

std::string_view to_string(Attribution a) noexcept {
  switch (a) {
    case Attribution::PseudoAha: return "PseudoAha";
    case Attribution::Unattributed: return "Unattributed";
    case Attribution::NotApplicable: return "NotApplicable";
  }
  return "?";
}

Attribution parse_attribution(std::string_view s) {
  for (auto a : {Attribution::PseudoAha, Attribution::Unattributed, Attribution::NotApplicable}) {
    if (to_string(a) == s) return a;
  }
  throw ParseError("unknown attribution \"" + std::string(s) + "\"");
}

namespace {

std::optional<std::int64_t> to_integer(const std::string& digits) {
  try {
    return std::stoll(digits);
  } catch (const std::out_of_range&) {
    return std::nullopt;
  }
}

std::optional<std::int64_t> last_capture(const std::string& text, const std::regex& re) {
  std::optional<std::int64_t> out;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), re); it != std::sregex_iterator(); ++it) {
    if (auto v = to_integer((*it)[1].str())) out = v;
  }
  return out;
}

std::int64_t exact_answer(const AlgebraicCore& core) {
  const auto v = oracle_answer(core);
  if (!v.is_integer()) throw InvalidInput("oracle answer is not an integer");
  return v.to_int64();
}

std::string labeled(const BenchmarkItem& item, std::optional<std::int64_t> q1, std::int64_t final) {
  std::string out;
  if (item.is_compound() && q1) out += "Q1: " + std::to_string(*q1) + "\n";
  return out + "Final: " + std::to_string(final);
}

}  // namespace

ExtractedAnswers extract_answers(std::string_view completion, bool compound) {
  static const std::regex q1_marker(R"(\bq1\s*\**\s*[:=]\s*\**\s*\$?\s*(-?\d+))", std::regex::icase);
  static const std::regex final_marker(R"(\bfinal(?:\s+answer)?\s*\**\s*[:=]\s*\**\s*\$?\s*(-?\d+))",
                                       std::regex::icase);
  static const std::regex boxed(R"(\\boxed\{\s*(-?\d+)\s*\})");
  static const std::regex integer(R"((-?\d+))");

  const std::string text(completion);
  ExtractedAnswers out;
  if (compound) out.q1 = last_capture(text, q1_marker);
  out.final = last_capture(text, final_marker);
  if (!out.final) out.final = last_capture(text, boxed);
  if (!out.final) out.final = last_capture(text, integer);
  return out;
}

EvalRecord grade(const BenchmarkItem& item, std::string model_id, std::string completion) {
  EvalRecord r;
  r.problem_id = item.id();
  r.model_id = std::move(model_id);
  const auto answers = extract_answers(completion, item.is_compound());
  r.raw_completion = std::move(completion);
  r.extracted_final = answers.final;
  r.final_correct = answers.final && *answers.final == item.answer();
  if (item.is_compound()) {
    r.extracted_q1 = answers.q1;
    r.q1_correct = answers.q1 && answers.q1 == item.q1_answer();
  }
  const auto trap = item.trap_answer();
  if (trap && !r.final_correct) {
    r.attribution = r.extracted_final == trap ? Attribution::PseudoAha : Attribution::Unattributed;
  }
  return r;
}

std::string solver_prompt(const BenchmarkItem& item, std::string_view tpl) {
  const std::string format = item.is_compound()
                                 ? "End your reply with two lines: \"Q1: <integer>\" and \"Final: <integer>\"."
                                 : "End your reply with one line: \"Final: <integer>\".";
  return fill_template(tpl, {{"answer_format", format}, {"problem", item.text()}});
}

Solver gateway_solver(Gateway& gateway) {
  return [&gateway](const BenchmarkItem&, const std::string& prompt) {
    return gateway.complete(Role::Solver, prompt);
  };
}

Solver oracle_solver() {
  return [](const BenchmarkItem& item, const std::string&) {
    if (item.is_compound()) {
      const auto& c = item.compound();
      return labeled(item, exact_answer(c.part1.core), exact_answer(c.part2.core));
    }
    return labeled(item, std::nullopt, exact_answer(item.atomic().core));
  };
}

Solver shortcut_solver() {
  return [](const BenchmarkItem& item, const std::string&) {
    return labeled(item, item.q1_answer(), item.trap_answer().value_or(item.answer()));
  };
}

Solver trap_plus_one_solver() {
  return [](const BenchmarkItem& item, const std::string&) {
    const auto trap = item.trap_answer();
    return labeled(item, item.q1_answer(), trap ? *trap + 1 : item.answer());
  };
}

std::vector<EvalRecord> evaluate(std::span<const BenchmarkItem> items, const std::string& model_id,
                                 const Solver& solver, std::size_t jobs, std::string_view tpl) {
  std::vector<EvalRecord> out(items.size());
  parallel_for(items.size(), jobs, [&](std::size_t i) {
    const auto& item = items[i];
    try {
      out[i] = grade(item, model_id, solver(item, solver_prompt(item, tpl)));
    } catch (const GatewayError& e) {
      spdlog::warn("eval: {} failed for {}: {}", model_id, item.id(), e.what());
      EvalRecord r;
      r.problem_id = item.id();
      r.model_id = model_id;
      if (item.is_compound()) r.q1_correct = false;
      if (item.trap_answer()) r.attribution = Attribution::Unattributed;
      r.error = e.what();
      out[i] = std::move(r);
    }
  });
  return out;
}

// ---------------------------------------------------------------------------

namespace {

template <class T>
Json optional_json(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

template <class T>
std::optional<T> optional_from(const Json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

}  // namespace

Json to_json(const EvalRecord& r) {
  Json j;
  j["problem_id"] = r.problem_id;
  j["model_id"] = r.model_id;
  j["raw_completion"] = r.raw_completion;
  j["extracted_q1"] = optional_json(r.extracted_q1);
  j["extracted_final"] = optional_json(r.extracted_final);
  j["q1_correct"] = optional_json(r.q1_correct);
  j["final_correct"] = r.final_correct;
  j["attribution"] = std::string(to_string(r.attribution));
  j["error"] = optional_json(r.error);
  return j;
}

EvalRecord record_from_json(const Json& j) {
  EvalRecord r;
  try {
    r.problem_id = j.at("problem_id").get<std::string>();
    r.model_id = j.at("model_id").get<std::string>();
    r.raw_completion = j.at("raw_completion").get<std::string>();
    r.extracted_q1 = optional_from<std::int64_t>(j, "extracted_q1");
    r.extracted_final = optional_from<std::int64_t>(j, "extracted_final");
    r.q1_correct = optional_from<bool>(j, "q1_correct");
    r.final_correct = j.at("final_correct").get<bool>();
    r.attribution = parse_attribution(j.at("attribution").get<std::string>());
    r.error = optional_from<std::string>(j, "error");
  } catch (const Json::exception& e) {
    throw ParseError(std::string("malformed eval record: ") + e.what());
  }
  return r;
}

std::string records_to_string(std::span<const EvalRecord> records, const Json& config) {
  std::string out = make_header("evalrecords", config).dump() + "\n";
  for (const auto& r : records) out += to_json(r).dump() + "\n";
  return out;
}

std::vector<EvalRecord> parse_records(std::string_view text) {
  std::vector<EvalRecord> out;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const auto line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      const Json j = Json::parse(line);
      if (is_header(j)) continue;
      out.push_back(record_from_json(j));
    } catch (const Json::exception& e) {
      throw ParseError("records line " + std::to_string(line_no) + ": " + e.what());
    } catch (const ParseError& e) {
      throw ParseError("records line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void write_records(const std::filesystem::path& path, std::span<const EvalRecord> records, const Json& config) {
  write_text_file(path, records_to_string(records, config));
}

std::vector<EvalRecord> read_records(const std::filesystem::path& path) {
  return parse_records(read_text_file(path));
}

std::map<std::string, double> per_problem_accuracy(std::span<const EvalRecord> records) {
  std::map<std::string, std::pair<std::size_t, std::size_t>> counts;
  for (const auto& r : records) {
    auto& [correct, total] = counts[r.problem_id];
    correct += r.final_correct ? 1 : 0;
    ++total;
  }
  std::map<std::string, double> out;
  for (const auto& [id, c] : counts) out[id] = static_cast<double>(c.first) / static_cast<double>(c.second);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

double pct(std::size_t num, std::size_t den) {
  return 100.0 * static_cast<double>(num) / static_cast<double>(den);
}

std::map<std::string, ModelAccuracy> tally(std::span<const EvalRecord> records) {
  std::map<std::string, ModelAccuracy> by_model;
  for (const auto& r : records) {
    auto& m = by_model[r.model_id];
    m.model_id = r.model_id;
    ++m.total;
    if (r.final_correct) ++m.final_correct;
    if (r.q1_correct) {
      ++m.q1_total;
      if (*r.q1_correct) ++m.q1_correct;
    }
  }
  for (auto& [id, m] : by_model) {
    m.final_accuracy = pct(m.final_correct, m.total);
    if (m.q1_total > 0) m.q1_accuracy = pct(m.q1_correct, m.q1_total);
  }
  return by_model;
}

std::string aligned(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& row : rows) {
    width.resize(std::max(width.size(), row.size()), 0);
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::string out;
  for (const auto& row : rows) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c == 0) {
        line += fmt::format("{:<{}}", row[c], width[c]);
      } else {
        line += fmt::format("  {:>{}}", row[c], width[c]);
      }
    }
    out += line + "\n";
  }
  return out;
}

std::string csv(const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ",";
      const bool quote = row[c].find_first_of(",\"\n") != std::string::npos;
      if (!quote) {
        out += row[c];
        continue;
      }
      out += '"';
      for (char ch : row[c]) out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
      out += '"';
    }
    out += "\n";
  }
  return out;
}

std::vector<std::vector<std::string>> accuracy_rows(const AccuracyReport& report, bool raw) {
  auto num = [&](std::optional<double> v) {
    if (!raw) return format_percent(v);
    return v ? fmt::format("{:.4f}", *v) : std::string();
  };
  std::vector<std::vector<std::string>> rows{
      {"model", "items", "q1_acc", "final_acc", "baseline_acc", "rel_drop"}};
  for (const auto& m : report.models) {
    rows.push_back({m.model_id, std::to_string(m.total), num(m.q1_accuracy), num(m.final_accuracy),
                    num(m.baseline_accuracy), num(m.relative_drop)});
  }
  rows.push_back({"Average Rel. Drop", "", "", "", "", num(report.average_relative_drop)});
  rows.push_back({"Average Evolved Acc.", "", "", num(report.average_evolved_accuracy), "", ""});
  return rows;
}

std::vector<std::vector<std::string>> attribution_rows(std::span<const AttributionRow> rows, bool raw) {
  std::vector<std::vector<std::string>> out{{"model", "trap_items", "errors", "pseudo_aha", "rate"}};
  for (const auto& r : rows) {
    out.push_back({r.model_id, std::to_string(r.trap_items), std::to_string(r.errors),
                   std::to_string(r.pseudo_aha),
                   raw ? (r.rate ? fmt::format("{:.4f}", *r.rate) : std::string("undefined"))
                       : format_percent(r.rate, "undefined")});
  }
  return out;
}

}  // namespace

AccuracyReport accuracy_report(std::span<const EvalRecord> records,
                               std::optional<std::span<const EvalRecord>> baseline) {
  if (records.empty()) throw InvalidInput("no evaluation records to report on");
  AccuracyReport report;
  const auto evolved = tally(records);
  std::map<std::string, ModelAccuracy> base;
  if (baseline) base = tally(*baseline);

  double acc_sum = 0.0;
  double drop_sum = 0.0;
  std::size_t drops = 0;
  for (const auto& [id, m] : evolved) {
    ModelAccuracy row = m;
    if (auto it = base.find(id); it != base.end()) {
      row.baseline_accuracy = it->second.final_accuracy;
      if (it->second.final_accuracy > 0.0) {
        row.relative_drop =
            100.0 * (it->second.final_accuracy - row.final_accuracy) / it->second.final_accuracy;
        drop_sum += *row.relative_drop;
        ++drops;
      }
    }
    acc_sum += row.final_accuracy;
    report.models.push_back(std::move(row));
  }
  report.average_evolved_accuracy = acc_sum / static_cast<double>(report.models.size());
  if (drops > 0) report.average_relative_drop = drop_sum / static_cast<double>(drops);
  return report;
}

std::vector<AttributionRow> attribute(std::span<const EvalRecord> records, std::span<const BenchmarkItem> benchmark) {
  std::map<std::string, const BenchmarkItem*> by_id;
  for (const auto& item : benchmark) by_id[item.id()] = &item;
  std::map<std::string, AttributionRow> rows;
  for (const auto& r : records) {
    auto it = by_id.find(r.problem_id);
    if (it == by_id.end()) throw InvalidInput("record for " + r.problem_id + " has no benchmark item");
    auto& row = rows[r.model_id];
    row.model_id = r.model_id;
    const auto trap = it->second->trap_answer();
    if (!trap) continue;
    ++row.trap_items;
    if (r.final_correct) continue;
    ++row.errors;
    if (r.extracted_final == trap) ++row.pseudo_aha;
  }
  std::vector<AttributionRow> out;
  for (auto& [id, row] : rows) {
    if (row.errors > 0) row.rate = pct(row.pseudo_aha, row.errors);
    out.push_back(std::move(row));
  }
  return out;
}

std::string format_percent(std::optional<double> value, std::string_view missing) {
  return value ? fmt::format("{:.1f}%", *value) : std::string(missing);
}

std::string format_table(const AccuracyReport& report) { return aligned(accuracy_rows(report, false)); }
std::string format_csv(const AccuracyReport& report) { return csv(accuracy_rows(report, true)); }

Json to_json(const AccuracyReport& report) {
  Json j;
  j["models"] = Json::array();
  for (const auto& m : report.models) {
    j["models"].push_back({{"model_id", m.model_id},
                           {"items", m.total},
                           {"final_correct", m.final_correct},
                           {"q1_items", m.q1_total},
                           {"q1_correct", m.q1_correct},
                           {"final_accuracy", m.final_accuracy},
                           {"q1_accuracy", optional_json(m.q1_accuracy)},
                           {"baseline_accuracy", optional_json(m.baseline_accuracy)},
                           {"relative_drop", optional_json(m.relative_drop)}});
  }
  j["average_relative_drop"] = optional_json(report.average_relative_drop);
  j["average_evolved_accuracy"] = report.average_evolved_accuracy;
  return j;
}

std::string format_table(std::span<const AttributionRow> rows) { return aligned(attribution_rows(rows, false)); }
std::string format_csv(std::span<const AttributionRow> rows) { return csv(attribution_rows(rows, true)); }

Json to_json(std::span<const AttributionRow> rows) {
  Json out = Json::array();
  for (const auto& r : rows) {
    out.push_back({{"model_id", r.model_id},
                   {"trap_items", r.trap_items},
                   {"errors", r.errors},
                   {"pseudo_aha", r.pseudo_aha},
                   {"rate", r.rate ? Json(*r.rate) : Json("undefined")}});
  }
  return out;
}

}  // namespace evolmath
