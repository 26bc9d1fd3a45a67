#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "evolmath/model.hpp"
#include "evolmath/resources.hpp"
#include "evolmath/serialize.hpp"

namespace evolmath {

class Gateway;

inline constexpr std::string_view kEvalRecordsExtension = ".evalrecords.jsonl";

enum class Attribution { PseudoAha, Unattributed, NotApplicable };

std::string_view to_string(Attribution a) noexcept;
Attribution parse_attribution(std::string_view s);

struct EvalRecord {
  std::string problem_id;
  std::string model_id;
  std::string raw_completion;
  std::optional<std::int64_t> extracted_q1;
  std::optional<std::int64_t> extracted_final;
  std::optional<bool> q1_correct;  // compounds only
  bool final_correct = false;
  Attribution attribution = Attribution::NotApplicable;
  std::optional<std::string> error;  // solver call failed

  friend bool operator==(const EvalRecord&, const EvalRecord&) = default;
};

struct ExtractedAnswers {
  std::optional<std::int64_t> q1;
  std::optional<std::int64_t> final;
};

/// Labeled "Q1:" / "Final:" markers (case-insensitive, last occurrence wins),
/// then a \boxed{} value for the final answer, then the last integer in the
/// text.  Q1 has no fallback.
ExtractedAnswers extract_answers(std::string_view completion, bool compound);

/// Exact integer grading plus trap attribution.
EvalRecord grade(const BenchmarkItem& item, std::string model_id, std::string completion);

/// Prompt asking for labeled integer answers.
std::string solver_prompt(const BenchmarkItem& item, std::string_view tpl = builtin_solver_prompt());

/// Produces a completion for one item.  May throw GatewayError.
using Solver = std::function<std::string(const BenchmarkItem& item, const std::string& prompt)>;

Solver gateway_solver(Gateway& gateway);

/// Answers computed from the cores with exact arithmetic.
Solver oracle_solver();
/// Answers the trap whenever the item has one, the truth otherwise.
Solver shortcut_solver();
/// Answers trap + 1 whenever the item has one, the truth otherwise.
Solver trap_plus_one_solver();

/// One record per item, in input order.  A GatewayError becomes a record with
/// final_correct = false and the error text; the run continues.
std::vector<EvalRecord> evaluate(std::span<const BenchmarkItem> items, const std::string& model_id,
                                 const Solver& solver, std::size_t jobs = 1,
                                 std::string_view tpl = builtin_solver_prompt());

Json to_json(const EvalRecord& r);
EvalRecord record_from_json(const Json& j);
std::string records_to_string(std::span<const EvalRecord> records, const Json& config = Json::object());
std::vector<EvalRecord> parse_records(std::string_view text);
void write_records(const std::filesystem::path& path, std::span<const EvalRecord> records,
                   const Json& config = Json::object());
std::vector<EvalRecord> read_records(const std::filesystem::path& path);

/// Fraction of records per problem whose final answer is correct, pooled over
/// every model present.
std::map<std::string, double> per_problem_accuracy(std::span<const EvalRecord> records);

// ---------------------------------------------------------------------------
// Reports

struct ModelAccuracy {
  std::string model_id;
  std::size_t total = 0;
  std::size_t final_correct = 0;
  std::size_t q1_total = 0;
  std::size_t q1_correct = 0;
  double final_accuracy = 0.0;        // percent
  std::optional<double> q1_accuracy;  // percent; absent without compound items
  std::optional<double> baseline_accuracy;
  std::optional<double> relative_drop;  // percent; absent when the baseline is 0
};

struct AccuracyReport {
  std::vector<ModelAccuracy> models;  // sorted by model id
  std::optional<double> average_relative_drop;
  double average_evolved_accuracy = 0.0;
};

/// Throws InvalidInput on an empty record set.
AccuracyReport accuracy_report(std::span<const EvalRecord> records,
                               std::optional<std::span<const EvalRecord>> baseline = std::nullopt);

struct AttributionRow {
  std::string model_id;
  std::size_t trap_items = 0;
  std::size_t errors = 0;
  std::size_t pseudo_aha = 0;
  std::optional<double> rate;  // percent; undefined without errors
};

/// Pseudo-Aha share of the errors on items carrying a trap answer, per model.
/// Throws InvalidInput when a record names an item missing from the benchmark.
std::vector<AttributionRow> attribute(std::span<const EvalRecord> records, std::span<const BenchmarkItem> benchmark);

/// "50.0%", or "undefined" / "n/a" for missing values.
std::string format_percent(std::optional<double> pct, std::string_view missing = "n/a");

std::string format_table(const AccuracyReport& report);
std::string format_csv(const AccuracyReport& report);
Json to_json(const AccuracyReport& report);

std::string format_table(std::span<const AttributionRow> rows);
std::string format_csv(std::span<const AttributionRow> rows);
Json to_json(std::span<const AttributionRow> rows);

}  // namespace evolmath
