#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "evolmath/feature_types.hpp"
#include "evolmath/model.hpp"
#include "evolmath/resources.hpp"
#include "evolmath/serialize.hpp"

namespace evolmath {

class Gateway;

inline constexpr double kExclusionPValue = 0.5;  // p above this drops the feature
inline constexpr double kDefaultThreshold = -0.5;
inline constexpr double kDefaultPercentile = 1.0;
inline constexpr std::string_view kReferencePreset = "paper-table1";

// ---------------------------------------------------------------------------
// Features

/// Noise conditions of every tag plus misleading sentences and irrelevant
/// fragments, over those plus the core conditions.
double noise_ratio(const Problem& p);

/// Text features from item.text(); structural features summed over both parts
/// of a compound.  Throws InvalidInput if the item has no text.
FeatureVector extract_features(const BenchmarkItem& item, int referee_score);

/// Difficulty referee.  nullopt means no usable score, and the caller imputes.
class Referee {
 public:
  virtual ~Referee() = default;
  virtual std::optional<int> score(const std::string& text) = 0;
};

class ConstantReferee : public Referee {
 public:
  explicit ConstantReferee(int score);
  std::optional<int> score(const std::string&) override { return score_; }

 private:
  int score_;
};

/// Asks the referee role and parses the 0-10 reply.  Unparsable replies are
/// re-asked with a reminder line up to `attempts` times in total; gateway
/// errors propagate.
class GatewayReferee : public Referee {
 public:
  GatewayReferee(Gateway& gateway, std::string prompt_template = std::string(builtin_referee_prompt()),
                 std::size_t attempts = 3);
  std::optional<int> score(const std::string& text) override;

 private:
  Gateway& gateway_;
  std::string template_;
  std::size_t attempts_;
};

// ---------------------------------------------------------------------------
// Weights

struct WeightEntry {
  std::string feature;
  double r = 0.0;  // NaN when undefined (constant column)
  double p = 0.0;
  double weight = 0.0;
  bool retained = false;

  friend bool operator==(const WeightEntry&, const WeightEntry&) = default;
};

/// Denominator of the weight formula.  AllCandidates sums |r(1-p)| over every
/// candidate with a defined r, excluded ones included, as the reference table
/// does; RetainedOnly sums over retained features so that their absolute
/// weights add up to one.
enum class Normalization { AllCandidates, RetainedOnly };

struct WeightVector {
  std::vector<WeightEntry> entries;

  /// 0 for features that are absent or not retained.
  double weight(Feature f) const;
  const WeightEntry* find(std::string_view feature) const;
  double retained_abs_sum() const;

  /// The reference weights, including the two excluded rows.
  static WeightVector reference();
};

struct FeatureStatistic {
  std::string feature;
  double r = 0.0;
  double p = 0.0;
};

/// w_i = -r_i(1-p_i) / denominator for features with p <= 0.5, else 0.
/// Throws CalibrationError when nothing is retained.
WeightVector weights_from_statistics(std::span<const FeatureStatistic> stats,
                                     Normalization norm = Normalization::AllCandidates);

/// NaN if either sample is constant.  Throws InvalidInput on length mismatch.
double pearson_r(std::span<const double> x, std::span<const double> y);

/// Two-sided p-value of t = r*sqrt((n-2)/(1-r^2)) with n-2 degrees of freedom.
double correlation_p_value(double r, std::size_t n);

struct FeatureColumn {
  std::string feature;
  std::vector<double> values;
};

/// Needs at least three rows and non-constant accuracy (CalibrationError).
/// Constant feature columns are excluded with r = p = NaN.
WeightVector calibrate_weights(std::span<const FeatureColumn> columns, std::span<const double> accuracy,
                               Normalization norm = Normalization::AllCandidates);
WeightVector calibrate_weights(std::span<const FeatureVector> features, std::span<const double> accuracy,
                               Normalization norm = Normalization::AllCandidates);

/// JSONL sidecar: a header line, then one {feature, r, p, weight, retained} per row.
std::string weights_to_string(const WeightVector& w, const Json& config = Json::object());
WeightVector parse_weights(std::string_view text);
void save_weights(const std::filesystem::path& path, const WeightVector& w,
                  const Json& config = Json::object());

/// "paper-table1" or a sidecar path.
WeightVector load_weights(std::string_view spec);

// ---------------------------------------------------------------------------
// Scoring and selection

using ZScores = std::array<double, kFeatureCount>;

/// Population z-scores per feature (population stddev); 0 where a column is
/// constant.  Throws InvalidInput for fewer than two items.
std::vector<ZScores> standardize(std::span<const FeatureVector> population);
std::vector<double> standardize_column(std::span<const double> values);

double composite_score(const ZScores& z, const WeightVector& w);

/// Linear interpolation between closest ranks; pct in [0, 100].
double percentile(std::vector<double> values, double pct);

struct SelectionOptions {
  double threshold = kDefaultThreshold;
  std::optional<double> percentile = kDefaultPercentile;  // nullopt disables the deficiency filter
};

struct Selection {
  std::vector<std::size_t> qualified;
  std::vector<std::size_t> rejected;
};

/// Composite filter: S < threshold fails.  Deficiency filter: for each
/// retained feature with a non-constant contribution w*z, items at or below
/// the population percentile fail.  Sets the pass flags on every report.
Selection select(std::span<FitnessReport> reports, const WeightVector& w, const SelectionOptions& opts = {});

/// Features (referee via `referee`, failures imputed with the lower median
/// and flagged "referee-imputed"), z-scores, composite and selection for the
/// whole population.  A population of one gets zero z-scores.
Selection score_population(std::vector<BenchmarkItem>& items, const WeightVector& w, Referee& referee,
                           const SelectionOptions& opts = {}, std::size_t jobs = 1);

/// Re-runs standardization and selection over stored features.
Selection rescore(std::vector<BenchmarkItem>& items, const WeightVector& w, const SelectionOptions& opts = {});

}  // namespace evolmath
