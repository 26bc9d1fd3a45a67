#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace evolmath {

/// The eight difficulty features, in the row order of the reference weight
/// table (most to least significant).
enum class Feature : std::size_t {
  NoiseRatio,
  LexicalEntropy,
  NumEquations,
  NumVariables,
  RefereeScore,
  Readability,
  WordCount,
  SyntacticComplexity,
};

inline constexpr std::size_t kFeatureCount = 8;

inline constexpr std::array<Feature, kFeatureCount> kAllFeatures = {
    Feature::NoiseRatio,   Feature::LexicalEntropy, Feature::NumEquations,
    Feature::NumVariables, Feature::RefereeScore,   Feature::Readability,
    Feature::WordCount,    Feature::SyntacticComplexity,
};

std::string_view feature_name(Feature f) noexcept;
std::optional<Feature> feature_from_name(std::string_view name) noexcept;

struct FeatureVector {
  int referee_score = 0;  // 0..10
  int word_count = 0;
  double readability = 0.0;
  double syntactic_complexity = 0.0;
  double lexical_entropy = 0.0;  // bits
  int num_variables = 0;
  int num_equations = 0;
  double noise_ratio = 0.0;

  double get(Feature f) const noexcept;
  std::array<double, kFeatureCount> values() const noexcept;

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

struct FitnessReport {
  FeatureVector raw;
  std::array<double, kFeatureCount> standardized{};  // indexed by Feature
  double composite = 0.0;
  bool composite_pass = false;
  bool deficiency_pass = false;
  bool selected = false;

  friend bool operator==(const FitnessReport&, const FitnessReport&) = default;
};

}  // namespace evolmath
