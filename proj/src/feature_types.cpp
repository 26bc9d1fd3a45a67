#include "evolmath/feature_types.hpp"

namespace evolmath {

std::string_view feature_name(Feature f) noexcept {
  switch (f) {
    case Feature::NoiseRatio: return "noise_ratio";
    case Feature::LexicalEntropy: return "lexical_entropy";
    case Feature::NumEquations: return "num_equations";
    case Feature::NumVariables: return "num_variables";
    case Feature::RefereeScore: return "referee_score";
    case Feature::Readability: return "readability";
    case Feature::WordCount: return "word_count";
    case Feature::SyntacticComplexity: return "syntactic_complexity";
  }
  return "?";
}

std::optional<Feature> feature_from_name(std::string_view name) noexcept {
  for (Feature f : kAllFeatures) {
    if (feature_name(f) == name) return f;
  }
  return std::nullopt;
}

double FeatureVector::get(Feature f) const noexcept {
  switch (f) {
    case Feature::NoiseRatio: return noise_ratio;
    case Feature::LexicalEntropy: return lexical_entropy;
    case Feature::NumEquations: return num_equations;
    case Feature::NumVariables: return num_variables;
    case Feature::RefereeScore: return referee_score;
    case Feature::Readability: return readability;
    case Feature::WordCount: return word_count;
    case Feature::SyntacticComplexity: return syntactic_complexity;
  }
  return 0.0;
}

std::array<double, kFeatureCount> FeatureVector::values() const noexcept {
  std::array<double, kFeatureCount> out{};
  for (Feature f : kAllFeatures) out[static_cast<std::size_t>(f)] = get(f);
  return out;
}

}  // namespace evolmath
