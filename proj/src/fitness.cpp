#include "evolmath/fitness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>
#include <spdlog/spdlog.h>

#include "evolmath/error.hpp"
#include "evolmath/gateway.hpp"
#include "evolmath/parallel.hpp"
#include "evolmath/text_stats.hpp"

namespace evolmath {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::string_view kImputedFlag = "referee-imputed";

struct NoiseCounts {
  std::size_t noise = 0;
  std::size_t core = 0;
};

NoiseCounts count_noise(const Problem& p) {
  return {p.noise_conditions.size() + p.narrative.misleading_sentences.size() +
              p.narrative.irrelevant_fragments.size(),
          p.core.conditions.size()};
}

double ratio(const NoiseCounts& c) {
  const std::size_t total = c.noise + c.core;
  return total == 0 ? 0.0 : static_cast<double>(c.noise) / static_cast<double>(total);
}

bool all_equal(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

}  // namespace

double noise_ratio(const Problem& p) { return ratio(count_noise(p)); }

FeatureVector extract_features(const BenchmarkItem& item, int referee_score) {
  const std::string text = item.text();
  if (text.empty()) throw InvalidInput("item " + item.id() + " has no text to score");

  FeatureVector f;
  f.referee_score = referee_score;
  f.word_count = static_cast<int>(text::whitespace_tokens(text).size());
  f.readability = text::flesch_reading_ease(text);
  f.syntactic_complexity = text::syntactic_complexity(text);
  f.lexical_entropy = text::lexical_entropy(text);

  NoiseCounts counts;
  auto add = [&](const Problem& p) {
    f.num_variables += static_cast<int>(p.all_variables().size());
    f.num_equations += static_cast<int>(p.condition_count());
    const auto c = count_noise(p);
    counts.noise += c.noise;
    counts.core += c.core;
  };
  if (item.is_compound()) {
    add(item.compound().part1);
    add(item.compound().part2);
  } else {
    add(item.atomic());
  }
  f.noise_ratio = ratio(counts);
  return f;
}

ConstantReferee::ConstantReferee(int score) : score_(score) {
  if (score < 0 || score > 10) throw ConfigError("offline referee score must be in 0..10");
}

GatewayReferee::GatewayReferee(Gateway& gateway, std::string prompt_template, std::size_t attempts)
    : gateway_(gateway), template_(std::move(prompt_template)), attempts_(std::max<std::size_t>(1, attempts)) {}

std::optional<int> GatewayReferee::score(const std::string& text) {
  const std::string base = fill_template(template_, {{"problem", text}});
  for (std::size_t attempt = 0; attempt < attempts_; ++attempt) {
    // Identical prompts would be served from the cache, so re-asks differ.
    std::string prompt = base;
    if (attempt > 0) {
      prompt += "\nReply with a single line of the form \"Score: N\" where N is 0 to 10. (retry " +
                std::to_string(attempt) + ")";
    }
    const std::string reply = gateway_.complete(Role::Referee, prompt);
    try {
      return parse_referee_score(reply);
    } catch (const ParseError&) {
      spdlog::debug("referee: unparsable reply on attempt {}", attempt + 1);
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------

double WeightVector::weight(Feature f) const {
  const WeightEntry* e = find(feature_name(f));
  return e && e->retained ? e->weight : 0.0;
}

const WeightEntry* WeightVector::find(std::string_view feature) const {
  for (const auto& e : entries) {
    if (e.feature == feature) return &e;
  }
  return nullptr;
}

double WeightVector::retained_abs_sum() const {
  double s = 0.0;
  for (const auto& e : entries) {
    if (e.retained) s += std::abs(e.weight);
  }
  return s;
}

WeightVector WeightVector::reference() {
  return WeightVector{{
      {"noise_ratio", -0.151, 0.009, +0.19, true},
      {"lexical_entropy", -0.120, 0.039, +0.15, true},
      {"num_equations", +0.118, 0.040, -0.15, true},
      {"num_variables", +0.117, 0.043, -0.15, true},
      {"referee_score", +0.106, 0.064, -0.13, true},
      {"readability", +0.087, 0.130, -0.10, true},
      {"word_count", -0.080, 0.170, +0.09, true},
      {"syntactic_complexity", -0.054, 0.350, +0.05, true},
      {"semantic_uniqueness", +0.015, 0.791, 0.0, false},
      {"nonlinear_relations", +0.007, 0.902, 0.0, false},
  }};
}

WeightVector weights_from_statistics(std::span<const FeatureStatistic> stats, Normalization norm) {
  WeightVector out;
  double denom = 0.0;
  for (const auto& s : stats) {
    WeightEntry e{s.feature, s.r, s.p, 0.0, false};
    const bool defined = !std::isnan(s.r) && !std::isnan(s.p);
    e.retained = defined && s.p <= kExclusionPValue;
    if (defined && (e.retained || norm == Normalization::AllCandidates)) {
      denom += std::abs(s.r * (1.0 - s.p));
    }
    out.entries.push_back(std::move(e));
  }
  if (std::none_of(out.entries.begin(), out.entries.end(), [](const WeightEntry& e) { return e.retained; })) {
    throw CalibrationError("no feature has p <= 0.5; nothing to weight");
  }
  if (denom == 0.0) throw CalibrationError("every retained feature has zero correlation");
  for (auto& e : out.entries) {
    if (e.retained) e.weight = -e.r * (1.0 - e.p) / denom;
  }
  return out;
}

double pearson_r(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidInput("pearson_r: length mismatch");
  if (x.size() < 2 || all_equal(x) || all_equal(y)) return kNaN;
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double correlation_p_value(double r, std::size_t n) {
  if (std::isnan(r) || n < 3) return kNaN;
  if (std::abs(r) >= 1.0) return 0.0;
  const double df = static_cast<double>(n - 2);
  const double t = r * std::sqrt(df / (1.0 - r * r));
  const boost::math::students_t dist(df);
  return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
}

WeightVector calibrate_weights(std::span<const FeatureColumn> columns, std::span<const double> accuracy,
                               Normalization norm) {
  if (accuracy.size() < 3) throw CalibrationError("calibration needs at least three problems");
  if (all_equal(accuracy)) throw CalibrationError("accuracy is constant; correlations are undefined");
  std::vector<FeatureStatistic> stats;
  for (const auto& col : columns) {
    if (col.values.size() != accuracy.size()) {
      throw CalibrationError("feature column " + col.feature + " has " + std::to_string(col.values.size()) +
                             " rows, accuracy has " + std::to_string(accuracy.size()));
    }
    const double r = pearson_r(col.values, accuracy);
    if (std::isnan(r)) spdlog::warn("calibrate: feature {} is constant; excluded", col.feature);
    stats.push_back({col.feature, r, correlation_p_value(r, accuracy.size())});
  }
  return weights_from_statistics(stats, norm);
}

WeightVector calibrate_weights(std::span<const FeatureVector> features, std::span<const double> accuracy,
                               Normalization norm) {
  std::vector<FeatureColumn> columns;
  for (Feature f : kAllFeatures) {
    FeatureColumn col{std::string(feature_name(f)), {}};
    for (const auto& fv : features) col.values.push_back(fv.get(f));
    columns.push_back(std::move(col));
  }
  return calibrate_weights(columns, accuracy, norm);
}

std::string weights_to_string(const WeightVector& w, const Json& config) {
  std::string out = make_header("weights", config).dump() + "\n";
  for (const auto& e : w.entries) {
    Json row;
    row["feature"] = e.feature;
    row["r"] = number_to_json(e.r);
    row["p"] = number_to_json(e.p);
    row["weight"] = number_to_json(e.weight);
    row["retained"] = e.retained;
    out += row.dump() + "\n";
  }
  return out;
}

WeightVector parse_weights(std::string_view text) {
  WeightVector w;
  std::size_t line_no = 0;
  std::size_t pos = 0;
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
      w.entries.push_back({j.at("feature").get<std::string>(), number_from_json(j.at("r")),
                           number_from_json(j.at("p")), number_from_json(j.at("weight")),
                           j.at("retained").get<bool>()});
    } catch (const Json::exception& e) {
      throw ParseError("weights line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (w.entries.empty()) throw ParseError("weights file has no rows");
  return w;
}

void save_weights(const std::filesystem::path& path, const WeightVector& w, const Json& config) {
  write_text_file(path, weights_to_string(w, config));
}

WeightVector load_weights(std::string_view spec) {
  if (spec == kReferencePreset) return WeightVector::reference();
  return parse_weights(read_text_file(std::filesystem::path(std::string(spec))));
}

// ---------------------------------------------------------------------------

std::vector<double> standardize_column(std::span<const double> values) {
  std::vector<double> z(values.size(), 0.0);
  if (values.empty() || all_equal(values)) return z;
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / n);
  for (std::size_t i = 0; i < values.size(); ++i) z[i] = (values[i] - mean) / sd;
  return z;
}

std::vector<ZScores> standardize(std::span<const FeatureVector> population) {
  if (population.size() < 2) throw InvalidInput("standardize needs a population of at least two");
  std::vector<ZScores> out(population.size());
  for (Feature f : kAllFeatures) {
    const auto k = static_cast<std::size_t>(f);
    std::vector<double> col;
    col.reserve(population.size());
    for (const auto& fv : population) col.push_back(fv.get(f));
    const auto z = standardize_column(col);
    for (std::size_t i = 0; i < out.size(); ++i) out[i][k] = z[i];
  }
  return out;
}

double composite_score(const ZScores& z, const WeightVector& w) {
  double s = 0.0;
  for (Feature f : kAllFeatures) s += w.weight(f) * z[static_cast<std::size_t>(f)];
  return s;
}

double percentile(std::vector<double> values, double pct) {
  if (values.empty()) throw InvalidInput("percentile of an empty sample");
  if (!(pct >= 0.0 && pct <= 100.0)) throw InvalidInput("percentile must lie in [0, 100]");
  std::sort(values.begin(), values.end());
  const double pos = pct / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

Selection select(std::span<FitnessReport> reports, const WeightVector& w, const SelectionOptions& opts) {
  for (auto& r : reports) {
    r.composite_pass = !(r.composite < opts.threshold);
    r.deficiency_pass = true;
  }
  if (opts.percentile && !reports.empty()) {
    for (Feature f : kAllFeatures) {
      const double wf = w.weight(f);
      if (wf == 0.0) continue;
      const auto k = static_cast<std::size_t>(f);
      std::vector<double> contrib;
      contrib.reserve(reports.size());
      for (const auto& r : reports) contrib.push_back(wf * r.standardized[k]);
      if (all_equal(contrib)) continue;
      const double cut = percentile(contrib, *opts.percentile);
      for (std::size_t i = 0; i < reports.size(); ++i) {
        if (contrib[i] <= cut) reports[i].deficiency_pass = false;
      }
    }
  }
  Selection out;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    auto& r = reports[i];
    r.selected = r.composite_pass && r.deficiency_pass;
    (r.selected ? out.qualified : out.rejected).push_back(i);
  }
  return out;
}

Selection rescore(std::vector<BenchmarkItem>& items, const WeightVector& w, const SelectionOptions& opts) {
  std::vector<FeatureVector> features;
  features.reserve(items.size());
  for (const auto& item : items) {
    if (!item.features) throw InvalidInput("item " + item.id() + " has no features to score");
    features.push_back(*item.features);
  }
  std::vector<ZScores> z = items.size() >= 2 ? standardize(features) : std::vector<ZScores>(items.size());
  std::vector<FitnessReport> reports(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    reports[i].raw = features[i];
    reports[i].standardized = z[i];
    reports[i].composite = composite_score(z[i], w);
  }
  const Selection sel = select(reports, w, opts);
  for (std::size_t i = 0; i < items.size(); ++i) items[i].fitness = reports[i];
  return sel;
}

Selection score_population(std::vector<BenchmarkItem>& items, const WeightVector& w, Referee& referee,
                           const SelectionOptions& opts, std::size_t jobs) {
  std::vector<std::optional<int>> scores(items.size());
  parallel_for(items.size(), jobs, [&](std::size_t i) {
    const std::string text = items[i].text();
    if (text.empty()) throw InvalidInput("item " + items[i].id() + " has no text to score");
    scores[i] = referee.score(text);
  });

  std::vector<int> valid;
  for (const auto& s : scores) {
    if (s) valid.push_back(*s);
  }
  int median = 0;
  if (valid.size() < items.size()) {
    if (valid.empty()) throw ParseError("the referee gave no parsable score for any item");
    std::sort(valid.begin(), valid.end());
    median = valid[(valid.size() - 1) / 2];
  }

  for (std::size_t i = 0; i < items.size(); ++i) {
    auto& item = items[i];
    std::erase(item.flags, std::string(kImputedFlag));
    if (!scores[i]) {
      spdlog::warn("referee: no score for {}; imputing population median {}", item.id(), median);
      item.add_flag(std::string(kImputedFlag));
    }
    item.features = extract_features(item, scores[i].value_or(median));
  }
  return rescore(items, w, opts);
}

}  // namespace evolmath
