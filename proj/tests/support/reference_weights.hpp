#pragma once

// Reference feature statistics and a synthetic data set that reproduces them:
// N rows whose feature columns have exactly the listed Pearson correlation
// with the accuracy column.

#include <array>
#include <cmath>
#include <cstdio>
#include <cstddef>
#include <numeric>
#include <random>
#include <string>
#include <vector>

namespace reference_weights {

struct Row {
  const char* feature;
  double r;
  double p;
  double weight;  // expected; 0 for excluded rows
  bool retained;
};

inline constexpr std::array<Row, 10> kRows = {{
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

inline constexpr double kWeightTolerance = 0.005;
inline constexpr std::size_t kRowsN = 300;

namespace detail {

inline void center(std::vector<double>& v) {
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  for (auto& x : v) x -= mean;
}

inline void normalize(std::vector<double>& v) {
  const double norm = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
  for (auto& x : v) x /= norm;
}

}  // namespace detail

struct DataSet {
  std::vector<double> accuracy;
  std::vector<std::vector<double>> columns;  // one per kRows entry
};

/// Accuracy in [0, 1]; each column is r*a + sqrt(1-r^2)*e with a, e centered,
/// unit-norm and orthogonal, then shifted to a positive range.
inline DataSet make_dataset(std::size_t n = kRowsN, unsigned seed = 7) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  DataSet ds;
  for (std::size_t i = 0; i < n; ++i) ds.accuracy.push_back(unif(gen));
  std::vector<double> a = ds.accuracy;
  detail::center(a);
  detail::normalize(a);
  for (const auto& row : kRows) {
    std::vector<double> e(n);
    for (auto& x : e) x = normal(gen);
    detail::center(e);
    const double proj = std::inner_product(e.begin(), e.end(), a.begin(), 0.0);
    for (std::size_t i = 0; i < n; ++i) e[i] -= proj * a[i];
    detail::normalize(e);
    std::vector<double> col(n);
    const double s = std::sqrt(1.0 - row.r * row.r);
    for (std::size_t i = 0; i < n; ++i) col[i] = 10.0 + 20.0 * (row.r * a[i] + s * e[i]);
    ds.columns.push_back(std::move(col));
  }
  return ds;
}

inline std::string to_csv(const DataSet& ds) {
  std::string out = "accuracy";
  for (const auto& row : kRows) out += std::string(",") + row.feature;
  out += "\n";
  char buf[64];
  for (std::size_t i = 0; i < ds.accuracy.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", ds.accuracy[i]);
    out += buf;
    for (const auto& col : ds.columns) {
      std::snprintf(buf, sizeof buf, ",%.17g", col[i]);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

}  // namespace reference_weights
