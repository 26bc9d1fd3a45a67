#include "evolmath/algebra/matrix.hpp"

#include <algorithm>
#include <string>
#include <utility>

#include "evolmath/error.hpp"

namespace evolmath::algebra {

RationalMatrix::RationalMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), entries_(rows * cols) {}

RationalMatrix::RationalMatrix(std::initializer_list<std::initializer_list<std::int64_t>> rows) {
  for (const auto& r : rows) {
    std::vector<Rational> values(r.begin(), r.end());
    append_row(values);
  }
}

void RationalMatrix::append_row(std::span<const Rational> values) {
  if (rows_ == 0 && entries_.empty()) {
    cols_ = values.size();
  } else if (values.size() != cols_) {
    throw InvalidInput("append_row: expected " + std::to_string(cols_) + " columns, got " +
                       std::to_string(values.size()));
  }
  entries_.insert(entries_.end(), values.begin(), values.end());
  ++rows_;
}

RationalMatrix RationalMatrix::without_row(std::size_t r) const {
  if (r >= rows_) throw InvalidInput("without_row: index out of range");
  RationalMatrix out(rows_ - 1, cols_);
  for (std::size_t i = 0, k = 0; i < rows_; ++i) {
    if (i == r) continue;
    std::copy(row(i).begin(), row(i).end(), out.entries_.begin() + k * cols_);
    ++k;
  }
  return out;
}

RationalMatrix RationalMatrix::transpose() const {
  RationalMatrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t.at(c, r) = at(r, c);
  return t;
}

std::vector<Rational> RationalMatrix::multiply(std::span<const Rational> x) const {
  if (x.size() != cols_) throw InvalidInput("multiply: dimension mismatch");
  std::vector<Rational> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) out[r] += at(r, c) * x[c];
  return out;
}

namespace {

using IntRows = std::vector<std::vector<BigInt>>;

// Scales every row by the lcm of its denominators.  Row scaling preserves rank.
IntRows clear_denominators(const RationalMatrix& m) {
  IntRows out(m.rows(), std::vector<BigInt>(m.cols()));
  for (std::size_t r = 0; r < m.rows(); ++r) {
    BigInt l = 1;
    for (const auto& q : m.row(r)) l = boost::multiprecision::lcm(l, q.denominator());
    for (std::size_t c = 0; c < m.cols(); ++c) {
      const auto& q = m.at(r, c);
      out[r][c] = q.numerator() * (l / q.denominator());
    }
  }
  return out;
}

std::size_t bareiss_rank(IntRows a, std::size_t cols) {
  const std::size_t rows = a.size();
  BigInt prev = 1;
  std::size_t rank = 0;
  for (std::size_t col = 0; col < cols && rank < rows; ++col) {
    std::size_t pivot = rank;
    while (pivot < rows && a[pivot][col].is_zero()) ++pivot;
    if (pivot == rows) continue;
    std::swap(a[pivot], a[rank]);
    const BigInt& p = a[rank][col];
    for (std::size_t i = rank + 1; i < rows; ++i) {
      for (std::size_t j = col + 1; j < cols; ++j) {
        a[i][j] = (p * a[i][j] - a[i][col] * a[rank][j]) / prev;
      }
      a[i][col] = 0;
    }
    prev = p;
    ++rank;
  }
  return rank;
}

}  // namespace

std::size_t rank(const RationalMatrix& m) {
  if (m.empty()) throw InvalidInput("rank: empty matrix");
  return bareiss_rank(clear_denominators(m), m.cols());
}

std::vector<Rational> solve_unique(const RationalMatrix& a, std::span<const Rational> b) {
  const std::size_t n = a.rows();
  if (n == 0 || a.cols() != n) throw InvalidInput("solve_unique: matrix must be square and non-empty");
  if (b.size() != n) throw InvalidInput("solve_unique: rhs length does not match matrix");

  // Gauss-Jordan on the augmented matrix [a | b].
  std::vector<std::vector<Rational>> aug(n, std::vector<Rational>(n + 1));
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) aug[r][c] = a.at(r, c);
    aug[r][n] = b[r];
  }
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    while (pivot < n && aug[pivot][col].is_zero()) ++pivot;
    if (pivot == n) throw SingularSystem("solve_unique: matrix is singular");
    std::swap(aug[pivot], aug[col]);
    const Rational inv = Rational(1) / aug[col][col];
    for (std::size_t j = col; j <= n; ++j) aug[col][j] *= inv;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == col || aug[i][col].is_zero()) continue;
      const Rational factor = aug[i][col];
      for (std::size_t j = col; j <= n; ++j) aug[i][j] -= factor * aug[col][j];
    }
  }
  std::vector<Rational> x(n);
  for (std::size_t r = 0; r < n; ++r) x[r] = aug[r][n];
  return x;
}

bool in_row_space(std::span<const Rational> v, const RationalMatrix& m) {
  if (m.rows() == 0) {
    return std::all_of(v.begin(), v.end(), [](const Rational& q) { return q.is_zero(); });
  }
  if (v.size() != m.cols()) throw InvalidInput("in_row_space: dimension mismatch");
  if (v.empty()) return true;
  RationalMatrix extended = m;
  extended.append_row(v);
  return rank(extended) == rank(m);
}

}  // namespace evolmath::algebra
