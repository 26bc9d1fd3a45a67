#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "evolmath/algebra/rational.hpp"

namespace evolmath::algebra {

/// Dense row-major matrix of exact rationals.
class RationalMatrix {
 public:
  RationalMatrix() = default;
  RationalMatrix(std::size_t rows, std::size_t cols);
  RationalMatrix(std::initializer_list<std::initializer_list<std::int64_t>> rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return rows_ == 0 || cols_ == 0; }

  Rational& at(std::size_t r, std::size_t c) { return entries_[r * cols_ + c]; }
  const Rational& at(std::size_t r, std::size_t c) const { return entries_[r * cols_ + c]; }

  std::span<const Rational> row(std::size_t r) const {
    return {entries_.data() + r * cols_, cols_};
  }

  /// Appends a row; the first row fixes the column count of an empty matrix.
  void append_row(std::span<const Rational> values);
  RationalMatrix without_row(std::size_t r) const;
  RationalMatrix transpose() const;

  std::vector<Rational> multiply(std::span<const Rational> x) const;

  friend bool operator==(const RationalMatrix&, const RationalMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Rational> entries_;
};

/// Rank by fraction-free (Bareiss) elimination over the integers.  Rows are
/// first cleared of denominators; every intermediate division is exact.
std::size_t rank(const RationalMatrix& m);

/// Unique solution of a*x = b.  Throws SingularSystem when a is singular.
std::vector<Rational> solve_unique(const RationalMatrix& a, std::span<const Rational> b);

/// True iff v is a rational linear combination of the rows of m.  A matrix
/// with no rows spans only the zero vector.
bool in_row_space(std::span<const Rational> v, const RationalMatrix& m);

}  // namespace evolmath::algebra
