#include "evolmath/algebra/rational.hpp"

#include <limits>

#include "evolmath/error.hpp"

namespace evolmath::algebra {

Rational::Rational(BigInt numerator, BigInt denominator)
    : num_(std::move(numerator)), den_(std::move(denominator)) {
  if (den_.is_zero()) throw InvalidInput("Rational: zero denominator");
  normalize();
}

void Rational::normalize() {
  if (den_.sign() < 0) {
    num_ = -num_;
    den_ = -den_;
  }
  if (num_.is_zero()) {
    den_ = 1;
    return;
  }
  BigInt g = boost::multiprecision::gcd(num_, den_);
  if (g < 0) g = -g;
  if (g != 1) {
    num_ /= g;
    den_ /= g;
  }
}

std::int64_t Rational::to_int64() const {
  if (den_ != 1) throw InvalidInput("Rational " + str() + " is not an integer");
  if (num_ > std::numeric_limits<std::int64_t>::max() ||
      num_ < std::numeric_limits<std::int64_t>::min()) {
    throw InvalidInput("Rational " + str() + " does not fit in 64 bits");
  }
  return num_.convert_to<std::int64_t>();
}

std::string Rational::str() const { return num_.str() + "/" + den_.str(); }

Rational Rational::parse(std::string_view text) {
  const auto slash = text.find('/');
  try {
    if (slash == std::string_view::npos) return Rational(BigInt(std::string(text)));
    return Rational(BigInt(std::string(text.substr(0, slash))),
                    BigInt(std::string(text.substr(slash + 1))));
  } catch (const InvalidInput&) {
    throw;
  } catch (const std::exception&) {
    throw ParseError("malformed rational \"" + std::string(text) + "\"");
  }
}

Rational Rational::operator-() const {
  Rational r = *this;
  r.num_ = -r.num_;
  return r;
}

Rational& Rational::operator+=(const Rational& rhs) {
  num_ = num_ * rhs.den_ + rhs.num_ * den_;
  den_ *= rhs.den_;
  normalize();
  return *this;
}

Rational& Rational::operator-=(const Rational& rhs) {
  num_ = num_ * rhs.den_ - rhs.num_ * den_;
  den_ *= rhs.den_;
  normalize();
  return *this;
}

Rational& Rational::operator*=(const Rational& rhs) {
  num_ *= rhs.num_;
  den_ *= rhs.den_;
  normalize();
  return *this;
}

Rational& Rational::operator/=(const Rational& rhs) {
  if (rhs.is_zero()) throw InvalidInput("Rational: division by zero");
  num_ *= rhs.den_;
  den_ *= rhs.num_;
  normalize();
  return *this;
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
  const BigInt lhs = a.num_ * b.den_;
  const BigInt rhs = b.num_ * a.den_;
  if (lhs < rhs) return std::strong_ordering::less;
  if (lhs > rhs) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

}  // namespace evolmath::algebra
