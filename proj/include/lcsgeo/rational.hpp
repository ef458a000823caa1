#pragma once

#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>

namespace lcsgeo {

/// Exact rational number with 64-bit numerator/denominator. Operations that
/// would overflow report failure instead of wrapping, so callers can fall back
/// to leaving an expression unfolded.
class Rational {
public:
  Rational() = default;
  Rational(long long num, long long den = 1) : n_(num), d_(den) {
    if (d_ == 0) throw std::invalid_argument("rational with zero denominator");
    normalize();
  }

  long long num() const { return n_; }
  long long den() const { return d_; }

  bool is_zero() const { return n_ == 0; }
  bool is_one() const { return n_ == 1 && d_ == 1; }
  bool is_integer() const { return d_ == 1; }

  double to_double() const {
    return static_cast<double>(n_) / static_cast<double>(d_);
  }

  Rational negated() const {
    Rational r;
    r.n_ = -n_;
    r.d_ = d_;
    return r;
  }

  static std::optional<Rational> add(const Rational& a, const Rational& b) {
    return make_checked(i128(a.n_) * b.d_ + i128(b.n_) * a.d_,
                        i128(a.d_) * b.d_);
  }
  static std::optional<Rational> sub(const Rational& a, const Rational& b) {
    return make_checked(i128(a.n_) * b.d_ - i128(b.n_) * a.d_,
                        i128(a.d_) * b.d_);
  }
  static std::optional<Rational> mul(const Rational& a, const Rational& b) {
    return make_checked(i128(a.n_) * b.n_, i128(a.d_) * b.d_);
  }
  static std::optional<Rational> div(const Rational& a, const Rational& b) {
    if (b.n_ == 0) return std::nullopt;
    return make_checked(i128(a.n_) * b.d_, i128(a.d_) * b.n_);
  }

  /// Integer power; negative exponents invert. Fails on 0^negative or overflow.
  static std::optional<Rational> pow(const Rational& base, long long k) {
    if (k == 0) return Rational(1);
    Rational b = base;
    if (k < 0) {
      if (b.n_ == 0) return std::nullopt;
      b = Rational(b.d_ >= 0 ? b.d_ : -b.d_, b.n_ >= 0 ? b.n_ : -b.n_);
      if (base.n_ < 0) b.n_ = -b.n_;
      b.normalize();
      k = -k;
    }
    Rational acc(1);
    for (long long i = 0; i < k; ++i) {
      auto next = mul(acc, b);
      if (!next) return std::nullopt;
      acc = *next;
      if (i > 62) return std::nullopt; // exponent absurdly large
    }
    return acc;
  }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.n_ == b.n_ && a.d_ == b.d_;
  }

  std::string str() const {
    if (d_ == 1) return std::to_string(n_);
    return std::to_string(n_) + "/" + std::to_string(d_);
  }

private:
  using i128 = __int128;

  static std::optional<Rational> make_checked(i128 n, i128 d) {
    if (d == 0) return std::nullopt;
    if (d < 0) {
      n = -n;
      d = -d;
    }
    i128 g = gcd128(n < 0 ? -n : n, d);
    if (g > 1) {
      n /= g;
      d /= g;
    }
    constexpr i128 lo = std::numeric_limits<long long>::min();
    constexpr i128 hi = std::numeric_limits<long long>::max();
    if (n < lo || n > hi || d > hi) return std::nullopt;
    Rational r;
    r.n_ = static_cast<long long>(n);
    r.d_ = static_cast<long long>(d);
    return r;
  }

  static i128 gcd128(i128 a, i128 b) {
    while (b != 0) {
      i128 t = a % b;
      a = b;
      b = t;
    }
    return a < 0 ? -a : a;
  }

  void normalize() {
    if (d_ < 0) {
      n_ = -n_;
      d_ = -d_;
    }
    long long g = std::gcd(n_ < 0 ? -n_ : n_, d_);
    if (g > 1) {
      n_ /= g;
      d_ /= g;
    }
  }

  long long n_ = 0;
  long long d_ = 1;
};

} // namespace lcsgeo
