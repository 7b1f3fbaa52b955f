#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>

namespace curvquant {

/// Exact rational with 64-bit numerator and positive denominator.
/// Arithmetic reports overflow through std::nullopt so callers can fall back
/// to floating point.
class Rational {
 public:
  constexpr Rational() = default;
  constexpr Rational(std::int64_t n) : num_(n) {}  // NOLINT(implicit)
  Rational(std::int64_t n, std::int64_t d) : num_(n), den_(d) {
    if (d == 0) throw std::domain_error("rational with zero denominator");
    normalize();
  }

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  bool is_zero() const { return num_ == 0; }
  bool is_one() const { return num_ == 1 && den_ == 1; }
  bool is_integer() const { return den_ == 1; }
  double to_double() const {
    return static_cast<double>(num_) / static_cast<double>(den_);
  }

  static std::optional<Rational> add(const Rational& a, const Rational& b) {
    __int128 n = static_cast<__int128>(a.num_) * b.den_ +
                 static_cast<__int128>(b.num_) * a.den_;
    __int128 d = static_cast<__int128>(a.den_) * b.den_;
    return from_wide(n, d);
  }
  static std::optional<Rational> mul(const Rational& a, const Rational& b) {
    __int128 n = static_cast<__int128>(a.num_) * b.num_;
    __int128 d = static_cast<__int128>(a.den_) * b.den_;
    return from_wide(n, d);
  }
  static std::optional<Rational> inverse(const Rational& a) {
    if (a.num_ == 0) return std::nullopt;
    return from_wide(a.den_, a.num_);
  }
  Rational operator-() const {
    Rational r;
    r.num_ = -num_;
    r.den_ = den_;
    return r;
  }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend bool operator<(const Rational& a, const Rational& b) {
    return static_cast<__int128>(a.num_) * b.den_ <
           static_cast<__int128>(b.num_) * a.den_;
  }

  std::string to_string() const {
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
  }

  /// Parses "n" or "n/d" (optionally signed); throws std::invalid_argument.
  static Rational parse(const std::string& text) {
    auto slash = text.find('/');
    auto to_int = [&](const std::string& s) {
      std::size_t used = 0;
      long long v = 0;
      try {
        v = std::stoll(s, &used);
      } catch (const std::exception&) {
        throw std::invalid_argument("not a rational: '" + text + "'");
      }
      if (used != s.size()) throw std::invalid_argument("not a rational: '" + text + "'");
      return static_cast<std::int64_t>(v);
    };
    if (slash == std::string::npos) return Rational(to_int(text));
    auto d = to_int(text.substr(slash + 1));
    if (d == 0) throw std::invalid_argument("zero denominator in '" + text + "'");
    return Rational(to_int(text.substr(0, slash)), d);
  }

 private:
  static std::optional<Rational> from_wide(__int128 n, __int128 d) {
    if (d < 0) {
      n = -n;
      d = -d;
    }
    __int128 a = n < 0 ? -n : n;
    __int128 b = d;
    while (b != 0) {
      __int128 t = a % b;
      a = b;
      b = t;
    }
    if (a > 1) {
      n /= a;
      d /= a;
    }
    constexpr __int128 limit = static_cast<__int128>(INT64_MAX);
    if (n > limit || n < -limit || d > limit) return std::nullopt;
    Rational r;
    r.num_ = static_cast<std::int64_t>(n);
    r.den_ = static_cast<std::int64_t>(d);
    return r;
  }

  void normalize() {
    if (den_ < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    auto g = std::gcd(num_ < 0 ? -num_ : num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
  }

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

/// Complex scalar constant. Exact (a pair of rationals) while every
/// operation stays representable, inexact (complex<double>) otherwise.
class Number {
 public:
  Number() = default;
  Number(Rational re, Rational im = Rational(0)) : re_(re), im_(im) {}  // NOLINT
  static Number integer(std::int64_t n) { return Number(Rational(n)); }
  static Number rational(std::int64_t n, std::int64_t d) { return Number(Rational(n, d)); }
  static Number imaginary_unit() { return Number(Rational(0), Rational(1)); }
  static Number inexact(std::complex<double> v) {
    Number n;
    n.exact_ = false;
    n.value_ = v;
    return n;
  }
  /// Integral doubles within ±2^31 become exact; everything else is inexact.
  static Number from_double(double v) {
    if (std::isfinite(v) && v == std::floor(v) && std::fabs(v) <= 2147483648.0)
      return integer(static_cast<std::int64_t>(v));
    return inexact({v, 0.0});
  }

  bool exact() const { return exact_; }
  const Rational& re() const { return re_; }
  const Rational& im() const { return im_; }

  std::complex<double> value() const {
    if (!exact_) return value_;
    return {re_.to_double(), im_.to_double()};
  }

  bool is_zero() const { return exact_ ? re_.is_zero() && im_.is_zero() : value_ == 0.0; }
  bool is_one() const {
    return exact_ ? re_.is_one() && im_.is_zero() : value_ == std::complex<double>(1.0, 0.0);
  }
  bool is_minus_one() const {
    return exact_ ? re_ == Rational(-1) && im_.is_zero()
                  : value_ == std::complex<double>(-1.0, 0.0);
  }
  bool is_real() const { return exact_ ? im_.is_zero() : value_.imag() == 0.0; }
  bool is_exact_integer() const { return exact_ && im_.is_zero() && re_.is_integer(); }
  /// Real part is strictly negative (used for sign-aware printing).
  bool is_negative_real() const {
    if (!is_real()) return false;
    return exact_ ? re_ < Rational(0) : value_.real() < 0.0;
  }

  friend Number operator+(const Number& a, const Number& b) {
    if (a.exact_ && b.exact_) {
      auto r = Rational::add(a.re_, b.re_);
      auto i = Rational::add(a.im_, b.im_);
      if (r && i) return Number(*r, *i);
    }
    return inexact(a.value() + b.value());
  }
  friend Number operator*(const Number& a, const Number& b) {
    if (a.exact_ && b.exact_) {
      auto rr = Rational::mul(a.re_, b.re_);
      auto ii = Rational::mul(a.im_, b.im_);
      auto ri = Rational::mul(a.re_, b.im_);
      auto ir = Rational::mul(a.im_, b.re_);
      if (rr && ii && ri && ir) {
        auto re = Rational::add(*rr, -*ii);
        auto im = Rational::add(*ri, *ir);
        if (re && im) return Number(*re, *im);
      }
    }
    return inexact(a.value() * b.value());
  }
  Number operator-() const {
    if (exact_) return Number(-re_, -im_);
    return inexact(-value_);
  }
  friend Number operator-(const Number& a, const Number& b) { return a + (-b); }

  /// Multiplicative inverse; nullopt for zero.
  std::optional<Number> inverse() const {
    if (is_zero()) return std::nullopt;
    if (exact_) {
      // 1/(a+bi) = (a-bi)/(a^2+b^2)
      auto aa = Rational::mul(re_, re_);
      auto bb = Rational::mul(im_, im_);
      if (aa && bb) {
        auto norm = Rational::add(*aa, *bb);
        if (norm) {
          auto inv = Rational::inverse(*norm);
          if (inv) {
            auto r = Rational::mul(re_, *inv);
            auto i = Rational::mul(-im_, *inv);
            if (r && i) return Number(*r, *i);
          }
        }
      }
    }
    return inexact(1.0 / value());
  }

  /// Integer power; nullopt when the result is singular (0^-n).
  std::optional<Number> pow(std::int64_t n) const {
    if (n < 0) {
      auto inv = inverse();
      if (!inv) return std::nullopt;
      return inv->pow(-n);
    }
    Number result = integer(1);
    Number base = *this;
    while (n > 0) {
      if (n & 1) result = result * base;
      n >>= 1;
      if (n > 0) base = base * base;
    }
    return result;
  }

  Number conj() const {
    if (exact_) return Number(re_, -im_);
    return inexact(std::conj(value_));
  }

  /// Total order used for canonical sorting (not a numeric comparison).
  friend bool operator<(const Number& a, const Number& b) {
    auto va = a.value();
    auto vb = b.value();
    if (va.real() != vb.real()) return va.real() < vb.real();
    if (va.imag() != vb.imag()) return va.imag() < vb.imag();
    return a.exact_ && !b.exact_;
  }
  friend bool operator==(const Number& a, const Number& b) {
    if (a.exact_ != b.exact_) return false;
    if (a.exact_) return a.re_ == b.re_ && a.im_ == b.im_;
    return a.value_ == b.value_;
  }

 private:
  bool exact_ = true;
  Rational re_{0};
  Rational im_{0};
  std::complex<double> value_{};
};

}  // namespace curvquant
