#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <string>

#include "curvquant/expr.hpp"

namespace curvquant {

using Complex = std::complex<double>;
using Bindings = std::map<std::string, Complex>;

/// A free symbol had no value.
class UnboundSymbol : public std::invalid_argument {
 public:
  explicit UnboundSymbol(const std::string& name)
      : std::invalid_argument("unbound symbol '" + name + "'"), symbol_(name) {}
  const std::string& symbol() const { return symbol_; }

 private:
  std::string symbol_;
};

/// Singular evaluation (division by zero, logarithm of a non-positive real,
/// non-finite result).
class EvaluationFault : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

namespace detail {

inline Complex checked(Complex v, const char* what) {
  if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
    throw EvaluationFault(std::string("non-finite result in ") + what);
  return v;
}

inline Complex int_power(Complex b, std::int64_t n) {
  if (n < 0) {
    if (b == 0.0) throw EvaluationFault("division by zero");
    return Complex(1.0) / int_power(b, -n);
  }
  if (b.imag() == 0.0) {
    double r = 1.0, x = b.real();
    while (n > 0) {
      if (n & 1) r *= x;
      n >>= 1;
      if (n > 0) x *= x;
    }
    return r;
  }
  Complex r = 1.0;
  while (n > 0) {
    if (n & 1) r *= b;
    n >>= 1;
    if (n > 0) b *= b;
  }
  return r;
}

inline Complex eval(const Expr& e, const Bindings& b) {
  switch (e.kind()) {
    case Kind::constant:
      return e.value().value();
    case Kind::symbol: {
      auto it = b.find(e.name());
      if (it == b.end()) throw UnboundSymbol(e.name());
      return it->second;
    }
    case Kind::negation:
      return -eval(e.arg(0), b);
    case Kind::sum: {
      Complex s = 0.0;
      for (const auto& a : e.args()) s += eval(a, b);
      return checked(s, "sum");
    }
    case Kind::product: {
      Complex p = 1.0;
      for (const auto& a : e.args()) {
        Complex v = eval(a, b);
        p = (p.imag() == 0.0 && v.imag() == 0.0) ? Complex(p.real() * v.real()) : p * v;
      }
      return checked(p, "product");
    }
    case Kind::quotient: {
      Complex n = eval(e.arg(0), b);
      Complex d = eval(e.arg(1), b);
      if (d == 0.0) throw EvaluationFault("division by zero");
      return checked(n / d, "quotient");
    }
    case Kind::power: {
      const Expr& x = e.arg(1);
      Complex base = eval(e.arg(0), b);
      if (x.is_constant() && x.value().is_exact_integer())
        return checked(int_power(base, x.value().re().num()), "power");
      Complex ex = eval(x, b);
      if (base == 0.0) {
        if (ex.real() > 0) return 0.0;
        throw EvaluationFault("zero raised to a non-positive power");
      }
      if (base.imag() == 0.0 && base.real() > 0 && ex.imag() == 0.0)
        return checked(std::pow(base.real(), ex.real()), "power");
      return checked(std::exp(ex * std::log(base)), "power");
    }
    case Kind::function: {
      Complex u = eval(e.arg(0), b);
      const bool real = u.imag() == 0.0;
      const double x = u.real();
      Complex r;
      switch (e.func()) {
        case Func::sin: r = real ? Complex(std::sin(x)) : std::sin(u); break;
        case Func::cos: r = real ? Complex(std::cos(x)) : std::cos(u); break;
        case Func::tan: r = real ? Complex(std::tan(x)) : std::tan(u); break;
        case Func::sinh: r = real ? Complex(std::sinh(x)) : std::sinh(u); break;
        case Func::cosh: r = real ? Complex(std::cosh(x)) : std::cosh(u); break;
        case Func::exp: r = real ? Complex(std::exp(x)) : std::exp(u); break;
        case Func::ln:
          if (real && x <= 0) throw EvaluationFault("logarithm of a non-positive real");
          if (u == 0.0) throw EvaluationFault("logarithm of zero");
          r = real ? Complex(std::log(x)) : std::log(u);
          break;
        case Func::sqrt:
          r = real ? (x >= 0 ? Complex(std::sqrt(x)) : Complex(0.0, std::sqrt(-x))) : std::sqrt(u);
          break;
        case Func::abs: r = std::abs(u); break;
      }
      return checked(r, func_name(e.func()).data());
    }
  }
  return 0.0;
}

}  // namespace detail

/// Double-precision evaluation. Throws UnboundSymbol or EvaluationFault.
inline Complex evaluate(const Expr& e, const Bindings& bindings) { return detail::eval(e, bindings); }

enum class Boundary { open, periodic, polar };

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
  Boundary boundary = Boundary::open;
};

/// Sampling box for the free symbols of an expression.
class Domain {
 public:
  /// Margin kept from the ends of a polar coordinate (coordinate singularity).
  static constexpr double kPolarMargin = 1e-3;

  Domain() = default;
  Domain(std::initializer_list<std::pair<const std::string, Interval>> init) {
    for (const auto& [name, iv] : init) add(name, iv);
  }

  Domain& add(const std::string& name, Interval iv) {
    if (!(iv.hi > iv.lo)) throw std::invalid_argument("empty interval for '" + name + "'");
    if (iv.boundary == Boundary::polar && iv.hi - iv.lo <= 2 * kPolarMargin)
      throw std::invalid_argument("polar interval too short for '" + name + "'");
    intervals_[name] = iv;
    return *this;
  }
  bool contains(const std::string& name) const { return intervals_.count(name) != 0; }
  const Interval& at(const std::string& name) const { return intervals_.at(name); }
  const std::map<std::string, Interval>& intervals() const { return intervals_; }

  /// One point strictly inside the box.
  Bindings sample(std::mt19937_64& rng) const {
    Bindings b;
    for (const auto& [name, iv] : intervals_) {
      // 53 random bits, offset by half a unit so u is never 0 or 1.
      double u = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
      double lo = iv.lo, hi = iv.hi;
      if (iv.boundary == Boundary::polar) {
        lo += kPolarMargin;
        hi -= kPolarMargin;
      }
      b[name] = lo + (hi - lo) * u;
    }
    return b;
  }

 private:
  std::map<std::string, Interval> intervals_;
};

enum class Verdict { equal, different, inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::equal: return "equal";
    case Verdict::different: return "different";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

struct Comparison {
  Verdict verdict = Verdict::equal;
  Bindings witness;  ///< offending sample point for different/inconclusive
  Complex lhs{}, rhs{};
};

struct SamplingOptions {
  int points = 64;
  int retries = 8;
  double tolerance = 1e-9;
};

/// Randomized equality: |a-b| <= tol*(1+|a|+|b|) at `points` seeded samples.
/// A point whose evaluation faults is redrawn up to `retries` times before
/// the comparison is declared inconclusive.
inline Comparison compare(const Expr& a, const Expr& b, const Domain& dom, std::uint64_t seed,
                          SamplingOptions opt = {}) {
  for (const auto& s : free_symbols(a))
    if (!dom.contains(s)) throw UnboundSymbol(s);
  for (const auto& s : free_symbols(b))
    if (!dom.contains(s)) throw UnboundSymbol(s);
  std::mt19937_64 rng(seed);
  Comparison out;
  for (int p = 0; p < opt.points; ++p) {
    bool done = false;
    Bindings point;
    for (int attempt = 0; attempt <= opt.retries && !done; ++attempt) {
      point = dom.sample(rng);
      try {
        Complex va = evaluate(a, point);
        Complex vb = evaluate(b, point);
        done = true;
        if (std::abs(va - vb) > opt.tolerance * (1.0 + std::abs(va) + std::abs(vb))) {
          out.verdict = Verdict::different;
          out.witness = point;
          out.lhs = va;
          out.rhs = vb;
          return out;
        }
      } catch (const EvaluationFault&) {
      }
    }
    if (!done) {
      out.verdict = Verdict::inconclusive;
      out.witness = point;
      return out;
    }
  }
  return out;
}

inline bool equivalent(const Expr& a, const Expr& b, const Domain& dom, std::uint64_t seed,
                       SamplingOptions opt = {}) {
  return compare(a, b, dom, seed, opt).verdict == Verdict::equal;
}

inline std::string describe(const Bindings& point) {
  std::string s;
  for (const auto& [name, v] : point) {
    if (!s.empty()) s += ", ";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s=%.12g", name.c_str(), v.real());
    s += buf;
  }
  return s;
}

}  // namespace curvquant
