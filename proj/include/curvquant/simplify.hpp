#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <vector>

#include "curvquant/expr.hpp"

namespace curvquant {

namespace detail {

inline Expr canon(const Expr& e);
inline Expr add_canon(const std::vector<Expr>& terms);
inline Expr mul_canon(const std::vector<Expr>& factors);
inline Expr pow_canon(const Expr& base, const Expr& exponent);
inline Expr func_canon(Func f, const Expr& arg);

inline bool is_exact_rational(const Expr& e) {
  return e.is_constant() && e.value().exact() && e.value().im().is_zero();
}

// Splits a canonical term into (numeric coefficient, remainder).
inline std::pair<Number, Expr> split_coefficient(const Expr& t) {
  if (t.kind() == Kind::product && t.arg(0).is_constant()) {
    std::vector<Expr> rest(t.args().begin() + 1, t.args().end());
    if (rest.size() == 1) return {t.arg(0).value(), rest[0]};
    return {t.arg(0).value(), Expr::make(Kind::product, std::move(rest))};
  }
  return {Number::integer(1), t};
}

inline void flatten_sum(const Expr& t, const Number& scale, std::vector<std::pair<Number, Expr>>& out,
                        Number& constant) {
  if (t.is_constant()) {
    constant = constant + scale * t.value();
    return;
  }
  if (t.kind() == Kind::sum) {
    for (const auto& a : t.args()) flatten_sum(a, scale, out, constant);
    return;
  }
  auto [c, rest] = split_coefficient(t);
  if (rest.kind() == Kind::sum) {
    // Numeric coefficients distribute over sums.
    for (const auto& a : rest.args()) flatten_sum(a, scale * c, out, constant);
    return;
  }
  out.emplace_back(scale * c, rest);
}

inline Expr add_canon(const std::vector<Expr>& terms) {
  std::vector<std::pair<Number, Expr>> flat;
  Number constant = Number::integer(0);
  for (const auto& t : terms) flatten_sum(t, Number::integer(1), flat, constant);

  std::map<Expr, Number, ExprLess> grouped;
  for (auto& [c, rest] : flat) {
    auto it = grouped.find(rest);
    if (it == grouped.end()) grouped.emplace(rest, c);
    else it->second = it->second + c;
  }
  std::vector<Expr> out;
  for (const auto& [rest, c] : grouped) {
    if (c.is_zero()) continue;
    if (c.is_one()) out.push_back(rest);
    else out.push_back(mul_canon({Expr(c), rest}));
  }
  std::sort(out.begin(), out.end(), ExprLess{});
  if (!constant.is_zero()) out.insert(out.begin(), Expr(constant));
  if (out.empty()) return Expr(0);
  if (out.size() == 1) return out[0];
  return Expr::make(Kind::sum, std::move(out));
}

inline void flatten_product(const Expr& f, std::vector<Expr>& out, Number& constant) {
  if (f.is_constant()) {
    constant = constant * f.value();
    return;
  }
  if (f.kind() == Kind::product) {
    for (const auto& a : f.args()) flatten_product(a, out, constant);
    return;
  }
  out.push_back(f);
}

inline Expr mul_canon(const std::vector<Expr>& factors) {
  std::vector<Expr> flat;
  Number constant = Number::integer(1);
  for (const auto& f : factors) flatten_product(f, flat, constant);
  if (constant.is_zero()) return Expr(0);

  std::map<Expr, std::vector<Expr>, ExprLess> exponents;
  for (const auto& f : flat) {
    if (f.kind() == Kind::power) exponents[f.arg(0)].push_back(f.arg(1));
    else exponents[f].push_back(Expr(1));
  }
  std::vector<Expr> out;
  bool regroup = false;
  for (const auto& [base, exps] : exponents) {
    Expr combined = exps.size() == 1 ? exps[0] : add_canon(exps);
    Expr p = pow_canon(base, combined);
    if (p.is_constant()) {
      constant = constant * p.value();
    } else {
      if (p.kind() == Kind::product) regroup = true;
      out.push_back(p);
    }
  }
  if (constant.is_zero()) return Expr(0);
  if (regroup) {
    out.insert(out.begin(), Expr(constant));
    return mul_canon(out);
  }
  std::sort(out.begin(), out.end(), ExprLess{});
  if (out.empty()) return Expr(constant);
  if (!constant.is_one()) out.insert(out.begin(), Expr(constant));
  if (out.size() == 1) return out[0];
  return Expr::make(Kind::product, std::move(out));
}

inline std::optional<std::int64_t> exact_root(std::int64_t v) {
  if (v < 0 || v > (std::int64_t{1} << 52)) return std::nullopt;
  auto r = static_cast<std::int64_t>(std::llround(std::sqrt(static_cast<double>(v))));
  if (r * r == v) return r;
  return std::nullopt;
}

inline Expr pow_canon(const Expr& base, const Expr& exponent) {
  if (exponent.is_zero()) return Expr(1);
  if (exponent.is_one()) return base;
  if (base.is_one()) return Expr(1);
  const bool int_exp = exponent.is_constant() && exponent.value().is_exact_integer();
  if (base.is_constant()) {
    if (int_exp) {
      if (auto r = base.value().pow(exponent.value().re().num())) return Expr(*r);
      return Expr::pow(base, exponent);  // 0^-n: left for evaluation to fault
    }
    if (base.is_zero() && exponent.is_constant() && exponent.value().value().real() > 0)
      return Expr(0);
    // exact square roots of positive rational squares
    if (is_exact_rational(base) && Rational(0) < base.value().re() && is_exact_rational(exponent) &&
        exponent.value().re().den() == 2 && exponent.value().re().num() * exponent.value().re().num() == 1) {
      auto n = exact_root(base.value().re().num());
      auto d = exact_root(base.value().re().den());
      if (n && d) {
        Number r(Rational(*n, *d));
        if (exponent.value().re().num() < 0) r = *r.inverse();
        return Expr(r);
      }
    }
    return Expr::pow(base, exponent);
  }
  if (base.kind() == Kind::power) {
    const Expr& inner_base = base.arg(0);
    const Expr& inner_exp = base.arg(1);
    if (int_exp) return pow_canon(inner_base, mul_canon({inner_exp, exponent}));
    // (u^(2k))^(±1/2) = |u|^(±k) for real u
    if (is_exact_rational(exponent) && exponent.value().re().den() == 2 &&
        exponent.value().re().num() * exponent.value().re().num() == 1 && inner_exp.is_constant() &&
        inner_exp.value().is_exact_integer() && inner_exp.value().re().num() % 2 == 0 &&
        is_real_valued(inner_base)) {
      auto k = inner_exp.value().re().num() / 2 * exponent.value().re().num();
      return pow_canon(func_canon(Func::abs, inner_base), Expr(k));
    }
  }
  // |u|^(2k) = u^(2k) for real u
  if (int_exp && exponent.value().re().num() % 2 == 0 && base.kind() == Kind::function &&
      base.func() == Func::abs && is_real_valued(base.arg(0)))
    return pow_canon(base.arg(0), exponent);
  if (base.kind() == Kind::product && int_exp) {
    std::vector<Expr> f;
    for (const auto& a : base.args()) f.push_back(pow_canon(a, exponent));
    return mul_canon(f);
  }
  // (c^2 u^(2k) ...)^(±1/2) factor by factor, when every factor is a square
  if (base.kind() == Kind::product && is_exact_rational(exponent) && exponent.value().re().den() == 2 &&
      exponent.value().re().num() * exponent.value().re().num() == 1) {
    auto square = [](const Expr& a) {
      if (a.is_constant()) {
        if (!is_exact_rational(a) || a.value().re() < Rational(0)) return false;
        return exact_root(a.value().re().num()) && exact_root(a.value().re().den());
      }
      return a.kind() == Kind::power && a.arg(1).is_constant() && a.arg(1).value().is_exact_integer() &&
             a.arg(1).value().re().num() % 2 == 0 && is_real_valued(a.arg(0));
    };
    if (std::all_of(base.args().begin(), base.args().end(), square)) {
      std::vector<Expr> f;
      for (const auto& a : base.args()) f.push_back(pow_canon(a, exponent));
      return mul_canon(f);
    }
  }
  return Expr::pow(base, exponent);
}

inline std::optional<Number> eval_constant_function(Func f, const Number& n) {
  if (n.exact() && n.is_zero()) {
    switch (f) {
      case Func::sin: case Func::tan: case Func::sinh: case Func::sqrt: case Func::abs:
        return Number::integer(0);
      case Func::cos: case Func::cosh: case Func::exp:
        return Number::integer(1);
      case Func::ln:
        return std::nullopt;
    }
  }
  if (n.exact() && n.is_one() && f == Func::ln) return Number::integer(0);
  if (f == Func::abs && n.exact() && n.im().is_zero())
    return n.re() < Rational(0) ? -n : n;
  if (n.exact()) return std::nullopt;
  auto v = n.value();
  std::complex<double> r;
  const bool real = v.imag() == 0.0;
  switch (f) {
    case Func::sin: r = real ? std::complex<double>(std::sin(v.real())) : std::sin(v); break;
    case Func::cos: r = real ? std::complex<double>(std::cos(v.real())) : std::cos(v); break;
    case Func::tan: r = real ? std::complex<double>(std::tan(v.real())) : std::tan(v); break;
    case Func::sinh: r = real ? std::complex<double>(std::sinh(v.real())) : std::sinh(v); break;
    case Func::cosh: r = real ? std::complex<double>(std::cosh(v.real())) : std::cosh(v); break;
    case Func::exp: r = real ? std::complex<double>(std::exp(v.real())) : std::exp(v); break;
    case Func::ln:
      if (real && v.real() <= 0) return std::nullopt;
      r = real ? std::complex<double>(std::log(v.real())) : std::log(v);
      break;
    case Func::sqrt: return std::nullopt;
    case Func::abs: r = std::abs(v); break;
  }
  if (!std::isfinite(r.real()) || !std::isfinite(r.imag())) return std::nullopt;
  return Number::inexact(r);
}

inline Expr func_canon(Func f, const Expr& arg) {
  if (f == Func::sqrt) return pow_canon(arg, Expr::rational(1, 2));
  if (arg.is_constant()) {
    if (auto v = eval_constant_function(f, arg.value())) return Expr(*v);
  }
  if (f == Func::abs && arg.kind() == Kind::function && arg.func() == Func::abs) return arg;
  if (f == Func::exp && arg.kind() == Kind::function && arg.func() == Func::ln) return arg.arg(0);
  return Expr::apply(f, arg);
}

inline Expr canon(const Expr& e) {
  switch (e.kind()) {
    case Kind::constant:
    case Kind::symbol:
      return e;
    case Kind::negation:
      return mul_canon({Expr(-1), canon(e.arg(0))});
    case Kind::quotient:
      return mul_canon({canon(e.arg(0)), pow_canon(canon(e.arg(1)), Expr(-1))});
    case Kind::sum: {
      std::vector<Expr> t;
      t.reserve(e.args().size());
      for (const auto& a : e.args()) t.push_back(canon(a));
      return add_canon(t);
    }
    case Kind::product: {
      std::vector<Expr> f;
      f.reserve(e.args().size());
      for (const auto& a : e.args()) f.push_back(canon(a));
      return mul_canon(f);
    }
    case Kind::power:
      return pow_canon(canon(e.arg(0)), canon(e.arg(1)));
    case Kind::function:
      return func_canon(e.func(), canon(e.arg(0)));
  }
  return e;
}

}  // namespace detail

/// Best-effort normalization: constant folding, flattening, collection of
/// like terms and powers. Iterated to a fixed point, so simplify is
/// idempotent. Equality of values is decided by `equivalent`, not here.
inline Expr simplify(const Expr& e) {
  Expr current = detail::canon(e);
  for (int i = 0; i < 16; ++i) {
    Expr next = detail::canon(current);
    if (structurally_equal(next, current)) return current;
    current = next;
  }
  return current;
}

}  // namespace curvquant
