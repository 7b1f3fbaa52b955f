#pragma once

#include <map>
#include <string>

#include "curvquant/simplify.hpp"

namespace curvquant {

namespace detail {

inline Expr derive(const Expr& e, const std::string& v) {
  switch (e.kind()) {
    case Kind::constant:
      return Expr(0);
    case Kind::symbol:
      return Expr(e.name() == v ? 1 : 0);
    case Kind::negation:
      return -derive(e.arg(0), v);
    case Kind::sum: {
      std::vector<Expr> t;
      for (const auto& a : e.args())
        if (depends_on(a, v)) t.push_back(derive(a, v));
      if (t.empty()) return Expr(0);
      return t.size() == 1 ? t[0] : Expr::make(Kind::sum, std::move(t));
    }
    case Kind::product: {
      std::vector<Expr> terms;
      const auto& f = e.args();
      for (std::size_t i = 0; i < f.size(); ++i) {
        if (!depends_on(f[i], v)) continue;
        std::vector<Expr> factors;
        for (std::size_t j = 0; j < f.size(); ++j)
          factors.push_back(i == j ? derive(f[j], v) : f[j]);
        terms.push_back(Expr::make(Kind::product, std::move(factors)));
      }
      if (terms.empty()) return Expr(0);
      return terms.size() == 1 ? terms[0] : Expr::make(Kind::sum, std::move(terms));
    }
    case Kind::quotient: {
      const auto& a = e.arg(0);
      const auto& b = e.arg(1);
      return (derive(a, v) * b - a * derive(b, v)) / pow(b, Expr(2));
    }
    case Kind::power: {
      const auto& b = e.arg(0);
      const auto& x = e.arg(1);
      if (!depends_on(x, v)) return x * pow(b, x - Expr(1)) * derive(b, v);
      return e * (derive(x, v) * ln(b) + x * derive(b, v) / b);
    }
    case Kind::function: {
      const auto& u = e.arg(0);
      if (!depends_on(u, v)) return Expr(0);
      Expr du = derive(u, v);
      switch (e.func()) {
        case Func::sin: return cos(u) * du;
        case Func::cos: return -(sin(u) * du);
        case Func::tan: return pow(cos(u), Expr(-2)) * du;
        case Func::sinh: return cosh(u) * du;
        case Func::cosh: return sinh(u) * du;
        case Func::exp: return e * du;
        case Func::ln: return du / u;
        case Func::sqrt: return du / (Expr(2) * e);
        // Singular where u = 0: evaluation there faults instead of yielding 0.
        case Func::abs: return u / e * du;
      }
    }
  }
  return Expr(0);
}

}  // namespace detail

/// Exact partial derivative, simplified.
inline Expr differentiate(const Expr& e, const std::string& v) {
  return simplify(detail::derive(e, v));
}

inline Expr substitute(const Expr& e, const std::map<std::string, Expr>& replacements) {
  if (e.kind() == Kind::symbol) {
    auto it = replacements.find(e.name());
    return it == replacements.end() ? e : it->second;
  }
  if (e.args().empty()) return e;
  std::vector<Expr> a;
  a.reserve(e.args().size());
  for (const auto& x : e.args()) a.push_back(substitute(x, replacements));
  if (e.kind() == Kind::function) return Expr::apply(e.func(), a[0]);
  return Expr::make(e.kind(), std::move(a));
}

/// Complex conjugate; symbols are real.
inline Expr conjugate(const Expr& e) {
  if (e.is_constant()) return Expr(e.value().conj());
  if (e.args().empty()) return e;
  std::vector<Expr> a;
  for (const auto& x : e.args()) a.push_back(conjugate(x));
  if (e.kind() == Kind::function) return Expr::apply(e.func(), a[0]);
  return Expr::make(e.kind(), std::move(a));
}

}  // namespace curvquant
