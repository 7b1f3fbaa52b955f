#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "curvquant/parse.hpp"
#include "curvquant/riemann.hpp"

namespace curvquant {

/// Observable that is not affine in the momenta.
class NotQuantizable : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Quantizable observable f' = f(q) + X^i(q) p_i on T*Q, stored as (f, X).
struct Observable {
  Expr base{0};
  VectorField field;

  static Observable position(const MetricChart& chart, std::size_t i) {
    Observable o;
    o.base = Expr::symbol(chart.coordinates().at(i));
    o.field.components.assign(chart.dimension(), Expr(0));
    return o;
  }
  static Observable momentum(const MetricChart& chart, std::size_t i) {
    Observable o;
    o.field.components.assign(chart.dimension(), Expr(0));
    o.field.components.at(i) = Expr(1);
    return o;
  }

  friend Observable operator+(const Observable& a, const Observable& b) {
    Observable o;
    o.base = simplify(a.base + b.base);
    for (std::size_t i = 0; i < a.field.components.size(); ++i)
      o.field.components.push_back(simplify(a.field.components[i] + b.field.components[i]));
    return o;
  }
  friend Observable operator*(const Expr& s, const Observable& a) {
    Observable o;
    o.base = simplify(s * a.base);
    for (const auto& c : a.field.components) o.field.components.push_back(simplify(s * c));
    return o;
  }
};

/// Momentum symbol conjugate to coordinate i: p1, p2, ...
inline std::string momentum_symbol(std::size_t i) { return "p" + std::to_string(i + 1); }

enum class Scheme { standard, modified };

/// Quantization choice: a scheme for observables plus the coefficient k of
/// hbar^2 r_g in the energy operator (1/12 standard, 0 modified).
struct SchemeSpec {
  enum class Kind { standard, modified, parametric };
  Kind kind = Kind::standard;
  Rational k{1, 12};

  static SchemeSpec standard() { return {Kind::standard, Rational(1, 12)}; }
  static SchemeSpec modified() { return {Kind::modified, Rational(0)}; }
  static SchemeSpec parametric(Rational k) { return {Kind::parametric, k}; }

  /// Accepts std|standard, mod|modified, or k=<rational>.
  static SchemeSpec parse(const std::string& text) {
    if (text == "std" || text == "standard") return standard();
    if (text == "mod" || text == "modified") return modified();
    if (text.rfind("k=", 0) == 0) return parametric(Rational::parse(text.substr(2)));
    throw std::invalid_argument("unknown scheme '" + text + "' (expected std, mod or k=<rational>)");
  }
  Rational curvature_factor() const { return k; }
  std::string label() const {
    switch (kind) {
      case Kind::standard: return "standard";
      case Kind::modified: return "modified";
      case Kind::parametric: return "k=" + k.to_string();
    }
    return "?";
  }
};

/// Natural mechanical system on a chart, on the trivial line bundle with
/// connection d - (i/hbar) A (charged form omega_0 + dA).
struct QuantizationSetup {
  MetricChart chart;
  double hbar = 1.0;
  std::optional<OneForm> magnetic_potential;
  Expr potential{0};
  SchemeSpec scheme = SchemeSpec::standard();
  /// Extra connection one-form added to the half-form derivative of the
  /// modified scheme. Non-closed forms make the half-form connection
  /// non-flat; used only as a negative control.
  std::optional<OneForm> halfform_twist;

  Expr hbar_expr() const { return Expr::real(hbar); }

  void validate() const {
    if (!(hbar > 0)) throw std::invalid_argument("hbar must be positive");
    const auto n = chart.dimension();
    if (magnetic_potential && magnetic_potential->components.size() != n)
      throw std::invalid_argument("magnetic potential needs " + std::to_string(n) + " components");
    if (halfform_twist && halfform_twist->components.size() != n)
      throw std::invalid_argument("half-form twist needs " + std::to_string(n) + " components");
    auto covered = [&](const Expr& e, const std::string& what) {
      for (const auto& s : free_symbols(e))
        if (!chart.domain().contains(s))
          throw std::invalid_argument(what + " references unknown symbol '" + s + "'");
    };
    covered(potential, "potential");
    if (magnetic_potential)
      for (const auto& c : magnetic_potential->components) covered(c, "magnetic potential");
  }
};

/// Magnetic field B = dA as a matrix B_ij, zero without a potential.
inline ExprMatrix magnetic_field(const QuantizationSetup& setup) {
  const auto n = setup.chart.dimension();
  if (!setup.magnetic_potential) return ExprMatrix(n, std::vector<Expr>(n, Expr(0)));
  return exterior_derivative(*setup.magnetic_potential, setup.chart.coordinates());
}

/// Splits a function on T*Q into (f, X) if it is affine in the momenta.
/// Momenta are written p1..pn or p_<coordinate>.
inline Observable parse_observable(std::string_view text, const MetricChart& chart) {
  const auto& coords = chart.coordinates();
  const std::size_t n = coords.size();
  std::map<std::string, Expr> aliases;
  std::vector<std::string> momenta;
  for (std::size_t i = 0; i < n; ++i) {
    momenta.push_back(momentum_symbol(i));
    if (chart.domain().contains(momenta.back()))
      throw std::invalid_argument("coordinate name '" + momenta.back() + "' collides with a momentum");
    aliases["p_" + coords[i]] = Expr::symbol(momenta.back());
  }
  Expr e = simplify(substitute(parse(text), aliases));
  Domain phase = chart.domain();
  for (const auto& p : momenta) phase.add(p, {-2.0, 2.0, Boundary::open});
  for (const auto& s : free_symbols(e))
    if (!phase.contains(s)) throw std::invalid_argument("observable references unknown symbol '" + s + "'");

  constexpr std::uint64_t kSeed = 0x0b5e'7a61e;
  std::vector<Expr> first(n);
  for (std::size_t i = 0; i < n; ++i) first[i] = differentiate(e, momenta[i]);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      Expr second = differentiate(first[i], momenta[j]);
      if (second.is_zero()) continue;
      if (compare(second, Expr(0), phase, kSeed).verdict != Verdict::equal)
        throw NotQuantizable("'" + std::string(text) + "' is not affine in the momenta (d^2/d" + momenta[i] + "d" +
                             momenta[j] + " = " + to_string(second) + ")");
    }
  std::map<std::string, Expr> at_zero;
  for (const auto& p : momenta) at_zero[p] = Expr(0);
  Observable obs;
  obs.base = simplify(substitute(e, at_zero));
  Expr rebuilt = obs.base;
  for (std::size_t i = 0; i < n; ++i) {
    obs.field.components.push_back(simplify(substitute(first[i], at_zero)));
    rebuilt = rebuilt + obs.field.components[i] * Expr::symbol(momenta[i]);
  }
  if (compare(simplify(rebuilt), e, phase, kSeed).verdict != Verdict::equal)
    throw NotQuantizable("'" + std::string(text) + "' is not affine in the momenta");
  return obs;
}

/// Bracket of quantizable observables:
///   {(f1,X1),(f2,X2)} = (X2 f1 - X1 f2 + B(X1,X2), [X2,X1])
/// Sign fixed so that [f1^, f2^] = i hbar {f1,f2}^ with q^ = q and
/// p^ = -i hbar d; in particular {q, p} = 1.
inline Observable poisson_bracket(const Observable& a, const Observable& b, const QuantizationSetup& setup) {
  const auto& coords = setup.chart.coordinates();
  Expr f = b.field.apply(a.base, coords) - a.field.apply(b.base, coords);
  if (setup.magnetic_potential) {
    auto field = magnetic_field(setup);
    for (std::size_t i = 0; i < coords.size(); ++i)
      for (std::size_t j = 0; j < coords.size(); ++j)
        if (!field[i][j].is_zero()) f = f + field[i][j] * a.field.components[i] * b.field.components[j];
  }
  Observable out;
  out.base = simplify(f);
  out.field = lie_bracket(b.field, a.field, coords);
  return out;
}

/// Quantum operator of (f, X) acting on psi0, the coefficient of a wave
/// function relative to s (x) sqrt(nu_g):
///   standard: -i hbar X^i d_i + f - A(X) - i hbar (1/2) div_g X
///   modified: -i hbar X^i d_i + f - A(X)
/// The modified scheme differentiates sqrt(nu_g) with the Levi-Civita
/// connection, which annihilates it.
inline DiffOperator quantize(const Observable& obs, const QuantizationSetup& setup, Scheme scheme) {
  const auto& chart = setup.chart;
  const std::size_t n = chart.dimension();
  if (obs.field.components.size() != n) throw std::invalid_argument("observable dimension mismatch");
  const Expr ih = Expr::imaginary_unit() * setup.hbar_expr();
  DiffOperator op(chart.coordinates());
  for (std::size_t i = 0; i < n; ++i) op.set_c1(i, simplify(-ih * obs.field.components[i]));
  Expr c0 = obs.base;
  if (setup.magnetic_potential) c0 = c0 - (*setup.magnetic_potential)(obs.field);
  Expr halfform_rate(0);
  if (scheme == Scheme::standard) {
    halfform_rate = halfform_lie(chart, obs.field, HalfForm{Expr(1), HalfFormBasis::metric}).coefficient;
  } else if (setup.halfform_twist) {
    halfform_rate = (*setup.halfform_twist)(obs.field);
  }
  op.set_c0(simplify(c0 - ih * halfform_rate));
  return op;
}

inline DiffOperator quantize(const Observable& obs, const QuantizationSetup& setup) {
  switch (setup.scheme.kind) {
    case SchemeSpec::Kind::standard: return quantize(obs, setup, Scheme::standard);
    case SchemeSpec::Kind::modified: return quantize(obs, setup, Scheme::modified);
    case SchemeSpec::Kind::parametric: break;
  }
  throw std::invalid_argument("a parametric k selects an energy operator, not an observable scheme");
}

/// H_k = -(hbar^2/2) Delta_A + hbar^2 k r_g + V
inline DiffOperator energy_operator(const QuantizationSetup& setup, Rational k) {
  const Expr h2 = simplify(setup.hbar_expr() * setup.hbar_expr());
  DiffOperator kinetic = laplace_beltrami(setup.chart, setup.magnetic_potential, setup.hbar);
  DiffOperator op = simplify(Expr::rational(-1, 2) * h2) * kinetic;
  Expr shift = simplify(h2 * Expr(Number(k)) * setup.chart.scalar_curvature());
  op.set_c0(simplify(op.c0() + shift + setup.potential));
  return op;
}

inline DiffOperator energy_operator(const QuantizationSetup& setup) {
  return energy_operator(setup, setup.scheme.curvature_factor());
}

}  // namespace curvquant
