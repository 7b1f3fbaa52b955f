#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "curvquant/quantization.hpp"

namespace curvquant {

enum class Status { pass, fail, inconclusive };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::pass: return "PASS";
    case Status::fail: return "FAIL";
    case Status::inconclusive: return "INCONCLUSIVE";
  }
  return "?";
}

/// Outcome of one claim. A failing report always carries a witness.
struct VerificationReport {
  std::string claim;
  Status status = Status::pass;
  std::string witness;
  std::vector<std::uint64_t> seeds;
  std::string note;

  bool passed() const { return status == Status::pass; }
};

/// A check that cannot be carried out as requested.
class VerificationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string format_complex(Complex v) {
  char buf[96];
  if (v.imag() == 0.0) std::snprintf(buf, sizeof buf, "%.12g", v.real());
  else std::snprintf(buf, sizeof buf, "%.12g%+.12gi", v.real(), v.imag());
  return buf;
}

inline std::string witness_of(const std::string& where, const Comparison& c) {
  std::string s = where + " at " + describe(c.witness);
  if (c.verdict == Verdict::different)
    s += ": lhs=" + format_complex(c.lhs) + " rhs=" + format_complex(c.rhs);
  else
    s += ": evaluation faulted at every redraw";
  return s;
}

inline Status status_of(Verdict v) {
  switch (v) {
    case Verdict::equal: return Status::pass;
    case Verdict::different: return Status::fail;
    case Verdict::inconclusive: return Status::inconclusive;
  }
  return Status::fail;
}

// Folds a sub-result into a report: fail beats inconclusive beats pass.
inline void merge(VerificationReport& r, Status s, const std::string& witness) {
  if (s == Status::pass) return;
  if (r.status == Status::fail) return;
  if (s == Status::fail || r.status == Status::pass) {
    r.status = s;
    r.witness = witness;
  }
}

inline const char* scheme_name(Scheme s) { return s == Scheme::standard ? "standard" : "modified"; }

}  // namespace detail

/// Random polynomial/trigonometric scalar in the chart coordinates.
inline Expr random_function(const std::vector<std::string>& coords, std::mt19937_64& rng, int max_terms = 3,
                            bool trig = true) {
  const int terms = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(max_terms));
  Expr sum(0);
  for (int t = 0; t < terms; ++t) {
    const auto coeff = static_cast<std::int64_t>(rng() % 7) - 3;
    const auto& x = Expr::symbol(coords[rng() % coords.size()]);
    const auto& y = Expr::symbol(coords[rng() % coords.size()]);
    Expr m;
    switch (rng() % (trig ? 6 : 4)) {
      case 0: m = Expr(1); break;
      case 1: m = x; break;
      case 2: m = x * x; break;
      case 3: m = x * y; break;
      case 4: m = sin(x); break;
      default: m = cos(x) * y; break;
    }
    sum = sum + Expr(coeff == 0 ? 1 : coeff) * m;
  }
  return simplify(sum);
}

inline VectorField random_vector_field(const MetricChart& chart, std::mt19937_64& rng, bool trig = true) {
  VectorField x;
  for (std::size_t i = 0; i < chart.dimension(); ++i)
    x.components.push_back(random_function(chart.coordinates(), rng, 3, trig));
  return x;
}

/// Random observable with polynomial coefficients (degree <= 2).
inline Observable random_observable(const MetricChart& chart, std::mt19937_64& rng) {
  Observable o;
  o.base = random_function(chart.coordinates(), rng, 3, false);
  o.field = random_vector_field(chart, rng, false);
  return o;
}

/// Compares [f1^, f2^] with i hbar {f1, f2}^ coefficient-wise, for both
/// schemes.
inline VerificationReport check_commutation(const Observable& a, const Observable& b,
                                            const QuantizationSetup& setup, std::uint64_t seed = 1) {
  VerificationReport r{"commutation", Status::pass, "", {seed}, ""};
  const Observable bracket = poisson_bracket(a, b, setup);
  const Expr ih = Expr::imaginary_unit() * setup.hbar_expr();
  for (Scheme s : {Scheme::standard, Scheme::modified}) {
    DiffOperator lhs = commutator(quantize(a, setup, s), quantize(b, setup, s));
    DiffOperator rhs = ih * quantize(bracket, setup, s);
    auto cmp = compare(lhs, rhs, setup.chart.domain(), seed);
    detail::merge(r, detail::status_of(cmp.verdict),
                  std::string(detail::scheme_name(s)) + " " + cmp.coefficient + " " +
                      detail::witness_of("", cmp.detail));
  }
  return r;
}

struct SymmetryReport {
  VerificationReport report;
  bool symmetric = false;
  Expr defect;  ///< div_g X
};

/// The modified operator of (f, X) is formally symmetric iff div_g X = 0.
inline SymmetryReport check_symmetry(const Observable& obs, const QuantizationSetup& setup, std::uint64_t seed = 1) {
  SymmetryReport out;
  out.defect = divergence(setup.chart, obs.field);
  auto cmp = compare(out.defect, Expr(0), setup.chart.domain(), seed);
  out.symmetric = cmp.verdict == Verdict::equal;
  out.report = {"symmetry", detail::status_of(cmp.verdict), "", {seed},
                "formal symmetry only; essential self-adjointness is not checked"};
  if (!out.symmetric) out.report.witness = "div_g X = " + to_string(out.defect) + detail::witness_of("", cmp);
  return out;
}

/// H_{1/12} - H_0. Throws VerificationError unless the difference is a
/// multiplication operator.
inline Expr curvature_shift(const QuantizationSetup& setup, std::uint64_t seed = 1) {
  DiffOperator diff = energy_operator(setup, Rational(1, 12)) - energy_operator(setup, Rational(0));
  const auto& dom = setup.chart.domain();
  for (std::size_t i = 0; i < diff.dimension(); ++i) {
    if (!equivalent(diff.c1(i), Expr(0), dom, seed))
      throw VerificationError("energy gap has a first-order part in " + diff.coordinates()[i]);
    for (std::size_t j = 0; j < diff.dimension(); ++j)
      if (!equivalent(diff.c2(i, j), Expr(0), dom, seed))
        throw VerificationError("energy gap has a second-order part");
  }
  return diff.c0();
}

/// nabla_X sqrt(nu_g) = 0 for the given fields.
inline VerificationReport check_flatness(const MetricChart& chart, const std::vector<VectorField>& fields,
                                         std::uint64_t seed = 1) {
  VerificationReport r{"flatness", Status::pass, "", {seed}, ""};
  for (std::size_t k = 0; k < fields.size(); ++k) {
    auto h = halfform_covderiv(chart, fields[k], HalfForm{Expr(1), HalfFormBasis::metric});
    auto cmp = compare(h.coefficient, Expr(0), chart.domain(), seed);
    detail::merge(r, detail::status_of(cmp.verdict), "field #" + std::to_string(k) + detail::witness_of("", cmp));
  }
  return r;
}

inline VerificationReport check_flatness(const MetricChart& chart, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<VectorField> fields;
  for (int k = 0; k < count; ++k) fields.push_back(random_vector_field(chart, rng));
  return check_flatness(chart, fields, seed);
}

/// Energy gap equals (hbar^2/12) r_g, and parallel transport preserves the
/// metric half-form (checked on coordinate fields; nabla is tensorial in X).
inline VerificationReport check_curvature_shift(const QuantizationSetup& setup, std::uint64_t seed = 1) {
  VerificationReport r{"curvature_shift", Status::pass, "", {seed}, ""};
  Expr gap;
  try {
    gap = curvature_shift(setup, seed);
  } catch (const VerificationError& e) {
    r.status = Status::fail;
    r.witness = e.what();
    return r;
  }
  const Expr h2 = setup.hbar_expr() * setup.hbar_expr();
  Expr expected = simplify(Expr::rational(1, 12) * h2 * setup.chart.scalar_curvature());
  auto cmp = compare(gap, expected, setup.chart.domain(), seed);
  detail::merge(r, detail::status_of(cmp.verdict), "H_1/12 - H_0 vs hbar^2 r_g/12" + detail::witness_of("", cmp));
  std::vector<VectorField> basis;
  for (std::size_t i = 0; i < setup.chart.dimension(); ++i)
    basis.push_back(Observable::momentum(setup.chart, i).field);
  auto flat = check_flatness(setup.chart, basis, seed);
  detail::merge(r, flat.status, "volume transport: " + flat.witness);
  return r;
}

/// [q^i, p_j] = i hbar delta^i_j, both schemes.
inline VerificationReport check_canonical_pairs(const QuantizationSetup& setup, std::uint64_t seed = 1) {
  VerificationReport r{"canonical_pairs", Status::pass, "", {seed}, ""};
  const auto& chart = setup.chart;
  const auto n = chart.dimension();
  const Expr ih = Expr::imaginary_unit() * setup.hbar_expr();
  for (Scheme s : {Scheme::standard, Scheme::modified})
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        DiffOperator lhs = commutator(quantize(Observable::position(chart, i), setup, s),
                                      quantize(Observable::momentum(chart, j), setup, s));
        DiffOperator rhs = DiffOperator::multiplication(chart.coordinates(), i == j ? ih : Expr(0));
        auto cmp = compare(lhs, rhs, chart.domain(), seed);
        detail::merge(r, detail::status_of(cmp.verdict),
                      std::string(detail::scheme_name(s)) + " [q" + std::to_string(i + 1) + ",p" +
                          std::to_string(j + 1) + "] " + cmp.coefficient + detail::witness_of("", cmp.detail));
      }
  return r;
}

/// quantize_standard - quantize_modified = -i hbar (1/2) div_g X.
inline VerificationReport check_scheme_gap(const Observable& obs, const QuantizationSetup& setup,
                                           std::uint64_t seed = 1) {
  VerificationReport r{"scheme_gap", Status::pass, "", {seed}, ""};
  QuantizationSetup plain = setup;
  plain.halfform_twist.reset();
  DiffOperator gap = quantize(obs, plain, Scheme::standard) - quantize(obs, plain, Scheme::modified);
  Expr expected = -Expr::imaginary_unit() * setup.hbar_expr() * Expr::rational(1, 2) * divergence(setup.chart, obs.field);
  auto cmp = compare(gap, DiffOperator::multiplication(setup.chart.coordinates(), simplify(expected)),
                     setup.chart.domain(), seed);
  detail::merge(r, detail::status_of(cmp.verdict), cmp.coefficient + detail::witness_of("", cmp.detail));
  return r;
}

/// energy_operator(1/12) against the literal -(hbar^2/2)(Delta - r_g/6) + V.
inline VerificationReport check_energy_consistency(const QuantizationSetup& setup, std::uint64_t seed = 1) {
  VerificationReport r{"energy_consistency", Status::pass, "", {seed}, ""};
  const auto& chart = setup.chart;
  const Expr h2 = setup.hbar_expr() * setup.hbar_expr();
  DiffOperator laplacian = laplace_beltrami(chart, setup.magnetic_potential, setup.hbar);
  DiffOperator literal = laplacian - DiffOperator::multiplication(
                                         chart.coordinates(), simplify(chart.scalar_curvature() / Expr(6)));
  literal = simplify(Expr::rational(-1, 2) * h2) * literal;
  literal.set_c0(simplify(literal.c0() + setup.potential));
  auto cmp = compare(energy_operator(setup, Rational(1, 12)), literal, chart.domain(), seed);
  detail::merge(r, detail::status_of(cmp.verdict), cmp.coefficient + detail::witness_of("", cmp.detail));
  return r;
}

/// Negative control: with a non-flat half-form connection (twist one-form
/// q1 dq2, d(twist) != 0) the commutation identity must break. Passes when
/// the modified-scheme check fails with a witness. Needs dimension >= 2.
inline VerificationReport check_nonflat_control(const QuantizationSetup& setup, std::uint64_t seed = 1) {
  VerificationReport r{"nonflat_control", Status::pass, "", {seed},
                       "necessity of flatness demonstrated on one example only"};
  const auto& chart = setup.chart;
  if (chart.dimension() < 2) {
    r.note = "skipped: needs at least two coordinates";
    return r;
  }
  QuantizationSetup twisted = setup;
  OneForm twist{std::vector<Expr>(chart.dimension(), Expr(0))};
  twist.components[1] = Expr::symbol(chart.coordinates()[0]);
  twisted.halfform_twist = twist;
  Observable a = Observable::momentum(chart, 0);
  Observable b = Observable::momentum(chart, 1);
  const Expr ih = Expr::imaginary_unit() * setup.hbar_expr();
  DiffOperator lhs = commutator(quantize(a, twisted, Scheme::modified), quantize(b, twisted, Scheme::modified));
  DiffOperator rhs = ih * quantize(poisson_bracket(a, b, twisted), twisted, Scheme::modified);
  auto cmp = compare(lhs, rhs, chart.domain(), seed);
  if (cmp.verdict == Verdict::different) {
    r.witness = "commutation broken: " + cmp.coefficient + detail::witness_of("", cmp.detail);
  } else {
    r.status = cmp.verdict == Verdict::equal ? Status::fail : Status::inconclusive;
    r.witness = "non-flat half-form connection did not break the commutation identity";
  }
  return r;
}

/// Jacobi identity of the bracket on one triple.
inline VerificationReport check_jacobi(const Observable& a, const Observable& b, const Observable& c,
                                       const QuantizationSetup& setup, std::uint64_t seed = 1) {
  VerificationReport r{"jacobi", Status::pass, "", {seed}, ""};
  auto pb = [&](const Observable& x, const Observable& y) { return poisson_bracket(x, y, setup); };
  Observable sum = pb(a, pb(b, c)) + pb(b, pb(c, a)) + pb(c, pb(a, b));
  const auto& dom = setup.chart.domain();
  auto cmp = compare(sum.base, Expr(0), dom, seed);
  detail::merge(r, detail::status_of(cmp.verdict), "function part" + detail::witness_of("", cmp));
  for (std::size_t i = 0; i < sum.field.components.size(); ++i) {
    auto ci = compare(sum.field.components[i], Expr(0), dom, seed);
    detail::merge(r, detail::status_of(ci.verdict),
                  "field component " + std::to_string(i) + detail::witness_of("", ci));
  }
  return r;
}

}  // namespace curvquant
