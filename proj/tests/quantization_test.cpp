#include <gtest/gtest.h>

#include <random>

#include "support/charts.hpp"

using namespace curvquant;
using charts::sym;

namespace {

bool eq(const Expr& a, const Expr& b, const MetricChart& c) { return equivalent(a, b, c.domain(), 1); }

bool same(const DiffOperator& a, const DiffOperator& b, const MetricChart& c) {
  return compare(a, b, c.domain(), 1).verdict == Verdict::equal;
}

QuantizationSetup setup_for(const MetricChart& c, double hbar = 1.0) {
  QuantizationSetup s{c};
  s.hbar = hbar;
  return s;
}

Observable obs(Expr f, std::vector<Expr> x) { return Observable{std::move(f), VectorField{std::move(x)}}; }

}  // namespace

TEST(ParseObservable, SplitsAffineFunctions) {
  auto p = charts::plane();
  auto q = parse_observable("q1", p);
  EXPECT_TRUE(q.base.is_symbol("q1"));
  EXPECT_TRUE(q.field.components[0].is_zero() && q.field.components[1].is_zero());

  auto l = parse_observable("q2*p1 - q1*p2", p);
  EXPECT_TRUE(l.base.is_zero());
  EXPECT_TRUE(eq(l.field.components[0], sym("q2"), p));
  EXPECT_TRUE(eq(l.field.components[1], -sym("q1"), p));

  auto alias = parse_observable("p_q1*sin(q2) + q1^2", p);
  EXPECT_TRUE(eq(alias.field.components[0], parse("sin(q2)"), p));
  EXPECT_TRUE(eq(alias.base, parse("q1^2"), p));
}

TEST(ParseObservable, RejectsNonAffineMomentumDependence) {
  auto p = charts::plane();
  EXPECT_THROW(parse_observable("p1^2", p), NotQuantizable);
  EXPECT_THROW(parse_observable("(p1^2 + p2^2)/2", p), NotQuantizable);
  EXPECT_THROW(parse_observable("p1*p2", p), NotQuantizable);
  EXPECT_THROW(parse_observable("sin(p1)", p), NotQuantizable);
  EXPECT_THROW(parse_observable("q3", p), std::invalid_argument);
  EXPECT_THROW(parse_observable("q1 +", p), ParseError);
  // Cancelling quadratic terms are still affine.
  auto o = parse_observable("p1^2 - p1*p1 + p2", p);
  EXPECT_TRUE(eq(o.field.components[1], Expr(1), p));
}

TEST(PoissonBracket, CanonicalAndMagneticExamples) {
  auto l = charts::line();
  auto s = setup_for(l);
  auto b = poisson_bracket(Observable::position(l, 0), Observable::momentum(l, 0), s);
  EXPECT_TRUE(eq(b.base, Expr(1), l));
  EXPECT_TRUE(b.field.components[0].is_zero());

  auto p = charts::plane();
  auto flat = setup_for(p);
  auto t = poisson_bracket(Observable::momentum(p, 0), Observable::momentum(p, 1), flat);
  EXPECT_TRUE(t.base.is_zero());

  auto mag = setup_for(p);
  mag.magnetic_potential = OneForm{{Expr(0), Expr(5) * sym("q1")}};
  auto m = poisson_bracket(Observable::momentum(p, 0), Observable::momentum(p, 1), mag);
  EXPECT_TRUE(eq(m.base, Expr(5), p));
  EXPECT_TRUE(m.field.components[0].is_zero() && m.field.components[1].is_zero());
}

TEST(PoissonBracket, BilinearAntisymmetricJacobi) {
  std::mt19937_64 rng(31);
  for (const auto& [name, c] : charts::corpus()) {
    auto s = setup_for(c);
    if (c.dimension() == 2) s.magnetic_potential = OneForm{{sym(c.coordinates()[1].c_str()), Expr(0)}};
    for (int k = 0; k < 20; ++k) {
      auto a = random_observable(c, rng), b = random_observable(c, rng), d = random_observable(c, rng);
      auto ab = poisson_bracket(a, b, s), ba = poisson_bracket(b, a, s);
      EXPECT_TRUE(eq(ab.base, -ba.base, c)) << name;
      auto lin = poisson_bracket(Expr(3) * a + d, b, s);
      auto expect = Expr(3) * ab + poisson_bracket(d, b, s);
      EXPECT_TRUE(eq(lin.base, expect.base, c)) << name;
      EXPECT_TRUE(check_jacobi(a, b, d, s, static_cast<std::uint64_t>(k)).passed()) << name;
    }
  }
}

TEST(Quantize, PositionMomentumAndDilation) {
  auto p = charts::plane();
  const double hbar = 0.7;
  auto s = setup_for(p, hbar);
  for (Scheme sc : {Scheme::standard, Scheme::modified}) {
    auto q = quantize(Observable::position(p, 0), s, sc);
    EXPECT_TRUE(same(q, DiffOperator::multiplication(p.coordinates(), sym("q1")), p));
  }
  auto mom = quantize(Observable::momentum(p, 0), s, Scheme::standard);
  EXPECT_TRUE(eq(mom.c1(0), Expr::imaginary_unit() * Expr::real(-hbar), p));
  EXPECT_TRUE(mom.c0().is_zero());

  auto l = charts::line();
  auto sl = setup_for(l);
  auto dil = obs(Expr(0), {sym("x")});
  auto std_op = quantize(dil, sl, Scheme::standard);
  auto mod_op = quantize(dil, sl, Scheme::modified);
  EXPECT_TRUE(eq(std_op.c1(0), parse("-i*x"), l));
  EXPECT_TRUE(eq(std_op.c0(), parse("-i/2"), l));
  EXPECT_TRUE(eq(mod_op.c1(0), parse("-i*x"), l));
  EXPECT_TRUE(mod_op.c0().is_zero());
}

TEST(Quantize, IsLinearInTheObservable) {
  std::mt19937_64 rng(32);
  for (const auto& [name, c] : charts::corpus()) {
    auto s = setup_for(c, 1.3);
    for (int k = 0; k < 5; ++k) {
      auto a = random_observable(c, rng), b = random_observable(c, rng);
      for (Scheme sc : {Scheme::standard, Scheme::modified}) {
        auto lhs = quantize(Expr(-2) * a + b, s, sc);
        auto rhs = Expr(-2) * quantize(a, s, sc) + quantize(b, s, sc);
        EXPECT_TRUE(same(lhs, rhs, c)) << name;
      }
    }
  }
}

TEST(Quantize, CanonicalPairsOnCorpus) {
  for (const auto& [name, c] : charts::corpus()) {
    auto r = check_canonical_pairs(setup_for(c, 0.9));
    EXPECT_TRUE(r.passed()) << name << ": " << r.witness;
  }
}

TEST(Quantize, SchemeDifferenceIsHalfDivergence) {
  std::mt19937_64 rng(33);
  for (const auto& [name, c] : charts::corpus()) {
    auto s = setup_for(c, 2.0);
    for (int k = 0; k < 10; ++k) {
      auto r = check_scheme_gap(random_observable(c, rng), s);
      EXPECT_TRUE(r.passed()) << name << ": " << r.witness;
    }
  }
}

TEST(Quantize, GaugeCovariance) {
  // e^{i chi/hbar} f^(A) e^{-i chi/hbar} = f^(A + d chi), and the same for H_k.
  auto p = charts::plane();
  const double hbar = 0.8;
  const Expr chi = parse("sin(q1)*q2 + q1^3");
  auto s = setup_for(p, hbar);
  s.magnetic_potential = OneForm{{Expr(0), Expr(2) * sym("q1")}};
  auto shifted = s;
  shifted.magnetic_potential = OneForm{{simplify(differentiate(chi, "q1")),
                                        simplify(Expr(2) * sym("q1") + differentiate(chi, "q2"))}};
  const Expr phase = Expr::imaginary_unit() * chi / Expr::real(hbar);
  auto u = DiffOperator::multiplication(p.coordinates(), exp(phase));
  auto u_inv = DiffOperator::multiplication(p.coordinates(), exp(-phase));
  auto conj = [&](const DiffOperator& op) { return compose(compose(u, op), u_inv); };

  std::mt19937_64 rng(34);
  for (int k = 0; k < 5; ++k) {
    auto o = random_observable(p, rng);
    for (Scheme sc : {Scheme::standard, Scheme::modified})
      EXPECT_TRUE(same(conj(quantize(o, s, sc)), quantize(o, shifted, sc), p));
  }
  for (Rational k : {Rational(0), Rational(1, 12), Rational(-1, 8)})
    EXPECT_TRUE(same(conj(energy_operator(s, k)), energy_operator(shifted, k), p));
}

TEST(EnergyOperator, FlatLineSphereAndLandau) {
  auto l = charts::line();
  const double hbar = 1.5;
  auto h = energy_operator(setup_for(l, hbar), Rational(3, 7));
  EXPECT_TRUE(eq(h.c2(0, 0), Expr::real(-hbar * hbar / 2), l));
  EXPECT_TRUE(h.c0().is_zero());

  auto s = charts::sphere();
  auto ss = setup_for(s);
  auto gap = energy_operator(ss, Rational(1, 12)) - energy_operator(ss, Rational(0));
  EXPECT_TRUE(eq(gap.c0(), Expr::rational(1, 6), s));
  EXPECT_EQ(gap.order(), 0);

  // -(hbar^2/2)(d1^2 + (d2 - (i/hbar) b q1)^2)
  auto p = charts::plane();
  auto landau = setup_for(p, hbar);
  landau.magnetic_potential = OneForm{{Expr(0), Expr(3) * sym("q1")}};
  auto hl = energy_operator(landau, Rational(1, 12));
  const Expr h2 = Expr::real(hbar * hbar);
  EXPECT_TRUE(eq(hl.c2(0, 0), -h2 / Expr(2), p));
  EXPECT_TRUE(eq(hl.c2(1, 1), -h2 / Expr(2), p));
  EXPECT_TRUE(hl.c2(0, 1).is_zero());
  EXPECT_TRUE(eq(hl.c1(1), parse("i*1.5*3*q1"), p));
  EXPECT_TRUE(eq(hl.c0(), parse("9*q1^2/2"), p));
}

TEST(EnergyOperator, MatchesLiteralFormOnCorpus) {
  for (const auto& [name, c] : charts::corpus()) {
    auto s = setup_for(c, 0.6);
    s.potential = simplify(sym(c.coordinates()[0].c_str()) * sym(c.coordinates()[0].c_str()));
    auto r = check_energy_consistency(s);
    EXPECT_TRUE(r.passed()) << name << ": " << r.witness;
  }
}

TEST(SchemeSpec, ParsesNamesAndRationals) {
  EXPECT_EQ(SchemeSpec::parse("std").kind, SchemeSpec::Kind::standard);
  EXPECT_EQ(SchemeSpec::parse("modified").k.num(), 0);
  auto k = SchemeSpec::parse("k=-1/8");
  EXPECT_EQ(k.kind, SchemeSpec::Kind::parametric);
  EXPECT_EQ(k.k.num(), -1);
  EXPECT_EQ(k.k.den(), 8);
  EXPECT_EQ(k.label(), "k=-1/8");
  EXPECT_THROW(SchemeSpec::parse("weyl"), std::invalid_argument);
  EXPECT_THROW(SchemeSpec::parse("k=1/0"), std::exception);
  auto s = setup_for(charts::line());
  s.scheme = k;
  EXPECT_THROW(quantize(Observable::momentum(s.chart, 0), s), std::invalid_argument);
}

TEST(Compose, LeibnizExamplesAndOrderLimit) {
  auto l = charts::line();
  const auto& x = l.coordinates();
  DiffOperator p(x);
  p.set_c1(0, -Expr::imaginary_unit());
  auto xm = DiffOperator::multiplication(x, sym("x"));
  auto px = compose(p, xm);
  EXPECT_TRUE(eq(px.c0(), -Expr::imaginary_unit(), l));
  EXPECT_TRUE(eq(px.c1(0), -Expr::imaginary_unit() * sym("x"), l));

  auto id = DiffOperator::identity(x);
  EXPECT_TRUE(same(compose(id, p), p, l));

  DiffOperator d(x);
  d.set_c1(0, Expr(1));
  auto dd = compose(d, d);
  EXPECT_TRUE(dd.c2(0, 0).is_one());
  EXPECT_TRUE(dd.c1(0).is_zero());
  EXPECT_THROW(compose(dd, d), UnsupportedComposition);
}

TEST(Compose, AssociativeOnAdmissibleTriples) {
  std::mt19937_64 rng(35);
  auto s = charts::sphere();
  auto setup = setup_for(s);
  for (int k = 0; k < 5; ++k) {
    auto a = quantize(random_observable(s, rng), setup, Scheme::standard);
    auto f = DiffOperator::multiplication(s.coordinates(), random_function(s.coordinates(), rng));
    auto g = DiffOperator::multiplication(s.coordinates(), random_function(s.coordinates(), rng));
    EXPECT_TRUE(same(compose(compose(a, f), g), compose(a, compose(f, g)), s));
    EXPECT_TRUE(same(compose(compose(f, a), g), compose(f, compose(a, g)), s));
  }
}

TEST(Compose, ActionAgreesWithSequentialApplication) {
  std::mt19937_64 rng(36);
  auto s = charts::sphere();
  auto setup = setup_for(s);
  for (int k = 0; k < 5; ++k) {
    auto a = quantize(random_observable(s, rng), setup, Scheme::standard);
    auto b = quantize(random_observable(s, rng), setup, Scheme::modified);
    Expr psi = random_function(s.coordinates(), rng);
    EXPECT_TRUE(eq(compose(a, b).apply(psi), a.apply(b.apply(psi)), s));
  }
}
