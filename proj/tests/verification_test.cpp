#include <gtest/gtest.h>

#include <random>

#include "support/charts.hpp"

using namespace curvquant;
using charts::sym;

namespace {

QuantizationSetup setup_for(const MetricChart& c, double hbar = 1.0) {
  QuantizationSetup s{c};
  s.hbar = hbar;
  return s;
}

}  // namespace

TEST(Commutation, CanonicalPairOnLine) {
  auto l = charts::line();
  auto r = check_commutation(Observable::position(l, 0), Observable::momentum(l, 0), setup_for(l, 0.3));
  EXPECT_TRUE(r.passed()) << r.witness;
  EXPECT_EQ(r.claim, "commutation");
}

TEST(Commutation, RandomPairsOnSphere) {
  auto s = charts::sphere();
  auto setup = setup_for(s, 0.7);
  std::mt19937_64 rng(41);
  for (int k = 0; k < 50; ++k) {
    auto a = random_observable(s, rng), b = random_observable(s, rng);
    auto r = check_commutation(a, b, setup, static_cast<std::uint64_t>(k));
    EXPECT_TRUE(r.passed()) << r.witness;
  }
}

TEST(Commutation, RandomPairsWithMagneticField) {
  for (const auto& [name, c] : charts::corpus()) {
    if (c.dimension() < 2) continue;
    auto setup = setup_for(c, 1.1);
    const Expr x = sym(c.coordinates()[0].c_str());
    setup.magnetic_potential = OneForm{{Expr(0), x * x}};
    std::mt19937_64 rng(42);
    for (int k = 0; k < 10; ++k) {
      auto r = check_commutation(random_observable(c, rng), random_observable(c, rng), setup);
      EXPECT_TRUE(r.passed()) << name << ": " << r.witness;
    }
  }
}

TEST(Commutation, CommutatorIsAntisymmetric) {
  auto s = charts::sphere();
  auto setup = setup_for(s);
  std::mt19937_64 rng(43);
  for (int k = 0; k < 10; ++k) {
    auto a = quantize(random_observable(s, rng), setup, Scheme::standard);
    auto b = quantize(random_observable(s, rng), setup, Scheme::standard);
    auto sum = commutator(a, b) + commutator(b, a);
    EXPECT_EQ(compare(sum, DiffOperator(s.coordinates()), s.domain(), 1).verdict, Verdict::equal);
  }
}

TEST(NonflatControl, BreaksCommutationWithWitness) {
  auto r = check_nonflat_control(setup_for(charts::plane()));
  EXPECT_TRUE(r.passed());
  EXPECT_NE(r.witness.find("commutation broken"), std::string::npos) << r.witness;

  auto sphere = check_nonflat_control(setup_for(charts::sphere()));
  EXPECT_TRUE(sphere.passed()) << sphere.witness;

  auto skipped = check_nonflat_control(setup_for(charts::circle()));
  EXPECT_TRUE(skipped.passed());
  EXPECT_NE(skipped.note.find("skipped"), std::string::npos);
}

TEST(NonflatControl, TwistedCommutationCheckFails) {
  auto p = charts::plane();
  auto setup = setup_for(p);
  setup.halfform_twist = OneForm{{Expr(0), sym("q1")}};
  auto r = check_commutation(Observable::momentum(p, 0), Observable::momentum(p, 1), setup);
  EXPECT_EQ(r.status, Status::fail);
  EXPECT_NE(r.witness.find("modified"), std::string::npos) << r.witness;
  // A closed twist is flat and keeps the identity.
  setup.halfform_twist = OneForm{{sym("q2"), sym("q1")}};
  EXPECT_TRUE(check_commutation(Observable::momentum(p, 0), Observable::momentum(p, 1), setup).passed());
}

TEST(Symmetry, DivergenceFreeFieldsAreSymmetric) {
  auto polar = charts::polar();
  auto rotation = check_symmetry(Observable::momentum(polar, 1), setup_for(polar));
  EXPECT_TRUE(rotation.symmetric);
  EXPECT_TRUE(rotation.report.passed());
  EXPECT_NE(rotation.report.note.find("self-adjoint"), std::string::npos);

  auto radial = check_symmetry(Observable::momentum(polar, 0), setup_for(polar));
  EXPECT_FALSE(radial.symmetric);
  EXPECT_EQ(radial.report.status, Status::fail);
  EXPECT_TRUE(equivalent(radial.defect, parse("1/q1"), polar.domain(), 1));

  auto s = charts::sphere();
  auto lz = check_symmetry(Observable::momentum(s, 1), setup_for(s));
  EXPECT_TRUE(lz.symmetric);
  auto theta = check_symmetry(Observable::momentum(s, 0), setup_for(s));
  EXPECT_FALSE(theta.symmetric);
}

TEST(CurvatureShift, FlatSphereAndScaledSphere) {
  EXPECT_TRUE(equivalent(curvature_shift(setup_for(charts::plane())), Expr(0), charts::plane().domain(), 1));
  auto s = charts::sphere();
  EXPECT_TRUE(equivalent(curvature_shift(setup_for(s)), Expr::rational(1, 6), s.domain(), 1));
  auto s3 = charts::sphere(3);
  EXPECT_TRUE(equivalent(curvature_shift(setup_for(s3)), Expr::rational(1, 54), s3.domain(), 1));
  auto half = curvature_shift(setup_for(s, 0.5));
  EXPECT_TRUE(equivalent(half, Expr::rational(1, 24), s.domain(), 1));
  for (const auto& [name, c] : charts::corpus()) EXPECT_TRUE(check_curvature_shift(setup_for(c, 0.9)).passed()) << name;
}

TEST(CurvatureShift, MagneticFieldDoesNotChangeTheGap) {
  auto s = charts::sphere();
  auto setup = setup_for(s);
  setup.magnetic_potential = OneForm{{Expr(0), parse("-cos(theta)")}};
  EXPECT_TRUE(equivalent(curvature_shift(setup), Expr::rational(1, 6), s.domain(), 1));
}

TEST(Flatness, MetricHalfFormIsParallelOnCorpus) {
  for (const auto& [name, c] : charts::corpus()) {
    auto r = check_flatness(c, 20, 7);
    EXPECT_TRUE(r.passed()) << name << ": " << r.witness;
  }
}

TEST(Jacobi, RandomTriplesWithAndWithoutField) {
  std::mt19937_64 rng(44);
  auto s = charts::sphere();
  auto plain = setup_for(s);
  auto magnetic = plain;
  magnetic.magnetic_potential = OneForm{{Expr(0), parse("-cos(theta)")}};
  for (int k = 0; k < 20; ++k) {
    auto a = random_observable(s, rng), b = random_observable(s, rng), c = random_observable(s, rng);
    EXPECT_TRUE(check_jacobi(a, b, c, plain).passed());
    EXPECT_TRUE(check_jacobi(a, b, c, magnetic).passed());
  }
}

TEST(Reports, MergeKeepsWorstStatus) {
  VerificationReport r{"x", Status::pass, "", {1}, ""};
  detail::merge(r, Status::inconclusive, "maybe");
  EXPECT_EQ(r.status, Status::inconclusive);
  detail::merge(r, Status::pass, "fine");
  EXPECT_EQ(r.status, Status::inconclusive);
  detail::merge(r, Status::fail, "bad");
  EXPECT_EQ(r.status, Status::fail);
  EXPECT_EQ(r.witness, "bad");
  EXPECT_STREQ(to_string(Status::inconclusive), "INCONCLUSIVE");
}
