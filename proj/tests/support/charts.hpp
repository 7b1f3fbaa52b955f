#pragma once

#include <numbers>

#include "curvquant/curvquant.hpp"

namespace charts {

using namespace curvquant;

inline Expr sym(const char* s) { return Expr::symbol(s); }

/// Round sphere of radius r in (theta, phi).
inline MetricChart sphere(std::int64_t radius = 1) {
  const double pi = std::numbers::pi;
  Expr r2(radius * radius);
  return MetricChart({"theta", "phi"}, {{r2, Expr(0)}, {Expr(0), r2 * pow(sin(sym("theta")), Expr(2))}},
                     Domain{{"theta", {0, pi, Boundary::polar}}, {"phi", {0, 2 * pi, Boundary::periodic}}});
}

/// Circle of length 2 pi.
inline MetricChart circle() {
  return MetricChart({"x"}, {{Expr(1)}}, Domain{{"x", {0, 2 * std::numbers::pi, Boundary::periodic}}});
}

inline MetricChart line(double lo = -1, double hi = 1) {
  return MetricChart({"x"}, {{Expr(1)}}, Domain{{"x", {lo, hi, Boundary::open}}});
}

inline MetricChart plane() {
  return MetricChart({"q1", "q2"}, {{Expr(1), Expr(0)}, {Expr(0), Expr(1)}},
                     Domain{{"q1", {-1, 1, Boundary::open}}, {"q2", {-1, 1, Boundary::open}}});
}

/// Polar coordinates on the unit disc, g = diag(1, q1^2).
inline MetricChart polar() {
  return MetricChart({"q1", "q2"}, {{Expr(1), Expr(0)}, {Expr(0), pow(sym("q1"), Expr(2))}},
                     Domain{{"q1", {0, 1, Boundary::polar}}, {"q2", {0, 2 * std::numbers::pi, Boundary::periodic}}});
}

/// The corpus used by the property tests.
inline std::vector<std::pair<std::string, MetricChart>> corpus() {
  return {{"circle", circle()}, {"plane", plane()}, {"polar", polar()}, {"sphere", sphere()}};
}

}  // namespace charts
