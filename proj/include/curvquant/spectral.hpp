#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "curvquant/quantization.hpp"

namespace curvquant {

class SpectralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense problems beyond this many unknowns are refused.
inline constexpr std::size_t kMaxUnknowns = 8192;

enum class AxisKind { periodic, dirichlet, polar };

struct GridAxis {
  std::string name;
  AxisKind kind = AxisKind::periodic;
  double lo = 0.0, hi = 1.0;
  std::size_t count = 0;
  double step = 0.0;
  std::vector<double> nodes;
  bool pole_lo = false, pole_hi = false;  ///< polar ends where the density vanishes
};

/// Tensor-product grid over a chart. Periodic axes carry nodes lo + j h;
/// all others are cell-centred, lo + (j + 1/2) h, so no node sits on a pole
/// or a Dirichlet wall. Nodes are numbered row-major, last axis fastest.
class Grid {
 public:
  Grid() = default;

  static Grid build(const MetricChart& chart, std::vector<std::size_t> counts) {
    const std::size_t n = chart.dimension();
    if (counts.size() == 1 && n > 1) counts.resize(n, counts[0]);
    if (counts.size() != n)
      throw SpectralError("grid needs " + std::to_string(n) + " node counts, got " + std::to_string(counts.size()));
    Grid g;
    g.density_ = chart.sqrt_det();
    std::size_t total = 1;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& name = chart.coordinates()[i];
      const Interval& iv = chart.domain().at(name);
      if (counts[i] < 2) throw SpectralError("axis '" + name + "' needs at least 2 nodes");
      GridAxis ax;
      ax.name = name;
      ax.kind = iv.boundary == Boundary::periodic ? AxisKind::periodic
                : iv.boundary == Boundary::polar  ? AxisKind::polar
                                                  : AxisKind::dirichlet;
      ax.lo = iv.lo;
      ax.hi = iv.hi;
      ax.count = counts[i];
      ax.step = (iv.hi - iv.lo) / static_cast<double>(counts[i]);
      const double offset = ax.kind == AxisKind::periodic ? 0.0 : 0.5;
      for (std::size_t j = 0; j < counts[i]; ++j) ax.nodes.push_back(iv.lo + (static_cast<double>(j) + offset) * ax.step);
      total *= counts[i];
      g.axes_.push_back(std::move(ax));
    }
    if (total > kMaxUnknowns)
      throw SpectralError("grid has " + std::to_string(total) + " nodes; the dense backend stops at " +
                          std::to_string(kMaxUnknowns));
    g.size_ = total;
    for (auto& ax : g.axes_) {
      if (ax.kind != AxisKind::polar) continue;
      ax.pole_lo = g.vanishes_at(ax, ax.lo);
      ax.pole_hi = g.vanishes_at(ax, ax.hi);
    }
    g.density_values_.resize(total);
    g.weights_.resize(total);
    double cell = 1.0;
    for (const auto& ax : g.axes_) cell *= ax.step;
    for (std::size_t k = 0; k < total; ++k) {
      Complex w;
      try {
        w = evaluate(g.density_, g.point(k));
      } catch (const std::exception& e) {
        throw SpectralError("volume density not evaluable at node " + describe(g.point(k)) + ": " + e.what());
      }
      if (!(w.real() > 0) || std::abs(w.imag()) > 1e-12 * w.real())
        throw SpectralError("volume density not positive at node " + describe(g.point(k)));
      g.density_values_[k] = w.real();
      g.weights_[k] = w.real() * cell;
    }
    return g;
  }

  std::size_t dimension() const { return axes_.size(); }
  std::size_t size() const { return size_; }
  const GridAxis& axis(std::size_t i) const { return axes_.at(i); }
  const std::vector<GridAxis>& axes() const { return axes_; }
  std::vector<std::size_t> counts() const {
    std::vector<std::size_t> c;
    for (const auto& ax : axes_) c.push_back(ax.count);
    return c;
  }
  const Expr& density() const { return density_; }
  /// sqrt|g| at each node.
  const std::vector<double>& density_values() const { return density_values_; }
  /// Quadrature weights sqrt|g| * cell volume.
  const std::vector<double>& weights() const { return weights_; }
  double volume() const {
    double v = 0;
    for (double w : weights_) v += w;
    return v;
  }

  std::size_t stride(std::size_t axis) const {
    std::size_t s = 1;
    for (std::size_t i = axis + 1; i < axes_.size(); ++i) s *= axes_[i].count;
    return s;
  }
  std::size_t coordinate_index(std::size_t node, std::size_t axis) const {
    return (node / stride(axis)) % axes_[axis].count;
  }
  Bindings point(std::size_t node) const {
    Bindings b;
    for (std::size_t i = 0; i < axes_.size(); ++i) b[axes_[i].name] = axes_[i].nodes[coordinate_index(node, i)];
    return b;
  }

 private:
  // A polar end is a pole when the density vanishes (or is singular) there.
  bool vanishes_at(const GridAxis& ax, double x) const {
    Bindings b;
    for (const auto& other : axes_) b[other.name] = 0.5 * (other.lo + other.hi);
    Bindings centre = b;
    b[ax.name] = x;
    try {
      double inside = std::abs(evaluate(density_, centre));
      return std::abs(evaluate(density_, b)) <= 1e-12 * std::max(1.0, inside);
    } catch (const EvaluationFault&) {
      return true;
    }
  }

  std::vector<GridAxis> axes_;
  std::size_t size_ = 0;
  Expr density_{1};
  std::vector<double> density_values_;
  std::vector<double> weights_;
};

/// Assembled operator on a grid. When symmetrized, matrix = W^(1/2) H W^(-1/2)
/// with W the node densities, so the weighted inner product becomes the
/// plain one and formal symmetry shows up as a Hermitian matrix.
struct DiscreteOperator {
  Eigen::MatrixXcd matrix;
  Grid grid;
  bool symmetrized = false;

  /// max |S - S^H| / max|S| (0 for the zero matrix).
  double hermitian_defect() const {
    double scale = matrix.cwiseAbs().maxCoeff();
    if (scale == 0) return 0;
    return (matrix - matrix.adjoint()).cwiseAbs().maxCoeff() / scale;
  }
};

struct SpectrumReport {
  std::vector<double> eigenvalues;  ///< ascending
  std::vector<std::string> axes;
  std::vector<std::size_t> counts;
  double adjoint_defect = 0.0;
  std::vector<double> deltas;
  double expected_delta = 0.0;
  bool pass = true;
  std::string note;
};

namespace detail {

inline Complex eval_at(const Expr& e, const Bindings& at, const char* what) {
  try {
    return evaluate(e, at);
  } catch (const std::exception& ex) {
    throw SpectralError(std::string(what) + " not evaluable at " + describe(at) + ": " + ex.what());
  }
}

// Line integral of theta along axis `axis` from x0 to x0 + h (5-point
// Gauss-Legendre).
inline Complex link_integral(const Expr& theta, Bindings at, const std::string& axis, double x0, double h) {
  if (theta.is_zero()) return 0.0;
  static constexpr std::array<double, 5> t = {0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640,
                                              0.9061798459386640};
  static constexpr std::array<double, 5> w = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665,
                                              0.2369268850561891, 0.2369268850561891};
  Complex s = 0.0;
  for (std::size_t k = 0; k < 5; ++k) {
    at[axis] = x0 + 0.5 * h * (1.0 + t[k]);
    s += w[k] * eval_at(theta, at, "link phase");
  }
  return 0.5 * h * s;
}

inline bool structurally_zero_everywhere(const Expr& e, const Grid& g) {
  if (e.is_zero()) return true;
  for (std::size_t k = 0; k < g.size(); ++k)
    if (std::abs(eval_at(e, g.point(k), "coefficient")) > 1e-14) return false;
  return true;
}

}  // namespace detail

/// Second-order finite-volume discretization of a diagonal-principal-part
/// operator.
///
/// Along an axis with a = c2[i][i] != 0 the operator is written as
///   (1/w) (d - i theta) [w a (d - i theta) psi] + c0'',   theta = (i/2) b / a,
/// with b = c1 - (1/w) d(w a), and discretized with flux differences and link
/// phases exp(-i int theta). Magnetic potentials enter only through the
/// phases, so gauge transformations act as an exact diagonal similarity.
/// Along an axis with a = 0 the first-order term uses the skew-symmetric
/// central form (1/2)[(1/w) d(w b .) + b d] - (1/2)(1/w) d(w b).
///
/// Periodic axes wrap; Dirichlet walls sit half a cell outside the end nodes;
/// at a pole the flux vanishes and a first-order link reaches across the pole
/// to the node at phi + pi of the even periodic partner axis.
inline DiscreteOperator discretize(const DiffOperator& op, const Grid& grid, bool symmetrize = true) {
  const std::size_t n = grid.dimension();
  if (op.dimension() != n) throw SpectralError("operator and grid dimensions differ");
  for (std::size_t i = 0; i < n; ++i)
    if (op.coordinates()[i] != grid.axis(i).name) throw SpectralError("operator and grid use different coordinates");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (!detail::structurally_zero_everywhere(simplify(op.c2(i, j)), grid))
        throw SpectralError("mixed second derivatives are not supported by the discretization");

  const Expr& w = grid.density();
  const Expr iu = Expr::imaginary_unit();
  Expr c0 = op.c0();
  std::vector<Expr> a(n), theta(n, Expr(0)), flux(n), drift(n, Expr(0));
  std::vector<bool> second(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& x = op.coordinates()[i];
    a[i] = simplify(op.c2(i, i));
    second[i] = !a[i].is_zero();
    if (second[i]) {
      flux[i] = simplify(w * a[i]);
      Expr b = simplify(op.c1(i) - differentiate(flux[i], x) / w);
      if (!b.is_zero()) {
        theta[i] = simplify(Expr::rational(1, 2) * iu * b / a[i]);
        c0 = c0 + iu * differentiate(simplify(flux[i] * theta[i]), x) / w + a[i] * theta[i] * theta[i];
      }
    } else {
      drift[i] = simplify(op.c1(i));
      if (!drift[i].is_zero()) c0 = c0 - Expr::rational(1, 2) * differentiate(simplify(w * drift[i]), x) / w;
    }
  }
  c0 = simplify(c0);

  const std::size_t size = grid.size();
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(size), static_cast<Eigen::Index>(size));
  const auto& dens = grid.density_values();
  auto at = [&](std::size_t r, std::size_t c) -> Complex& {
    return h(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  };

  for (std::size_t k = 0; k < size; ++k) at(k, k) += detail::eval_at(c0, grid.point(k), "zeroth-order coefficient");

  for (std::size_t i = 0; i < n; ++i) {
    const GridAxis& ax = grid.axis(i);
    const std::size_t stride = grid.stride(i);
    const double step = ax.step;
    // Partner axis for links across a pole.
    std::size_t partner = n;
    if (ax.pole_lo || ax.pole_hi) {
      for (std::size_t j = 0; j < n; ++j)
        if (j != i && grid.axis(j).kind == AxisKind::periodic) partner = j;
    }
    auto across_pole = [&](std::size_t node) -> std::size_t {
      if (partner == n) throw SpectralError("first-order term at a pole of '" + ax.name + "' needs a periodic partner axis");
      const GridAxis& pa = grid.axis(partner);
      if (pa.count % 2 != 0 || std::abs(pa.hi - pa.lo - 2 * std::numbers::pi) > 1e-12)
        throw SpectralError("the axis across a pole needs an even node count and period 2*pi");
      const std::size_t ps = grid.stride(partner);
      const std::size_t pj = grid.coordinate_index(node, partner);
      const std::size_t opposite = (pj + pa.count / 2) % pa.count;
      return node - pj * ps + opposite * ps;
    };

    for (std::size_t k = 0; k < size; ++k) {
      const std::size_t j = grid.coordinate_index(k, i);
      const bool last = j + 1 == ax.count;
      Bindings p = grid.point(k);
      if (second[i]) {
        // Link from node k to its upper neighbour.
        if (!last || ax.kind == AxisKind::periodic) {
          const std::size_t u = last ? k - j * stride : k + stride;
          Bindings mid = p;
          mid[ax.name] = ax.nodes[j] + 0.5 * step;
          Complex f = detail::eval_at(flux[i], mid, "flux coefficient") / (step * step);
          Complex phase = std::exp(Complex(0, -1) * detail::link_integral(theta[i], p, ax.name, ax.nodes[j], step));
          at(k, u) += f / dens[k] * phase;
          at(u, k) += f / dens[u] / phase;
          at(k, k) -= f / dens[k];
          at(u, u) -= f / dens[u];
        }
        // Dirichlet walls: ghost value -psi half a cell outside.
        auto wall = [&](double x) {
          Bindings b = p;
          b[ax.name] = x;
          at(k, k) -= 2.0 * detail::eval_at(flux[i], b, "flux coefficient") / (step * step) / dens[k];
        };
        if (j == 0 && (ax.kind == AxisKind::dirichlet || (ax.kind == AxisKind::polar && !ax.pole_lo))) wall(ax.lo);
        if (last && (ax.kind == AxisKind::dirichlet || (ax.kind == AxisKind::polar && !ax.pole_hi))) wall(ax.hi);
      } else if (!drift[i].is_zero()) {
        auto wb = [&](std::size_t node) {
          return dens[node] * detail::eval_at(drift[i], grid.point(node), "first-order coefficient");
        };
        if (!last || ax.kind == AxisKind::periodic) {
          const std::size_t u = last ? k - j * stride : k + stride;
          Complex c = (wb(k) + wb(u)) / (4.0 * step);
          at(k, u) += c / dens[k];
          at(u, k) -= c / dens[u];
        }
        // Across a pole the coordinate direction flips: (w b)_ghost = -(w b) at phi + pi.
        if (j == 0 && ax.pole_lo) {
          std::size_t g = across_pole(k);
          at(k, g) -= (wb(k) - wb(g)) / (4.0 * step) / dens[k];
        }
        if (last && ax.pole_hi) {
          std::size_t g = across_pole(k);
          at(k, g) += (wb(k) - wb(g)) / (4.0 * step) / dens[k];
        }
      }
    }
  }

  DiscreteOperator out{std::move(h), grid, false};
  if (symmetrize) {
    Eigen::VectorXd s(static_cast<Eigen::Index>(size));
    for (std::size_t k = 0; k < size; ++k) s(static_cast<Eigen::Index>(k)) = std::sqrt(dens[k]);
    out.matrix = s.asDiagonal() * out.matrix * s.cwiseInverse().asDiagonal();
    out.symmetrized = true;
  }
  return out;
}

/// max over seeded random pairs of |<S psi, phi> - <psi, S phi>| / (|psi| |phi| |S|),
/// with |S| the maximum absolute row sum.
inline double adjoint_defect(const DiscreteOperator& d, int trials = 8, std::uint64_t seed = 1) {
  const auto size = d.matrix.rows();
  double norm = d.matrix.cwiseAbs().rowwise().sum().maxCoeff();
  if (norm == 0 || size == 0) return 0.0;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  auto draw = [&] {
    Eigen::VectorXcd v(size);
    for (Eigen::Index k = 0; k < size; ++k) {
      double re = gauss(rng);
      double im = gauss(rng);
      v(k) = Complex(re, im);
    }
    return v;
  };
  double worst = 0;
  for (int t = 0; t < trials; ++t) {
    Eigen::VectorXcd psi = draw();
    Eigen::VectorXcd phi = draw();
    Complex lhs = (d.matrix * psi).dot(phi);
    Complex rhs = psi.dot(d.matrix * phi);
    worst = std::max(worst, std::abs(lhs - rhs) / (psi.norm() * phi.norm() * norm));
  }
  return worst;
}

/// The `count` smallest eigenvalues of a symmetrized, Hermitian operator.
inline SpectrumReport eigen_spectrum(const DiscreteOperator& d, std::size_t count) {
  if (!d.symmetrized) throw SpectralError("eigen_spectrum needs a symmetrized operator");
  const auto size = static_cast<std::size_t>(d.matrix.rows());
  if (count > size) throw SpectralError("asked for " + std::to_string(count) + " eigenvalues of a " +
                                        std::to_string(size) + "-node grid");
  double defect = d.hermitian_defect();
  if (defect > 1e-9) throw SpectralError("operator is not symmetric (Hermitian defect " + std::to_string(defect) + ")");
  SpectrumReport r;
  for (const auto& ax : d.grid.axes()) {
    r.axes.push_back(ax.name);
    r.counts.push_back(ax.count);
  }
  Eigen::VectorXd values;
  const double scale = d.matrix.cwiseAbs().maxCoeff();
  if (d.matrix.imag().cwiseAbs().maxCoeff() <= 1e-14 * scale) {
    Eigen::MatrixXd m = d.matrix.real();
    m = 0.5 * (m + m.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw SpectralError("eigensolver did not converge");
    values = solver.eigenvalues();
  } else {
    Eigen::MatrixXcd m = 0.5 * (d.matrix + d.matrix.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw SpectralError("eigensolver did not converge");
    values = solver.eigenvalues();
  }
  for (std::size_t k = 0; k < count; ++k) r.eigenvalues.push_back(values(static_cast<Eigen::Index>(k)));
  r.adjoint_defect = adjoint_defect(d);
  return r;
}

/// Spectra of H_{1/12} and H_0 on one grid, compared rank by rank against
/// the constant shift hbar^2 r_g / 12. Requires constant curvature.
inline SpectrumReport shift_check(const QuantizationSetup& setup, const Grid& grid, std::size_t count = 9) {
  const Expr& r = setup.chart.scalar_curvature();
  double r_value = 0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    double v = detail::eval_at(r, grid.point(k), "scalar curvature").real();
    if (k == 0) r_value = v;
    else if (std::abs(v - r_value) > 1e-9 * (1 + std::abs(r_value)))
      throw SpectralError("shift check needs constant scalar curvature");
  }
  SpectrumReport with = eigen_spectrum(discretize(energy_operator(setup, Rational(1, 12)), grid), count);
  SpectrumReport without = eigen_spectrum(discretize(energy_operator(setup, Rational(0)), grid), count);
  SpectrumReport out = with;
  out.adjoint_defect = std::max(with.adjoint_defect, without.adjoint_defect);
  out.expected_delta = setup.hbar * setup.hbar * r_value / 12.0;
  for (std::size_t k = 0; k < count; ++k) {
    double delta = with.eigenvalues[k] - without.eigenvalues[k];
    out.deltas.push_back(delta);
    if (std::abs(delta - out.expected_delta) > 1e-3 * (1 + std::abs(with.eigenvalues[k]))) out.pass = false;
  }
  return out;
}

}  // namespace curvquant
