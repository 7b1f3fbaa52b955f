#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "curvquant/diff_operator.hpp"

namespace curvquant {

using ExprMatrix = std::vector<std::vector<Expr>>;

/// Invalid metric or chart data.
class ChartError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Vector field X = X^i d_i on a chart.
struct VectorField {
  std::vector<Expr> components;

  /// X(f) = X^i d_i f
  Expr apply(const Expr& f, const std::vector<std::string>& coords) const {
    Expr r(0);
    for (std::size_t i = 0; i < components.size(); ++i)
      r = r + components[i] * differentiate(f, coords[i]);
    return simplify(r);
  }
};

/// One-form A = A_i dx^i on a chart.
struct OneForm {
  std::vector<Expr> components;

  Expr operator()(const VectorField& x) const {
    Expr r(0);
    for (std::size_t i = 0; i < components.size(); ++i) r = r + components[i] * x.components[i];
    return simplify(r);
  }
};

/// Exterior derivative of a one-form: (dA)_ij = d_i A_j - d_j A_i.
inline ExprMatrix exterior_derivative(const OneForm& a, const std::vector<std::string>& coords) {
  const std::size_t n = coords.size();
  ExprMatrix out(n, std::vector<Expr>(n, Expr(0)));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      out[i][j] = simplify(differentiate(a.components[j], coords[i]) -
                           differentiate(a.components[i], coords[j]));
  return out;
}

/// Lie bracket [X, Y]^i = X(Y^i) - Y(X^i).
inline VectorField lie_bracket(const VectorField& x, const VectorField& y,
                               const std::vector<std::string>& coords) {
  VectorField out;
  for (std::size_t i = 0; i < coords.size(); ++i)
    out.components.push_back(simplify(x.apply(y.components[i], coords) - y.apply(x.components[i], coords)));
  return out;
}

namespace detail {

inline Expr determinant(const ExprMatrix& m) {
  const std::size_t n = m.size();
  if (n == 1) return m[0][0];
  if (n == 2) return simplify(m[0][0] * m[1][1] - m[0][1] * m[1][0]);
  Expr det(0);
  for (std::size_t c = 0; c < n; ++c) {
    if (simplify(m[0][c]).is_zero()) continue;
    ExprMatrix minor;
    for (std::size_t r = 1; r < n; ++r) {
      std::vector<Expr> row;
      for (std::size_t k = 0; k < n; ++k)
        if (k != c) row.push_back(m[r][k]);
      minor.push_back(std::move(row));
    }
    Expr term = m[0][c] * determinant(minor);
    det = (c % 2 == 0) ? det + term : det - term;
  }
  return simplify(det);
}

inline Expr cofactor(const ExprMatrix& m, std::size_t row, std::size_t col) {
  const std::size_t n = m.size();
  if (n == 1) return Expr(1);
  ExprMatrix minor;
  for (std::size_t r = 0; r < n; ++r) {
    if (r == row) continue;
    std::vector<Expr> v;
    for (std::size_t c = 0; c < n; ++c)
      if (c != col) v.push_back(m[r][c]);
    minor.push_back(std::move(v));
  }
  Expr d = determinant(minor);
  return ((row + col) % 2 == 0) ? d : simplify(-d);
}

// Leading principal minors of a numeric symmetric matrix (Sylvester).
inline bool positive_definite(std::vector<std::vector<double>> a) {
  const std::size_t n = a.size();
  for (std::size_t k = 0; k < n; ++k) {
    // Gaussian elimination without pivoting; pivots are the ratios of
    // successive leading minors.
    if (!(a[k][k] > 0)) return false;
    for (std::size_t r = k + 1; r < n; ++r) {
      double f = a[r][k] / a[k][k];
      for (std::size_t c = k; c < n; ++c) a[r][c] -= f * a[k][c];
    }
  }
  return true;
}

}  // namespace detail

/// Coordinate chart with a Riemannian metric g_ij.
///
/// Derived quantities (inverse metric, determinant, volume density,
/// Christoffel symbols, scalar curvature) are computed on first use and
/// cached. The cache is shared between copies and filled under call_once, so
/// a chart may be read concurrently.
class MetricChart {
 public:
  /// Number of sample points for the positive-definiteness check.
  static constexpr int kDefinitenessSamples = 32;

  MetricChart(std::vector<std::string> coordinates, ExprMatrix metric, Domain domain)
      : coords_(std::move(coordinates)), domain_(std::move(domain)), cache_(std::make_shared<Cache>()) {
    const std::size_t n = coords_.size();
    if (n == 0) throw ChartError("chart needs at least one coordinate");
    if (metric.size() != n) throw ChartError("metric must be " + std::to_string(n) + "x" + std::to_string(n));
    for (const auto& row : metric)
      if (row.size() != n) throw ChartError("metric must be square");
    for (const auto& c : coords_)
      if (!domain_.contains(c)) throw ChartError("coordinate '" + c + "' has no domain interval");
    metric_.assign(n, std::vector<Expr>(n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) metric_[i][j] = simplify(metric[i][j]);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (!structurally_equal(metric_[i][j], metric_[j][i]))
          throw ChartError("metric is not symmetric at (" + std::to_string(i) + "," + std::to_string(j) + ")");
    check_positive_definite();
  }

  std::size_t dimension() const { return coords_.size(); }
  const std::vector<std::string>& coordinates() const { return coords_; }
  const Domain& domain() const { return domain_; }
  const Expr& metric(std::size_t i, std::size_t j) const { return metric_.at(i).at(j); }
  const ExprMatrix& metric() const { return metric_; }

  const Expr& inverse_metric(std::size_t i, std::size_t j) const { return geometry().inverse.at(i).at(j); }
  const Expr& determinant() const { return geometry().det; }
  /// sqrt|g|, the coordinate density of the Riemannian volume element.
  const Expr& sqrt_det() const { return geometry().sqrt_det; }
  /// |g|^(1/4), the coefficient of the metric half-form in the coordinate basis.
  const Expr& quarter_det() const { return geometry().quarter_det; }
  /// Gamma^k_ij
  const Expr& christoffel(std::size_t k, std::size_t i, std::size_t j) const {
    return connection().gamma.at(k).at(i).at(j);
  }
  /// Gamma^b_ab, the contracted symbol.
  const Expr& contracted_christoffel(std::size_t a) const { return connection().contracted.at(a); }
  const Expr& scalar_curvature() const { return curvature().scalar; }

  std::size_t index_of(const std::string& coordinate) const {
    for (std::size_t i = 0; i < coords_.size(); ++i)
      if (coords_[i] == coordinate) return i;
    throw ChartError("unknown coordinate '" + coordinate + "'");
  }

 private:
  struct Geometry {
    ExprMatrix inverse;
    Expr det, sqrt_det, quarter_det;
  };
  struct Connection {
    std::vector<ExprMatrix> gamma;
    std::vector<Expr> contracted;
  };
  struct Curvature {
    Expr scalar;
  };
  struct Cache {
    std::once_flag geometry_once, connection_once, curvature_once;
    Geometry geometry;
    Connection connection;
    Curvature curvature;
  };

  void check_positive_definite() const {
    std::mt19937_64 rng(0x5eed'6e0'3e7bULL);
    const std::size_t n = dimension();
    for (int s = 0; s < kDefinitenessSamples; ++s) {
      Bindings point = domain_.sample(rng);
      std::vector<std::vector<double>> g(n, std::vector<double>(n));
      try {
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j) {
            Complex v = evaluate(metric_[i][j], point);
            if (v.imag() != 0.0) throw ChartError("metric is not real-valued");
            g[i][j] = v.real();
          }
      } catch (const UnboundSymbol& e) {
        throw ChartError(std::string("metric references ") + e.what());
      } catch (const EvaluationFault& e) {
        throw ChartError(std::string("metric cannot be evaluated at ") + describe(point) + ": " + e.what());
      }
      if (!detail::positive_definite(g))
        throw ChartError("metric is not positive definite at " + describe(point));
    }
  }

  const Geometry& geometry() const {
    std::call_once(cache_->geometry_once, [this] {
      const std::size_t n = dimension();
      Geometry& g = cache_->geometry;
      g.det = detail::determinant(metric_);
      g.sqrt_det = simplify(pow(g.det, Expr::rational(1, 2)));
      g.quarter_det = simplify(pow(g.det, Expr::rational(1, 4)));
      g.inverse.assign(n, std::vector<Expr>(n, Expr(0)));
      bool diagonal = true;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          if (i != j && !metric_[i][j].is_zero()) diagonal = false;
      Expr inv_det = simplify(pow(g.det, Expr(-1)));
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          if (diagonal) {
            if (i == j) g.inverse[i][j] = simplify(pow(metric_[i][i], Expr(-1)));
          } else {
            // inverse = adjugate / det; adjugate is the transposed cofactor matrix
            g.inverse[i][j] = simplify(detail::cofactor(metric_, j, i) * inv_det);
          }
        }
    });
    return cache_->geometry;
  }

  const Connection& connection() const {
    std::call_once(cache_->connection_once, [this] {
      const std::size_t n = dimension();
      const Geometry& geo = geometry();
      // dg[l][i][j] = d_l g_ij
      std::vector<ExprMatrix> dg(n, ExprMatrix(n, std::vector<Expr>(n)));
      for (std::size_t l = 0; l < n; ++l)
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j) dg[l][i][j] = differentiate(metric_[i][j], coords_[l]);
      Connection& c = cache_->connection;
      c.gamma.assign(n, ExprMatrix(n, std::vector<Expr>(n, Expr(0))));
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = i; j < n; ++j) {
            Expr s(0);
            for (std::size_t l = 0; l < n; ++l) {
              if (geo.inverse[k][l].is_zero()) continue;
              s = s + geo.inverse[k][l] * (dg[i][j][l] + dg[j][i][l] - dg[l][i][j]);
            }
            Expr v = simplify(Expr::rational(1, 2) * s);
            c.gamma[k][i][j] = v;
            c.gamma[k][j][i] = v;
          }
      c.contracted.assign(n, Expr(0));
      for (std::size_t a = 0; a < n; ++a) {
        Expr s(0);
        for (std::size_t b = 0; b < n; ++b) s = s + c.gamma[b][a][b];
        c.contracted[a] = simplify(s);
      }
    });
    return cache_->connection;
  }

  const Curvature& curvature() const {
    std::call_once(cache_->curvature_once, [this] {
      const std::size_t n = dimension();
      const Geometry& geo = geometry();
      const Connection& con = connection();
      const auto& G = con.gamma;
      // r = g^ij (d_k G^k_ij - d_i G^k_kj + G^k_kl G^l_ij - G^k_il G^l_kj)
      Expr r(0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          if (geo.inverse[i][j].is_zero()) continue;
          Expr ricci(0);
          for (std::size_t k = 0; k < n; ++k) {
            ricci = ricci + differentiate(G[k][i][j], coords_[k]) - differentiate(G[k][k][j], coords_[i]);
            for (std::size_t l = 0; l < n; ++l)
              ricci = ricci + G[k][k][l] * G[l][i][j] - G[k][i][l] * G[l][k][j];
          }
          r = r + geo.inverse[i][j] * simplify(ricci);
        }
      cache_->curvature.scalar = simplify(r);
    });
    return cache_->curvature;
  }

  std::vector<std::string> coords_;
  ExprMatrix metric_;
  Domain domain_;
  std::shared_ptr<Cache> cache_;
};

/// Christoffel symbols as a [k][i][j] array.
inline std::vector<ExprMatrix> christoffel(const MetricChart& chart) {
  const std::size_t n = chart.dimension();
  std::vector<ExprMatrix> out(n, ExprMatrix(n, std::vector<Expr>(n)));
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) out[k][i][j] = chart.christoffel(k, i, j);
  return out;
}

/// Scalar curvature; the unit sphere has r = +2.
inline Expr scalar_curvature(const MetricChart& chart) { return chart.scalar_curvature(); }

/// sqrt|g|.
inline Expr volume_density(const MetricChart& chart) { return chart.sqrt_det(); }

/// div_g X = d_i(X^i sqrt|g|) / sqrt|g|
inline Expr divergence(const MetricChart& chart, const VectorField& x) {
  if (x.components.size() != chart.dimension()) throw ChartError("vector field dimension mismatch");
  const Expr& w = chart.sqrt_det();
  Expr s(0);
  for (std::size_t i = 0; i < chart.dimension(); ++i)
    s = s + differentiate(simplify(x.components[i] * w), chart.coordinates()[i]);
  return simplify(s / w);
}

/// Reference basis of a half-form coefficient.
enum class HalfFormBasis {
  coordinate,  ///< sqrt(dx^1 ^ ... ^ dx^n)
  metric,      ///< sqrt(nu_g) = |g|^(1/4) sqrt(dx^1 ^ ... ^ dx^n)
};

struct HalfForm {
  Expr coefficient;
  HalfFormBasis basis = HalfFormBasis::metric;
};

inline HalfForm to_coordinate_basis(const MetricChart& chart, const HalfForm& h) {
  if (h.basis == HalfFormBasis::coordinate) return h;
  return {simplify(h.coefficient * chart.quarter_det()), HalfFormBasis::coordinate};
}

inline HalfForm to_metric_basis(const MetricChart& chart, const HalfForm& h) {
  if (h.basis == HalfFormBasis::metric) return h;
  return {simplify(h.coefficient / chart.quarter_det()), HalfFormBasis::metric};
}

/// Lie derivative of a half-form along X, returned in the input's basis.
///
/// Both supported bases are determinant-type, so L_X b is proportional to b:
/// for the coordinate basis the factor is d_i X^i, for sqrt(nu_g) it is
/// div_g X (the half-form picks up half of it).
inline HalfForm halfform_lie(const MetricChart& chart, const VectorField& x, const HalfForm& h) {
  const auto& coords = chart.coordinates();
  Expr rate(0);
  if (h.basis == HalfFormBasis::metric) {
    rate = divergence(chart, x);
  } else {
    for (std::size_t i = 0; i < chart.dimension(); ++i) rate = rate + differentiate(x.components[i], coords[i]);
  }
  return {simplify(x.apply(h.coefficient, coords) + Expr::rational(1, 2) * rate * h.coefficient), h.basis};
}

/// Levi-Civita covariant derivative of a half-form along X:
///   nabla_X (f sqrt(dx)) = (X f - 1/2 X^a Gamma^b_ab f) sqrt(dx)
/// Metric-basis input is converted to the coordinate basis and back.
inline HalfForm halfform_covderiv(const MetricChart& chart, const VectorField& x, const HalfForm& h) {
  HalfForm flat = to_coordinate_basis(chart, h);
  const auto& coords = chart.coordinates();
  Expr contraction(0);
  for (std::size_t a = 0; a < chart.dimension(); ++a)
    contraction = contraction + x.components[a] * chart.contracted_christoffel(a);
  HalfForm out{simplify(x.apply(flat.coefficient, coords) - Expr::rational(1, 2) * contraction * flat.coefficient),
               HalfFormBasis::coordinate};
  return h.basis == HalfFormBasis::metric ? to_metric_basis(chart, out) : out;
}

/// Laplace-Beltrami operator, or the Bochner Laplacian of the connection
/// d - (i/hbar) A when a potential is given.
inline DiffOperator laplace_beltrami(const MetricChart& chart, const std::optional<OneForm>& potential,
                                     double hbar) {
  if (!(hbar > 0)) throw std::invalid_argument("hbar must be positive");
  const std::size_t n = chart.dimension();
  const auto& x = chart.coordinates();
  DiffOperator op(x);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) op.set_c2(i, j, chart.inverse_metric(i, j));
  if (!potential) {
    // (1/sqrt g) d_i (sqrt g g^ij d_j)
    const Expr& w = chart.sqrt_det();
    for (std::size_t j = 0; j < n; ++j) {
      Expr s(0);
      for (std::size_t i = 0; i < n; ++i)
        s = s + differentiate(simplify(w * chart.inverse_metric(i, j)), x[i]);
      op.set_c1(j, simplify(s / w));
    }
    return op;
  }
  if (potential->components.size() != n) throw ChartError("magnetic potential dimension mismatch");
  const auto& a = potential->components;
  const Expr h = Expr::real(hbar);
  const Expr i_over_h = Expr::imaginary_unit() / h;
  // g^ij (nabla_i nabla_j - Gamma^k_ij nabla_k), nabla = d - (i/hbar) A
  std::vector<Expr> trace_gamma(n, Expr(0));  // g^ij Gamma^k_ij
  for (std::size_t k = 0; k < n; ++k) {
    Expr s(0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) s = s + chart.inverse_metric(i, j) * chart.christoffel(k, i, j);
    trace_gamma[k] = simplify(s);
  }
  Expr c0(0);
  for (std::size_t k = 0; k < n; ++k) {
    Expr c1 = -trace_gamma[k];
    for (std::size_t j = 0; j < n; ++j) c1 = c1 - Expr(2) * i_over_h * chart.inverse_metric(k, j) * a[j];
    op.set_c1(k, simplify(c1));
    c0 = c0 + i_over_h * trace_gamma[k] * a[k];
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const Expr& gij = chart.inverse_metric(i, j);
      if (gij.is_zero()) continue;
      c0 = c0 - i_over_h * gij * differentiate(a[j], x[i]) - gij * a[i] * a[j] / (h * h);
    }
  op.set_c0(simplify(c0));
  return op;
}

}  // namespace curvquant
