#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "curvquant/calculus.hpp"
#include "curvquant/evaluate.hpp"

namespace curvquant {

/// Linear differential operator of order <= 2 acting on scalar coefficients:
///   psi -> c0*psi + c1[i]*d_i psi + c2[i][j]*d_i d_j psi
/// with c2 symmetric. Coordinates are identified by name.
class DiffOperator {
 public:
  DiffOperator() = default;
  explicit DiffOperator(std::vector<std::string> coordinates)
      : coords_(std::move(coordinates)),
        c1_(coords_.size(), Expr(0)),
        c2_(coords_.size(), std::vector<Expr>(coords_.size(), Expr(0))) {}

  static DiffOperator multiplication(std::vector<std::string> coordinates, const Expr& f) {
    DiffOperator op(std::move(coordinates));
    op.c0_ = f;
    return op;
  }
  static DiffOperator identity(std::vector<std::string> coordinates) {
    return multiplication(std::move(coordinates), Expr(1));
  }

  std::size_t dimension() const { return coords_.size(); }
  const std::vector<std::string>& coordinates() const { return coords_; }

  const Expr& c0() const { return c0_; }
  const Expr& c1(std::size_t i) const { return c1_.at(i); }
  const Expr& c2(std::size_t i, std::size_t j) const { return c2_.at(i).at(j); }

  void set_c0(Expr e) { c0_ = std::move(e); }
  void set_c1(std::size_t i, Expr e) { c1_.at(i) = std::move(e); }
  /// Sets both (i,j) and (j,i).
  void set_c2(std::size_t i, std::size_t j, Expr e) {
    c2_.at(i).at(j) = e;
    c2_.at(j).at(i) = std::move(e);
  }

  /// Highest order whose coefficient block is not structurally zero after
  /// simplification.
  int order() const {
    for (std::size_t i = 0; i < dimension(); ++i)
      for (std::size_t j = 0; j < dimension(); ++j)
        if (!simplify(c2_[i][j]).is_zero()) return 2;
    for (std::size_t i = 0; i < dimension(); ++i)
      if (!simplify(c1_[i]).is_zero()) return 1;
    return 0;
  }

  DiffOperator simplified() const {
    DiffOperator out(coords_);
    out.c0_ = simplify(c0_);
    for (std::size_t i = 0; i < dimension(); ++i) {
      out.c1_[i] = simplify(c1_[i]);
      for (std::size_t j = 0; j < dimension(); ++j) out.c2_[i][j] = simplify(c2_[i][j]);
    }
    return out;
  }

  /// Symbolic action on a scalar function.
  Expr apply(const Expr& psi) const {
    Expr r = c0_ * psi;
    for (std::size_t i = 0; i < dimension(); ++i) {
      Expr di = differentiate(psi, coords_[i]);
      r = r + c1_[i] * di;
      for (std::size_t j = 0; j < dimension(); ++j)
        r = r + c2_[i][j] * differentiate(di, coords_[j]);
    }
    return simplify(r);
  }

  friend DiffOperator operator+(const DiffOperator& a, const DiffOperator& b) {
    return combine(a, b, Expr(1));
  }
  friend DiffOperator operator-(const DiffOperator& a, const DiffOperator& b) {
    return combine(a, b, Expr(-1));
  }
  /// Left multiplication by a scalar expression.
  friend DiffOperator operator*(const Expr& s, const DiffOperator& a) {
    DiffOperator out(a.coords_);
    out.c0_ = simplify(s * a.c0_);
    for (std::size_t i = 0; i < a.dimension(); ++i) {
      out.c1_[i] = simplify(s * a.c1_[i]);
      for (std::size_t j = 0; j < a.dimension(); ++j) out.c2_[i][j] = simplify(s * a.c2_[i][j]);
    }
    return out;
  }

 private:
  static DiffOperator combine(const DiffOperator& a, const DiffOperator& b, const Expr& sign) {
    if (a.coords_ != b.coords_) throw std::invalid_argument("operators on different charts");
    DiffOperator out(a.coords_);
    out.c0_ = simplify(a.c0_ + sign * b.c0_);
    for (std::size_t i = 0; i < a.dimension(); ++i) {
      out.c1_[i] = simplify(a.c1_[i] + sign * b.c1_[i]);
      for (std::size_t j = 0; j < a.dimension(); ++j)
        out.c2_[i][j] = simplify(a.c2_[i][j] + sign * b.c2_[i][j]);
    }
    return out;
  }

  std::vector<std::string> coords_;
  Expr c0_{0};
  std::vector<Expr> c1_;
  std::vector<std::vector<Expr>> c2_;
};

/// Outcome of a coefficient-wise comparison of two operators.
struct OperatorComparison {
  Verdict verdict = Verdict::equal;
  std::string coefficient;  ///< e.g. "c0", "c1[theta]", "c2[x,y]"
  Comparison detail;
};

inline OperatorComparison compare(const DiffOperator& a, const DiffOperator& b, const Domain& dom,
                                  std::uint64_t seed, SamplingOptions opt = {}) {
  if (a.coordinates() != b.coordinates()) throw std::invalid_argument("operators on different charts");
  const auto& x = a.coordinates();
  auto check = [&](const Expr& p, const Expr& q, std::string label) -> std::optional<OperatorComparison> {
    auto c = compare(simplify(p), simplify(q), dom, seed, opt);
    if (c.verdict == Verdict::equal) return std::nullopt;
    return OperatorComparison{c.verdict, std::move(label), c};
  };
  if (auto r = check(a.c0(), b.c0(), "c0")) return *r;
  for (std::size_t i = 0; i < a.dimension(); ++i)
    if (auto r = check(a.c1(i), b.c1(i), "c1[" + x[i] + "]")) return *r;
  for (std::size_t i = 0; i < a.dimension(); ++i)
    for (std::size_t j = i; j < a.dimension(); ++j)
      if (auto r = check(a.c2(i, j), b.c2(i, j), "c2[" + x[i] + "," + x[j] + "]")) return *r;
  return {};
}

/// Attempted composition whose total order exceeds two.
class UnsupportedComposition : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// p∘q by Leibniz expansion. Requires order(p) + order(q) <= 2.
inline DiffOperator compose(const DiffOperator& p, const DiffOperator& q) {
  if (p.coordinates() != q.coordinates()) throw std::invalid_argument("operators on different charts");
  const int op = p.order();
  const int oq = q.order();
  if (op + oq > 2)
    throw UnsupportedComposition("composition of orders " + std::to_string(op) + " and " +
                                 std::to_string(oq) + " exceeds order 2");
  const auto& x = p.coordinates();
  const std::size_t n = x.size();
  DiffOperator out(x);
  // c0 = a0 b0 + a^i d_i b0 + a^ij d_i d_j b0
  Expr c0 = p.c0() * q.c0();
  std::vector<Expr> c1(n, Expr(0));
  std::vector<std::vector<Expr>> c2(n, std::vector<Expr>(n, Expr(0)));
  for (std::size_t k = 0; k < n; ++k) {
    c1[k] = p.c0() * q.c1(k);
    for (std::size_t l = 0; l < n; ++l) c2[k][l] = p.c0() * q.c2(k, l);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Expr& ai = p.c1(i);
    if (simplify(ai).is_zero()) continue;
    c0 = c0 + ai * differentiate(q.c0(), x[i]);
    c1[i] = c1[i] + ai * q.c0();
    for (std::size_t k = 0; k < n; ++k) {
      c1[k] = c1[k] + ai * differentiate(q.c1(k), x[i]);
      // a^i b^k d_i d_k: symmetrize into c2
      c2[i][k] = c2[i][k] + Expr::rational(1, 2) * ai * q.c1(k);
      c2[k][i] = c2[k][i] + Expr::rational(1, 2) * ai * q.c1(k);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const Expr& aij = p.c2(i, j);
      if (simplify(aij).is_zero()) continue;
      // a^ij d_i d_j (b0 psi) with b0 of order zero (q has order 0 here).
      Expr dj = differentiate(q.c0(), x[j]);
      c0 = c0 + aij * differentiate(dj, x[i]);
      c1[i] = c1[i] + aij * dj;
      c1[j] = c1[j] + aij * differentiate(q.c0(), x[i]);
      c2[i][j] = c2[i][j] + aij * q.c0();
    }
  }
  out.set_c0(simplify(c0));
  for (std::size_t k = 0; k < n; ++k) {
    out.set_c1(k, simplify(c1[k]));
    for (std::size_t l = k; l < n; ++l)
      out.set_c2(k, l, simplify(Expr::rational(1, 2) * (c2[k][l] + c2[l][k])));
  }
  return out;
}

inline DiffOperator commutator(const DiffOperator& p, const DiffOperator& q) {
  return compose(p, q) - compose(q, p);
}

}  // namespace curvquant
