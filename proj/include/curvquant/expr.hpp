#pragma once

#include <cstdio>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "curvquant/number.hpp"

namespace curvquant {

enum class Kind {
  constant,
  symbol,
  function,
  power,
  product,
  sum,
  quotient,
  negation,
};

enum class Func { sin, cos, tan, sinh, cosh, exp, ln, sqrt, abs };

inline std::string_view func_name(Func f) {
  switch (f) {
    case Func::sin: return "sin";
    case Func::cos: return "cos";
    case Func::tan: return "tan";
    case Func::sinh: return "sinh";
    case Func::cosh: return "cosh";
    case Func::exp: return "exp";
    case Func::ln: return "ln";
    case Func::sqrt: return "sqrt";
    case Func::abs: return "abs";
  }
  return "?";
}

inline std::optional<Func> func_from_name(std::string_view name) {
  static constexpr std::pair<std::string_view, Func> table[] = {
      {"sin", Func::sin},   {"cos", Func::cos},   {"tan", Func::tan},
      {"sinh", Func::sinh}, {"cosh", Func::cosh}, {"exp", Func::exp},
      {"ln", Func::ln},     {"log", Func::ln},    {"sqrt", Func::sqrt},
      {"abs", Func::abs},
  };
  for (const auto& [n, f] : table)
    if (n == name) return f;
  return std::nullopt;
}

class Expr;

struct Node {
  Kind kind = Kind::constant;
  Number value;
  std::string name;
  Func func = Func::sin;
  std::vector<Expr> args;
};

/// Immutable symbolic scalar expression. Copies share structure.
class Expr {
 public:
  Expr() : Expr(Number()) {}
  Expr(Number n) {  // NOLINT(implicit)
    auto node = std::make_shared<Node>();
    node->kind = Kind::constant;
    node->value = std::move(n);
    node_ = std::move(node);
  }
  Expr(std::int64_t n) : Expr(Number::integer(n)) {}  // NOLINT(implicit)
  Expr(int n) : Expr(Number::integer(n)) {}           // NOLINT(implicit)

  static Expr symbol(std::string name) {
    auto node = std::make_shared<Node>();
    node->kind = Kind::symbol;
    node->name = std::move(name);
    return Expr(std::move(node));
  }
  static Expr rational(std::int64_t n, std::int64_t d) { return Expr(Number::rational(n, d)); }
  static Expr imaginary_unit() { return Expr(Number::imaginary_unit()); }
  static Expr real(double v) { return Expr(Number::from_double(v)); }

  static Expr make(Kind kind, std::vector<Expr> args) {
    auto node = std::make_shared<Node>();
    node->kind = kind;
    node->args = std::move(args);
    return Expr(std::move(node));
  }
  static Expr apply(Func f, Expr arg) {
    auto node = std::make_shared<Node>();
    node->kind = Kind::function;
    node->func = f;
    node->args.push_back(std::move(arg));
    return Expr(std::move(node));
  }
  static Expr pow(Expr base, Expr exponent) {
    return make(Kind::power, {std::move(base), std::move(exponent)});
  }

  Kind kind() const { return node_->kind; }
  const Number& value() const { return node_->value; }
  const std::string& name() const { return node_->name; }
  Func func() const { return node_->func; }
  const std::vector<Expr>& args() const { return node_->args; }
  const Expr& arg(std::size_t i) const { return node_->args[i]; }

  bool is_constant() const { return kind() == Kind::constant; }
  bool is_zero() const { return is_constant() && value().is_zero(); }
  bool is_one() const { return is_constant() && value().is_one(); }
  bool is_symbol(std::string_view n) const { return kind() == Kind::symbol && name() == n; }

  friend Expr operator+(const Expr& a, const Expr& b) { return make(Kind::sum, {a, b}); }
  friend Expr operator-(const Expr& a, const Expr& b) {
    return make(Kind::sum, {a, make(Kind::negation, {b})});
  }
  friend Expr operator*(const Expr& a, const Expr& b) { return make(Kind::product, {a, b}); }
  friend Expr operator/(const Expr& a, const Expr& b) { return make(Kind::quotient, {a, b}); }
  Expr operator-() const { return make(Kind::negation, {*this}); }
  Expr& operator+=(const Expr& o) { return *this = *this + o; }
  Expr& operator-=(const Expr& o) { return *this = *this - o; }
  Expr& operator*=(const Expr& o) { return *this = *this * o; }

  const Node* node() const { return node_.get(); }

 private:
  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

inline Expr sin(const Expr& e) { return Expr::apply(Func::sin, e); }
inline Expr cos(const Expr& e) { return Expr::apply(Func::cos, e); }
inline Expr tan(const Expr& e) { return Expr::apply(Func::tan, e); }
inline Expr sinh(const Expr& e) { return Expr::apply(Func::sinh, e); }
inline Expr cosh(const Expr& e) { return Expr::apply(Func::cosh, e); }
inline Expr exp(const Expr& e) { return Expr::apply(Func::exp, e); }
inline Expr ln(const Expr& e) { return Expr::apply(Func::ln, e); }
inline Expr sqrt(const Expr& e) { return Expr::apply(Func::sqrt, e); }
inline Expr abs(const Expr& e) { return Expr::apply(Func::abs, e); }
inline Expr pow(const Expr& b, const Expr& e) { return Expr::pow(b, e); }

/// Total structural order. Returns <0, 0, >0.
inline int compare(const Expr& a, const Expr& b) {
  if (a.node() == b.node()) return 0;
  if (a.kind() != b.kind()) return static_cast<int>(a.kind()) < static_cast<int>(b.kind()) ? -1 : 1;
  switch (a.kind()) {
    case Kind::constant:
      if (a.value() == b.value()) return 0;
      return a.value() < b.value() ? -1 : 1;
    case Kind::symbol:
      return a.name().compare(b.name()) < 0 ? -1 : (a.name() == b.name() ? 0 : 1);
    case Kind::function:
      if (a.func() != b.func()) return static_cast<int>(a.func()) < static_cast<int>(b.func()) ? -1 : 1;
      break;
    default:
      break;
  }
  const auto& x = a.args();
  const auto& y = b.args();
  // Compare from the last argument: keeps x^2 next to x^3 and 2*x next to x.
  std::size_t n = std::min(x.size(), y.size());
  for (std::size_t i = 0; i < n; ++i) {
    int c = compare(x[x.size() - 1 - i], y[y.size() - 1 - i]);
    if (c != 0) return c;
  }
  if (x.size() != y.size()) return x.size() < y.size() ? -1 : 1;
  return 0;
}

inline bool structurally_equal(const Expr& a, const Expr& b) { return compare(a, b) == 0; }

struct ExprLess {
  bool operator()(const Expr& a, const Expr& b) const { return compare(a, b) < 0; }
};

inline void collect_symbols(const Expr& e, std::set<std::string>& out) {
  if (e.kind() == Kind::symbol) {
    out.insert(e.name());
    return;
  }
  for (const auto& a : e.args()) collect_symbols(a, out);
}

inline std::set<std::string> free_symbols(const Expr& e) {
  std::set<std::string> out;
  collect_symbols(e, out);
  return out;
}

inline bool depends_on(const Expr& e, std::string_view v) {
  if (e.kind() == Kind::symbol) return e.name() == v;
  for (const auto& a : e.args())
    if (depends_on(a, v)) return true;
  return false;
}

/// True when the expression contains no non-real constant.
inline bool is_real_valued(const Expr& e) {
  if (e.is_constant()) return e.value().is_real();
  for (const auto& a : e.args())
    if (!is_real_valued(a)) return false;
  return true;
}

namespace detail {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

// Binding strengths used by the printer.
enum Prec : int { kSum = 1, kProduct = 2, kUnary = 3, kPower = 4, kAtom = 5 };

inline std::string paren(const std::string& s, bool wrap) { return wrap ? "(" + s + ")" : s; }

inline std::pair<std::string, int> print_number(const Number& n) {
  if (n.exact()) {
    const auto& re = n.re();
    const auto& im = n.im();
    if (im.is_zero()) {
      if (re.is_integer()) return {re.to_string(), re < Rational(0) ? kUnary : kAtom};
      return {re.to_string(), kProduct};
    }
    std::string ims;
    if (im == Rational(1)) ims = "i";
    else if (im == Rational(-1)) ims = "-i";
    else ims = im.to_string() + "*i";
    if (re.is_zero()) return {ims, im == Rational(1) ? kAtom : kProduct};
    std::string s = re.to_string();
    s += (im < Rational(0)) ? " - " : " + ";
    auto mag = im < Rational(0) ? -im : im;
    s += mag.is_one() ? "i" : mag.to_string() + "*i";
    return {s, kSum};
  }
  auto v = n.value();
  if (v.imag() == 0.0) return {format_double(v.real()), v.real() < 0 ? kUnary : kAtom};
  std::string s;
  if (v.real() != 0.0) s = format_double(v.real()) + (v.imag() < 0 ? " - " : " + ");
  else if (v.imag() < 0) s = "-";
  s += format_double(std::fabs(v.imag())) + "*i";
  return {s, v.real() != 0.0 ? kSum : kProduct};
}

inline std::pair<std::string, int> print(const Expr& e);

inline std::string print_at(const Expr& e, int min_prec) {
  auto [s, p] = print(e);
  return paren(s, p < min_prec);
}

inline bool negative_leading(const Expr& e) {
  if (e.kind() == Kind::constant) return e.value().is_negative_real();
  if (e.kind() == Kind::product && !e.args().empty() && e.arg(0).is_constant())
    return e.arg(0).value().is_negative_real();
  return e.kind() == Kind::negation;
}

inline Expr negated_for_print(const Expr& e) {
  if (e.kind() == Kind::negation) return e.arg(0);
  if (e.kind() == Kind::constant) return Expr(-e.value());
  std::vector<Expr> f = e.args();
  Number c = -f[0].value();
  if (c.is_one()) f.erase(f.begin());
  else f[0] = Expr(c);
  if (f.size() == 1) return f[0];
  return Expr::make(Kind::product, std::move(f));
}

inline std::pair<std::string, int> print(const Expr& e) {
  switch (e.kind()) {
    case Kind::constant:
      return print_number(e.value());
    case Kind::symbol:
      return {e.name(), kAtom};
    case Kind::function:
      return {std::string(func_name(e.func())) + "(" + print(e.arg(0)).first + ")", kAtom};
    case Kind::negation:
      return {"-" + print_at(e.arg(0), kProduct + 1), kUnary};
    case Kind::sum: {
      std::string s;
      for (std::size_t i = 0; i < e.args().size(); ++i) {
        const auto& t = e.arg(i);
        if (i == 0) {
          s = print_at(t, kSum + 1);
        } else if (negative_leading(t)) {
          s += " - " + print_at(negated_for_print(t), kSum + 1);
        } else {
          s += " + " + print_at(t, kSum + 1);
        }
      }
      return {s, kSum};
    }
    case Kind::quotient:
      return {print_at(e.arg(0), kProduct) + "/" + print_at(e.arg(1), kProduct + 1), kProduct};
    case Kind::power: {
      const auto& b = e.arg(0);
      const auto& x = e.arg(1);
      if (x.is_constant() && x.value() == Number::rational(1, 2))
        return {"sqrt(" + print(b).first + ")", kAtom};
      // Base must bind tighter than ^; exponent is right-associative.
      return {print_at(b, kAtom) + "^" + print_at(x, kPower), kPower};
    }
    case Kind::product: {
      std::vector<Expr> f = e.args();
      std::string sign;
      if (!f.empty() && f[0].is_constant() && f[0].value().is_minus_one()) {
        sign = "-";
        f.erase(f.begin());
      }
      std::vector<std::string> num, den;
      for (const auto& x : f) {
        if (x.kind() == Kind::power && x.arg(1).is_constant() &&
            x.arg(1).value().is_negative_real()) {
          Expr flipped = Expr(-x.arg(1).value());
          if (flipped.is_one()) den.push_back(print_at(x.arg(0), kPower));
          else den.push_back(print_at(Expr::pow(x.arg(0), flipped), kPower));
        } else if (x.is_constant()) {
          num.push_back(print_at(x, kProduct + 1));
        } else {
          num.push_back(print_at(x, kProduct));
        }
      }
      std::string s;
      if (num.empty()) s = "1";
      for (std::size_t i = 0; i < num.size(); ++i) s += (i ? "*" : "") + num[i];
      for (const auto& d : den) s += "/" + d;
      if (!sign.empty()) return {"-" + paren(s, false), kUnary};
      return {s, kProduct};
    }
  }
  return {"?", kAtom};
}

}  // namespace detail

/// Renders an expression in the parser's grammar; parse(to_string(e)) is
/// equivalent to e.
inline std::string to_string(const Expr& e) { return detail::print(e).first; }

}  // namespace curvquant
