#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "curvquant/quantization.hpp"

namespace curvquant {

inline constexpr const char* kManifestSchema = "curvquant-manifest/1";

/// Invalid manifest. The message starts with the offending field path,
/// e.g. "metric[1][0]: unexpected end of input at offset 4".
class ManifestError : public std::runtime_error {
 public:
  ManifestError(const std::string& path, const std::string& message)
      : std::runtime_error(path.empty() ? message : path + ": " + message), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct CoordinateSpec {
  std::string name;
  nlohmann::json min = 0;  ///< number or expression string
  nlohmann::json max = 1;
  Boundary boundary = Boundary::open;
};

struct ConstantSpec {
  double value = 0;
  std::optional<double> min, max;  ///< sampling range when kept symbolic
};

/// Declarative description of a chart and its mechanical data, kept in the
/// textual form it was written in.
struct Manifest {
  std::string name;
  std::vector<CoordinateSpec> coordinates;
  std::vector<std::vector<std::string>> metric;
  std::string potential = "0";
  std::optional<std::vector<std::string>> magnetic_potential;
  std::map<std::string, ConstantSpec> constants;  ///< "hbar" included when given
};

namespace detail {

inline const char* boundary_name(Boundary b) {
  switch (b) {
    case Boundary::open: return "open";
    case Boundary::periodic: return "periodic";
    case Boundary::polar: return "polar";
  }
  return "open";
}

inline Boundary boundary_from(const std::string& s, const std::string& path) {
  if (s == "open" || s == "dirichlet") return Boundary::open;
  if (s == "periodic") return Boundary::periodic;
  if (s == "polar") return Boundary::polar;
  throw ManifestError(path, "unknown boundary '" + s + "' (expected open, dirichlet, periodic or polar)");
}

inline const nlohmann::json& require(const nlohmann::json& obj, const char* key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ManifestError(path.empty() ? key : path + "." + key, "missing");
  return *it;
}

inline std::string expect_string(const nlohmann::json& v, const std::string& path) {
  if (!v.is_string()) throw ManifestError(path, "expected an expression string");
  return v.get<std::string>();
}

inline double expect_number(const nlohmann::json& v, const std::string& path) {
  if (!v.is_number()) throw ManifestError(path, "expected a number");
  return v.get<double>();
}

inline bool reserved_name(const std::string& s) {
  if (s == "i" || s == "pi" || s == "hbar" || func_from_name(s)) return true;
  if (s.rfind("p_", 0) == 0) return true;
  if (s.size() > 1 && s[0] == 'p' && s.find_first_not_of("0123456789", 1) == std::string::npos) return true;
  return false;
}

inline bool valid_identifier(const std::string& s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  return true;
}

}  // namespace detail

/// Schema validation of a manifest document. Expressions are only checked
/// later, by realize().
inline Manifest parse_manifest(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ManifestError("", "manifest must be a JSON object");
  Manifest m;
  if (auto it = doc.find("schema"); it != doc.end() && *it != kManifestSchema)
    throw ManifestError("schema", "unsupported schema " + it->dump() + " (expected \"" + kManifestSchema + "\")");
  for (const auto& [key, _] : doc.items()) {
    static const std::set<std::string> known = {"schema", "name", "coordinates", "metric",
                                                "potential", "magnetic_potential", "constants"};
    if (!known.count(key)) throw ManifestError(key, "unknown field");
  }
  const auto& name = detail::require(doc, "name", "");
  if (!name.is_string()) throw ManifestError("name", "expected a string");
  m.name = name.get<std::string>();

  const auto& coords = detail::require(doc, "coordinates", "");
  if (!coords.is_array() || coords.empty()) throw ManifestError("coordinates", "expected a non-empty array");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < coords.size(); ++i) {
    const std::string path = "coordinates[" + std::to_string(i) + "]";
    const auto& c = coords[i];
    if (!c.is_object()) throw ManifestError(path, "expected an object");
    CoordinateSpec spec;
    const auto& cname = detail::require(c, "name", path);
    if (!cname.is_string() || !detail::valid_identifier(cname.get<std::string>()))
      throw ManifestError(path + ".name", "expected an identifier");
    spec.name = cname.get<std::string>();
    if (detail::reserved_name(spec.name)) throw ManifestError(path + ".name", "'" + spec.name + "' is reserved");
    if (!seen.insert(spec.name).second) throw ManifestError(path + ".name", "duplicate coordinate '" + spec.name + "'");
    for (const char* key : {"min", "max"}) {
      const auto& v = detail::require(c, key, path);
      if (!v.is_number() && !v.is_string()) throw ManifestError(path + "." + key, "expected a number or expression");
      (key[1] == 'i' ? spec.min : spec.max) = v;
    }
    if (auto b = c.find("boundary"); b != c.end()) {
      if (!b->is_string()) throw ManifestError(path + ".boundary", "expected a string");
      spec.boundary = detail::boundary_from(b->get<std::string>(), path + ".boundary");
    }
    m.coordinates.push_back(std::move(spec));
  }
  const std::size_t n = m.coordinates.size();

  const auto& metric = detail::require(doc, "metric", "");
  if (!metric.is_array() || metric.size() != n)
    throw ManifestError("metric", "expected a " + std::to_string(n) + "x" + std::to_string(n) + " matrix");
  for (std::size_t i = 0; i < n; ++i) {
    const std::string row = "metric[" + std::to_string(i) + "]";
    if (!metric[i].is_array() || metric[i].size() != n)
      throw ManifestError(row, "expected " + std::to_string(n) + " entries");
    std::vector<std::string> r;
    for (std::size_t j = 0; j < n; ++j) {
      const auto& v = metric[i][j];
      const std::string p = row + "[" + std::to_string(j) + "]";
      if (v.is_number_integer()) r.push_back(std::to_string(v.get<std::int64_t>()));
      else r.push_back(detail::expect_string(v, p));
    }
    m.metric.push_back(std::move(r));
  }
  if (auto v = doc.find("potential"); v != doc.end()) m.potential = detail::expect_string(*v, "potential");
  if (auto v = doc.find("magnetic_potential"); v != doc.end()) {
    if (!v->is_array() || v->size() != n)
      throw ManifestError("magnetic_potential", "expected " + std::to_string(n) + " components");
    std::vector<std::string> a;
    for (std::size_t i = 0; i < n; ++i)
      a.push_back(detail::expect_string((*v)[i], "magnetic_potential[" + std::to_string(i) + "]"));
    m.magnetic_potential = std::move(a);
  }
  if (auto v = doc.find("constants"); v != doc.end()) {
    if (!v->is_object()) throw ManifestError("constants", "expected an object");
    for (const auto& [key, value] : v->items()) {
      const std::string path = "constants." + key;
      if (!detail::valid_identifier(key)) throw ManifestError(path, "expected an identifier");
      if (key != "hbar" && detail::reserved_name(key)) throw ManifestError(path, "'" + key + "' is reserved");
      if (seen.count(key)) throw ManifestError(path, "'" + key + "' is also a coordinate");
      ConstantSpec spec;
      if (value.is_object()) {
        spec.value = detail::expect_number(detail::require(value, "value", path), path + ".value");
        if (auto lo = value.find("min"); lo != value.end()) spec.min = detail::expect_number(*lo, path + ".min");
        if (auto hi = value.find("max"); hi != value.end()) spec.max = detail::expect_number(*hi, path + ".max");
      } else {
        spec.value = detail::expect_number(value, path);
      }
      if (key == "hbar" && !(spec.value > 0)) throw ManifestError(path, "must be positive");
      m.constants[key] = spec;
    }
  }
  return m;
}

/// Canonical JSON form; keys are sorted, so equal manifests dump equally.
inline nlohmann::json to_json(const Manifest& m) {
  nlohmann::json doc;
  doc["schema"] = kManifestSchema;
  doc["name"] = m.name;
  doc["coordinates"] = nlohmann::json::array();
  for (const auto& c : m.coordinates)
    doc["coordinates"].push_back(
        {{"name", c.name}, {"min", c.min}, {"max", c.max}, {"boundary", detail::boundary_name(c.boundary)}});
  doc["metric"] = m.metric;
  doc["potential"] = m.potential;
  if (m.magnetic_potential) doc["magnetic_potential"] = *m.magnetic_potential;
  nlohmann::json constants = nlohmann::json::object();
  for (const auto& [key, spec] : m.constants) {
    if (!spec.min && !spec.max) {
      constants[key] = spec.value;
      continue;
    }
    nlohmann::json c{{"value", spec.value}};
    if (spec.min) c["min"] = *spec.min;
    if (spec.max) c["max"] = *spec.max;
    constants[key] = c;
  }
  doc["constants"] = constants;
  return doc;
}

inline void write_manifest(const Manifest& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << to_json(m).dump(2) << "\n";
  if (!out) throw std::runtime_error("write failed for " + path);
}

/// FNV-1a over the canonical form.
inline std::string digest(const Manifest& m) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : to_json(m).dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a64:%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct LoadOptions {
  bool keep_params = false;     ///< leave non-hbar constants symbolic
  std::optional<double> hbar;  ///< overrides constants.hbar
};

/// A manifest turned into geometry and quantization data.
struct LoadedManifest {
  Manifest manifest;
  QuantizationSetup setup;
  ExprMatrix magnetic_field;
  bool magnetic_field_closed = true;
  std::vector<std::string> parameters;  ///< constants kept symbolic
};

namespace detail {

inline Expr parse_field(const std::string& text, const std::string& path, const std::map<std::string, Expr>& values,
                        const std::set<std::string>& allowed) {
  Expr e;
  try {
    e = parse(text);
  } catch (const ParseError& err) {
    throw ManifestError(path, err.what());
  }
  e = simplify(substitute(e, values));
  for (const auto& s : free_symbols(e))
    if (!allowed.count(s)) throw ManifestError(path, "unknown symbol '" + s + "'");
  return e;
}

inline double bound_value(const nlohmann::json& v, const std::string& path, const std::map<std::string, Expr>& values) {
  if (v.is_number()) return v.get<double>();
  Expr e = parse_field(v.get<std::string>(), path, values, {});
  Complex c = evaluate(e, {});
  if (c.imag() != 0.0 || !std::isfinite(c.real())) throw ManifestError(path, "bound is not a real number");
  return c.real();
}

}  // namespace detail

inline LoadedManifest realize(const Manifest& m, const LoadOptions& opt = {}) {
  std::vector<std::string> parameters;
  const std::size_t n = m.coordinates.size();
  double hbar = 1.0;
  if (auto it = m.constants.find("hbar"); it != m.constants.end()) hbar = it->second.value;
  if (opt.hbar) {
    if (!(*opt.hbar > 0)) throw ManifestError("hbar", "must be positive");
    hbar = *opt.hbar;
  }
  std::map<std::string, Expr> values{{"hbar", Expr::real(hbar)}};
  std::map<std::string, Expr> bound_values = values;
  Domain domain;
  std::set<std::string> allowed;
  for (const auto& [key, spec] : m.constants) {
    if (key == "hbar") continue;
    bound_values[key] = Expr::real(spec.value);
    if (opt.keep_params) {
      double lo = spec.min.value_or(spec.value > 0 ? 0.5 * spec.value : spec.value - 1.0);
      double hi = spec.max.value_or(spec.value > 0 ? 1.5 * spec.value : spec.value + 1.0);
      if (!(hi > lo)) throw ManifestError("constants." + key, "empty sampling range");
      domain.add(key, {lo, hi, Boundary::open});
      allowed.insert(key);
      parameters.push_back(key);
    } else {
      values[key] = Expr::real(spec.value);
    }
  }
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& c = m.coordinates[i];
    const std::string path = "coordinates[" + std::to_string(i) + "]";
    double lo = detail::bound_value(c.min, path + ".min", bound_values);
    double hi = detail::bound_value(c.max, path + ".max", bound_values);
    try {
      domain.add(c.name, {lo, hi, c.boundary});
    } catch (const std::invalid_argument& e) {
      throw ManifestError(path, e.what());
    }
    names.push_back(c.name);
    allowed.insert(c.name);
  }
  ExprMatrix g(n, std::vector<Expr>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      g[i][j] = detail::parse_field(m.metric[i][j], "metric[" + std::to_string(i) + "][" + std::to_string(j) + "]",
                                    values, allowed);
  std::optional<MetricChart> chart;
  try {
    chart.emplace(names, g, domain);
  } catch (const std::invalid_argument& e) {
    throw ManifestError("metric", e.what());
  } catch (const std::domain_error& e) {
    throw ManifestError("metric", e.what());
  }
  QuantizationSetup setup{*chart};
  setup.hbar = hbar;
  setup.potential = detail::parse_field(m.potential, "potential", values, allowed);
  if (m.magnetic_potential) {
    OneForm a;
    for (std::size_t i = 0; i < n; ++i)
      a.components.push_back(detail::parse_field((*m.magnetic_potential)[i],
                                                 "magnetic_potential[" + std::to_string(i) + "]", values, allowed));
    setup.magnetic_potential = a;
  }
  LoadedManifest out{m, setup, magnetic_field(setup), true, std::move(parameters)};
  // dB = 0 holds for B = dA; recorded by checking the cyclic sums.
  const auto& b = out.magnetic_field;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (std::size_t k = j + 1; k < n; ++k) {
        Expr cyc = differentiate(b[j][k], names[i]) + differentiate(b[k][i], names[j]) +
                   differentiate(b[i][j], names[k]);
        if (!equivalent(simplify(cyc), Expr(0), chart->domain(), 1)) out.magnetic_field_closed = false;
      }
  return out;
}

inline Manifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ManifestError("", "cannot open manifest '" + path + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ManifestError("", "'" + path + "' is not valid JSON: " + e.what());
  }
  return parse_manifest(doc);
}

inline LoadedManifest load_manifest(const std::string& path, const LoadOptions& opt = {}) {
  return realize(read_manifest(path), opt);
}

}  // namespace curvquant
