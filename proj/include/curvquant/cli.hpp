#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "curvquant/manifest.hpp"
#include "curvquant/spectral.hpp"
#include "curvquant/verification.hpp"

namespace curvquant::cli {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kReportSchema = "curvquant-report/1";

enum ExitCode { kSuccess = 0, kCheckFailed = 1, kUsageError = 2 };

/// Bad flag combination or value, reported with exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string command;
  std::string manifest;
  std::string scheme = "std";
  std::string observable;
  std::optional<double> hbar;
  std::string grid;
  std::size_t eigs = 9;
  std::uint64_t seed = 1;
  int pairs = 10;
  std::string output = "-";
  std::string format = "json";
  bool keep_params = false;
  bool timing = false;
};

struct Report {
  std::string command;
  std::string manifest_name;
  std::string manifest_digest;
  std::uint64_t seed = 1;
  nlohmann::json options = nlohmann::json::object();
  nlohmann::json result = nlohmann::json::object();
  std::vector<VerificationReport> checks;
  bool passed = true;
  std::optional<double> wall_clock;
};

/// Rounds to 12 significant digits so that reports are stable across
/// last-bit differences.
inline double round12(double v) {
  if (!std::isfinite(v) || v == 0.0) return v == 0.0 ? 0.0 : v;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  double r = std::strtod(buf, nullptr);
  return r == 0.0 ? 0.0 : r;
}

namespace detail {

inline void round_numbers(nlohmann::json& j) {
  if (j.is_number_float()) {
    j = round12(j.get<double>());
  } else if (j.is_array() || j.is_object()) {
    for (auto& v : j) round_numbers(v);
  }
}

inline nlohmann::json operator_json(const DiffOperator& op) {
  nlohmann::json out;
  const auto& x = op.coordinates();
  out["c0"] = to_string(simplify(op.c0()));
  out["c1"] = nlohmann::json::object();
  for (std::size_t i = 0; i < x.size(); ++i) out["c1"][x[i]] = to_string(simplify(op.c1(i)));
  out["c2"] = nlohmann::json::object();
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i; j < x.size(); ++j) {
      Expr c = simplify(op.c2(i, j));
      if (!c.is_zero()) out["c2"][x[i] + "," + x[j]] = to_string(c);
    }
  return out;
}

inline nlohmann::json check_json(const VerificationReport& r) {
  return {{"claim", r.claim}, {"status", to_string(r.status)}, {"witness", r.witness}, {"seeds", r.seeds},
          {"note", r.note}};
}

inline std::vector<std::size_t> parse_grid(const std::string& text, std::size_t dimension) {
  if (text.empty()) {
    if (dimension == 1) return {64};
    std::vector<std::size_t> c(dimension, 32);
    c.back() = 64;
    return c;
  }
  std::vector<std::size_t> counts;
  std::stringstream in(text);
  std::string part;
  while (std::getline(in, part, ',')) {
    std::size_t used = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(part, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != part.size() || v < 2) throw UsageError("--grid expects N[,M] with counts >= 2, got '" + text + "'");
    counts.push_back(v);
  }
  return counts;
}

inline nlohmann::json spectrum_json(const std::vector<double>& values) {
  nlohmann::json a = nlohmann::json::array();
  for (double v : values) a.push_back(v);
  return a;
}

}  // namespace detail

inline nlohmann::json to_json(const Report& r) {
  nlohmann::json j;
  j["schema"] = kReportSchema;
  j["tool"] = {{"name", "curvquant"}, {"version", kVersion}};
  j["command"] = r.command;
  j["manifest"] = {{"name", r.manifest_name}, {"digest", r.manifest_digest}};
  j["seed"] = r.seed;
  j["options"] = r.options;
  j["result"] = r.result;
  if (!r.checks.empty()) {
    j["checks"] = nlohmann::json::array();
    for (const auto& c : r.checks) j["checks"].push_back(detail::check_json(c));
  }
  j["status"] = r.passed ? "pass" : "fail";
  if (r.wall_clock) j["wall_clock_seconds"] = *r.wall_clock;
  detail::round_numbers(j);
  return j;
}

inline std::string render_text(const Report& r) {
  std::ostringstream out;
  out << "curvquant " << r.command << "  manifest=" << r.manifest_name << "  digest=" << r.manifest_digest
      << "  seed=" << r.seed << "\n";
  nlohmann::json result = r.result;
  detail::round_numbers(result);
  for (const auto& [key, value] : result.items()) {
    if (value.is_string()) out << key << ": " << value.get<std::string>() << "\n";
    else out << key << ": " << value.dump() << "\n";
  }
  for (const auto& c : r.checks) {
    out << to_string(c.status) << " " << c.claim;
    if (!c.witness.empty()) out << "  " << c.witness;
    out << "\n";
  }
  out << (r.passed ? "PASS" : "FAIL") << "\n";
  return out.str();
}

/// Writes JSON (indented, keys sorted) or the text summary; "-" is stdout.
inline void write_report(const Report& r, const std::string& path, const std::string& format,
                         std::ostream& stdout_stream = std::cout) {
  std::string body = format == "text" ? render_text(r) : to_json(r).dump(2) + "\n";
  if (path == "-") {
    stdout_stream << body;
    stdout_stream.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write report to '" + path + "'");
  out << body;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

namespace detail {

inline void curvature(Report& rep, const LoadedManifest& m) {
  const auto& chart = m.setup.chart;
  const auto& x = chart.coordinates();
  const std::size_t n = x.size();
  auto& res = rep.result;
  res["coordinates"] = x;
  nlohmann::json g = nlohmann::json::array(), gi = nlohmann::json::array();
  for (std::size_t i = 0; i < n; ++i) {
    g.push_back(nlohmann::json::array());
    gi.push_back(nlohmann::json::array());
    for (std::size_t j = 0; j < n; ++j) {
      g[i].push_back(to_string(chart.metric(i, j)));
      gi[i].push_back(to_string(chart.inverse_metric(i, j)));
    }
  }
  res["metric"] = g;
  res["inverse_metric"] = gi;
  res["volume_density"] = to_string(chart.sqrt_det());
  nlohmann::json gamma = nlohmann::json::object();
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) {
        const Expr& c = chart.christoffel(k, i, j);
        if (!c.is_zero()) gamma[x[k] + ";" + x[i] + "," + x[j]] = to_string(c);
      }
  res["christoffel"] = gamma;
  const Expr& r = chart.scalar_curvature();
  res["scalar_curvature"] = to_string(r);
  if (free_symbols(r).empty()) res["scalar_curvature_value"] = evaluate(r, {}).real();
  nlohmann::json b = nlohmann::json::object();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (!simplify(m.magnetic_field[i][j]).is_zero()) b[x[i] + "," + x[j]] = to_string(m.magnetic_field[i][j]);
  res["magnetic_field"] = b;
  res["magnetic_field_closed"] = m.magnetic_field_closed;
}

inline Scheme observable_scheme(const SchemeSpec& s) {
  if (s.kind == SchemeSpec::Kind::parametric)
    throw UsageError("--scheme k=<rational> selects an energy operator; observables need std or mod");
  return s.kind == SchemeSpec::Kind::standard ? Scheme::standard : Scheme::modified;
}

inline nlohmann::json observable_json(const Observable& o, const std::vector<std::string>& x) {
  nlohmann::json field = nlohmann::json::object();
  for (std::size_t i = 0; i < x.size(); ++i) field[x[i]] = to_string(o.field.components[i]);
  return {{"function", to_string(o.base)}, {"field", field}};
}

inline void quantize_cmd(Report& rep, const Options& opt, const LoadedManifest& m) {
  const auto& setup = m.setup;
  auto& res = rep.result;
  res["scheme"] = setup.scheme.label();
  if (opt.observable.empty()) {
    res["k"] = setup.scheme.k.to_string();
    res["energy_operator"] = operator_json(energy_operator(setup));
    return;
  }
  Scheme scheme = observable_scheme(setup.scheme);
  Observable obs = parse_observable(opt.observable, setup.chart);
  const auto& x = setup.chart.coordinates();
  res["observable"] = observable_json(obs, x);
  res["operator"] = operator_json(quantize(obs, setup, scheme));
  Expr div = divergence(setup.chart, obs.field);
  res["divergence"] = to_string(div);
  Expr term = scheme == Scheme::standard
                  ? simplify(-Expr::imaginary_unit() * setup.hbar_expr() * Expr::rational(1, 2) * div)
                  : Expr(0);
  res["divergence_term"] = to_string(term);
  res["symmetric"] = check_symmetry(obs, setup, rep.seed).symmetric;
}

inline void verify_cmd(Report& rep, const Options& opt, const LoadedManifest& m) {
  const auto& setup = m.setup;
  const auto& chart = setup.chart;
  const std::uint64_t seed = rep.seed;
  std::optional<Observable> obs;
  if (!opt.observable.empty()) obs = parse_observable(opt.observable, chart);

  rep.checks.push_back(check_canonical_pairs(setup, seed));
  rep.checks.push_back(check_flatness(chart, 20, seed));
  rep.checks.push_back(check_curvature_shift(setup, seed));
  rep.checks.push_back(check_energy_consistency(setup, seed));

  VerificationReport gap{"scheme_gap", Status::pass, "", {seed}, ""};
  std::vector<Observable> gap_set;
  for (std::size_t i = 0; i < chart.dimension(); ++i) gap_set.push_back(Observable::momentum(chart, i));
  if (obs) gap_set.push_back(*obs);
  for (const auto& o : gap_set) {
    auto r = check_scheme_gap(o, setup, seed);
    if (!r.passed() && gap.passed()) {
      gap.status = r.status;
      gap.witness = r.witness;
    }
  }
  rep.checks.push_back(gap);

  std::mt19937_64 rng(seed);
  VerificationReport comm{"commutation", Status::pass, "", {}, std::to_string(opt.pairs) + " random pairs"};
  VerificationReport jacobi{"jacobi", Status::pass, "", {}, ""};
  for (int k = 0; k < opt.pairs; ++k) {
    const std::uint64_t s = seed + static_cast<std::uint64_t>(k);
    Observable a = random_observable(chart, rng);
    Observable b = random_observable(chart, rng);
    auto r = check_commutation(a, b, setup, s);
    comm.seeds.push_back(s);
    if (!r.passed() && comm.passed()) {
      comm.status = r.status;
      comm.witness = "pair " + std::to_string(k) + ": " + r.witness;
    }
    if (k < 5) {
      Observable c = random_observable(chart, rng);
      auto j = check_jacobi(a, b, c, setup, s);
      jacobi.seeds.push_back(s);
      if (!j.passed() && jacobi.passed()) {
        jacobi.status = j.status;
        jacobi.witness = j.witness;
      }
    }
  }
  if (obs) {
    for (std::size_t i = 0; i < chart.dimension(); ++i) {
      auto r = check_commutation(*obs, Observable::momentum(chart, i), setup, seed);
      if (!r.passed() && comm.passed()) {
        comm.status = r.status;
        comm.witness = "observable with p" + std::to_string(i + 1) + ": " + r.witness;
      }
    }
  }
  rep.checks.push_back(comm);
  rep.checks.push_back(jacobi);
  rep.checks.push_back(check_nonflat_control(setup, seed));
  if (obs) {
    auto sym = check_symmetry(*obs, setup, seed);
    rep.checks.push_back(sym.report);
    rep.result["divergence"] = to_string(sym.defect);
  }
  for (const auto& c : rep.checks)
    if (!c.passed()) rep.passed = false;
  rep.result["passed"] = rep.passed;
}

inline nlohmann::json grid_json(const Grid& g) {
  nlohmann::json axes = nlohmann::json::array();
  for (const auto& ax : g.axes()) axes.push_back(ax.name);
  return {{"axes", axes}, {"counts", g.counts()}, {"volume", g.volume()}};
}

inline void spectrum_cmd(Report& rep, const Options& opt, const LoadedManifest& m) {
  const auto& setup = m.setup;
  Grid grid = Grid::build(setup.chart, parse_grid(opt.grid, setup.chart.dimension()));
  auto& res = rep.result;
  res["grid"] = grid_json(grid);
  DiffOperator op;
  if (opt.observable.empty()) {
    res["operator"] = "energy " + setup.scheme.label();
    op = energy_operator(setup);
  } else {
    Observable obs = parse_observable(opt.observable, setup.chart);
    res["operator"] = "observable " + setup.scheme.label();
    op = quantize(obs, setup, observable_scheme(setup.scheme));
  }
  DiscreteOperator d = discretize(op, grid);
  const double defect = adjoint_defect(d, 8, rep.seed);
  res["adjoint_defect"] = defect;
  res["hermitian_defect"] = d.hermitian_defect();
  if (opt.eigs > grid.size()) throw UsageError("--eigs exceeds the number of grid nodes");
  if (d.hermitian_defect() > 1e-9) {
    res["eigenvalues"] = nlohmann::json::array();
    res["note"] = "operator is not symmetric; no spectrum computed";
    rep.passed = false;
    return;
  }
  res["eigenvalues"] = spectrum_json(eigen_spectrum(d, opt.eigs).eigenvalues);
}

inline void shift_cmd(Report& rep, const Options& opt, const LoadedManifest& m) {
  const auto& setup = m.setup;
  Grid grid = Grid::build(setup.chart, parse_grid(opt.grid, setup.chart.dimension()));
  if (opt.eigs > grid.size()) throw UsageError("--eigs exceeds the number of grid nodes");
  SpectrumReport s = shift_check(setup, grid, opt.eigs);
  auto& res = rep.result;
  res["grid"] = grid_json(grid);
  res["eigenvalues"] = spectrum_json(s.eigenvalues);
  res["deltas"] = spectrum_json(s.deltas);
  res["expected_delta"] = s.expected_delta;
  res["adjoint_defect"] = s.adjoint_defect;
  res["pass"] = s.pass;
  rep.passed = s.pass;
}

}  // namespace detail

/// Runs one command against a loaded manifest.
inline Report execute(const Options& opt, const LoadedManifest& loaded) {
  Report rep;
  rep.command = opt.command;
  rep.manifest_name = loaded.manifest.name;
  rep.manifest_digest = digest(loaded.manifest);
  rep.seed = opt.seed;
  rep.options = {{"scheme", loaded.setup.scheme.label()}, {"hbar", loaded.setup.hbar}};
  if (!opt.observable.empty()) rep.options["observable"] = opt.observable;
  if (!loaded.parameters.empty()) rep.options["parameters"] = loaded.parameters;
  if (opt.command == "spectrum" || opt.command == "shift") {
    rep.options["grid"] = detail::parse_grid(opt.grid, loaded.setup.chart.dimension());
    rep.options["eigs"] = opt.eigs;
  }
  if (opt.command == "verify") rep.options["pairs"] = opt.pairs;
  if (opt.command == "curvature") detail::curvature(rep, loaded);
  else if (opt.command == "quantize") detail::quantize_cmd(rep, opt, loaded);
  else if (opt.command == "verify") detail::verify_cmd(rep, opt, loaded);
  else if (opt.command == "spectrum") detail::spectrum_cmd(rep, opt, loaded);
  else if (opt.command == "shift") detail::shift_cmd(rep, opt, loaded);
  else throw UsageError("unknown command '" + opt.command + "'");
  return rep;
}

/// Entry point of the curvquant tool. Returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Quantization on curved configuration spaces", "curvquant"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1, 1);
  Options opt;
  const std::vector<std::pair<const char*, const char*>> commands = {
      {"curvature", "Christoffel symbols, scalar curvature and volume density"},
      {"quantize", "quantum operator of an observable, or the energy operator"},
      {"verify", "symbolic checks of the commutation, symmetry and curvature-shift identities"},
      {"spectrum", "low eigenvalues of the discretized energy operator or observable"},
      {"shift", "spectral shift between the k=1/12 and k=0 energy operators"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--manifest", opt.manifest, "manifest JSON file")->required();
    sub->add_option("--scheme", opt.scheme, "std, mod or k=<rational>");
    sub->add_option("--observable", opt.observable, "function of q and p, affine in p");
    sub->add_option("--hbar", opt.hbar, "overrides constants.hbar");
    sub->add_option("--grid", opt.grid, "node counts N[,M]");
    sub->add_option("--eigs", opt.eigs, "number of eigenvalues")->check(CLI::PositiveNumber);
    sub->add_option("--seed", opt.seed, "random seed");
    sub->add_option("--pairs", opt.pairs, "random observable pairs for verify")->check(CLI::NonNegativeNumber);
    sub->add_option("--output", opt.output, "report path, - for stdout");
    sub->add_option("--format", opt.format, "json or text")->check(CLI::IsMember({"json", "text"}));
    sub->add_flag("--keep-params", opt.keep_params, "keep manifest constants symbolic");
    sub->add_flag("--timing", opt.timing, "record wall-clock time in the report");
  }
  std::vector<std::string> args;
  for (int k = argc - 1; k > 0; --k) args.emplace_back(argv[k]);
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "curvquant: " << e.what() << "\n";
    return kUsageError;
  }
  opt.command = app.get_subcommands().front()->get_name();

  const auto start = std::chrono::steady_clock::now();
  Report rep;
  try {
    LoadOptions load;
    load.keep_params = opt.keep_params;
    load.hbar = opt.hbar;
    LoadedManifest loaded = load_manifest(opt.manifest, load);
    loaded.setup.scheme = SchemeSpec::parse(opt.scheme);
    if ((opt.command == "spectrum" || opt.command == "shift") && !loaded.parameters.empty())
      throw UsageError("spectral commands need numeric constants; drop --keep-params");
    rep = execute(opt, loaded);
  } catch (const std::exception& e) {
    err << "curvquant: " << e.what() << "\n";
    return kUsageError;
  }
  if (opt.timing)
    rep.wall_clock = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  try {
    write_report(rep, opt.output, opt.format, out);
  } catch (const std::exception& e) {
    err << "curvquant: " << e.what() << "\n";
    return kUsageError;
  }
  return rep.passed ? kSuccess : kCheckFailed;
}

}  // namespace curvquant::cli
