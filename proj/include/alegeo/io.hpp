#pragma once

// JSON and CSV serialisation of profiles, potentials, paths and reports.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "alegeo/analysis_tools.hpp"
#include "alegeo/calabi_geometry.hpp"
#include "alegeo/energy.hpp"
#include "alegeo/errors.hpp"
#include "alegeo/geodesic_solver.hpp"
#include "alegeo/radial_potential.hpp"
#include "alegeo/toric_intersection.hpp"

namespace alegeo {

using json = nlohmann::json;

/// Shortest decimal text that reads back to the same double.
inline std::string fmt_double(double x) {
  char buf[32];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

namespace detail {

template <class T>
T field(const json& j, const char* key) {
  if (!j.contains(key)) throw ValidationError(key, "missing");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(key, "has the wrong type");
  }
}

template <class T>
T field_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? field<T>(j, key) : fallback;
}

inline json json_number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

inline json json_array(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(json_number(x));
  return a;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Profiles and potentials

inline json to_json(const RadialProfile& p) {
  json j{{"n", p.n()}, {"k", p.k()}, {"tau_min", p.tau_min()}};
  if (auto cf = p.closed_form(); cf && p.form() == ProfileForm::lebrun) {
    j["form"] = p.label() == "flat" ? "flat" : "lebrun";
    j["params"] = {{"A", cf->first}, {"B", cf->second}};
  } else if (auto s = p.samples()) {
    j["form"] = "samples";
    j["samples"] = json::array();
    for (std::size_t i = 0; i < s->first.size(); ++i) j["samples"].push_back({s->first[i], s->second[i]});
  } else {
    throw ValidationError("profile", "only closed-form and sampled profiles serialise");
  }
  return j;
}

/// Accepts {n, k, tau_min, form: "lebrun" | "flat" | "samples", samples: [[tau, phi], ...]}.
inline RadialProfile profile_from_json(const json& j) {
  const int n = detail::field_or<int>(j, "n", 2);
  const int k = detail::field_or<int>(j, "k", 1);
  detail::check_nk(n, k);
  const auto form = detail::field_or<std::string>(j, "form", "lebrun");
  if (form == "flat") return flat_profile(n, k);
  if (form == "lebrun") return lebrun_profile(k, detail::field<double>(j, "tau_min"), n);
  if (form == "samples") {
    std::vector<double> tau, phi;
    for (const auto& row : detail::field<json>(j, "samples")) {
      if (!row.is_array() || row.size() != 2) throw ValidationError("samples", "rows must be [tau, phi] pairs");
      tau.push_back(row[0].get<double>());
      phi.push_back(row[1].get<double>());
    }
    return sampled_profile(n, k, std::move(tau), std::move(phi));
  }
  throw ValidationError("form", "unknown profile form '" + form + "'");
}

inline json to_json(const RadialPotential& p) {
  return {{"kind", to_string(p.kind)}, {"amplitude", p.amplitude}, {"rate", p.rate},
          {"center", p.center},        {"offset", p.offset}};
}

inline RadialPotential potential_from_json(const json& j, const std::string& name) {
  if (j.is_number()) return constant_potential(j.get<double>());
  if (!j.is_object()) throw ValidationError(name, "must be an object or a number");
  const auto kind = detail::field_or<std::string>(j, "kind", "zero");
  const double amp = detail::field_or<double>(j, "amplitude", 0.0);
  const double rate = detail::field_or<double>(j, "rate", 0.0);
  const double center = detail::field_or<double>(j, "center", 0.0);
  RadialPotential p;
  if (kind == "zero") p = zero_potential();
  else if (kind == "constant") p = constant_potential(amp);
  else if (kind == "exp") p = exponential_potential(amp, rate, center);
  else if (kind == "logistic") p = logistic_potential(amp, rate, center);
  else throw ValidationError(name, "unknown potential kind '" + kind + "'");
  p.offset = detail::field_or<double>(j, "offset", 0.0);
  return p;
}

// ---------------------------------------------------------------------------
// Reports

inline json to_json(const DecayFit& f) {
  json j{{"window", {f.r_lo, f.r_hi}},
         {"status", to_string(f.status)},
         {"exponent", detail::json_number(f.exponent)},
         {"log_amplitude", detail::json_number(f.log_amplitude)},
         {"rms", detail::json_number(f.rms)},
         {"samples_used", f.samples_used}};
  j["predicted"] = f.predicted ? json(*f.predicted) : json(nullptr);
  j["margin"] = f.margin ? json(*f.margin) : json(nullptr);
  return j;
}

inline json to_json(const C0Check& c) {
  return {{"pass", c.pass},           {"min_slack", c.min_slack}, {"lower_slack", c.lower_slack},
          {"upper_slack", c.upper_slack}, {"worst_node", {c.worst_i, c.worst_j}}, {"tol", c.tol}};
}

inline json to_json(const ComparisonCheck& c) {
  return {{"pass", c.pass}, {"max_excess", c.max_excess}, {"worst_node", {c.worst_i, c.worst_j}}, {"tol", c.tol}};
}

/// Wall time is left out so that reruns produce identical bytes.
inline json to_json(const SolverReport& r) {
  json stages = json::array();
  for (const auto& s : r.stages)
    stages.push_back({{"s", s.s}, {"iterations", s.iterations}, {"residual", s.residual}, {"floor", s.floor},
                      {"history", s.history}});
  return {{"epsilon", r.epsilon},
          {"residual", r.residual},
          {"residual_abs", r.residual_abs},
          {"residual_floor", r.residual_floor},
          {"stages", stages},
          {"total_iterations", r.total_iterations},
          {"c0_check", to_json(r.c0)},
          {"positivity", {{"min_w1", r.min_w1}, {"min_w2", r.min_w2}, {"min_det", r.min_det}}},
          {"upsilon", {{"constant", r.upsilon_constant}, {"at_most_one", r.upsilon_at_most_one}}},
          {"truncation_estimate", r.truncation_estimate}};
}

inline json to_json(const EnergyReport& r) {
  return {{"n", r.n},
          {"k", r.k},
          {"epsilon", r.epsilon},
          {"c_link", r.c_link},
          {"on_shell_residual", r.on_shell_residual},
          {"t_samples", detail::json_array(r.t)},
          {"K_values", detail::json_array(r.K)},
          {"dK_dt", detail::json_array(r.dK)},
          {"d2K_dt2_formula", detail::json_array(r.d2K_formula)},
          {"d2K_dt2_variation", detail::json_array(r.d2K_variation)},
          {"d2K_dt2_fd", detail::json_array(r.d2K_fd)},
          {"decomposition",
           {{"lich_term", detail::json_array(r.lich)},
            {"ricci_term", detail::json_array(r.ricci)},
            {"grad_term", detail::json_array(r.grad)}}}};
}

inline std::string rational_text(const Rational& r) {
  return r.denominator() == 1 ? std::to_string(r.numerator())
                              : std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

inline json to_json(const IntersectionTable& t) {
  json j{{"n", t.n},
         {"k", t.k},
         {"d0_power", rational_text(t.d0_power)},
         {"d0_pow_df", rational_text(t.d0_pow_df)},
         {"ricci_coefficient", rational_text(t.ricci_coefficient)},
         {"d0_ricci", rational_text(t.d0_ricci)},
         {"df_ricci", rational_text(t.df_ricci)}};
  if (t.n == 2) {
    j["d0_d0"] = rational_text(t.d0_d0);
    j["d0_df"] = rational_text(t.d0_df);
    j["df_df"] = rational_text(t.df_df);
    j["d0_dinf"] = rational_text(t.d0_dinf);
  }
  return j;
}

inline json to_json(const MixedTypeCertificate& c) {
  return {{"d0_ricci", rational_text(c.d0_ricci)},
          {"df_ricci", rational_text(c.df_ricci)},
          {"opposite_signs", c.opposite_signs},
          {"ratio", c.ratio ? json(rational_text(*c.ratio)) : json(nullptr)}};
}

inline json to_json(const RicciScan& s) {
  auto witness = [](const std::optional<RicciWitness>& w) -> json {
    if (!w) return nullptr;
    return {{"tau", w->tau}, {"value", w->value}, {"direction", w->fiber ? "fiber" : "base"}};
  };
  return {{"sign", to_string(s.sign)},
          {"positive_witness", witness(s.positive)},
          {"negative_witness", witness(s.negative)},
          {"max_abs", s.max_abs},
          {"zero_tol", s.zero_tol},
          {"samples", s.samples.size()}};
}

inline json to_json(const MassReport& m) {
  return {{"mass", m.mass},         {"flux_inner", m.flux_inner}, {"flux_outer", m.flux_outer},
          {"r_inner", m.r_inner},   {"r_outer", m.r_outer},       {"decay", to_json(m.decay)}};
}

// ---------------------------------------------------------------------------
// CSV

/// Writes rows of doubles under a header.
inline void write_csv(std::ostream& out, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& columns) {
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  out << '\n';
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << fmt_double(columns[c][r]);
    out << '\n';
  }
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;

  const std::vector<double>& column(const std::string& name) const {
    for (std::size_t c = 0; c < header.size(); ++c)
      if (header[c] == name) return columns[c];
    throw ValidationError("column", "no column named '" + name + "'");
  }
  bool has(const std::string& name) const {
    return std::find(header.begin(), header.end(), name) != header.end();
  }
};

inline CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("csv", "empty input");
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) t.header.push_back(cell);
  }
  t.columns.resize(t.header.size());
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t c = 0;
    while (std::getline(ss, cell, ',')) {
      if (c >= t.header.size()) throw ValidationError("csv", "too many cells on line " + std::to_string(lineno));
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str()) throw ValidationError("csv", "non-numeric cell on line " + std::to_string(lineno));
      t.columns[c++].push_back(v);
    }
    if (c != t.header.size()) throw ValidationError("csv", "too few cells on line " + std::to_string(lineno));
  }
  return t;
}

inline CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("path", "cannot open " + path);
  return read_csv(in);
}

/// Curvature scan columns: tau, rho, r, lambda_base, lambda_fiber, ric_base,
/// ric_fiber, scal.
inline void write_curvature_csv(std::ostream& out, const std::vector<CurvatureSample>& samples) {
  std::vector<std::vector<double>> cols(8);
  for (const auto& s : samples) {
    const double v[8] = {s.tau, s.rho, s.r, s.lambda_base, s.lambda_fiber, s.ric_base, s.ric_fiber, s.scal};
    for (int c = 0; c < 8; ++c) cols[c].push_back(v[c]);
  }
  write_csv(out, {"tau", "rho", "r", "lambda_base", "lambda_fiber", "ric_base", "ric_fiber", "scal"}, cols);
}

/// Path as long-format CSV (rho, t, phi), rho-major.
inline void write_path_csv(std::ostream& out, const PathGrid& g) {
  std::vector<std::vector<double>> cols(3);
  for (int i = 0; i < g.n_rho(); ++i)
    for (int j = 0; j < g.n_t(); ++j) {
      cols[0].push_back(g.rho()[i]);
      cols[1].push_back(g.t()[j]);
      cols[2].push_back(g.phi()(i, j));
    }
  write_csv(out, {"rho", "t", "phi"}, cols);
}

/// Everything except phi that is needed to rebuild a PathGrid.
inline json path_meta(const PathGrid& g) {
  const auto s = g.spec();
  return {{"background", to_json(g.background())},
          {"psi0", to_json(g.psi0())},
          {"psi1", to_json(g.psi1())},
          {"grid", {{"n_rho", s.n_rho}, {"n_t", s.n_t}, {"rho_min", s.rho_min}, {"rho_max", s.rho_max}}},
          {"stage", detail::json_number(g.stage)},
          {"upsilon_mode", to_string(g.upsilon_mode)},
          {"rhs_reference", to_string(g.rhs_reference)}};
}

inline UpsilonMode upsilon_mode_from_string(const std::string& s) {
  if (s == "constant") return UpsilonMode::constant;
  if (s == "profile-weighted" || s == "profile_weighted") return UpsilonMode::profile_weighted;
  throw ValidationError("upsilon_mode", "expected 'constant' or 'profile-weighted'");
}

inline RhsReference rhs_reference_from_string(const std::string& s) {
  if (s == "theta_psi") return RhsReference::theta_psi;
  if (s == "background") return RhsReference::background;
  throw ValidationError("rhs_reference", "expected 'theta_psi' or 'background'");
}

inline GridSpec grid_from_json(const json& j) {
  GridSpec g;
  g.n_rho = detail::field_or<int>(j, "n_rho", g.n_rho);
  g.n_t = detail::field_or<int>(j, "n_t", g.n_t);
  g.rho_min = detail::field_or<double>(j, "rho_min", g.rho_min);
  g.rho_max = detail::field_or<double>(j, "rho_max", g.rho_max);
  return g;
}

/// Rebuilds a grid from the CSV and its metadata sidecar.
inline PathGrid read_path(const CsvTable& csv, const json& meta) {
  const auto spec = grid_from_json(detail::field<json>(meta, "grid"));
  PathGrid g(profile_from_json(detail::field<json>(meta, "background")),
             potential_from_json(detail::field<json>(meta, "psi0"), "psi0"),
             potential_from_json(detail::field<json>(meta, "psi1"), "psi1"), spec);
  const auto& rho = csv.column("rho");
  const auto& t = csv.column("t");
  const auto& phi = csv.column("phi");
  if (phi.size() != static_cast<std::size_t>(spec.n_rho) * spec.n_t)
    throw ValidationError("path", "row count does not match the grid in the sidecar");
  for (std::size_t r = 0; r < phi.size(); ++r) {
    const int i = static_cast<int>(r) / spec.n_t, j = static_cast<int>(r) % spec.n_t;
    if (std::abs(rho[r] - g.rho()[i]) > 1e-9 * (1.0 + std::abs(rho[r])) || std::abs(t[r] - g.t()[j]) > 1e-12)
      throw ValidationError("path", "node coordinates do not match the sidecar grid");
    g.phi()(i, j) = phi[r];
  }
  if (meta.contains("stage") && meta["stage"].is_number()) g.stage = meta["stage"].get<double>();
  g.upsilon_mode = upsilon_mode_from_string(detail::field_or<std::string>(meta, "upsilon_mode", "constant"));
  g.rhs_reference = rhs_reference_from_string(detail::field_or<std::string>(meta, "rhs_reference", "theta_psi"));
  return g;
}

inline void write_energy_csv(std::ostream& out, const EnergyReport& r) {
  write_csv(out, {"t", "K", "dK", "d2K_formula", "d2K_fd", "lich", "ricci", "grad"},
            {r.t, r.K, r.dK, r.d2K_formula, r.d2K_fd, r.lich, r.ricci, r.grad});
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("path", "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("json", path + ": " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("out", "cannot write " + path);
  out << text;
}

}  // namespace alegeo
