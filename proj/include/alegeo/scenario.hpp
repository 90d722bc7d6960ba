#pragma once

// Scenario orchestration: config parsing, content hashing, cached runs,
// per-check verdicts and parallel batches.

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "alegeo/io.hpp"

namespace alegeo {

inline constexpr const char* kToolVersion = "0.1.0";

inline std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw NumericalError("SHA-256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scenario

inline const std::set<std::string>& known_analyses() {
  static const std::set<std::string> names{"c0_check", "exact",    "comparison", "hessian_probe", "decay",
                                           "energy",   "ricci_scan", "intersections", "mass"};
  return names;
}

struct Scenario {
  std::string id;
  /// Input as given; the hash is taken over it with output_dir removed.
  json config;
  json profile;
  RadialPotential psi0, psi1;
  /// Decreasing.
  std::vector<double> epsilons;
  SolverConfig solver;
  std::vector<std::string> analyses;
  json expect = json::object();
  std::string output_dir;

  RadialProfile background() const { return profile_from_json(profile); }
};

/// Hash stable under key reordering: nlohmann objects are key-sorted.
inline std::string scenario_hash(const json& config) {
  json c = config;
  c.erase("output_dir");
  return sha256_hex(std::string(kToolVersion) + "\n" + c.dump());
}

/// Validates a config document; errors name the offending field.
inline Scenario parse_scenario(const json& j) {
  using detail::field;
  using detail::field_or;
  if (!j.is_object()) throw ValidationError("scenario", "must be a JSON object");
  Scenario s;
  s.config = j;
  s.id = field_or<std::string>(j, "id", "");
  if (s.id.empty()) throw ValidationError("id", "missing");
  if (s.id.find_first_of("/\\") != std::string::npos || s.id == "." || s.id == "..")
    throw ValidationError("id", "must be a plain name");

  const int n = field_or<int>(j, "n", 2);
  const int k = field_or<int>(j, "k", 1);
  detail::check_nk(n, k);
  json prof = j.contains("profile") && j["profile"].is_object() ? j["profile"] : json::object();
  if (j.contains("profile") && j["profile"].is_string()) prof["form"] = j["profile"];
  prof["n"] = n;
  prof["k"] = k;
  if (j.contains("tau_min")) prof["tau_min"] = field<double>(j, "tau_min");
  s.profile = prof;
  (void)s.background();  // construct once so bad geometry fails at parse time

  s.psi0 = potential_from_json(j.value("psi0", json::object()), "psi0");
  s.psi1 = potential_from_json(j.value("psi1", json::object()), "psi1");

  if (j.contains("epsilons")) {
    s.epsilons = field<std::vector<double>>(j, "epsilons");
    if (s.epsilons.empty()) throw ValidationError("epsilons", "must not be empty");
  } else {
    s.epsilons = {field_or<double>(j, "epsilon", 0.5)};
  }
  for (double e : s.epsilons)
    if (!(e > 0.0 && e <= 1.0)) throw ValidationError("epsilon", "must lie in (0, 1]");
  std::sort(s.epsilons.begin(), s.epsilons.end(), std::greater<>());
  if (std::adjacent_find(s.epsilons.begin(), s.epsilons.end()) != s.epsilons.end())
    throw ValidationError("epsilons", "values must be distinct");

  auto& c = s.solver;
  c.upsilon_mode = upsilon_mode_from_string(field_or<std::string>(j, "upsilon_mode", "constant"));
  c.rhs_reference = rhs_reference_from_string(field_or<std::string>(j, "rhs_reference", "theta_psi"));
  if (j.contains("grid")) c.grid = grid_from_json(j["grid"]);
  if (j.contains("schedule")) {
    if (j["schedule"].is_number()) c.schedule_ratio = j["schedule"].get<double>();
    else c.schedule = field<std::vector<double>>(j, "schedule");
    if (!c.schedule.empty() && s.epsilons.size() > 1)
      throw ValidationError("schedule", "an explicit schedule needs a single epsilon");
  }
  c.gamma = field_or<double>(j, "gamma", c.gamma);
  if (j.contains("tolerances")) {
    const auto& t = j["tolerances"];
    c.newton_tol = field_or<double>(t, "newton_tol", c.newton_tol);
    c.max_iters = field_or<int>(t, "max_iters", c.max_iters);
    c.min_step = field_or<double>(t, "min_step", c.min_step);
    c.max_subdivisions = field_or<int>(t, "max_subdivisions", c.max_subdivisions);
    c.c0_tol = field_or<double>(t, "c0_tol", c.c0_tol);
  }
  if (!(c.newton_tol > 0.0)) throw ValidationError("newton_tol", "must be positive");
  if (c.max_iters < 1) throw ValidationError("max_iters", "must be at least 1");
  if (c.grid.n_rho < 5 || c.grid.n_t < 5) throw ValidationError("grid", "need at least 5 nodes per direction");
  if (!(c.grid.rho_max > c.grid.rho_min)) throw ValidationError("grid", "rho_max must exceed rho_min");

  s.analyses = field_or<std::vector<std::string>>(j, "analyses", {"c0_check"});
  for (const auto& a : s.analyses)
    if (!known_analyses().count(a)) throw ValidationError("analyses", "unknown analysis '" + a + "'");
  const auto wants = [&](const char* a) { return std::count(s.analyses.begin(), s.analyses.end(), a) > 0; };
  if (wants("energy") && (c.rhs_reference != RhsReference::background || c.upsilon_mode != UpsilonMode::constant))
    throw ValidationError("rhs_reference", "the energy analysis needs rhs_reference 'background' and constant upsilon");
  if (j.contains("expect")) {
    if (!j["expect"].is_object()) throw ValidationError("expect", "must be an object");
    s.expect = j["expect"];
  }
  s.output_dir = field_or<std::string>(j, "output_dir", "");
  return s;
}

// ---------------------------------------------------------------------------
// Manifest

struct CheckResult {
  std::string name;
  bool pass = false;
  json detail;
};

struct RunManifest {
  std::string tool_version = kToolVersion;
  std::string id;
  std::string hash;
  json inputs;
  std::vector<std::string> artifacts;
  std::vector<CheckResult> checks;
  /// Per-epsilon scalars used by batch aggregation.
  json results = json::object();
  /// Empty on success; otherwise "validation" or "numerical".
  std::string error_kind;
  std::string error;
  /// Set when the manifest was loaded from the cache; never serialised.
  bool cached = false;

  bool ok() const {
    return error_kind.empty() && std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
  }
  std::size_t passed() const {
    return static_cast<std::size_t>(std::count_if(checks.begin(), checks.end(), [](const auto& c) { return c.pass; }));
  }
  const CheckResult* check(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }

  json to_json() const {
    json checks_json = json::array();
    for (const auto& c : checks) checks_json.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    return {{"tool_version", tool_version}, {"id", id},         {"hash", hash},
            {"inputs", inputs},             {"artifacts", artifacts}, {"checks", checks_json},
            {"results", results},           {"status", ok() ? "pass" : "fail"},
            {"error_kind", error_kind},     {"error", error}};
  }

  static RunManifest from_json(const json& j) {
    RunManifest m;
    m.tool_version = j.at("tool_version").get<std::string>();
    m.id = j.at("id").get<std::string>();
    m.hash = j.at("hash").get<std::string>();
    m.inputs = j.at("inputs");
    m.artifacts = j.at("artifacts").get<std::vector<std::string>>();
    for (const auto& c : j.at("checks"))
      m.checks.push_back({c.at("name").get<std::string>(), c.at("pass").get<bool>(), c.at("detail")});
    m.results = j.at("results");
    m.error_kind = j.at("error_kind").get<std::string>();
    m.error = j.at("error").get<std::string>();
    return m;
  }
};

struct RunOptions {
  /// Root for outputs; a scenario writes below <out>/<id>. Falls back to the
  /// scenario's output_dir, then to "out".
  std::string out;
  bool use_cache = true;
};

inline std::filesystem::path scenario_dir(const Scenario& s, const RunOptions& o) {
  const std::string root = !o.out.empty() ? o.out : (!s.output_dir.empty() ? s.output_dir : "out");
  return std::filesystem::path(root) / s.id;
}

namespace detail {

inline std::string eps_tag(double e) { return fmt_double(e); }

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// |phi(., t_mid) - c(t_mid)| against r, with c(t) = eps t (t - 1) / 2.
inline DecayFit solution_decay(const PathGrid& g, double eps, double predicted) {
  const int j = (g.n_t() - 1) / 2;
  const double t = g.t()[j];
  const double c = 0.5 * eps * t * (t - 1.0);
  std::vector<double> r, v;
  for (int i = 0; i < g.n_rho(); ++i) {
    r.push_back(std::exp(0.5 * g.rho()[i]));
    v.push_back(g.phi()(i, j) - c);
  }
  return fit_decay_exponent(r, v, std::nullopt, predicted, 1e-13);
}

inline DecayFit data_decay(const PathGrid& g, const RadialPotential& psi) {
  std::vector<double> r, v;
  for (int i = 0; i < g.n_rho(); ++i) {
    r.push_back(std::exp(0.5 * g.rho()[i]));
    v.push_back(psi.eval(g.rho()[i])[0] - psi.limit_at_infinity());
  }
  return fit_decay_exponent(r, v, std::nullopt, std::nullopt, 1e-13);
}

inline double max_rel_fd_gap(const EnergyReport& r, std::size_t* where = nullptr) {
  double worst = 0.0;
  for (std::size_t j = 1; j + 1 < r.t.size(); ++j) {
    const double rel = std::abs(r.d2K_fd[j] - r.d2K_formula[j]) / std::max(std::abs(r.d2K_formula[j]), 1e-300);
    if (rel > worst) {
      worst = rel;
      if (where) *where = j;
    }
  }
  return worst;
}

inline double max_identity_gap(const EnergyReport& r) {
  double worst = 0.0;
  for (std::size_t j = 0; j < r.t.size(); ++j)
    worst = std::max(worst, std::abs(r.d2K_formula[j] - (r.lich[j] + r.ricci[j] + r.grad[j])));
  return worst;
}

class ScenarioRunner {
 public:
  ScenarioRunner(const Scenario& s, std::filesystem::path dir) : s_(s), dir_(std::move(dir)) {}

  void run(RunManifest& m) {
    std::filesystem::create_directories(dir_);
    const auto bg = s_.background();
    for (double e : s_.epsilons) solve(bg, e, m);
    for (const auto& a : s_.analyses) {
      if (a == "c0_check") c0(m);
      else if (a == "exact") exact(m);
      else if (a == "comparison") comparison(m);
      else if (a == "hessian_probe") probe(m);
      else if (a == "decay") decay(m);
      else if (a == "energy") energy(m);
      else if (a == "ricci_scan") ricci(bg, m);
      else if (a == "intersections") intersections(bg, m);
      else if (a == "mass") mass(bg, m);
    }
  }

 private:
  void emit(RunManifest& m, const std::string& name, const std::string& text) {
    write_text_file((dir_ / name).string(), text);
    m.artifacts.push_back(name);
  }

  void solve(const RadialProfile& bg, double eps, RunManifest& m) {
    SolverConfig cfg = s_.solver;
    cfg.epsilon = eps;
    auto r = solve_epsilon_geodesic(bg, s_.psi0, s_.psi1, cfg);
    const auto tag = eps_tag(eps);
    std::ostringstream csv;
    write_path_csv(csv, r.grid);
    emit(m, "path_eps_" + tag + ".csv", csv.str());
    emit(m, "path_eps_" + tag + ".csv.meta.json", path_meta(r.grid).dump(2) + "\n");
    emit(m, "solver_eps_" + tag + ".json", to_json(r.report).dump(2) + "\n");
    m.results["epsilons"].push_back(eps);
    m.results["residual"].push_back(r.report.residual);
    m.results["iterations"].push_back(r.report.total_iterations);
    runs_.push_back(std::move(r));
  }

  void c0(RunManifest& m) {
    CheckResult c{"c0_check", true, json::array()};
    for (const auto& r : runs_) {
      c.pass = c.pass && r.report.c0.pass;
      c.detail.push_back({{"epsilon", r.report.epsilon}, {"check", to_json(r.report.c0)}});
    }
    m.checks.push_back(c);
  }

  void exact(RunManifest& m) {
    CheckResult c{"exact", true, json::array()};
    for (const auto& r : runs_) {
      double dev = 0.0;
      const auto& g = r.grid;
      for (int i = 0; i < g.n_rho(); ++i)
        for (int j = 0; j < g.n_t(); ++j) {
          const double t = g.t()[j];
          dev = std::max(dev, std::abs(g.phi()(i, j) - 0.5 * r.report.epsilon * t * (t - 1.0)));
        }
      c.pass = c.pass && dev <= 1e-8;
      c.detail.push_back({{"epsilon", r.report.epsilon}, {"sup_deviation", dev}, {"tol", 1e-8}});
    }
    m.checks.push_back(c);
  }

  void comparison(RunManifest& m) {
    CheckResult c{"comparison", true, json::array()};
    for (std::size_t a = 0; a < runs_.size(); ++a)
      for (std::size_t b = a + 1; b < runs_.size(); ++b) {
        const auto chk = comparison_check(runs_[a].grid, runs_[b].grid, 1e-10);
        c.pass = c.pass && chk.pass;
        c.detail.push_back(
            {{"epsilon_a", runs_[a].report.epsilon}, {"epsilon_b", runs_[b].report.epsilon}, {"check", to_json(chk)}});
      }
    m.checks.push_back(c);
  }

  void probe(RunManifest& m) {
    std::vector<double> rel, raw;
    for (const auto& r : runs_) {
      const auto p = hessian_probe(r.grid);
      rel.push_back(p.relative);
      raw.push_back(p.raw);
    }
    const double med = median(rel);
    const double hi = *std::max_element(rel.begin(), rel.end()), lo = *std::min_element(rel.begin(), rel.end());
    const bool pass = hi <= 2.0 * med && lo >= 0.5 * med;
    m.results["probe_relative"] = rel;
    m.results["probe_raw"] = raw;
    m.checks.push_back({"hessian_probe", pass, {{"relative", rel}, {"raw", raw}, {"median", med}, {"factor", 2.0}}});
  }

  void decay(RunManifest& m) {
    CheckResult c{"decay", true, json::array()};
    for (const auto& r : runs_) {
      const auto f0 = data_decay(r.grid, s_.psi0), f1 = data_decay(r.grid, s_.psi1);
      // slowest decaying boundary datum sets gamma
      double gamma = INFINITY;
      for (const auto* f : {&f0, &f1})
        if (f->status == FitStatus::ok) gamma = std::min(gamma, -f->exponent);
      json d{{"epsilon", r.report.epsilon}, {"psi0", to_json(f0)}, {"psi1", to_json(f1)}};
      if (f0.status == FitStatus::poor_fit || f1.status == FitStatus::poor_fit) {
        c.pass = false;
        d["verdict"] = "boundary data has no clean power law";
      } else if (!std::isfinite(gamma)) {
        d["verdict"] = "boundary data constant at infinity; nothing to compare";
      } else {
        const auto fit = solution_decay(r.grid, r.report.epsilon, -gamma);
        d["gamma"] = gamma;
        d["solution"] = to_json(fit);
        const bool ok = fit.status == FitStatus::below_floor ||
                        (fit.status == FitStatus::ok && fit.exponent <= -gamma + 0.3);
        d["verdict"] = ok ? "pass" : "slower than the data";
        c.pass = c.pass && ok;
      }
      c.detail.push_back(d);
    }
    m.checks.push_back(c);
  }

  void energy(RunManifest& m) {
    CheckResult ident{"energy_identity", true, json::array()};
    CheckResult fd{"energy_fd", true, json::array()};
    for (const auto& r : runs_) {
      const auto rep = k_energy_report(r.grid, r.report.epsilon);
      const auto tag = eps_tag(r.report.epsilon);
      std::ostringstream csv;
      write_energy_csv(csv, rep);
      emit(m, "energy_eps_" + tag + ".csv", csv.str());
      emit(m, "energy_eps_" + tag + ".json", to_json(rep).dump(2) + "\n");
      const double gap = max_identity_gap(rep);
      ident.pass = ident.pass && gap <= 1e-10;
      ident.detail.push_back({{"epsilon", r.report.epsilon}, {"max_gap", gap}});
      std::size_t at = 0;
      const double rel = max_rel_fd_gap(rep, &at);
      fd.pass = fd.pass && rel <= 0.01;
      fd.detail.push_back({{"epsilon", r.report.epsilon}, {"max_relative_gap", rel}, {"t", rep.t[at]}});
    }
    m.checks.push_back(ident);
    m.checks.push_back(fd);

    const std::string expected = s_.expect.value("convexity", "pass");
    CheckResult conv{"convexity", false, json::object()};
    try {
      std::vector<const PathGrid*> grids;
      std::vector<double> eps;
      for (const auto& r : runs_) {
        grids.push_back(&r.grid);
        eps.push_back(r.report.epsilon);
      }
      const auto audit = convexity_audit(grids, eps, 1e-6);
      json entries = json::array();
      for (const auto& e : audit.entries)
        entries.push_back({{"epsilon", e.epsilon}, {"min_d2K", e.min_d2K}, {"t_at_min", e.t_at_min}, {"pass", e.pass}});
      conv.detail = {{"outcome", audit.pass ? "pass" : "fail"},
                     {"background_sign", to_string(audit.background_sign)},
                     {"entries", entries}};
      conv.pass = audit.pass && expected == "pass";
    } catch (const HypothesisViolation& e) {
      conv.detail = {{"outcome", "refused"}, {"reason", e.what()}};
      conv.pass = expected == "refused";
    }
    conv.detail["expected"] = expected;
    m.checks.push_back(conv);
  }

  void ricci(const RadialProfile& bg, RunManifest& m) {
    const auto scan = ricci_sign_scan(bg, default_tau_grid(bg, 200));
    std::ostringstream csv;
    write_curvature_csv(csv, scan.samples);
    emit(m, "curvature.csv", csv.str());
    json d = to_json(scan);
    bool pass = true;
    if (s_.expect.contains("ricci_sign")) {
      pass = s_.expect["ricci_sign"].get<std::string>() == to_string(scan.sign);
      d["expected"] = s_.expect["ricci_sign"];
    }
    m.checks.push_back({"ricci_scan", pass, d});
  }

  void intersections(const RadialProfile& bg, RunManifest& m) {
    const auto t = intersection_numbers(bg.n(), bg.k());
    const auto cert = mixed_type_certificate(bg.n(), bg.k());
    json d{{"table", to_json(t)}, {"certificate", to_json(cert)}};
    bool pass = cert.opposite_signs == (bg.k() != bg.n());
    if (bg.tau_min() > 0.0) {
      // the divisor fluxes of the background must reproduce the class computation
      const auto fx = ricci_divisor_fluxes(bg);
      const double e0 = std::abs(fx.zero_section - to_double(cert.d0_ricci));
      const double ef = std::abs(fx.fiber_divisor - to_double(cert.df_ricci));
      d["geometry_fluxes"] = {{"d0", fx.zero_section}, {"df", fx.fiber_divisor}};
      pass = pass && e0 <= 1e-6 && ef <= 1e-6;
    }
    m.checks.push_back({"intersections", pass, d});
  }

  void mass(const RadialProfile& bg, RunManifest& m) {
    try {
      m.checks.push_back({"mass", true, to_json(adm_mass(bg))});
    } catch (const HypothesisViolation& e) {
      m.checks.push_back({"mass", false, {{"outcome", "refused"}, {"reason", e.what()}}});
    }
  }

  const Scenario& s_;
  std::filesystem::path dir_;
  std::vector<SolveResult> runs_;
};

}  // namespace detail

/// Runs one scenario and writes its artifacts and manifest. Library errors
/// are caught and recorded; whatever was produced before the failure stays
/// on disk next to a manifest marked as failed.
inline RunManifest run_scenario(const Scenario& s, const RunOptions& opt = {}) {
  const auto dir = scenario_dir(s, opt);
  const auto manifest_path = dir / "manifest.json";
  const std::string hash = scenario_hash(s.config);
  if (opt.use_cache && std::filesystem::exists(manifest_path)) {
    try {
      auto cached = RunManifest::from_json(read_json_file(manifest_path.string()));
      if (cached.hash == hash) {
        cached.cached = true;
        return cached;
      }
    } catch (const std::exception&) {
      // unreadable cache entries are recomputed
    }
  }
  RunManifest m;
  m.id = s.id;
  m.hash = hash;
  m.inputs = s.config;
  try {
    detail::ScenarioRunner(s, dir).run(m);
  } catch (const ValidationError& e) {
    m.error_kind = "validation";
    m.error = e.what();
  } catch (const NumericalError& e) {
    m.error_kind = "numerical";
    m.error = e.what();
  } catch (const std::filesystem::filesystem_error& e) {
    m.error_kind = "validation";
    m.error = e.what();
  }
  std::filesystem::create_directories(dir);
  write_text_file(manifest_path.string(), m.to_json().dump(2) + "\n");
  return m;
}

// ---------------------------------------------------------------------------
// Batch

struct BatchSummary {
  /// Ordered by scenario id.
  std::vector<RunManifest> runs;
  /// Uniformity probe aggregated over scenarios that differ only in epsilon.
  json sweeps = json::array();
  std::size_t failures = 0;
  std::string csv;
};

namespace detail {

// Key shared by scenarios that differ only in id / epsilon / output location.
inline std::string sweep_key(const json& config) {
  json c = config;
  for (const char* k : {"id", "epsilon", "epsilons", "output_dir"}) c.erase(k);
  return sha256_hex(c.dump()).substr(0, 12);
}

inline std::string csv_cell(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

}  // namespace detail

/// Runs independent scenarios on a pool of workers. The summary does not
/// depend on the worker count.
inline BatchSummary batch(const std::vector<Scenario>& scenarios, const RunOptions& opt, int threads = 1) {
  std::set<std::string> ids;
  for (const auto& s : scenarios)
    if (!ids.insert(s.id).second) throw ValidationError("id", "duplicate scenario id '" + s.id + "'");

  BatchSummary out;
  out.runs.resize(scenarios.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < scenarios.size(); i = next++) {
      try {
        out.runs[i] = run_scenario(scenarios[i], opt);
      } catch (const std::exception& e) {
        RunManifest m;
        m.id = scenarios[i].id;
        m.error_kind = "numerical";
        m.error = e.what();
        out.runs[i] = m;
      }
    }
  };
  const int nw = std::max(1, std::min<int>(threads, static_cast<int>(scenarios.size())));
  std::vector<std::thread> pool;
  for (int w = 1; w < nw; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  std::vector<std::size_t> order(scenarios.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scenarios[a].id < scenarios[b].id; });
  std::vector<RunManifest> sorted;
  for (auto i : order) sorted.push_back(std::move(out.runs[i]));
  out.runs = std::move(sorted);

  std::ostringstream csv;
  csv << "id,kind,status,checks_passed,checks_failed,detail\n";
  for (const auto& m : out.runs) {
    if (!m.ok()) ++out.failures;
    csv << m.id << ",scenario," << (m.ok() ? "pass" : "fail") << ',' << m.passed() << ','
        << m.checks.size() - m.passed() << ',' << detail::csv_cell(m.error) << '\n';
  }

  // Uniformity probe across scenarios that form an epsilon sweep.
  std::map<std::string, std::vector<const RunManifest*>> groups;
  for (std::size_t i = 0; i < out.runs.size(); ++i) {
    const auto& m = out.runs[i];
    if (!m.error_kind.empty() || !m.results.contains("probe_relative")) continue;
    groups[detail::sweep_key(m.inputs)].push_back(&m);
  }
  for (const auto& [key, members] : groups) {
    if (members.size() < 2) continue;
    std::vector<std::pair<double, double>> pts;  // (epsilon, probe)
    for (const auto* m : members) {
      const auto& e = m->results["epsilons"];
      const auto& p = m->results["probe_relative"];
      for (std::size_t i = 0; i < e.size(); ++i) pts.emplace_back(e[i].get<double>(), p[i].get<double>());
    }
    std::sort(pts.begin(), pts.end(), std::greater<>());
    std::vector<double> vals;
    for (const auto& pt : pts) vals.push_back(pt.second);
    const double med = detail::median(vals);
    const double hi = *std::max_element(vals.begin(), vals.end()), lo = *std::min_element(vals.begin(), vals.end());
    const bool pass = hi <= 2.0 * med && lo >= 0.5 * med;
    json eps = json::array();
    for (const auto& pt : pts) eps.push_back(pt.first);
    out.sweeps.push_back(
        {{"key", key}, {"members", members.size()}, {"epsilons", eps}, {"probe", vals}, {"median", med}, {"pass", pass}});
    if (!pass) ++out.failures;
    csv << "sweep:" << key << ",sweep," << (pass ? "pass" : "fail") << ',' << (pass ? 1 : 0) << ','
        << (pass ? 0 : 1) << ",max/median=" << fmt_double(hi / med) << " min/median=" << fmt_double(lo / med) << '\n';
  }
  out.csv = csv.str();
  return out;
}

/// Reads either a single scenario object, an array of scenarios, or
/// {"scenarios": [...]}. Relative "include" entries name further files.
inline std::vector<Scenario> load_scenarios(const std::string& path) {
  const json doc = read_json_file(path);
  std::vector<Scenario> out;
  const auto base = std::filesystem::path(path).parent_path();
  auto add = [&](const json& item) {
    if (item.is_string()) {
      const json inner = read_json_file((base / item.get<std::string>()).string());
      out.push_back(parse_scenario(inner));
    } else {
      out.push_back(parse_scenario(item));
    }
  };
  if (doc.is_array()) {
    for (const auto& item : doc) add(item);
  } else if (doc.contains("scenarios")) {
    for (const auto& item : doc["scenarios"]) add(item);
  } else {
    add(doc);
  }
  return out;
}

}  // namespace alegeo
