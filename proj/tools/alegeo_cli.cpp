// Command-line front end. Exit codes: 0 all checks pass, 2 invalid input,
// 3 numerical failure or failed check, 4 partial batch failure.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "alegeo/scenario.hpp"

namespace {

using namespace alegeo;

constexpr int kOk = 0;
constexpr int kInvalid = 2;
constexpr int kNumerical = 3;
constexpr int kPartial = 4;

int manifest_exit(const RunManifest& m) {
  if (m.error_kind == "validation") return kInvalid;
  return m.ok() ? kOk : kNumerical;
}

void print(const json& j) { std::cout << j.dump(2) << '\n'; }

int cmd_solve(const std::string& config, const std::string& out, bool no_cache) {
  const auto scenarios = load_scenarios(config);
  if (scenarios.size() != 1) throw ValidationError("config", "solve-geodesic takes exactly one scenario; use batch");
  const auto m = run_scenario(scenarios.front(), {out, !no_cache});
  auto j = m.to_json();
  j["cached"] = m.cached;
  print(j);
  return manifest_exit(m);
}

int cmd_energy(const std::string& path, double epsilon, const std::string& out) {
  const auto grid = read_path(read_csv_file(path), read_json_file(path + ".meta.json"));
  const auto rep = k_energy_report(grid, epsilon);
  std::filesystem::path csv_path;
  if (!out.empty()) {
    std::filesystem::create_directories(out);
    csv_path = std::filesystem::path(out) / "energy.csv";
    write_text_file((std::filesystem::path(out) / "energy.json").string(), to_json(rep).dump(2) + "\n");
  } else {
    csv_path = std::filesystem::path(path).replace_extension(".energy.csv");
  }
  std::ostringstream csv;
  write_energy_csv(csv, rep);
  write_text_file(csv_path.string(), csv.str());
  print(to_json(rep));
  return kOk;
}

int cmd_ricci(const std::string& config, int n, int k, double tau_min, const std::string& form, int count,
              const std::string& out) {
  json prof;
  if (!config.empty()) {
    prof = read_json_file(config);
  } else {
    prof = {{"n", n}, {"k", k}, {"tau_min", tau_min}, {"form", form}};
  }
  const auto p = profile_from_json(prof);
  if (count < 2) throw ValidationError("count", "need at least two samples");
  const auto scan = ricci_sign_scan(p, default_tau_grid(p, static_cast<std::size_t>(count)));
  if (!out.empty()) {
    std::ostringstream csv;
    write_curvature_csv(csv, scan.samples);
    write_text_file(out, csv.str());
  }
  auto j = to_json(scan);
  j["profile"] = to_json(p);
  print(j);
  return kOk;
}

int cmd_intersect(int n, int k, bool oracle) {
  json j = to_json(intersection_numbers(n, k));
  j["certificate"] = to_json(mixed_type_certificate(n, k));
  if (oracle) {
    const auto& cal = oracle_calibration();
    j["calibration"] = {{"factor", cal.factor}, {"raw_reference", cal.raw}};
    json rows = json::array();
    for (auto target : {OracleTarget::rho0_power, OracleTarget::rho0_rhof, OracleTarget::restricted_d0}) {
      const auto v = representative_integral_oracle(n, k, target);
      const double exact = to_double(oracle_target_exact(n, k, target));
      rows.push_back({{"target", to_string(target)},
                      {"value", v.value},
                      {"error", v.error},
                      {"exact", exact},
                      {"relative_gap", std::abs(v.value - exact) / std::max(std::abs(exact), 1e-300)}});
    }
    j["oracle"] = rows;
  }
  print(j);
  return kOk;
}

int cmd_decay(const std::string& input, const std::string& column, const std::vector<double>& window,
              const std::string& r_column, std::optional<double> predicted, double floor) {
  const auto t = read_csv_file(input);
  std::vector<double> r;
  if (t.has(r_column)) {
    r = t.column(r_column);
  } else if (t.has("rho")) {
    for (double rho : t.column("rho")) r.push_back(std::exp(0.5 * rho));
  } else {
    throw ValidationError("r_column", "input has neither '" + r_column + "' nor 'rho'");
  }
  std::optional<FitWindow> w;
  if (!window.empty()) {
    if (window.size() != 2) throw ValidationError("window", "expected a,b");
    w = FitWindow{window[0], window[1]};
  }
  print(to_json(fit_decay_exponent(r, t.column(column), w, predicted, floor)));
  return kOk;
}

int cmd_batch(const std::string& config, const std::string& out, bool no_cache, int threads) {
  const auto scenarios = load_scenarios(config);
  const std::string root = out.empty() ? "out" : out;
  const auto summary = batch(scenarios, {root, !no_cache}, threads);
  std::filesystem::create_directories(root);
  write_text_file((std::filesystem::path(root) / "summary.csv").string(), summary.csv);
  json runs = json::array();
  for (const auto& m : summary.runs)
    runs.push_back({{"id", m.id}, {"status", m.ok() ? "pass" : "fail"}, {"error", m.error}, {"cached", m.cached}});
  print({{"runs", runs}, {"sweeps", summary.sweeps}, {"failures", summary.failures}});
  return summary.failures == 0 ? kOk : kPartial;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical laboratory for epsilon-geodesics on ALE line-bundle spaces"};
  app.require_subcommand(1);

  std::string config, out, path, form = "lebrun", input, column, r_column = "r";
  bool no_cache = false, oracle = false;
  int threads = 1, n = 2, k = 1, count = 200;
  double epsilon = 0.5, tau_min = 1.0, floor = 1e-300;
  std::vector<double> window;
  std::optional<double> predicted;

  auto* solve = app.add_subcommand("solve-geodesic", "Solve one scenario and run its analyses");
  solve->add_option("--config", config, "Scenario JSON")->required()->check(CLI::ExistingFile);
  solve->add_option("--out", out, "Output root");
  solve->add_flag("--no-cache", no_cache, "Ignore cached results");

  auto* energy = app.add_subcommand("k-energy", "K-energy report along a stored path");
  energy->add_option("--path", path, "Path CSV (with .meta.json sidecar)")->required()->check(CLI::ExistingFile);
  energy->add_option("--epsilon", epsilon, "Epsilon the path solves")->required();
  energy->add_option("--out", out, "Directory for energy.json and energy.csv");

  auto* ricci = app.add_subcommand("ricci-scan", "Ricci sign classification of a profile");
  ricci->add_option("--config", config, "Profile JSON")->check(CLI::ExistingFile);
  ricci->add_option("--n", n, "Complex dimension");
  ricci->add_option("--k", k, "Line-bundle twist");
  ricci->add_option("--tau-min", tau_min, "Zero-section momentum");
  ricci->add_option("--form", form, "lebrun or flat");
  ricci->add_option("--count", count, "Number of tau samples");
  ricci->add_option("--out", out, "Curvature CSV path");

  auto* inter = app.add_subcommand("intersect", "Intersection numbers and the mixed-type certificate");
  inter->add_option("--n", n, "Complex dimension")->required();
  inter->add_option("--k", k, "Line-bundle twist")->required();
  inter->add_flag("--oracle", oracle, "Add quadrature oracle columns");

  auto* decay = app.add_subcommand("decay-fit", "Power-law fit of a CSV column");
  decay->add_option("--input", input, "CSV file")->required()->check(CLI::ExistingFile);
  decay->add_option("--column", column, "Column to fit")->required();
  decay->add_option("--window", window, "r_lo,r_hi")->delimiter(',');
  decay->add_option("--r-column", r_column, "Radius column (falls back to rho)");
  decay->add_option("--predicted", predicted, "Predicted exponent");
  decay->add_option("--floor", floor, "Ignore |values| at or below this");

  auto* bat = app.add_subcommand("batch", "Run many scenarios in parallel");
  bat->add_option("--config", config, "Scenario list JSON")->required()->check(CLI::ExistingFile);
  bat->add_option("--out", out, "Output root");
  bat->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  bat->add_flag("--no-cache", no_cache, "Ignore cached results");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInvalid;
  }

  try {
    if (*solve) return cmd_solve(config, out, no_cache);
    if (*energy) return cmd_energy(path, epsilon, out);
    if (*ricci) return cmd_ricci(config, n, k, tau_min, form, count, out);
    if (*inter) return cmd_intersect(n, k, oracle);
    if (*decay) return cmd_decay(input, column, window, r_column, predicted, floor);
    if (*bat) return cmd_batch(config, out, no_cache, threads);
  } catch (const ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kInvalid;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumerical;
  }
  return kInvalid;
}
