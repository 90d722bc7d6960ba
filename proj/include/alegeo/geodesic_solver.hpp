#pragma once

// Symmetry-reduced epsilon-geodesic equation on a (rho, t) tensor grid.
//
// The unknown is the relative potential phi = Phi - Psi, where
// Psi = (1 - t) psi0 + t psi1 is the linear interpolation of the boundary
// data. With W = u + Phi, X = dPhi/dt' (rho-derivative of the t-derivative)
// the reduced operator is
//
//   G = (Phi_tt W'' - X^2) (W')^{n-1} - rhs,
//
// where rhs is upsilon times a reference density: either the density of
// Theta_Psi, ((u'' + Psi'') - Psi_t'^2)(u' + Psi')^{n-1}, or the background
// density (u')^{n-1} u''. Newton runs on the log form of G = 0.

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "alegeo/analysis_tools.hpp"
#include "alegeo/calabi_geometry.hpp"
#include "alegeo/errors.hpp"
#include "alegeo/numerics.hpp"
#include "alegeo/radial_potential.hpp"

namespace alegeo {

enum class UpsilonMode { constant, profile_weighted };
enum class RhsReference { theta_psi, background };

inline const char* to_string(UpsilonMode m) { return m == UpsilonMode::constant ? "constant" : "profile-weighted"; }
inline const char* to_string(RhsReference r) { return r == RhsReference::theta_psi ? "theta_psi" : "background"; }

struct GridSpec {
  int n_rho = 65;
  int n_t = 65;
  double rho_min = -3.0;
  double rho_max = 5.0;
};

struct SolverConfig {
  double epsilon = 0.5;
  UpsilonMode upsilon_mode = UpsilonMode::constant;
  RhsReference rhs_reference = RhsReference::theta_psi;
  /// Explicit continuity stages; when empty a geometric schedule with the
  /// ratio below is generated.
  std::vector<double> schedule;
  double schedule_ratio = 0.5;
  /// Bound on sup |G| / ((u')^{n-1} u'').
  double newton_tol = 1e-10;
  int max_iters = 40;
  /// Backtracking stops once the step fraction drops below this.
  double min_step = 1e-6;
  int max_subdivisions = 6;
  GridSpec grid;
  /// Required decay exponent of the boundary data (psi - psi(inf) = O(r^{-gamma})).
  double gamma = 1.0;
  double c0_tol = 1e-10;
};

/// Continuity stages 1 = s_0 > s_1 > ... > s_m = epsilon.
inline std::vector<double> continuity_schedule(const SolverConfig& cfg) {
  if (!(cfg.epsilon > 0.0 && cfg.epsilon <= 1.0)) throw ValidationError("epsilon", "must lie in (0, 1]");
  std::vector<double> s = cfg.schedule;
  if (s.empty()) {
    if (!(cfg.schedule_ratio > 0.0 && cfg.schedule_ratio < 1.0))
      throw ValidationError("schedule_ratio", "must lie in (0, 1)");
    s.push_back(1.0);
    while (s.back() * cfg.schedule_ratio > cfg.epsilon * (1.0 + 1e-12)) s.push_back(s.back() * cfg.schedule_ratio);
    if (s.back() != cfg.epsilon) s.push_back(cfg.epsilon);
  }
  if (s.front() != 1.0) throw ValidationError("schedule", "must start at 1");
  if (s.back() != cfg.epsilon) throw ValidationError("schedule", "must end at epsilon");
  for (std::size_t i = 1; i < s.size(); ++i)
    if (!(s[i] < s[i - 1])) throw ValidationError("schedule", "must be strictly decreasing");
  return s;
}

/// Discretised path of potentials. phi is stored on the full grid including
/// boundary rows: phi(., 0) = phi(., 1) = 0 and the Dirichlet row at rho_max.
class PathGrid {
 public:
  PathGrid(RadialProfile background, RadialPotential psi0, RadialPotential psi1, const GridSpec& spec)
      : background_(std::move(background)), psi0_(psi0), psi1_(psi1) {
    if (spec.n_rho < 5 || spec.n_t < 5) throw ValidationError("grid", "need at least 5 nodes per direction");
    if (!(spec.rho_max > spec.rho_min)) throw ValidationError("grid", "rho_max must exceed rho_min");
    rho_ = num::linspace(spec.rho_min, spec.rho_max, spec.n_rho);
    t_ = num::linspace(0.0, 1.0, spec.n_t);
    phi_ = Eigen::MatrixXd::Zero(spec.n_rho, spec.n_t);
    const int nr = spec.n_rho;
    u1_.resize(nr);
    u2_.resize(nr);
    u3_.resize(nr);
    u4_.resize(nr);
    p0_.resize(nr);
    p1_.resize(nr);
    for (int i = 0; i < nr; ++i) {
      const auto u = background_.potential(rho_[i]);
      u1_[i] = u.d1;
      u2_[i] = u.d2;
      u3_[i] = u.d3;
      u4_[i] = u.d4;
      p0_[i] = psi0_.eval(rho_[i]);
      p1_[i] = psi1_.eval(rho_[i]);
    }
  }

  const RadialProfile& background() const { return background_; }
  const RadialPotential& psi0() const { return psi0_; }
  const RadialPotential& psi1() const { return psi1_; }
  int n() const { return background_.n(); }
  int n_rho() const { return static_cast<int>(rho_.size()); }
  int n_t() const { return static_cast<int>(t_.size()); }
  const std::vector<double>& rho() const { return rho_; }
  const std::vector<double>& t() const { return t_; }
  double h_rho() const { return rho_[1] - rho_[0]; }
  double h_t() const { return t_[1] - t_[0]; }
  GridSpec spec() const { return {n_rho(), n_t(), rho_.front(), rho_.back()}; }

  Eigen::MatrixXd& phi() { return phi_; }
  const Eigen::MatrixXd& phi() const { return phi_; }

  /// Background derivatives u', u'', u''', u'''' at rho node i.
  double u1(int i) const { return u1_[i]; }
  double u2(int i) const { return u2_[i]; }
  double u3(int i) const { return u3_[i]; }
  double u4(int i) const { return u4_[i]; }
  /// Derivatives of psi0 / psi1 at node i.
  const std::array<double, 5>& psi0_at(int i) const { return p0_[i]; }
  const std::array<double, 5>& psi1_at(int i) const { return p1_[i]; }

  /// m-th rho-derivative of Psi at (i, j).
  double Psi(int i, int j, int m) const { return (1.0 - t_[j]) * p0_[i][m] + t_[j] * p1_[i][m]; }
  /// m-th rho-derivative of dPsi/dt (t-independent).
  double Psi_t(int i, int m) const { return p1_[i][m] - p0_[i][m]; }

  /// Stage value the grid was last solved at (NaN for hand-built grids).
  double stage = std::numeric_limits<double>::quiet_NaN();
  UpsilonMode upsilon_mode = UpsilonMode::constant;
  RhsReference rhs_reference = RhsReference::theta_psi;

  /// Overwrite phi with s t (t - 1) / 2, the spatially constant solution.
  void set_constant_solution(double s) {
    for (int i = 0; i < n_rho(); ++i)
      for (int j = 0; j < n_t(); ++j) phi_(i, j) = 0.5 * s * t_[j] * (t_[j] - 1.0);
  }

  bool same_discretisation(const PathGrid& o) const {
    return rho_ == o.rho_ && t_ == o.t_ && n() == o.n() && background_.k() == o.background_.k() &&
           background_.tau_min() == o.background_.tau_min();
  }

 private:
  RadialProfile background_;
  RadialPotential psi0_, psi1_;
  std::vector<double> rho_, t_;
  Eigen::MatrixXd phi_;
  std::vector<double> u1_, u2_, u3_, u4_;
  std::vector<std::array<double, 5>> p0_, p1_;
};

// ---------------------------------------------------------------------------
// Pointwise quantities

/// Discrete geometry of W = u + Psi + phi at an unknown node.
struct NodeState {
  double w1 = 0.0;     // W'
  double w2 = 0.0;     // W''
  double phi_tt = 0.0; // Phi_tt
  double x = 0.0;      // Phi_t'
  double det() const { return phi_tt * w2 - x * x; }
};

namespace detail {

// phi with the homogeneous Neumann ghost row phi(-1, j) = phi(1, j).
inline double phi_ext(const PathGrid& g, int i, int j) { return g.phi()(i < 0 ? -i : i, j); }

}  // namespace detail

inline NodeState node_state(const PathGrid& g, int i, int j) {
  const double hr = g.h_rho(), ht = g.h_t();
  using detail::phi_ext;
  const double c = phi_ext(g, i, j);
  NodeState s;
  s.w1 = g.u1(i) + g.Psi(i, j, 1) + (phi_ext(g, i + 1, j) - phi_ext(g, i - 1, j)) / (2.0 * hr);
  s.w2 = g.u2(i) + g.Psi(i, j, 2) + (phi_ext(g, i + 1, j) - 2.0 * c + phi_ext(g, i - 1, j)) / (hr * hr);
  s.phi_tt = (phi_ext(g, i, j + 1) - 2.0 * c + phi_ext(g, i, j - 1)) / (ht * ht);
  s.x = g.Psi_t(i, 1) + (phi_ext(g, i + 1, j + 1) - phi_ext(g, i + 1, j - 1) - phi_ext(g, i - 1, j + 1) +
                         phi_ext(g, i - 1, j - 1)) /
                            (4.0 * hr * ht);
  return s;
}

/// (u')^{n-1} u'' at rho node i.
inline double background_density(const PathGrid& g, int i) { return std::pow(g.u1(i), g.n() - 1) * g.u2(i); }

/// ((u'' + Psi'') - Psi_t'^2)(u' + Psi')^{n-1} at (i, j).
inline double theta_psi_density(const PathGrid& g, int i, int j) {
  const double x = g.Psi_t(i, 1);
  return (g.u2(i) + g.Psi(i, j, 2) - x * x) * std::pow(g.u1(i) + g.Psi(i, j, 1), g.n() - 1);
}

/// upsilon(s) at (i, j). In profile-weighted mode
/// upsilon = s ((1 - chi(s)) f + chi(s)) with f the ratio of the background
/// density to the Theta_Psi density.
inline double upsilon(const PathGrid& g, int i, int j, double s, UpsilonMode mode) {
  if (mode == UpsilonMode::constant) return s;
  const double f = background_density(g, i) / theta_psi_density(g, i, j);
  const double chi = num::smoothstep(s);
  return s * ((1.0 - chi) * f + chi);
}

inline double rhs_density(const PathGrid& g, int i, int j, double s, UpsilonMode mode, RhsReference ref) {
  const double reference = ref == RhsReference::theta_psi ? theta_psi_density(g, i, j) : background_density(g, i);
  return upsilon(g, i, j, s, mode) * reference;
}

/// The reduced operator G on unknown nodes (rows 0..n_rho-2, columns
/// 1..n_t-2); other entries are zero.
inline Eigen::MatrixXd reduced_residual(const PathGrid& g, double s, UpsilonMode mode,
                                        RhsReference ref = RhsReference::theta_psi) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(g.n_rho(), g.n_t());
  for (int i = 0; i + 1 < g.n_rho(); ++i) {
    for (int j = 1; j + 1 < g.n_t(); ++j) {
      const auto st = node_state(g, i, j);
      if (!(st.w1 > 0.0 && st.w2 > 0.0)) throw PositivityLoss("metric positivity fails on the grid", i, j);
      out(i, j) = st.det() * std::pow(st.w1, g.n() - 1) - rhs_density(g, i, j, s, mode, ref);
    }
  }
  return out;
}

/// sup |G| / ((u')^{n-1} u'').
inline double normalized_residual(const PathGrid& g, const Eigen::MatrixXd& G) {
  double m = 0.0;
  for (int i = 0; i + 1 < g.n_rho(); ++i)
    for (int j = 1; j + 1 < g.n_t(); ++j) m = std::max(m, std::abs(G(i, j)) / background_density(g, i));
  return m;
}

// ---------------------------------------------------------------------------
// Bound checks

struct C0Check {
  bool pass = true;
  /// min over nodes of phi~ (lower bound slack).
  double lower_slack = 0.0;
  /// min over nodes of 2t(1-t) - phi~ (upper bound slack).
  double upper_slack = 0.0;
  double min_slack = 0.0;
  int worst_i = -1;
  int worst_j = -1;
  double tol = 0.0;
};

/// Sandwich 0 <= phi~ <= 2 t (1 - t) for phi~ = phi + t (1 - t) / 2, the
/// relative potential measured from the exact solution at stage 1.
inline C0Check c0_bound_check(const PathGrid& g, double tol = 1e-10) {
  C0Check c;
  c.tol = tol;
  c.lower_slack = INFINITY;
  c.upper_slack = INFINITY;
  c.min_slack = INFINITY;
  for (int i = 0; i < g.n_rho(); ++i) {
    for (int j = 0; j < g.n_t(); ++j) {
      const double t = g.t()[j];
      const double h = t * (1.0 - t);
      const double pt = g.phi()(i, j) + 0.5 * h;
      const double lo = pt, hi = 2.0 * h - pt;
      c.lower_slack = std::min(c.lower_slack, lo);
      c.upper_slack = std::min(c.upper_slack, hi);
      if (std::min(lo, hi) < c.min_slack) {
        c.min_slack = std::min(lo, hi);
        c.worst_i = i;
        c.worst_j = j;
      }
    }
  }
  c.pass = c.min_slack >= -tol;
  return c;
}

struct ComparisonCheck {
  bool pass = true;
  /// max over nodes of phi_A - phi_B (pass means <= tol).
  double max_excess = 0.0;
  int worst_i = -1;
  int worst_j = -1;
  double tol = 0.0;
};

/// For stage values s_A >= s_B the solution with the larger right-hand side
/// lies below: phi_A <= phi_B + tol.
inline ComparisonCheck comparison_check(const PathGrid& a, const PathGrid& b, double tol = 1e-10) {
  if (!a.same_discretisation(b)) throw ValidationError("grid", "comparison needs identical discretisations");
  if (!(std::isnan(a.stage) || std::isnan(b.stage)) && a.stage < b.stage)
    throw ValidationError("epsilon", "first grid must carry the larger epsilon");
  ComparisonCheck c;
  c.tol = tol;
  c.max_excess = -INFINITY;
  for (int i = 0; i < a.n_rho(); ++i)
    for (int j = 0; j < a.n_t(); ++j) {
      const double e = a.phi()(i, j) - b.phi()(i, j);
      if (e > c.max_excess) {
        c.max_excess = e;
        c.worst_i = i;
        c.worst_j = j;
      }
    }
  c.pass = c.max_excess <= tol;
  return c;
}

struct HessianProbe {
  /// max over nodes of the largest eigenvalue of the complex Hessian of
  /// Theta + dd^c Phi relative to Theta_Psi.
  double relative = 0.0;
  /// max over nodes of |Phi_rr|, |Phi_rt|, |Phi_tt| (plain second differences).
  double raw = 0.0;
};

inline HessianProbe hessian_probe(const PathGrid& g) {
  HessianProbe p;
  for (int i = 0; i + 1 < g.n_rho(); ++i) {
    for (int j = 1; j + 1 < g.n_t(); ++j) {
      const auto st = node_state(g, i, j);
      const double base = st.w1 / (g.u1(i) + g.Psi(i, j, 1));
      // generalized eigenvalues of [[w2, x], [x, ptt]] against [[b2, xb], [xb, 1]]
      const double b2 = g.u2(i) + g.Psi(i, j, 2), xb = g.Psi_t(i, 1);
      const double qa = b2 - xb * xb;
      const double qb = -(st.w2 + st.phi_tt * b2 - 2.0 * st.x * xb);
      const double qc = st.det();
      const double disc = std::max(0.0, qb * qb - 4.0 * qa * qc);
      const double lam = (-qb + std::sqrt(disc)) / (2.0 * qa);
      p.relative = std::max({p.relative, base, lam});
      const double prr = st.w2 - g.u2(i);
      p.raw = std::max({p.raw, std::abs(prr), std::abs(st.x), std::abs(st.phi_tt)});
    }
  }
  return p;
}

// ---------------------------------------------------------------------------
// Solver

struct StageRecord {
  double s = 0.0;
  int iterations = 0;
  double residual = 0.0;
  /// Rounding floor of the residual; convergence is declared at
  /// max(newton_tol, floor).
  double floor = 0.0;
  std::vector<double> history;
};

struct SolverReport {
  double epsilon = 0.0;
  /// sup |G| / ((u')^{n-1} u'') recomputed on the returned grid.
  double residual = 0.0;
  /// sup |G| without normalisation.
  double residual_abs = 0.0;
  std::vector<StageRecord> stages;
  /// Largest rounding floor met along the schedule.
  double residual_floor = 0.0;
  int total_iterations = 0;
  C0Check c0;
  double min_w1 = 0.0;
  double min_w2 = 0.0;
  double min_det = 0.0;
  /// Constant C with C^{-1} eps <= upsilon <= C eps at the final stage.
  double upsilon_constant = 1.0;
  bool upsilon_at_most_one = true;
  /// r_max^{-gamma} with gamma the slowest nominal decay of the data.
  double truncation_estimate = 0.0;
  double wall_seconds = 0.0;
};

namespace detail {

class NewtonContext {
 public:
  NewtonContext(PathGrid& g, const SolverConfig& cfg) : g_(g), cfg_(cfg) {
    nr_ = g.n_rho() - 1;
    nt_ = g.n_t() - 2;
    size_ = nr_ * nt_;
  }

  int index(int i, int j) const { return i * nt_ + (j - 1); }

  // Log residual L = log(det) + (n-1) log W' - log rhs. Returns false on a
  // positivity failure.
  bool log_residual(double s, Eigen::VectorXd& out, double& norm) const {
    out.resize(size_);
    norm = 0.0;
    for (int i = 0; i < nr_; ++i)
      for (int j = 1; j <= nt_; ++j) {
        const auto st = node_state(g_, i, j);
        const double det = st.det();
        if (!(st.w1 > 0.0 && st.w2 > 0.0 && st.phi_tt > 0.0 && det > 0.0)) return false;
        const double v = std::log(det) + (g_.n() - 1) * std::log(st.w1) -
                         std::log(rhs_density(g_, i, j, s, cfg_.upsilon_mode, cfg_.rhs_reference));
        out[index(i, j)] = v;
        norm = std::max(norm, std::abs(v));
      }
    return true;
  }

  // Size of the normalised residual that rounding alone produces in the
  // difference quotients. Near a degenerate zero section u'' is tiny and
  // this can exceed the requested tolerance.
  double roundoff_floor() const {
    constexpr double eps = std::numeric_limits<double>::epsilon();
    const double hr = g_.h_rho(), ht = g_.h_t();
    double floor = 0.0;
    for (int i = 0; i < nr_; ++i)
      for (int j = 1; j <= nt_; ++j) {
        const auto st = node_state(g_, i, j);
        double scale = 0.0;
        for (int di = -1; di <= 1; ++di)
          for (int dj = -1; dj <= 1; ++dj) scale = std::max(scale, std::abs(detail::phi_ext(g_, i + di, j + dj)));
        scale = eps * std::max(scale, 1e-300);
        const double e_tt = 4.0 * scale / (ht * ht), e_rr = 4.0 * scale / (hr * hr), e_x = scale / (hr * ht);
        const double rel = (std::abs(st.phi_tt) * e_rr + st.w2 * e_tt + 2.0 * std::abs(st.x) * e_x) / st.det() +
                           (g_.n() - 1) * scale / (hr * st.w1);
        floor = std::max(floor, rel);
      }
    return 8.0 * floor;
  }

  double certificate(double s) const {
    return normalized_residual(g_, reduced_residual(g_, s, cfg_.upsilon_mode, cfg_.rhs_reference));
  }

  void assemble(Eigen::SparseMatrix<double>& J) const {
    const double hr = g_.h_rho(), ht = g_.h_t();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(size_) * 9);
    auto add = [&](int row, int i, int j, double v) {
      if (j <= 0 || j > nt_) return;   // t-boundary values are fixed
      if (i < 0) i = -i;               // Neumann ghost
      if (i >= nr_) return;            // Dirichlet row
      trip.emplace_back(row, index(i, j), v);
    };
    for (int i = 0; i < nr_; ++i)
      for (int j = 1; j <= nt_; ++j) {
        const auto st = node_state(g_, i, j);
        const double det = st.det();
        const double d_tt = st.w2 / det, d_w2 = st.phi_tt / det, d_x = -2.0 * st.x / det;
        const double d_w1 = (g_.n() - 1) / st.w1;
        const int row = index(i, j);
        add(row, i, j, -2.0 * d_tt / (ht * ht) - 2.0 * d_w2 / (hr * hr));
        add(row, i, j + 1, d_tt / (ht * ht));
        add(row, i, j - 1, d_tt / (ht * ht));
        add(row, i + 1, j, d_w2 / (hr * hr) + d_w1 / (2.0 * hr));
        add(row, i - 1, j, d_w2 / (hr * hr) - d_w1 / (2.0 * hr));
        const double cx = d_x / (4.0 * hr * ht);
        add(row, i + 1, j + 1, cx);
        add(row, i + 1, j - 1, -cx);
        add(row, i - 1, j + 1, -cx);
        add(row, i - 1, j - 1, cx);
      }
    J.resize(size_, size_);
    J.setFromTriplets(trip.begin(), trip.end());
  }

  void apply(const Eigen::VectorXd& delta, double alpha) {
    for (int i = 0; i < nr_; ++i)
      for (int j = 1; j <= nt_; ++j) g_.phi()(i, j) += alpha * delta[index(i, j)];
  }

  /// Newton at stage s from the current grid contents. Returns the stage
  /// record; throws on failure and leaves the grid in an unspecified state.
  StageRecord solve_stage(double s) {
    StageRecord rec;
    rec.s = s;
    Eigen::VectorXd L, Ltrial;
    double norm = 0.0;
    if (!log_residual(s, L, norm)) throw PositivityLoss("initial guess violates positivity");
    double cert = certificate(s);
    rec.history.push_back(cert);
    rec.floor = roundoff_floor();
    Eigen::SparseMatrix<double> J;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    bool analyzed = false;
    while (cert > std::max(cfg_.newton_tol, rec.floor)) {
      if (rec.iterations >= cfg_.max_iters)
        throw NonConvergence("Newton iteration limit reached", s, rec.history);
      assemble(J);
      if (!analyzed) {
        lu.analyzePattern(J);
        analyzed = true;
      }
      lu.factorize(J);
      if (lu.info() != Eigen::Success) throw NonConvergence("singular Newton system", s, rec.history);
      const Eigen::VectorXd delta = lu.solve(-L);
      const Eigen::MatrixXd saved = g_.phi();
      double alpha = 1.0;
      bool accepted = false;
      bool positive_seen = false;
      while (alpha >= cfg_.min_step) {
        apply(delta, alpha);
        double trial = 0.0;
        if (log_residual(s, Ltrial, trial)) {
          positive_seen = true;
          if (trial < (1.0 - 1e-4 * alpha) * norm || trial < 1e-13) {
            accepted = true;
            L = Ltrial;
            norm = trial;
            break;
          }
        }
        g_.phi() = saved;
        alpha *= 0.5;
      }
      ++rec.iterations;
      if (!accepted) {
        if (!positive_seen) throw PositivityLoss("damping could not restore positivity");
        throw NonConvergence("line search stalled", s, rec.history);
      }
      cert = certificate(s);
      rec.history.push_back(cert);
      rec.floor = roundoff_floor();
    }
    rec.residual = cert;
    return rec;
  }

 private:
  PathGrid& g_;
  const SolverConfig& cfg_;
  int nr_ = 0;
  int nt_ = 0;
  int size_ = 0;
};

inline void set_dirichlet_row(PathGrid& g, double s) {
  const int i = g.n_rho() - 1;
  for (int j = 0; j < g.n_t(); ++j) g.phi()(i, j) = 0.5 * s * g.t()[j] * (g.t()[j] - 1.0);
}

}  // namespace detail

/// Positivity and decay preconditions of the boundary data on a grid.
inline void check_boundary_data(const PathGrid& g, const SolverConfig& cfg) {
  for (int i = 0; i < g.n_rho(); ++i) {
    for (int j : {0, g.n_t() - 1}) {
      const double w1 = g.u1(i) + g.Psi(i, j, 1), w2 = g.u2(i) + g.Psi(i, j, 2);
      if (!(w1 > 0.0 && w2 > 0.0))
        throw ValidationError(j == 0 ? "psi0" : "psi1", "boundary potential is not a positive metric on the grid");
      if (!(theta_psi_density(g, i, j) > 0.0))
        throw ValidationError("psi", "Theta_Psi is not positive on the grid");
    }
  }
  // decay of psi - psi(inf) on the outer window of the truncated domain
  const double r_max = std::exp(0.5 * g.rho().back());
  const auto rs = num::logspace(r_max / 8.0, r_max / 2.0, 32);
  for (const auto* psi : {&g.psi0(), &g.psi1()}) {
    std::vector<double> vals;
    for (double r : rs) vals.push_back(psi->eval(2.0 * std::log(r))[0] - psi->limit_at_infinity());
    const auto fit = fit_decay_exponent(rs, vals, FitWindow{r_max / 8.0, r_max / 2.0}, -cfg.gamma, 1e-300);
    if (fit.status == FitStatus::poor_fit || (fit.status == FitStatus::ok && fit.exponent > -cfg.gamma + 1e-9))
      throw BoundaryInconsistency("boundary potential decays slower than r^{-gamma}");
  }
}

struct SolveResult {
  PathGrid grid;
  SolverReport report;
};

/// Continuity method from the exact stage-1 solution down to epsilon.
inline SolveResult solve_epsilon_geodesic(const RadialProfile& background, const RadialPotential& psi0,
                                          const RadialPotential& psi1, const SolverConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const auto schedule = continuity_schedule(cfg);
  PathGrid g(background, psi0, psi1, cfg.grid);
  g.upsilon_mode = cfg.upsilon_mode;
  g.rhs_reference = cfg.rhs_reference;
  check_boundary_data(g, cfg);

  SolverReport rep;
  rep.epsilon = cfg.epsilon;
  detail::NewtonContext ctx(g, cfg);

  g.set_constant_solution(1.0);
  rep.stages.push_back(ctx.solve_stage(1.0));
  double s_prev = 1.0;
  for (std::size_t k = 1; k < schedule.size(); ++k) {
    // Pending targets; a failed stage is split at the geometric midpoint.
    std::vector<std::pair<double, int>> todo{{schedule[k], 0}};
    while (!todo.empty()) {
      const auto [s, depth] = todo.back();
      const Eigen::MatrixXd prev = g.phi();
      bool done = false;
      std::string last_error;
      // warm starts: scaled previous solution, then shifted by the constant part
      for (int attempt = 0; attempt < 2 && !done; ++attempt) {
        g.phi() = prev;
        if (attempt == 0) {
          g.phi() *= s / s_prev;
        } else {
          for (int i = 0; i < g.n_rho(); ++i)
            for (int j = 0; j < g.n_t(); ++j) g.phi()(i, j) += 0.5 * (s - s_prev) * g.t()[j] * (g.t()[j] - 1.0);
        }
        detail::set_dirichlet_row(g, s);
        try {
          rep.stages.push_back(ctx.solve_stage(s));
          done = true;
        } catch (const NumericalError& e) {
          last_error = e.what();
        }
      }
      if (done) {
        todo.pop_back();
        s_prev = s;
        continue;
      }
      g.phi() = prev;
      if (depth >= cfg.max_subdivisions)
        throw NonConvergence("continuity stage failed after subdivision: " + last_error, s, {});
      todo.back().second = depth + 1;
      todo.emplace_back(std::sqrt(s * s_prev), depth + 1);
    }
  }
  g.stage = cfg.epsilon;

  const auto G = reduced_residual(g, cfg.epsilon, cfg.upsilon_mode, cfg.rhs_reference);
  rep.residual = normalized_residual(g, G);
  rep.residual_abs = G.cwiseAbs().maxCoeff();
  for (const auto& st : rep.stages) {
    rep.total_iterations += st.iterations;
    rep.residual_floor = std::max(rep.residual_floor, st.floor);
  }
  rep.c0 = c0_bound_check(g, cfg.c0_tol);
  rep.min_w1 = rep.min_w2 = rep.min_det = INFINITY;
  double ratio_hi = 0.0, ratio_lo = INFINITY;
  for (int i = 0; i + 1 < g.n_rho(); ++i)
    for (int j = 1; j + 1 < g.n_t(); ++j) {
      const auto st = node_state(g, i, j);
      rep.min_w1 = std::min(rep.min_w1, st.w1);
      rep.min_w2 = std::min(rep.min_w2, st.w2);
      rep.min_det = std::min(rep.min_det, st.det());
      const double ups = upsilon(g, i, j, cfg.epsilon, cfg.upsilon_mode);
      ratio_hi = std::max(ratio_hi, ups / cfg.epsilon);
      ratio_lo = std::min(ratio_lo, ups / cfg.epsilon);
      if (ups > 1.0 + 1e-12) rep.upsilon_at_most_one = false;
    }
  rep.upsilon_constant = std::max(ratio_hi, 1.0 / ratio_lo);
  const double gamma = std::min(psi0.nominal_decay(), psi1.nominal_decay());
  rep.truncation_estimate = std::isfinite(gamma) ? std::exp(-0.5 * gamma * g.rho().back()) : 0.0;
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {std::move(g), std::move(rep)};
}

}  // namespace alegeo
