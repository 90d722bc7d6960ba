#pragma once

// Mabuchi K-energy along a discrete path of radial potentials.
//
// For W = u + Phi write a = W', b = W'', m = a^{n-1} b (volume density in
// rho) and F = (n-1) log a + log b - n rho (Ricci potential). Then
// Q = a^{n-1} F' satisfies R m = -2 Q'. All integrals are per unit link
// volume: the common factor vol(S^{2n-1}/Z_k) is reported but never applied.

#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "alegeo/calabi_geometry.hpp"
#include "alegeo/errors.hpp"
#include "alegeo/geodesic_solver.hpp"
#include "alegeo/numerics.hpp"

namespace alegeo {

struct EnergyDecomposition {
  double lich = 0.0;    // |D v|^2 term
  double ricci = 0.0;   // -f tr Ric term
  double grad = 0.0;    // |grad f|^2 / f term
  double total = 0.0;   // Simpson of the summed integrand
};

struct EnergyReport {
  int n = 2;
  int k = 1;
  double epsilon = 0.0;
  /// vol(S^{2n-1}/Z_k); not applied to any value below.
  double c_link = 0.0;
  std::vector<double> t;
  std::vector<double> K;
  std::vector<double> dK;
  /// lich + ricci + grad (requires an on-shell grid).
  std::vector<double> d2K_formula;
  /// lich - int f R m, valid off-shell.
  std::vector<double> d2K_variation;
  /// Centred second difference of K (NaN at the endpoints).
  std::vector<double> d2K_fd;
  std::vector<double> lich;
  std::vector<double> ricci;
  std::vector<double> grad;
  /// Residual certificate of the grid with respect to the background equation.
  double on_shell_residual = 0.0;
};

namespace detail {

// Field of rho-derivatives of the path at one time node.
struct EnergyColumn {
  std::vector<double> a, b, b1;      // W', W'', W'''
  std::vector<double> v, v1, v2;     // Phi_t and its rho-derivatives
  std::vector<double> ptt, ptt1;     // Phi_tt and its rho-derivative
};

class EnergyFields {
 public:
  explicit EnergyFields(const PathGrid& g) : g_(g) {
    const int nr = g.n_rho(), nt = g.n_t();
    pt_.resize(nr, nt);
    ptt_.resize(nr, nt);
    std::vector<double> row(nt);
    for (int i = 0; i < nr; ++i) {
      for (int j = 0; j < nt; ++j) row[j] = g.phi()(i, j);
      const auto d1 = num::differentiate(row, g.h_t(), 1);
      const auto d2 = num::differentiate(row, g.h_t(), 2);
      for (int j = 0; j < nt; ++j) {
        pt_(i, j) = d1[j];
        ptt_(i, j) = d2[j];
      }
    }
  }

  EnergyColumn column(int j) const {
    const int nr = g_.n_rho();
    const double hr = g_.h_rho();
    std::vector<double> p(nr), q(nr), s(nr);
    for (int i = 0; i < nr; ++i) {
      p[i] = g_.phi()(i, j);
      q[i] = pt_(i, j);
      s[i] = ptt_(i, j);
    }
    EnergyColumn c;
    const auto d = [hr](const std::vector<double>& f, int order) { return num::differentiate(f, hr, order); };
    const auto p1 = d(p, 1), p2 = d(p, 2), p3 = d(p, 3);
    const auto q1 = d(q, 1), q2 = d(q, 2);
    const auto s1 = d(s, 1);
    c.a.resize(nr);
    c.b.resize(nr);
    c.b1.resize(nr);
    c.v.resize(nr);
    c.v1.resize(nr);
    c.v2.resize(nr);
    c.ptt = s;
    c.ptt1 = s1;
    for (int i = 0; i < nr; ++i) {
      c.a[i] = g_.u1(i) + g_.Psi(i, j, 1) + p1[i];
      c.b[i] = g_.u2(i) + g_.Psi(i, j, 2) + p2[i];
      c.b1[i] = g_.u3(i) + g_.Psi(i, j, 3) + p3[i];
      c.v[i] = g_.Psi_t(i, 0) + q[i];
      c.v1[i] = g_.Psi_t(i, 1) + q1[i];
      c.v2[i] = g_.Psi_t(i, 2) + q2[i];
    }
    return c;
  }

 private:
  const PathGrid& g_;
  Eigen::MatrixXd pt_, ptt_;
};

// Q = a^{n-1} F' with F' = (n-1) b / a + b' / b - n.
inline double q_value(int n, double a, double b, double b1) {
  return std::pow(a, n - 1) * ((n - 1) * b / a + b1 / b - n);
}

// -int g R m = 2 int g Q' = 2 [g Q] - 2 int g' Q. The integrated-by-parts
// form needs one derivative less of the path than R itself.
inline double weighted_scalar_integral(const std::vector<double>& g, const std::vector<double>& g1,
                                       const std::vector<double>& q, double h) {
  std::vector<double> integrand(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) integrand[i] = g1[i] * q[i];
  return 2.0 * (g.back() * q.back() - g.front() * q.front()) - 2.0 * num::simpson(integrand, h);
}

inline std::vector<double> q_field(int n, const EnergyColumn& c) {
  std::vector<double> q(c.a.size());
  for (std::size_t i = 0; i < q.size(); ++i) q[i] = q_value(n, c.a[i], c.b[i], c.b1[i]);
  return q;
}

// Q on a solution of f b a^{n-1} = s (u')^{n-1} u'', where F = F_u + log s -
// log f. This trades the third derivative of the path for f', which is far
// less sensitive to the boundary rows.
inline std::vector<double> q_field_on_shell(const PathGrid& g, const EnergyColumn& c) {
  const int n = g.n();
  std::vector<double> q(c.a.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double b = c.b[i];
    const double f = c.ptt[i] - c.v1[i] * c.v1[i] / b;
    const double f1 = c.ptt1[i] - 2.0 * c.v1[i] * c.v2[i] / b + c.v1[i] * c.v1[i] * c.b1[i] / (b * b);
    const int ii = static_cast<int>(i);
    const double fu1 = (n - 1) * g.u2(ii) / g.u1(ii) + g.u3(ii) / g.u2(ii) - n;
    q[i] = std::pow(c.a[i], n - 1) * (fu1 - f1 / f);
  }
  return q;
}

inline double first_variation(const PathGrid& g, const EnergyColumn& c) {
  return weighted_scalar_integral(c.v, c.v1, q_field_on_shell(g, c), g.h_rho());
}

}  // namespace detail

inline double link_volume(int n, int k) {
  double fact = 1.0;
  for (int i = 2; i < n; ++i) fact *= i;
  return 2.0 * std::pow(std::numbers::pi, n) / fact / k;
}

/// dK/dt = -int v R m drho at time node j (Simpson in rho after one
/// integration by parts). The scalar curvature is read off the equation, so
/// the value is meaningful on background-reference solutions only.
inline double k_energy_first_variation(const PathGrid& g, int j) {
  if (j < 0 || j >= g.n_t()) throw DomainError("t", "time node out of range");
  const detail::EnergyFields fields(g);
  return detail::first_variation(g, fields.column(j));
}

/// Second-variation terms at time node j. The Ricci term is taken against
/// the background density, so the identity lich + ricci + grad = d2K holds
/// only on grids solving the equation with the background reference.
inline EnergyDecomposition k_energy_second_derivative_terms(const PathGrid& g, const detail::EnergyColumn& c,
                                                            double* variation = nullptr) {
  const int n = g.n(), nr = g.n_rho();
  std::vector<double> lich(nr), ricci(nr), grad(nr), sum(nr), fv(nr), fv1(nr);
  for (int i = 0; i < nr; ++i) {
    const double a = c.a[i], b = c.b[i], b1 = c.b1[i];
    const double an1 = std::pow(a, n - 1);
    const double m = an1 * b;
    const double f = c.ptt[i] - c.v1[i] * c.v1[i] / b;
    const double f1 = c.ptt1[i] - 2.0 * c.v1[i] * c.v2[i] / b + c.v1[i] * c.v1[i] * b1 / (b * b);
    const double h1 = c.v2[i] / b - c.v1[i] * b1 / (b * b);
    // Ricci potential of the background: F_w = (n-1) log u' + log u'' - n rho
    const double u1 = g.u1(i), u2 = g.u2(i), u3 = g.u3(i), u4 = g.u4(i);
    const double fw1 = (n - 1) * u2 / u1 + u3 / u2 - n;
    const double fw2 = (n - 1) * (u3 / u1 - u2 * u2 / (u1 * u1)) + u4 / u2 - u3 * u3 / (u2 * u2);
    const double tr = -(n - 1) * fw1 / a - fw2 / b;
    lich[i] = 2.0 * m * h1 * h1;
    ricci[i] = -2.0 * f * tr * m;
    grad[i] = 2.0 * an1 * f1 * f1 / f;
    sum[i] = lich[i] + ricci[i] + grad[i];
    fv[i] = f;
    fv1[i] = f1;
  }
  const double h = g.h_rho();
  EnergyDecomposition d{num::simpson(lich, h), num::simpson(ricci, h), num::simpson(grad, h), num::simpson(sum, h)};
  if (variation) *variation = d.lich + detail::weighted_scalar_integral(fv, fv1, detail::q_field_on_shell(g, c), h);
  return d;
}

inline EnergyDecomposition k_energy_second_derivative(const PathGrid& g, int j) {
  if (j < 0 || j >= g.n_t()) throw DomainError("t", "time node out of range");
  const detail::EnergyFields fields(g);
  return k_energy_second_derivative_terms(g, fields.column(j));
}

/// Decay exponent of psi - psi(inf) on the outer window of the grid.
inline DecayFit boundary_decay(const PathGrid& g, const RadialPotential& psi) {
  const double r_max = std::exp(0.5 * g.rho().back());
  const auto rs = num::logspace(r_max / 8.0, r_max / 2.0, 32);
  std::vector<double> vals;
  for (double r : rs) vals.push_back(psi.eval(2.0 * std::log(r))[0] - psi.limit_at_infinity());
  return fit_decay_exponent(rs, vals, FitWindow{r_max / 8.0, r_max / 2.0});
}

/// Full energy report along the path. `epsilon` is the value the grid was
/// solved at; the on-shell certificate is checked against the background
/// equation with tolerance `shell_tol`.
inline EnergyReport k_energy_report(const PathGrid& g, double epsilon, double shell_tol = 1e-8) {
  const int n = g.n();
  for (const auto* psi : {&g.psi0(), &g.psi1()}) {
    const auto fit = boundary_decay(g, *psi);
    if (fit.status == FitStatus::poor_fit || (fit.status == FitStatus::ok && fit.exponent >= -(2.0 * n - 4.0)))
      throw HypothesisViolation("boundary data must decay faster than r^{-(2n-4)} for the second variation");
  }
  if (g.upsilon_mode != UpsilonMode::constant)
    throw ValidationError("upsilon_mode", "energy decomposition needs constant upsilon");
  EnergyReport rep;
  rep.n = n;
  rep.k = g.background().k();
  rep.epsilon = epsilon;
  rep.c_link = link_volume(n, rep.k);
  rep.on_shell_residual =
      normalized_residual(g, reduced_residual(g, epsilon, UpsilonMode::constant, RhsReference::background));
  if (!(rep.on_shell_residual <= shell_tol))
    throw NumericalError("grid does not solve the equation with the background reference; decomposition invalid");

  const int nt = g.n_t();
  const double ht = g.h_t();
  rep.t = g.t();
  rep.K.assign(nt, 0.0);
  rep.dK.resize(nt);
  rep.d2K_formula.resize(nt);
  rep.d2K_variation.resize(nt);
  rep.d2K_fd.assign(nt, std::numeric_limits<double>::quiet_NaN());
  rep.lich.resize(nt);
  rep.ricci.resize(nt);
  rep.grad.resize(nt);
  const detail::EnergyFields fields(g);
  for (int j = 0; j < nt; ++j) {
    const auto c = fields.column(j);
    rep.dK[j] = detail::first_variation(g, c);
    double var = 0.0;
    const auto d = k_energy_second_derivative_terms(g, c, &var);
    rep.d2K_formula[j] = d.total;
    rep.d2K_variation[j] = var;
    rep.lich[j] = d.lich;
    rep.ricci[j] = d.ricci;
    rep.grad[j] = d.grad;
  }
  for (int j = 1; j < nt; ++j) rep.K[j] = rep.K[j - 1] + 0.5 * ht * (rep.dK[j - 1] + rep.dK[j]);
  for (int j = 1; j + 1 < nt; ++j) rep.d2K_fd[j] = (rep.K[j + 1] - 2.0 * rep.K[j] + rep.K[j - 1]) / (ht * ht);
  return rep;
}

struct ConvexityEntry {
  double epsilon = 0.0;
  double min_d2K = 0.0;
  double t_at_min = 0.0;
  bool pass = false;
};

struct ConvexityAudit {
  bool pass = false;
  double tol = 0.0;
  RicciSign background_sign = RicciSign::zero;
  std::vector<ConvexityEntry> entries;
};

/// Checks d2K >= -tol at interior times for every grid of an epsilon sweep.
/// Refuses when the background Ricci form is not seminegative.
inline ConvexityAudit convexity_audit(const std::vector<const PathGrid*>& grids, const std::vector<double>& epsilons,
                                      double tol = 1e-6) {
  if (grids.empty() || grids.size() != epsilons.size())
    throw ValidationError("sweep", "need one epsilon per grid");
  const auto& bg = grids.front()->background();
  const auto scan = ricci_sign_scan(bg, default_tau_grid(bg, 200));
  if (scan.sign == RicciSign::positive_semidefinite || scan.sign == RicciSign::mixed) {
    const auto& w = *scan.positive;
    throw HypothesisViolation("background Ricci form is " + std::string(to_string(scan.sign)) +
                              "; positive eigenvalue " + std::to_string(w.value) + " at tau = " +
                              std::to_string(w.tau));
  }
  ConvexityAudit audit;
  audit.tol = tol;
  audit.background_sign = scan.sign;
  audit.pass = true;
  for (std::size_t s = 0; s < grids.size(); ++s) {
    if (!grids[s]->same_discretisation(*grids.front()))
      throw ValidationError("sweep", "grids must share the discretisation");
    const auto rep = k_energy_report(*grids[s], epsilons[s]);
    ConvexityEntry e;
    e.epsilon = epsilons[s];
    e.min_d2K = INFINITY;
    for (std::size_t j = 1; j + 1 < rep.t.size(); ++j)
      if (rep.d2K_formula[j] < e.min_d2K) {
        e.min_d2K = rep.d2K_formula[j];
        e.t_at_min = rep.t[j];
      }
    e.pass = e.min_d2K >= -tol;
    audit.pass = audit.pass && e.pass;
    audit.entries.push_back(e);
  }
  return audit;
}

}  // namespace alegeo
