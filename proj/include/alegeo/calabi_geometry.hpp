#pragma once

// U(n)-invariant Kahler metrics on O(-k) -> CP^{n-1} in momentum-profile form.
//
// A metric is encoded by its Kahler potential u(rho), rho = log|z|^2 on
// C^n / Z_k, through the momentum coordinate tau = u'(rho) and the profile
// phi(tau) = u''(rho). With respect to the Euclidean metric the metric has
// eigenvalues tau e^{-rho} (n-1 times, "base") and phi(tau) e^{-rho}
// ("fiber"). The Ricci potential is F = (n-1) log u' + log u'' - n rho and
// the Ricci eigenvalues are -F' e^{-rho}, -F'' e^{-rho}. Scalar curvature uses
// the Riemannian trace convention R = 2 tr_omega Ric.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "alegeo/errors.hpp"
#include "alegeo/numerics.hpp"

namespace alegeo {

/// phi, d phi / d tau, d^2 phi / d tau^2.
struct ProfileValue {
  double phi = 0.0;
  double dphi = 0.0;
  double d2phi = 0.0;
};

/// rho-derivatives u', u'', u''', u'''' of the Kahler potential.
struct PotentialDerivs {
  double d1 = 0.0;
  double d2 = 0.0;
  double d3 = 0.0;
  double d4 = 0.0;
};

enum class ProfileForm { lebrun, samples, custom, perturbed };

/// Compactly supported perturbation of the Kahler potential,
/// chi(rho) = amplitude * (1 - x^2)^5 with x = (rho - center) / half_width.
struct PotentialBump {
  double amplitude = 0.0;
  double center = 0.0;
  double half_width = 1.0;

  /// chi and its first four rho-derivatives.
  std::array<double, 5> eval(double rho) const {
    const double x = (rho - center) / half_width;
    if (std::abs(x) >= 1.0) return {0, 0, 0, 0, 0};
    // (1 - x^2)^5 expanded: 1 - 5x^2 + 10x^4 - 10x^6 + 5x^8 - x^10
    static constexpr std::array<double, 11> c = {1, 0, -5, 0, 10, 0, -10, 0, 5, 0, -1};
    std::array<double, 5> out{};
    std::array<double, 11> p = c;
    double scale = amplitude;
    for (int d = 0; d < 5; ++d) {
      double v = 0.0;
      for (int m = 10; m >= 0; --m) v = v * x + p[m];
      out[d] = scale * v;
      for (int m = 0; m < 10; ++m) p[m] = (m + 1) * p[m + 1];
      p[10] = 0.0;
      scale /= half_width;
    }
    return out;
  }
};

namespace detail {

class ProfileModel {
 public:
  virtual ~ProfileModel() = default;
  virtual ProfileValue eval(double tau) const = 0;
  /// rho(tau) - log(tau); kept separate so metric deviations stay accurate at
  /// large tau.
  virtual double log_ratio(double tau) const = 0;
  virtual double tau_upper() const { return std::numeric_limits<double>::infinity(); }
  virtual double tau_at_rho(double rho, double tau_min) const {
    // rho(tau) is increasing with d rho / d x = (tau - tau_min) / phi in
    // x = log(tau - tau_min); solve by bracketed Newton in x.
    const double base = tau_min;
    auto rho_of_x = [&](double x) {
      const double tau = base + std::exp(x);
      return std::log(tau) + log_ratio(tau);
    };
    double lo = std::min(rho, 0.0) - 1.0;
    double hi = std::max(rho, 0.0) + 1.0;
    if (base > 0.0) lo = std::min(lo, std::log(base) + rho * 8.0 - 10.0);
    int guard = 0;
    while (rho_of_x(lo) > rho && guard++ < 200) lo = 2.0 * lo - 1.0;
    while (rho_of_x(hi) < rho && guard++ < 400) hi = 2.0 * hi + 1.0;
    const double x_hi_cap = std::log(tau_upper() - base);
    if (std::isfinite(x_hi_cap)) hi = std::min(hi, x_hi_cap);
    auto f = [&](double x) {
      const double tau = base + std::exp(x);
      const double phi = eval(tau).phi;
      return std::make_pair(rho_of_x(x) - rho, (tau - base) / phi);
    };
    std::uintmax_t iters = 200;
    const double guess = std::clamp(rho - std::log1p(base), lo, hi);
    const double x = boost::math::tools::newton_raphson_iterate(f, guess, lo, hi, 50, iters);
    return base + std::exp(x);
  }
};

/// phi = tau + A + B / tau. Covers the LeBrun family and the flat cone.
class QuadraticModel final : public ProfileModel {
 public:
  QuadraticModel(double tau_min, double a, double b) : tau_min_(tau_min), a_(a), b_(b) {
    if (tau_min_ > 0.0) {
      root_lo_ = b_ / tau_min_;
    }
  }
  ProfileValue eval(double tau) const override {
    return {tau + a_ + b_ / tau, 1.0 - b_ / (tau * tau), 2.0 * b_ / (tau * tau * tau)};
  }
  double log_ratio(double tau) const override {
    if (tau_min_ == 0.0) return 0.0;
    // tau^2 + A tau + B = (tau - tau_min)(tau - root_lo)
    const double a = tau_min_, c = root_lo_;
    return (a * std::log1p(-a / tau) - c * std::log1p(-c / tau)) / (a - c);
  }
  double tau_at_rho(double rho, double tau_min) const override {
    if (tau_min_ == 0.0) return std::exp(rho);
    if (root_lo_ == 0.0) return tau_min_ + std::exp(rho);
    if (root_lo_ == -tau_min_) return std::sqrt(tau_min_ * tau_min_ + std::exp(2.0 * rho));
    return ProfileModel::tau_at_rho(rho, tau_min);
  }
  double a() const { return a_; }
  double b() const { return b_; }

 private:
  double tau_min_;
  double a_;
  double b_;
  double root_lo_ = 0.0;
};

/// Caller-provided closed form; rho anchored at infinity by quadrature.
class CustomModel final : public ProfileModel {
 public:
  explicit CustomModel(std::function<ProfileValue(double)> f) : f_(std::move(f)) {}
  ProfileValue eval(double tau) const override { return f_(tau); }
  double log_ratio(double tau) const override {
    // rho - log tau = int_tau^inf (1/s - 1/phi) ds, divergent at a zero of phi
    if (!(f_(tau).phi > 0.0)) return -std::numeric_limits<double>::infinity();
    boost::math::quadrature::exp_sinh<double> integrator;
    auto g = [this](double s) { return 1.0 / s - 1.0 / f_(s).phi; };
    return integrator.integrate(g, tau, std::numeric_limits<double>::infinity());
  }

 private:
  std::function<ProfileValue(double)> f_;
};

/// Monotone cubic interpolant of samples; rho anchored at the last sample,
/// rho(tau_max) = log(tau_max).
class SampledModel final : public ProfileModel {
 public:
  SampledModel(std::vector<double> tau, std::vector<double> phi)
      : raw_tau_(tau), raw_phi_(phi), interp_(std::move(tau), std::move(phi)) {
    const auto& x = interp_.knots();
    tail_.assign(x.size(), 0.0);
    for (std::size_t i = x.size() - 1; i-- > 1;) tail_[i] = tail_[i + 1] + inverse_integral(x[i], x[i + 1]);
  }
  ProfileValue eval(double tau) const override {
    auto v = interp_.eval(tau);
    return {v[0], v[1], v[2]};
  }
  double log_ratio(double tau) const override {
    const auto& x = interp_.knots();
    const double top = x.back();
    std::size_t i = static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), tau) - x.begin());
    i = std::clamp<std::size_t>(i, 1, x.size() - 1);
    const double rest = (i < x.size() - 1 ? tail_[i] : 0.0) + inverse_integral(tau, x[i]);
    return std::log(top) - rest - std::log(tau);
  }
  double tau_upper() const override { return interp_.upper(); }
  const std::vector<double>& sample_tau() const { return raw_tau_; }
  const std::vector<double>& sample_phi() const { return raw_phi_; }

 private:
  double inverse_integral(double a, double b) const {
    if (b <= a) return 0.0;
    auto g = [this](double s) { return 1.0 / interp_.eval(s)[0]; };
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(g, a, b, 15, 1e-13);
  }
  std::vector<double> raw_tau_, raw_phi_;
  num::MonotoneCubic interp_;
  std::vector<double> tail_;
};

}  // namespace detail

/// Immutable handle to a U(n)-invariant momentum profile.
class RadialProfile {
 public:
  int n() const { return n_; }
  int k() const { return k_; }
  double tau_min() const { return tau_min_; }
  double tau_max() const { return model_->tau_upper(); }
  ProfileForm form() const { return form_; }
  const std::string& label() const { return label_; }

  /// Smallest tau at which curvature may be queried.
  double tau_floor() const { return tau_min_ + delta_; }
  double delta() const { return delta_; }

  ProfileValue at(double tau) const {
    check_domain(tau, tau_min_);
    if (form_ == ProfileForm::perturbed) {
      // the bump has compact support in rho, so the core is untouched
      if (tau <= tau_min_) return base_->at(tau);
      return perturbed_eval(tau).value;
    }
    return model_->eval(tau);
  }

  /// Calabi variable rho(tau), anchored so the metric tends to the flat one.
  double rho(double tau) const {
    check_domain(tau, tau_min_ + 0.0);
    if (tau <= tau_min_) throw DomainError("tau", "rho diverges at the zero section");
    if (form_ == ProfileForm::perturbed) return perturbed_eval(tau).rho;
    return std::log(tau) + model_->log_ratio(tau);
  }

  /// rho(tau) - log(tau).
  double log_ratio(double tau) const {
    if (form_ == ProfileForm::perturbed) return rho(tau) - std::log(tau);
    check_domain(tau, tau_min_);
    return model_->log_ratio(tau);
  }

  double tau_at_rho(double rho_value) const {
    if (form_ == ProfileForm::perturbed) return perturbed_tau(rho_value);
    return model_->tau_at_rho(rho_value, tau_min_);
  }

  /// Derivatives of the Kahler potential at a given rho.
  PotentialDerivs potential(double rho_value) const {
    if (form_ == ProfileForm::perturbed) {
      const double tb = base_->tau_at_rho(rho_value);
      const auto b = base_->model_->eval(tb);
      const auto chi = bump_.eval(rho_value);
      return {tb + chi[1], b.phi + chi[2], b.phi * b.dphi + chi[3],
              b.phi * (b.dphi * b.dphi + b.phi * b.d2phi) + chi[4]};
    }
    const double tau = tau_at_rho(rho_value);
    const auto v = model_->eval(tau);
    return {tau, v.phi, v.phi * v.dphi, v.phi * (v.dphi * v.dphi + v.phi * v.d2phi)};
  }

  /// Coefficients (A, B) of phi = tau + A + B / tau for closed-form profiles.
  std::optional<std::pair<double, double>> closed_form() const {
    if (auto* q = dynamic_cast<const detail::QuadraticModel*>(model_.get())) return std::make_pair(q->a(), q->b());
    return std::nullopt;
  }
  std::optional<std::pair<std::vector<double>, std::vector<double>>> samples() const {
    if (auto* s = dynamic_cast<const detail::SampledModel*>(model_.get()))
      return std::make_pair(s->sample_tau(), s->sample_phi());
    return std::nullopt;
  }

  friend RadialProfile lebrun_profile(int k, double tau_min, int n);
  friend RadialProfile flat_profile(int n, int k);
  friend RadialProfile custom_profile(int n, int k, double tau_min, std::function<ProfileValue(double)> f,
                                      std::string label);
  friend RadialProfile sampled_profile(int n, int k, std::vector<double> tau, std::vector<double> phi);
  friend RadialProfile perturb_potential(const RadialProfile& base, const PotentialBump& bump);

 private:
  RadialProfile(int n, int k, double tau_min, ProfileForm form, std::shared_ptr<const detail::ProfileModel> model,
                std::string label)
      : n_(n), k_(k), tau_min_(tau_min), form_(form), model_(std::move(model)), label_(std::move(label)) {}

  void check_domain(double tau, double lo) const {
    if (!(tau >= lo) || !(tau <= tau_max()) || !std::isfinite(tau))
      throw DomainError("tau", "value " + std::to_string(tau) + " outside profile domain");
  }

  struct PerturbedPoint {
    ProfileValue value;
    double rho;
  };

  // tau~(rho) = tau(rho) + chi'(rho) is increasing; invert it by bisection-safe
  // root finding and push derivatives through the chain rule.
  double perturbed_tau(double rho_value) const {
    return base_->tau_at_rho(rho_value) + bump_.eval(rho_value)[1];
  }
  PerturbedPoint perturbed_eval(double tau) const {
    auto resid = [&](double r) { return perturbed_tau(r) - tau; };
    const double r0 = base_->rho(tau);
    double lo = std::min(r0, bump_.center - bump_.half_width) - 1.0;
    double hi = std::max(r0, bump_.center + bump_.half_width) + 1.0;
    while (resid(lo) > 0) lo -= 2.0;
    while (resid(hi) < 0) hi += 2.0;
    std::uintmax_t iters = 200;
    auto tol = boost::math::tools::eps_tolerance<double>(52);
    auto [a, b] = boost::math::tools::toms748_solve(resid, lo, hi, tol, iters);
    const double r = 0.5 * (a + b);
    const auto u = potential(r);
    ProfileValue v;
    v.phi = u.d2;
    v.dphi = u.d3 / u.d2;
    v.d2phi = (u.d4 * u.d2 - u.d3 * u.d3) / (u.d2 * u.d2 * u.d2);
    return {v, r};
  }

  int n_;
  int k_;
  double tau_min_;
  ProfileForm form_;
  std::shared_ptr<const detail::ProfileModel> model_;
  std::string label_;
  double delta_ = 1e-6;
  std::shared_ptr<const RadialProfile> base_;
  PotentialBump bump_;
};

namespace detail {
inline void check_nk(int n, int k) {
  if (n < 2) throw ValidationError("n", "complex dimension must be >= 2");
  if (k < 1) throw ValidationError("k", "line-bundle twist must be >= 1");
}
}  // namespace detail

/// Scalar-flat LeBrun profile phi = tau + A + B/tau on O(-k) -> CP^1 with
/// phi(tau_min) = 0 and phi'(tau_min) = k.
inline RadialProfile lebrun_profile(int k, double tau_min, int n = 2) {
  if (n != 2) throw ValidationError("n", "the LeBrun closed form exists only for n = 2");
  detail::check_nk(n, k);
  if (!(tau_min > 0.0)) throw ValidationError("tau_min", "must be positive");
  const double a = (k - 2) * tau_min;
  const double b = (1 - k) * tau_min * tau_min;
  return RadialProfile(n, k, tau_min, ProfileForm::lebrun, std::make_shared<detail::QuadraticModel>(tau_min, a, b),
                       "lebrun");
}

/// Flat cone C^n / Z_k: phi(tau) = tau.
inline RadialProfile flat_profile(int n, int k = 1) {
  detail::check_nk(n, k);
  return RadialProfile(n, k, 0.0, ProfileForm::lebrun, std::make_shared<detail::QuadraticModel>(0.0, 0.0, 0.0),
                       "flat");
}

inline RadialProfile custom_profile(int n, int k, double tau_min, std::function<ProfileValue(double)> f,
                                    std::string label = "custom") {
  detail::check_nk(n, k);
  if (!(tau_min >= 0.0)) throw ValidationError("tau_min", "must be non-negative");
  if (tau_min > 0.0) {
    const auto v = f(tau_min);
    if (std::abs(v.phi) > 1e-8) throw ValidationError("phi", "must vanish at tau_min");
    if (std::abs(v.dphi - k) > 1e-8) throw ValidationError("phi", "phi'(tau_min) must equal k");
  }
  for (double tau : num::logspace(std::max(tau_min, 1e-6) * (1 + 1e-6) + 1e-9, 1e6, 200)) {
    if (!(f(tau).phi > 0.0)) throw ValidationError("phi", "profile must be positive above tau_min");
  }
  if (std::abs(f(1e8).phi / 1e8 - 1.0) > 1e-3) throw ValidationError("phi", "phi(tau)/tau must tend to 1");
  return RadialProfile(n, k, tau_min, ProfileForm::custom, std::make_shared<detail::CustomModel>(std::move(f)),
                       std::move(label));
}

/// Profile from samples (tau_i, phi_i); the first sample is tau_min.
inline RadialProfile sampled_profile(int n, int k, std::vector<double> tau, std::vector<double> phi) {
  detail::check_nk(n, k);
  if (tau.size() < 4 || tau.size() != phi.size()) throw ValidationError("samples", "need >= 4 (tau, phi) pairs");
  const double tau_min = tau.front();
  if (!(tau_min >= 0.0)) throw ValidationError("samples", "tau must be non-negative");
  if (tau_min > 0.0 && std::abs(phi.front()) > 1e-8)
    throw ValidationError("samples", "phi must vanish at tau_min");
  for (std::size_t i = 1; i < phi.size(); ++i)
    if (!(phi[i] > 0.0)) throw ValidationError("samples", "phi must be positive above tau_min");
  if (std::abs(phi.back() / tau.back() - 1.0) > 0.1)
    throw ValidationError("samples", "phi(tau)/tau must be close to 1 at the last sample");
  return RadialProfile(n, k, tau_min, ProfileForm::samples,
                       std::make_shared<detail::SampledModel>(std::move(tau), std::move(phi)), "samples");
}

/// The profile of u + chi for a compactly supported chi.
inline RadialProfile perturb_potential(const RadialProfile& base, const PotentialBump& bump) {
  if (base.form() == ProfileForm::perturbed) throw ValidationError("profile", "nested perturbations unsupported");
  if (!(bump.half_width > 0.0)) throw ValidationError("bump", "half_width must be positive");
  RadialProfile out = base;
  out.form_ = ProfileForm::perturbed;
  out.label_ = base.label() + "+bump";
  out.base_ = std::make_shared<const RadialProfile>(base);
  out.bump_ = bump;
  for (double r : num::linspace(bump.center - bump.half_width, bump.center + bump.half_width, 401)) {
    const auto u = out.potential(r);
    if (!(u.d1 > 0.0 && u.d2 > 0.0)) throw ValidationError("bump", "perturbed metric is not positive");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Curvature

struct MetricEigenvalues {
  double base = 0.0;
  double fiber = 0.0;
};

/// Ricci eigenvalues relative to the Euclidean metric (multiplicities n-1, 1).
struct RicciEigenvalues {
  double base = 0.0;
  double fiber = 0.0;
};

struct CurvatureSample {
  double tau = 0.0;
  double rho = 0.0;
  double r = 0.0;
  double lambda_base = 0.0;
  double lambda_fiber = 0.0;
  double ric_base = 0.0;
  double ric_fiber = 0.0;
  double scal = 0.0;
};

namespace detail {
inline void check_curvature_domain(const RadialProfile& p, double tau) {
  if (!(tau >= p.tau_floor())) throw DomainError("tau", "curvature queries need tau >= tau_min + delta");
}
// F' and F'' (rho-derivatives of the Ricci potential) from the profile.
inline std::pair<double, double> ricci_potential_derivs(int n, double tau, const ProfileValue& v) {
  const double f1 = (n - 1) * v.phi / tau + v.dphi - n;
  const double f2 = v.phi * ((n - 1) * (v.dphi / tau - v.phi / (tau * tau)) + v.d2phi);
  return {f1, f2};
}
}  // namespace detail

inline MetricEigenvalues metric_eigenvalues(const RadialProfile& p, double tau) {
  if (!(tau > p.tau_min())) throw DomainError("tau", "metric eigenvalues need tau > tau_min");
  const double lr = p.log_ratio(tau);
  const double scale = std::exp(-lr);  // tau e^{-rho}
  return {scale, p.at(tau).phi / tau * scale};
}

/// |lambda - 1| for both eigenvalues, computed without cancellation.
inline MetricEigenvalues metric_deviation(const RadialProfile& p, double tau) {
  const double lr = p.log_ratio(tau);
  const auto v = p.at(tau);
  const double base = std::expm1(-lr);
  // phi/tau * e^{-lr} - 1 = (phi - tau)/tau * e^{-lr} + (e^{-lr} - 1)
  const double fiber = (v.phi - tau) / tau * std::exp(-lr) + base;
  return {std::abs(base), std::abs(fiber)};
}

inline RicciEigenvalues ricci_eigenvalues(const RadialProfile& p, double tau) {
  detail::check_curvature_domain(p, tau);
  const auto v = p.at(tau);
  const auto [f1, f2] = detail::ricci_potential_derivs(p.n(), tau, v);
  const double e = std::exp(-p.rho(tau));
  return {-f1 * e, -f2 * e};
}

/// Ricci eigenvalues divided by the matching metric eigenvalues, i.e. the
/// eigenvalues of the Ricci endomorphism.
inline RicciEigenvalues ricci_endomorphism(const RadialProfile& p, double tau) {
  detail::check_curvature_domain(p, tau);
  const auto v = p.at(tau);
  const auto [f1, f2] = detail::ricci_potential_derivs(p.n(), tau, v);
  return {-f1 / tau, -f2 / v.phi};
}

/// R = 2 [ n(n-1)/tau - (tau^{n-1} phi)'' / tau^{n-1} ].
inline double scalar_curvature(const RadialProfile& p, double tau) {
  detail::check_curvature_domain(p, tau);
  const auto v = p.at(tau);
  const int n = p.n();
  const double lap = v.d2phi + 2.0 * (n - 1) * v.dphi / tau + (n - 1.0) * (n - 2.0) * v.phi / (tau * tau);
  return 2.0 * (n * (n - 1.0) / tau - lap);
}

inline CurvatureSample curvature_sample(const RadialProfile& p, double tau) {
  CurvatureSample s;
  s.tau = tau;
  s.rho = p.rho(tau);
  s.r = std::exp(0.5 * s.rho);
  const auto m = metric_eigenvalues(p, tau);
  const auto ric = ricci_eigenvalues(p, tau);
  s.lambda_base = m.base;
  s.lambda_fiber = m.fiber;
  s.ric_base = ric.base;
  s.ric_fiber = ric.fiber;
  s.scal = scalar_curvature(p, tau);
  return s;
}

/// Log-spaced grid on [tau_min + delta, tau_hi].
inline std::vector<double> default_tau_grid(const RadialProfile& p, std::size_t count = 200, double tau_hi = 0.0) {
  const double lo = p.tau_min() > 0.0 ? p.tau_min() * (1.0 + 1e-6) : 1e-3;
  double hi = tau_hi > 0.0 ? tau_hi : 1e3 * std::max(1.0, p.tau_min());
  hi = std::min(hi, p.tau_max());
  return num::logspace(std::max(lo, p.tau_floor()), hi, count);
}

enum class RicciSign { positive_semidefinite, negative_semidefinite, mixed, zero };

inline const char* to_string(RicciSign s) {
  switch (s) {
    case RicciSign::positive_semidefinite: return "positive-semidefinite";
    case RicciSign::negative_semidefinite: return "negative-semidefinite";
    case RicciSign::mixed: return "mixed";
    case RicciSign::zero: return "zero";
  }
  return "?";
}

struct RicciWitness {
  double tau = 0.0;
  double value = 0.0;
  bool fiber = false;
};

struct RicciScan {
  RicciSign sign = RicciSign::zero;
  std::optional<RicciWitness> positive;
  std::optional<RicciWitness> negative;
  double max_abs = 0.0;
  double zero_tol = 0.0;
  std::vector<CurvatureSample> samples;
};

/// Classify the Ricci endomorphism over a tau grid. Witnesses are the
/// largest-magnitude eigenvalue of each realised sign.
inline RicciScan ricci_sign_scan(const RadialProfile& p, const std::vector<double>& tau_grid,
                                 double zero_tol = 1e-8) {
  RicciScan scan;
  scan.zero_tol = zero_tol;
  auto consider = [&](double tau, double value, bool fiber) {
    scan.max_abs = std::max(scan.max_abs, std::abs(value));
    if (value > zero_tol && (!scan.positive || value > scan.positive->value)) scan.positive = {tau, value, fiber};
    if (value < -zero_tol && (!scan.negative || value < scan.negative->value)) scan.negative = {tau, value, fiber};
  };
  for (double tau : tau_grid) {
    const auto e = ricci_endomorphism(p, tau);
    consider(tau, e.base, false);
    consider(tau, e.fiber, true);
    scan.samples.push_back(curvature_sample(p, tau));
  }
  if (scan.positive && scan.negative) scan.sign = RicciSign::mixed;
  else if (scan.positive) scan.sign = RicciSign::positive_semidefinite;
  else if (scan.negative) scan.sign = RicciSign::negative_semidefinite;
  else scan.sign = RicciSign::zero;
  return scan;
}

/// Integrals of (Ric / 2 pi)^{n-1} over the zero section D_0 and over a fibre
/// divisor D_f, read off from the boundary values of F'.
struct DivisorFluxes {
  double zero_section = 0.0;
  double fiber_divisor = 0.0;
};

inline DivisorFluxes ricci_divisor_fluxes(const RadialProfile& p) {
  if (!(p.tau_min() > 0.0)) throw ValidationError("tau_min", "the cone has no zero section");
  const int n = p.n();
  const auto inner = detail::ricci_potential_derivs(n, p.tau_min(), p.at(p.tau_min())).first;
  const double tau_far = std::isfinite(p.tau_max()) ? p.tau_max() : 1e9 * std::max(1.0, p.tau_min());
  const auto outer = detail::ricci_potential_derivs(n, tau_far, p.at(tau_far)).first;
  const double d0 = std::pow(-inner, n - 1);
  const double df = (std::pow(-outer, n - 1) - std::pow(-inner, n - 1)) / p.k();
  return {d0, df};
}

}  // namespace alegeo
