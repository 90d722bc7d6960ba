#pragma once

// Decay-exponent fits, weighted sup norms and the ADM mass of radial
// profiles.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "alegeo/calabi_geometry.hpp"
#include "alegeo/errors.hpp"
#include "alegeo/numerics.hpp"

namespace alegeo {

enum class FitStatus { ok, below_floor, poor_fit };

inline const char* to_string(FitStatus s) {
  switch (s) {
    case FitStatus::ok: return "ok";
    case FitStatus::below_floor: return "below_floor";
    case FitStatus::poor_fit: return "poor_fit";
  }
  return "?";
}

struct DecayFit {
  double r_lo = 0.0;
  double r_hi = 0.0;
  FitStatus status = FitStatus::below_floor;
  /// Slope of log|value| against log r; NaN unless status is ok.
  double exponent = std::numeric_limits<double>::quiet_NaN();
  double log_amplitude = std::numeric_limits<double>::quiet_NaN();
  double rms = std::numeric_limits<double>::quiet_NaN();
  std::size_t samples_used = 0;
  std::optional<double> predicted;
  /// predicted - exponent; positive when the data decays faster than predicted.
  std::optional<double> margin;
};

struct FitWindow {
  double r_lo = 0.0;
  double r_hi = 0.0;
};

inline constexpr std::size_t kMinFitSamples = 8;
inline constexpr double kMaxFitRms = 0.1;

/// Default window [r_max / 8, r_max / 2].
inline FitWindow default_fit_window(std::span<const double> r) {
  const double r_max = *std::max_element(r.begin(), r.end());
  return {r_max / 8.0, r_max / 2.0};
}

/// Least-squares slope of log|value| versus log r over a window. Values with
/// |value| <= floor are ignored; if fewer than the minimum count remain the
/// result is marked below_floor.
inline DecayFit fit_decay_exponent(std::span<const double> r, std::span<const double> value,
                                   std::optional<FitWindow> window = std::nullopt,
                                   std::optional<double> predicted = std::nullopt, double floor = 1e-300) {
  if (r.size() != value.size()) throw ValidationError("samples", "r and value lengths differ");
  if (r.empty()) throw ValidationError("samples", "no samples");
  for (double x : r)
    if (!(x > 0.0)) throw ValidationError("samples", "radii must be positive");
  const FitWindow w = window.value_or(default_fit_window(r));
  if (!(w.r_lo > 0.0 && w.r_hi > w.r_lo)) throw ValidationError("window", "degenerate fit window");

  DecayFit fit;
  fit.r_lo = w.r_lo;
  fit.r_hi = w.r_hi;
  fit.predicted = predicted;
  std::size_t in_window = 0;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (r[i] < w.r_lo || r[i] > w.r_hi) continue;
    ++in_window;
    if (!(std::abs(value[i]) > floor)) continue;
    xs.push_back(std::log(r[i]));
    ys.push_back(std::log(std::abs(value[i])));
  }
  if (in_window < kMinFitSamples) throw ValidationError("window", "fewer than 8 sample radii in the fit window");
  fit.samples_used = xs.size();
  if (xs.size() < kMinFitSamples) return fit;

  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw ValidationError("window", "fit window spans a single radius");
  const double slope = sxy / sxx;
  const double icpt = my - slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double e = ys[i] - (icpt + slope * xs[i]);
    ss += e * e;
  }
  fit.rms = std::sqrt(ss / n);
  fit.status = fit.rms < kMaxFitRms ? FitStatus::ok : FitStatus::poor_fit;
  if (fit.status == FitStatus::ok) {
    fit.exponent = slope;
    fit.log_amplitude = icpt;
    if (predicted) fit.margin = *predicted - slope;
  }
  return fit;
}

struct WeightedNorm {
  double value = 0.0;
  /// Radius at which the supremum is attained.
  double r_at_sup = 0.0;
};

/// sup |f| r^{-s}.
inline WeightedNorm weighted_norm(std::span<const double> r, std::span<const double> f, double s) {
  if (r.size() != f.size()) throw ValidationError("samples", "r and field lengths differ");
  WeightedNorm out;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double v = std::abs(f[i]) * std::pow(r[i], -s);
    if (v > out.value || i == 0) out = {v, r[i]};
  }
  return out;
}

// ---------------------------------------------------------------------------
// ADM mass

namespace detail {

// Metric of the form A (Euclidean) + (B - A) (complex radial line), with
// A = tau e^{-rho}, B = phi e^{-rho}. The boundary flux
// r^{2n-1} [ -(2n-1) A_r - D_r + (2n-2) D / r ], D = B - A, is normalised so
// that it vanishes for the flat metric and equals the leading coefficient
// of the r^{2-2n} correction up to a fixed positive factor.
inline double mass_flux(const RadialProfile& p, double rho) {
  const int n = p.n();
  const double tau = p.tau_at_rho(rho);
  const auto v = p.at(tau);
  const double e = std::exp(-rho);
  const double r = std::exp(0.5 * rho);
  const double d_rho_a = (v.phi - tau) * e;
  // phi phi' - 2 phi + tau arranged to keep the O(tau) terms apart
  const double d_rho_d = ((v.phi - tau) * (v.dphi - 2.0) + tau * (v.dphi - 1.0)) * e;
  const double d = (v.phi - tau) * e;
  const double a_r = 2.0 / r * d_rho_a;
  const double d_r = 2.0 / r * d_rho_d;
  return std::pow(r, 2 * n - 1) * (-(2.0 * n - 1.0) * a_r - d_r + (2.0 * n - 2.0) * d / r);
}

}  // namespace detail

struct MassReport {
  double mass = 0.0;
  double flux_inner = 0.0;
  double flux_outer = 0.0;
  double r_inner = 0.0;
  double r_outer = 0.0;
  DecayFit decay;
};

/// Radial ADM flux evaluated at r_max / 2 and r_max and Richardson-combined
/// assuming an r^{-2} error. Refuses profiles whose metric deviation decays
/// slower than r^{-(n-1)}.
inline MassReport adm_mass(const RadialProfile& p, double r_max = 0.0) {
  if (r_max <= 0.0) {
    r_max = std::isfinite(p.tau_max()) ? std::exp(0.5 * p.rho(p.tau_max()))
                                       : 300.0 * std::sqrt(std::max(1.0, p.tau_min()));
  }
  MassReport rep;
  std::vector<double> rs = num::logspace(r_max / 8.0, r_max / 2.0, 24), dev;
  for (double r : rs) {
    const double tau = p.tau_at_rho(2.0 * std::log(r));
    const auto m = metric_deviation(p, tau);
    dev.push_back(std::max(m.base, m.fiber));
  }
  rep.decay = fit_decay_exponent(rs, dev, FitWindow{r_max / 8.0, r_max / 2.0}, -(p.n() - 1.0), 1e-14);
  if (rep.decay.status == FitStatus::poor_fit ||
      (rep.decay.status == FitStatus::ok && rep.decay.exponent > -(p.n() - 1.0)))
    throw HypothesisViolation("metric deviation decays too slowly for a well-defined ADM mass");
  rep.r_outer = r_max;
  rep.r_inner = r_max / 2.0;
  rep.flux_outer = detail::mass_flux(p, 2.0 * std::log(rep.r_outer));
  rep.flux_inner = detail::mass_flux(p, 2.0 * std::log(rep.r_inner));
  const double w_out = rep.r_outer * rep.r_outer, w_in = rep.r_inner * rep.r_inner;
  rep.mass = (w_out * rep.flux_outer - w_in * rep.flux_inner) / (w_out - w_in);
  return rep;
}

}  // namespace alegeo
