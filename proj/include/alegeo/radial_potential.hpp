#pragma once

// Closed-form U(n)-invariant boundary potentials psi(rho) with exact
// derivatives up to fourth order.

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "alegeo/errors.hpp"

namespace alegeo {

enum class PotentialKind { zero, constant, exponential, logistic };

inline const char* to_string(PotentialKind k) {
  switch (k) {
    case PotentialKind::zero: return "zero";
    case PotentialKind::constant: return "constant";
    case PotentialKind::exponential: return "exp";
    case PotentialKind::logistic: return "logistic";
  }
  return "?";
}

/// zero:        0 (plus offset in every case)
/// constant:    amplitude
/// exponential: amplitude * exp(-rate (rho - center))
/// logistic:    amplitude / (1 + exp(rate (rho - center)))
///
/// Both decaying kinds behave like r^{-2 rate} for large r = e^{rho/2}.
struct RadialPotential {
  PotentialKind kind = PotentialKind::zero;
  double amplitude = 0.0;
  double rate = 0.0;
  double center = 0.0;
  /// Constant added on top of the shape above.
  double offset = 0.0;

  /// psi and its first four rho-derivatives.
  std::array<double, 5> eval(double rho) const {
    std::array<double, 5> d{};
    switch (kind) {
      case PotentialKind::zero:
        break;
      case PotentialKind::constant:
        d[0] = amplitude;
        break;
      case PotentialKind::exponential: {
        double v = amplitude * std::exp(-rate * (rho - center));
        for (auto& x : d) {
          x = v;
          v *= -rate;
        }
        break;
      }
      case PotentialKind::logistic: {
        // s = 1/(1+e^x) obeys ds/dx = s^2 - s; carry each derivative as a
        // polynomial in s.
        const double x = rate * (rho - center);
        const double s = x > 0 ? std::exp(-x) / (1.0 + std::exp(-x)) : 1.0 / (1.0 + std::exp(x));
        std::array<double, 6> poly{0, 1, 0, 0, 0, 0};
        double scale = amplitude;
        for (int m = 0; m < 5; ++m) {
          double v = 0.0;
          for (int p = 5; p >= 0; --p) v = v * s + poly[p];
          d[m] = scale * v;
          std::array<double, 6> next{};
          for (int p = 1; p < 6; ++p) {
            const double c = p * poly[p];  // coefficient of s^{p-1} in poly'
            if (c == 0.0) continue;
            if (p + 1 < 6) next[p + 1] += c;
            next[p] -= c;
          }
          poly = next;
          scale *= rate;
        }
        break;
      }
    }
    d[0] += offset;
    return d;
  }

  double limit_at_infinity() const { return offset + (kind == PotentialKind::constant ? amplitude : 0.0); }

  /// Exponent gamma with psi - psi(inf) = O(r^{-gamma}); infinite when psi is
  /// constant.
  double nominal_decay() const {
    if (kind == PotentialKind::exponential || kind == PotentialKind::logistic)
      return amplitude == 0.0 ? INFINITY : 2.0 * rate;
    return INFINITY;
  }

};

inline RadialPotential zero_potential() { return {}; }
inline RadialPotential constant_potential(double c) { return {PotentialKind::constant, c, 0.0, 0.0, 0.0}; }
inline RadialPotential exponential_potential(double amplitude, double rate, double center) {
  if (!(rate > 0.0)) throw ValidationError("rate", "must be positive");
  return {PotentialKind::exponential, amplitude, rate, center, 0.0};
}
inline RadialPotential logistic_potential(double amplitude, double rate, double center) {
  if (!(rate > 0.0)) throw ValidationError("rate", "must be positive");
  return {PotentialKind::logistic, amplitude, rate, center, 0.0};
}

}  // namespace alegeo
