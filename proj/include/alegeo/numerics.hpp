#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "alegeo/errors.hpp"

namespace alegeo::num {

inline std::vector<double> linspace(double a, double b, std::size_t n) {
  if (n < 2) throw ValidationError("linspace", "need at least two points");
  std::vector<double> out(n);
  const double h = (b - a) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) out[i] = a + h * static_cast<double>(i);
  out.back() = b;
  return out;
}

inline std::vector<double> logspace(double a, double b, std::size_t n) {
  if (!(a > 0.0 && b > a)) throw ValidationError("logspace", "need 0 < a < b");
  auto e = linspace(std::log(a), std::log(b), n);
  for (double& x : e) x = std::exp(x);
  e.front() = a;
  e.back() = b;
  return e;
}

/// C^1 step: 0 on [0, lo], 1 on [hi, 1], cubic in between.
inline double smoothstep(double x, double lo = 1.0 / 3.0, double hi = 2.0 / 3.0) {
  if (x <= lo) return 0.0;
  if (x >= hi) return 1.0;
  const double s = (x - lo) / (hi - lo);
  return s * s * (3.0 - 2.0 * s);
}

/// Composite Simpson on a uniform grid; the last three intervals use the
/// 3/8 rule when the interval count is odd.
inline double simpson(std::span<const double> f, double h) {
  const std::size_t n = f.size();
  if (n < 2) return 0.0;
  if (n == 2) return 0.5 * h * (f[0] + f[1]);
  if (n == 3) return h / 3.0 * (f[0] + 4.0 * f[1] + f[2]);
  std::size_t intervals = n - 1;
  std::size_t simpson_end = intervals % 2 == 0 ? n - 1 : n - 4;
  double s = 0.0;
  for (std::size_t i = 0; i + 2 <= simpson_end; i += 2) {
    s += h / 3.0 * (f[i] + 4.0 * f[i + 1] + f[i + 2]);
  }
  if (simpson_end != n - 1) {
    const std::size_t i = simpson_end;
    s += 3.0 * h / 8.0 * (f[i] + 3.0 * f[i + 1] + 3.0 * f[i + 2] + f[i + 3]);
  }
  return s;
}

/// Fornberg's recursion for finite-difference weights of derivative `order`
/// at `x0` over the given nodes.
inline std::vector<double> fd_weights(double x0, std::span<const double> nodes, int order) {
  const int n = static_cast<int>(nodes.size());
  std::vector<std::vector<double>> c(n, std::vector<double>(order + 1, 0.0));
  double c1 = 1.0;
  double c4 = nodes[0] - x0;
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, order);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = nodes[i] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = nodes[i] - nodes[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = c[i][order];
  return w;
}

/// Derivative of a uniformly sampled field at every node using five-point
/// stencils, centred in the interior and shifted at the ends.
inline std::vector<double> differentiate(std::span<const double> f, double h, int order) {
  const int n = static_cast<int>(f.size());
  constexpr int width = 5;
  if (n < width) throw ValidationError("differentiate", "need at least five samples");
  std::array<std::vector<double>, width> weights;
  std::array<double, width> offsets{};
  for (int s = 0; s < width; ++s) {
    // stencil start relative to the evaluation point: s = 0 means [i, i+4]
    for (int m = 0; m < width; ++m) offsets[m] = static_cast<double>(m - s);
    weights[s] = fd_weights(0.0, offsets, order);
  }
  const double scale = std::pow(h, -order);
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) {
    int start = std::clamp(i - width / 2, 0, n - width);
    const int shift = i - start;
    double acc = 0.0;
    for (int m = 0; m < width; ++m) acc += weights[shift][m] * f[start + m];
    out[i] = acc * scale;
  }
  return out;
}

/// Monotone piecewise cubic Hermite interpolant (Fritsch-Carlson slopes)
/// exposing the value and the first two derivatives of the interpolant.
class MonotoneCubic {
 public:
  MonotoneCubic() = default;
  MonotoneCubic(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 3 || y_.size() != n) throw ValidationError("samples", "need >= 3 matching samples");
    for (std::size_t i = 1; i < n; ++i) {
      if (!(x_[i] > x_[i - 1])) throw ValidationError("samples", "abscissae must be strictly increasing");
    }
    std::vector<double> h(n - 1), d(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      h[i] = x_[i + 1] - x_[i];
      d[i] = (y_[i + 1] - y_[i]) / h[i];
    }
    s_.assign(n, 0.0);
    for (std::size_t k = 1; k + 1 < n; ++k) {
      if (d[k - 1] * d[k] <= 0.0) continue;
      const double w1 = 2.0 * h[k] + h[k - 1];
      const double w2 = h[k] + 2.0 * h[k - 1];
      s_[k] = (w1 + w2) / (w1 / d[k - 1] + w2 / d[k]);
    }
    s_[0] = end_slope(h[0], h[1], d[0], d[1]);
    s_[n - 1] = end_slope(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
  }

  double lower() const { return x_.front(); }
  double upper() const { return x_.back(); }
  const std::vector<double>& knots() const { return x_; }

  std::array<double, 3> eval(double x) const {
    const std::size_t n = x_.size();
    std::size_t i = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), x) - x_.begin());
    i = std::clamp<std::size_t>(i, 1, n - 1) - 1;
    const double h = x_[i + 1] - x_[i];
    const double t = (x - x_[i]) / h;
    const double y0 = y_[i], y1 = y_[i + 1], s0 = s_[i], s1 = s_[i + 1];
    const double t2 = t * t, t3 = t2 * t;
    const double v = (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * s0 + (-2 * t3 + 3 * t2) * y1 +
                     (t3 - t2) * h * s1;
    const double d1 = ((6 * t2 - 6 * t) * y0 + (3 * t2 - 4 * t + 1) * h * s0 + (-6 * t2 + 6 * t) * y1 +
                       (3 * t2 - 2 * t) * h * s1) /
                      h;
    const double d2 = ((12 * t - 6) * y0 + (6 * t - 4) * h * s0 + (-12 * t + 6) * y1 + (6 * t - 2) * h * s1) /
                      (h * h);
    return {v, d1, d2};
  }

 private:
  // Three-point end slope with the Fritsch-Butland sign/size guard.
  static double end_slope(double h0, double h1, double d0, double d1) {
    double s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (s * d0 <= 0.0) return 0.0;
    if (d0 * d1 <= 0.0 && std::abs(s) > std::abs(3.0 * d0)) return 3.0 * d0;
    return s;
  }

  std::vector<double> x_, y_, s_;
};

}  // namespace alegeo::num
