#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "alegeo/analysis_tools.hpp"

using namespace alegeo;

namespace {

std::vector<double> radii(double lo, double hi, std::size_t n) { return num::logspace(lo, hi, n); }

}  // namespace

TEST(DecayFit, RecoversExactPowerLaw) {
  const auto r = radii(1.0, 100.0, 60);
  std::vector<double> v;
  for (double x : r) v.push_back(-3.5 * std::pow(x, -2.7));
  const auto fit = fit_decay_exponent(r, v, std::nullopt, -2.0);
  ASSERT_EQ(fit.status, FitStatus::ok);
  EXPECT_NEAR(fit.exponent, -2.7, 1e-12);
  EXPECT_NEAR(std::exp(fit.log_amplitude), 3.5, 1e-10);
  EXPECT_LT(fit.rms, 1e-12);
  ASSERT_TRUE(fit.margin);
  EXPECT_NEAR(*fit.margin, 0.7, 1e-12);
  EXPECT_NEAR(fit.r_lo, 100.0 / 8.0, 1e-12);
  EXPECT_NEAR(fit.r_hi, 50.0, 1e-12);
}

TEST(DecayFit, SlopeIsInvariantUnderScaling) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> jitter(-0.02, 0.02);
  const auto r = radii(1.0, 1000.0, 120);
  std::vector<double> v, w;
  for (double x : r) {
    const double y = std::pow(x, -1.3) * std::exp(jitter(rng));
    v.push_back(y);
    w.push_back(42.0 * y);
  }
  const auto a = fit_decay_exponent(r, v), b = fit_decay_exponent(r, w);
  ASSERT_EQ(a.status, FitStatus::ok);
  EXPECT_NEAR(a.exponent, -1.3, 0.05);
  EXPECT_NEAR(a.exponent, b.exponent, 1e-12);
}

TEST(DecayFit, FloorAndPoorFitStatuses) {
  const auto r = radii(1.0, 100.0, 60);
  std::vector<double> tiny(r.size(), 1e-20), wave;
  for (double x : r) wave.push_back(std::abs(std::sin(3.0 * x)) + 1e-6);
  const auto f1 = fit_decay_exponent(r, tiny, std::nullopt, std::nullopt, 1e-13);
  EXPECT_EQ(f1.status, FitStatus::below_floor);
  EXPECT_TRUE(std::isnan(f1.exponent));
  EXPECT_EQ(fit_decay_exponent(r, wave).status, FitStatus::poor_fit);
}

TEST(DecayFit, InputValidation) {
  const auto r = radii(1.0, 100.0, 60);
  std::vector<double> v(r.size(), 1.0);
  EXPECT_THROW(fit_decay_exponent(r, std::vector<double>(3, 1.0)), ValidationError);
  EXPECT_THROW(fit_decay_exponent(r, v, FitWindow{10.0, 11.0}), ValidationError);
  EXPECT_THROW(fit_decay_exponent(r, v, FitWindow{5.0, 5.0}), ValidationError);
  std::vector<double> bad = r;
  bad[0] = -1.0;
  EXPECT_THROW(fit_decay_exponent(bad, v), ValidationError);
}

TEST(WeightedNorm, MatchesBruteForce) {
  const auto r = radii(0.5, 20.0, 50);
  std::vector<double> f;
  for (double x : r) f.push_back(std::sin(x) * x);
  for (double s : {-1.0, 0.0, 0.5, 2.0}) {
    double best = -1.0, at = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      const double v = std::abs(f[i]) / std::pow(r[i], s);
      if (v > best) best = v, at = r[i];
    }
    const auto w = weighted_norm(r, f, s);
    EXPECT_NEAR(w.value, best, 1e-14 * best);
    EXPECT_EQ(w.r_at_sup, at);
  }
}

TEST(AdmMass, VanishesOnRicciFlatProfiles) {
  EXPECT_NEAR(adm_mass(flat_profile(2)).mass, 0.0, 1e-10);
  EXPECT_NEAR(adm_mass(lebrun_profile(2, 1.0)).mass, 0.0, 1e-6);
}

TEST(AdmMass, LebrunMassIsLinearInTwistDefectAndCoreSize) {
  // Only (k - 2) tau_min enters phi - tau at leading order, so the mass is a
  // fixed multiple of (2 - k) tau_min.
  const double unit = adm_mass(lebrun_profile(1, 1.0)).mass;
  EXPECT_GT(unit, 0.0);
  for (int k : {1, 3, 4}) {
    for (double tm : {0.5, 1.0, 2.0}) {
      const double m = adm_mass(lebrun_profile(k, tm)).mass;
      EXPECT_NEAR(m / ((2.0 - k) * tm), unit, 2e-3 * std::abs(unit)) << "k=" << k << " tau_min=" << tm;
    }
  }
  EXPECT_LT(adm_mass(lebrun_profile(3, 1.0)).mass, 0.0);
}

TEST(AdmMass, DecayFitOfLebrunDeviation) {
  const auto rep = adm_mass(lebrun_profile(3, 1.0));
  ASSERT_EQ(rep.decay.status, FitStatus::ok);
  EXPECT_NEAR(rep.decay.exponent, -2.0, 0.1);
}

TEST(AdmMass, RefusesSlowlyDecayingProfile) {
  // phi = tau + tau^{0.6}: deviation ~ r^{-0.8}, slower than r^{-(n-1)}.
  const auto p = custom_profile(2, 1, 0.0, [](double t) {
    return ProfileValue{t + std::pow(t, 0.6), 1.0 + 0.6 * std::pow(t, -0.4), -0.24 * std::pow(t, -1.4)};
  });
  EXPECT_THROW(adm_mass(p, 400.0), HypothesisViolation);
}
