#include <gtest/gtest.h>

#include <map>

#include "alegeo/toric_intersection.hpp"

using namespace alegeo;

namespace {

// Independent ring oracle: reduce D_0^a D_f^b (a + b = n) with
// D_0 (D_0 + k D_f) = 0, D_0 D_f^{n-1} = 1 and D_f^n = 0.
Rational ring_monomial(int n, int k, int a) {
  if (a == 0) return Rational(0);
  if (a == 1) return Rational(1);
  return Rational(-k) * ring_monomial(n, k, a - 1);
}

// int (x D_0 + y D_f)^n by binomial expansion over the ring oracle.
Rational ring_power(int n, int k, Rational x, Rational y) {
  Rational total(0);
  std::int64_t binom = 1;
  for (int a = 0; a <= n; ++a) {
    Rational term(binom);
    for (int i = 0; i < a; ++i) term *= x;
    for (int i = 0; i < n - a; ++i) term *= y;
    total += term * ring_monomial(n, k, a);
    binom = binom * (n - a) / (a + 1);
  }
  return total;
}

Rational ipow(Rational b, int e) {
  Rational r(1);
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

}  // namespace

TEST(IntersectionNumbers, MatchRingOracle) {
  for (int n : {2, 3, 4}) {
    for (int k : {1, 2, 3, 5}) {
      for (int a = 0; a <= n; ++a) EXPECT_EQ(intersection_number(n, k, a), ring_monomial(n, k, a));
    }
  }
}

TEST(IntersectionTable, SurfaceEntries) {
  for (int k : {1, 2, 3}) {
    const auto t = intersection_numbers(2, k);
    EXPECT_EQ(t.d0_d0, Rational(-k));
    EXPECT_EQ(t.d0_df, Rational(1));
    EXPECT_EQ(t.df_df, Rational(0));
    EXPECT_EQ(t.d0_dinf, Rational(0));
    EXPECT_EQ(t.d0_ricci, Rational(2 - k));
    EXPECT_EQ(t.df_ricci, Rational(k - 2, k));
  }
}

TEST(IntersectionTable, PowersAndRicciClassInDimensionsTwoAndThree) {
  for (int n : {2, 3}) {
    for (int k : {1, 2, 3}) {
      const auto t = intersection_numbers(n, k);
      EXPECT_EQ(t.d0_power, ipow(Rational(-k), n - 1));
      EXPECT_EQ(t.d0_pow_df, ipow(Rational(-k), n - 2));
      // rho = c rho_0 with c = -(n - k)/k
      const Rational c(-(n - k), k);
      EXPECT_EQ(t.d0_ricci, ipow(c, n - 1) * ipow(Rational(-k), n - 1));
      EXPECT_EQ(t.df_ricci, ipow(c, n - 1) * ipow(Rational(-k), n - 2));
    }
  }
}

TEST(IntersectionTable, ZeroSectionDisjointFromInfinity) {
  // D_0 . D_inf^{n-1} = 0 for every n.
  for (int n : {2, 3, 4}) {
    for (int k : {1, 2, 4}) {
      Rational s(0);
      std::int64_t binom = 1;
      for (int b = 0; b <= n - 1; ++b) {
        s += Rational(binom) * ipow(Rational(k), b) * intersection_number(n, k, n - b);
        binom = binom * (n - 1 - b) / (b + 1);
      }
      EXPECT_EQ(s, Rational(0)) << n << "," << k;
    }
  }
}

TEST(MixedTypeCertificate, OppositeSignsExactlyWhenTwistDiffersFromDimension) {
  for (int n : {2, 3}) {
    for (int k : {1, 2, 3, 4}) {
      const auto c = mixed_type_certificate(n, k);
      EXPECT_EQ(c.opposite_signs, k != n) << n << "," << k;
      if (k == n) {
        EXPECT_EQ(c.d0_ricci, Rational(0));
        EXPECT_FALSE(c.ratio.has_value());
      } else {
        ASSERT_TRUE(c.ratio.has_value());
        EXPECT_EQ(*c.ratio, Rational(-1, k));
      }
    }
  }
}

TEST(Validation, FieldNames) {
  try {
    intersection_numbers(2, 0);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "k");
  }
  EXPECT_THROW(intersection_number(2, 1, 3), ValidationError);
  EXPECT_THROW(intersection_number(1, 1, 1), ValidationError);
  EXPECT_THROW(representative_integral_raw(4, 1, OracleTarget::rho0_power), ValidationError);
}

TEST(QuadratureOracle, CalibratedValuesWithinOnePercent) {
  const auto& cal = oracle_calibration();
  EXPECT_GT(cal.factor, 0.0);
  for (int n : {2, 3}) {
    for (int k : {1, 2, 3}) {
      for (auto target : {OracleTarget::rho0_power, OracleTarget::rho0_rhof, OracleTarget::restricted_d0}) {
        const auto v = representative_integral_oracle(n, k, target);
        const double exact = to_double(oracle_target_exact(n, k, target));
        EXPECT_NEAR(v.value, exact, 0.01 * std::abs(exact)) << n << "," << k << " " << to_string(target);
        EXPECT_LE(v.error, 0.005 * std::abs(v.value) + 1e-300);
      }
    }
  }
}

TEST(QuadratureOracle, LinearInDivisorClass) {
  // (alpha D_inf + beta D_f)^n from quadrature against the ring oracle.
  const double f = oracle_calibration().factor;
  for (int n : {2, 3}) {
    for (int k : {1, 2}) {
      for (auto [alpha, beta] : {std::pair{1, 0}, std::pair{1, 1}, std::pair{2, -1}}) {
        // alpha D_inf + beta D_f = alpha D_0 + (alpha k + beta) D_f
        const double exact = to_double(ring_power(n, k, Rational(alpha), Rational(alpha * k + beta)));
        const double v = f * representative_power_raw(n, k, alpha, beta).value;
        EXPECT_NEAR(v, exact, 0.01 * std::max(1.0, std::abs(exact))) << n << "," << k << " " << alpha << "," << beta;
      }
    }
  }
}
