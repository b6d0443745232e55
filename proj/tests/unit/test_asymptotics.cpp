#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "qsearch/asymptotics.hpp"
#include "qsearch/rng.hpp"
#include "support/oracles.hpp"

namespace qsearch {
namespace {

constexpr double kLn2 = std::numbers::ln2;

TEST(Quantile, KnownValues) {
  EXPECT_EQ(gaussian_quantile(0.5), 0.0);
  EXPECT_NEAR(gaussian_quantile(0.841344746), 1.0, 1e-6);
  EXPECT_NEAR(gaussian_quantile(0.1), -1.281552, 1e-6);
  EXPECT_NEAR(gaussian_quantile(0.841344746), oracle::bisection_quantile(0.841344746), 1e-12);
  EXPECT_NEAR(gaussian_quantile(0.1), oracle::bisection_quantile(0.1), 1e-12);
  EXPECT_THROW(gaussian_quantile(0.0), std::domain_error);
  EXPECT_THROW(gaussian_quantile(1.0), std::domain_error);
}

TEST(Quantile, AgreesWithBisectionAcrossTheRange) {
  for (const double eps : {1e-8, 1e-5, 0.001, 0.02, 0.2, 0.4, 0.6, 0.77, 0.99, 0.99999}) {
    EXPECT_NEAR(gaussian_quantile(eps), oracle::bisection_quantile(eps), 1e-12) << eps;
  }
}

TEST(Quantile, IsOddAboutOneHalf) {
  Xoshiro256 rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double eps = 1e-6 + (0.5 - 1e-6) * rng.uniform();
    ASSERT_NEAR(gaussian_quantile(eps), -gaussian_quantile(1.0 - eps), 1e-10);
  }
}

TEST(SecondOrder, NoiselessJointResolutionIsOneBitPerQuery) {
  const CapacityReport r = capacity(ChannelSpec::bec(0.0));
  for (const std::int64_t n : {10, 40, 100}) {
    for (const double eps : {0.01, 0.1, 0.7}) {
      EXPECT_NEAR(joint_resolution(r, n, 1, eps).value / kLn2, double(n), 1e-12);
    }
  }
  EXPECT_NEAR(separate_resolution(r, 40, 2, 0.1).value, 20 * kLn2, 1e-12);
}

TEST(SecondOrder, MedianDropsTheQuantileTerm) {
  const CapacityReport r = capacity(ChannelSpec::bsc(0.3));
  EXPECT_DOUBLE_EQ(joint_resolution(r, 77, 3, 0.5).value, 77 * r.capacity / 3);
  EXPECT_NEAR(adaptivity_gain_lb(r, 77, 3, 0.5), 77 * r.capacity / 3, 1e-12);
}

TEST(SecondOrder, JointMatchesHandComposition) {
  const CapacityReport r = capacity(ChannelSpec::bsc(0.4));
  const double expected = (80 * r.capacity + std::sqrt(80 * r.v_low) * oracle::bisection_quantile(0.1)) / 2;
  const SecondOrderValue v = joint_resolution(r, 80, 2, 0.1);
  EXPECT_NEAR(v.value, expected, 1e-10);
  EXPECT_NEAR(v.window_low, expected - 0.5 * std::log(80.0) / 2, 1e-10);
  EXPECT_NEAR(v.window_high, expected + std::log(80.0) / 2, 1e-10);
  EXPECT_DOUBLE_EQ(joint_resolution(r, 80, 2, 0.1, LogTerm::kPlusLog).value, v.window_high);
  EXPECT_DOUBLE_EQ(joint_resolution(r, 80, 2, 0.1, LogTerm::kMinusHalfLog).value, v.window_low);
}

TEST(SecondOrder, SeparateSearchCoincidesAtOneDimensionAndLosesAbove) {
  const CapacityReport r = capacity(ChannelSpec::bsc(0.4));
  EXPECT_DOUBLE_EQ(separate_resolution(r, 50, 1, 0.2).value, joint_resolution(r, 50, 1, 0.2).value);
  EXPECT_LT(separate_resolution(r, 100, 2, 0.1).value, joint_resolution(r, 100, 2, 0.1).value);
}

TEST(SecondOrder, SeparateIsStrictlyBelowJointOnRandomInputs) {
  Xoshiro256 rng(12);
  for (int i = 0; i < 200; ++i) {
    const int kind = i % 3;
    const ChannelSpec spec = make_channel(kind == 0 ? "bsc" : kind == 1 ? "bec" : "z", 0.05 + 0.95 * rng.uniform());
    const CapacityReport r = capacity(spec, {.grid_size = 2001});
    if (r.v_low <= 1e-9) continue;
    const std::int64_t n = 10 + static_cast<std::int64_t>(rng.uniform() * 1000);
    const int d = 2 + static_cast<int>(rng.uniform() * 4);
    const double eps = 0.001 + 0.49 * rng.uniform();
    ASSERT_LT(separate_resolution(r, n, d, eps).value, joint_resolution(r, n, d, eps).value);
  }
}

TEST(SecondOrder, RatePerQueryConvergesToCapacityOverD) {
  const CapacityReport r = capacity(ChannelSpec::bsc(0.4));
  const double rate = joint_resolution(r, 1'000'000, 2, 0.1).value / 1e6;
  EXPECT_LT(std::abs(rate - r.capacity / 2) / (r.capacity / 2), 0.01);
}

TEST(Adaptive, LeadingTerm) {
  const CapacityReport bsc = capacity(ChannelSpec::bsc(0.4));
  EXPECT_DOUBLE_EQ(adaptive_resolution_lb(bsc, 40, 2, 0.0), 40 * bsc.capacity / 2);
  EXPECT_NEAR(adaptive_resolution_lb(bsc, 100, 2, 0.5), 100 * bsc.capacity, 1e-12);
  const CapacityReport bec = capacity(ChannelSpec::bec(0.2));
  EXPECT_NEAR(adaptive_resolution_lb(bec, 80, 1, 0.1), 80 * bec.capacity / 0.9, 1e-12);
  EXPECT_THROW(adaptive_resolution_lb(bsc, 10, 1, 1.0), std::domain_error);
}

TEST(Adaptive, GainIsPositiveAndGrowsWithN) {
  EXPECT_GT(adaptivity_gain_lb(capacity(ChannelSpec::bsc(0.2)), 1000, 2, 0.1), 0.0);
  const CapacityReport bec = capacity(ChannelSpec::bec(0.3));
  double previous = -1e300;
  for (std::int64_t n = 100; n <= 10000; n += 100) {
    const double g = adaptivity_gain_lb(bec, n, 2, 0.001);
    ASSERT_GT(g, previous);
    previous = g;
  }
}

TEST(PhaseTransition, RateIsCapacityOverDimension) {
  EXPECT_NEAR(phase_transition_rate(capacity(ChannelSpec::bec(0.0)), 2), kLn2 / 2, 1e-14);
  const CapacityReport r = capacity(ChannelSpec::bsc(0.4));
  EXPECT_NEAR(phase_transition_rate(r, 3), oracle::grid_capacity(ChannelSpec::bsc(0.4), 1'000'001) / 3, 1e-9);
}

TEST(MeasurementIndependent, ClosedFormsMatchGenericComputation) {
  const double nu = 0.11;
  const MiCoefficients bsc = mi_coefficients({MiFlavor::kBsc, nu, {}}, 0.1);
  TransitionMatrix w(2, 2);
  w << 1 - nu, nu, nu, 1 - nu;
  const MiCoefficients generic = mi_coefficients({MiFlavor::kGeneric, 0, w}, 0.1);
  EXPECT_NEAR(bsc.capacity, generic.capacity, 1e-10);
  EXPECT_NEAR(bsc.dispersion, generic.dispersion, 1e-8);

  const double tau = 0.25;
  TransitionMatrix e(2, 3);
  e << 1 - tau, 0, tau, 0, 1 - tau, tau;
  const MiCoefficients bec = mi_coefficients({MiFlavor::kBec, tau, {}}, 0.1);
  const MiCoefficients bec_generic = mi_coefficients({MiFlavor::kGeneric, 0, e}, 0.1);
  EXPECT_NEAR(bec.capacity, bec_generic.capacity, 1e-10);
  EXPECT_NEAR(bec.dispersion, bec_generic.dispersion, 1e-8);

  const double zeta = 0.4;
  TransitionMatrix zm(2, 2);
  zm << 1, 0, zeta, 1 - zeta;
  const MiCoefficients z = mi_coefficients({MiFlavor::kZ, zeta, {}}, 0.1);
  const MiCoefficients z_generic = mi_coefficients({MiFlavor::kGeneric, 0, zm}, 0.1);
  EXPECT_NEAR(z.capacity, z_generic.capacity, 1e-10);
  EXPECT_NEAR(z.optimizer, z_generic.optimizer, 1e-6);
  EXPECT_NEAR(z.dispersion, z_generic.dispersion, 1e-7);
}

TEST(MeasurementIndependent, BscResolutionInBits) {
  const double nu = 0.11;
  const std::int64_t n = 200;
  const double bits = n * (1 - oracle::h(nu) / kLn2) +
                      std::sqrt(n * nu * (1 - nu)) * std::log2((1 - nu) / nu) * oracle::bisection_quantile(0.05);
  EXPECT_NEAR(mi_resolution({MiFlavor::kBsc, nu, {}}, n, 1, 0.05).value / kLn2, bits, 1e-9);
  EXPECT_NEAR(mi_resolution({MiFlavor::kBsc, 0.0, {}}, n, 2, 0.05).value / kLn2, n / 2.0, 1e-12);
}

TEST(InvertQueries, KnownCases) {
  EXPECT_EQ(invert_queries(capacity(ChannelSpec::bec(0.0)), 1, std::pow(2.0, -40), 0.3), 40);
  const CapacityReport r = capacity(ChannelSpec::bsc(0.4));
  const auto median = invert_queries(r, 2, 1e-3, 0.5);
  ASSERT_TRUE(median.has_value());
  EXPECT_EQ(*median, static_cast<std::int64_t>(std::ceil(-2 * std::log(1e-3) / r.capacity)));
  const auto strict = invert_queries(r, 2, 1e-3, 0.1);
  ASSERT_TRUE(strict.has_value());
  EXPECT_GE(*strict, *median);
  // Smallest n reaching the target.
  EXPECT_GE(joint_resolution(r, *strict, 2, 0.1).value, -std::log(1e-3) - 1e-9);
  EXPECT_LT(joint_resolution(r, *strict - 1, 2, 0.1).value, -std::log(1e-3));
  TransitionMatrix useless(2, 2);
  useless << 0.3, 0.7, 0.3, 0.7;
  EXPECT_FALSE(invert_queries(capacity(ChannelSpec::fixed(useless)), 1, 0.5, 0.1).has_value());
}

}  // namespace
}  // namespace qsearch
