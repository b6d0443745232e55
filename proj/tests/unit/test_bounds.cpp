#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "qsearch/asymptotics.hpp"
#include "qsearch/bounds.hpp"
#include "qsearch/capacity.hpp"
#include "qsearch/errors.hpp"
#include "qsearch/harness.hpp"
#include "qsearch/infodensity.hpp"
#include "support/oracles.hpp"

namespace qsearch {
namespace {

constexpr double kLn2 = std::numbers::ln2;
constexpr double kInf = std::numeric_limits<double>::infinity();

ChannelSpec random_channel(Xoshiro256& rng, int i) {
  const int kind = i % 3;
  return make_channel(kind == 0 ? "bsc" : kind == 1 ? "bec" : "z", 0.02 + 0.96 * rng.uniform());
}

TEST(SingleLetter, LawIsNormalizedAndCollapsed) {
  const SingleLetterLaw bec = single_letter_law(ChannelSpec::bec(0.3), 0.4);
  EXPECT_EQ(bec.values.size(), 3);
  EXPECT_NEAR(bec.probs.sum(), 1.0, 1e-15);
  const SingleLetterLaw noiseless = single_letter_law(ChannelSpec::bec(0.0), 0.5);
  ASSERT_EQ(noiseless.values.size(), 1);
  EXPECT_NEAR(noiseless.values(0), kLn2, 1e-15);
  const SingleLetterLaw bsc = single_letter_law(ChannelSpec::bsc(0.4), 0.5);
  EXPECT_EQ(bsc.values.size(), 2);
  EXPECT_TRUE(std::is_sorted(bsc.values.data(), bsc.values.data() + bsc.values.size()));
}

TEST(ExactCdf, HandEnumeratedExamples) {
  const ChannelSpec spec = ChannelSpec::bsc(0.4);
  EXPECT_NEAR(exact_sum_cdf(spec, 0.5, 1, 0.0), 0.2, 1e-14);
  EXPECT_NEAR(exact_sum_cdf(spec, 0.5, 2, 0.0), 0.36, 1e-14);
  EXPECT_EQ(exact_sum_cdf(spec, 0.5, 30, kInf), 1.0);
  EXPECT_EQ(exact_sum_cdf(ChannelSpec::z(0.7), 0.2, 500, kInf), 1.0);
  EXPECT_THROW(exact_sum_cdf(spec, 0.5, 3, std::nan("")), std::domain_error);
}

TEST(ExactCdf, MatchesBruteForceEnumeration) {
  Xoshiro256 rng(41);
  for (int i = 0; i < 60; ++i) {
    const ChannelSpec spec = random_channel(rng, i);
    const double q = 0.05 + 0.9 * rng.uniform();
    const int n = 1 + static_cast<int>(rng() % 6);
    const InfoMoments m = info_moments(spec, q);
    const double t = n * m.mean + (rng.uniform() - 0.5) * 2 * std::sqrt(n * m.variance + 1e-3);
    ASSERT_NEAR(exact_sum_cdf(spec, q, n, t), oracle::brute_force_cdf(spec, q, n, t), 1e-12)
        << spec.name() << " q=" << q << " n=" << n << " t=" << t;
  }
}

TEST(ExactCdf, AgreesWithMonteCarlo) {
  Xoshiro256 rng(42);
  for (int i = 0; i < 12; ++i) {
    const ChannelSpec spec = random_channel(rng, i);
    const double q = 0.05 + 0.9 * rng.uniform();
    const int n = 1 + static_cast<int>(rng() % 60);
    const InfoMoments m = info_moments(spec, q);
    const double t = n * m.mean + (rng.uniform() - 0.5) * 3 * std::sqrt(n * m.variance);
    const InfoDensityTable table = info_density_table(spec, q, q);
    const int draws = 100'000;
    int hits = 0;
    for (int s = 0; s < draws; ++s) {
      double sum = 0;
      for (int k = 0; k < n; ++k) {
        const Bit x = rng.uniform() < q;
        sum += table(x, sample_output(spec, q, x, rng));
      }
      hits += sum <= t + 1e-12 * (1 + std::abs(t));
    }
    const double exact = exact_sum_cdf(spec, q, n, t);
    const double se = std::sqrt(std::max(exact * (1 - exact), 1e-12) / draws);
    EXPECT_NEAR(double(hits) / draws, exact, 4 * se + 1e-12) << spec.name() << " q=" << q << " n=" << n;
  }
}

TEST(SumDistribution, AtomsAreSortedAndNormalized) {
  Xoshiro256 rng(43);
  for (int i = 0; i < 30; ++i) {
    const ChannelSpec spec = random_channel(rng, i);
    const SingleLetterLaw law = single_letter_law(spec, 0.1 + 0.8 * rng.uniform());
    const SumDistribution dist(law, 1 + static_cast<std::int64_t>(rng() % 80));
    double total = 0;
    for (const double p : dist.probs()) total += p;
    ASSERT_NEAR(total, 1.0, 1e-10);
    ASSERT_TRUE(std::is_sorted(dist.values().begin(), dist.values().end()));
    ASSERT_TRUE(std::adjacent_find(dist.values().begin(), dist.values().end()) == dist.values().end());
  }
}

TEST(SumDistribution, CdfIsMonotoneAndMatchesStreaming) {
  const SingleLetterLaw law = single_letter_law(ChannelSpec::z(0.4), 0.35);
  const SumDistribution dist(law, 25);
  EXPECT_EQ(dist.cdf(dist.values().front() - 1.0), 0.0);
  EXPECT_EQ(exact_sum_cdf(law, 25, dist.values().front() - 1.0), 0.0);
  double previous = 0.0;
  for (const double v : dist.values()) {
    const double c = dist.cdf(v);
    ASSERT_GE(c, previous);
    ASSERT_NEAR(c, exact_sum_cdf(law, 25, v), 1e-12);
    previous = c;
  }
  EXPECT_NEAR(previous, 1.0, 1e-10);
}

TEST(SumDistribution, QuantileIsTheSupremumOverAtoms) {
  const SumDistribution dist(single_letter_law(ChannelSpec::bsc(0.4), 0.5), 2);
  // The quantile is the first atom whose cdf exceeds the level.
  for (const double level : {0.0, 0.03, 0.2, 0.36, 0.5, 0.99}) {
    const double qv = dist.quantile_sup(level);
    EXPECT_GT(dist.cdf(qv), level);
    for (const double v : dist.values()) {
      if (v < qv) EXPECT_LE(dist.cdf(v), level);
    }
  }
  EXPECT_THROW(dist.quantile_sup(1.0), std::domain_error);
}

TEST(SumDistribution, BerryEsseenEnvelopeHoldsAtEveryAtom) {
  for (const double nu : {0.2, 0.4}) {
    const ChannelSpec spec = ChannelSpec::bsc(nu);
    for (const double q : {0.25, 0.5}) {
      const InfoMoments m = info_moments(spec, q);
      for (const std::int64_t n : {10, 40, 100}) {
        const SumDistribution dist(single_letter_law(spec, q), n);
        const double envelope = 6 * m.third_abs / std::sqrt(n * std::pow(m.variance, 3));
        for (const double v : dist.values()) {
          const double gauss = gaussian_cdf((v - n * m.mean) / std::sqrt(n * m.variance));
          ASSERT_LE(std::abs(dist.cdf(v) - gauss), envelope);
        }
      }
    }
  }
}

TEST(Budgets, ExceedingThemIsAResourceError) {
  EXPECT_EQ(count_vectors(3, 3), 10u);
  EXPECT_EQ(count_vectors(0, 4), 1u);
  const SingleLetterLaw law = single_letter_law(ChannelSpec::z(0.4), 0.35);
  EXPECT_THROW(SumDistribution(law, 100, 10), ResourceError);
  EXPECT_THROW(exact_sum_cdf(law, 100, 0.0, 10), ResourceError);
  EXPECT_EQ(count_vectors(std::int64_t{1} << 40, 8), std::numeric_limits<std::uint64_t>::max());
}

TEST(Achievability, VanishingEtaIsVacuous) {
  const AchievabilityTerms t =
      achievability_bound(ChannelSpec::bsc(0.4), 40, 1, 16, 0.5, 1e-12, BoundMode::kMeasurementDependent);
  EXPECT_GE(t.raw, 1.0);
  EXPECT_EQ(t.value, 1.0);
  EXPECT_THROW(achievability_bound(ChannelSpec::bsc(0.4), 40, 1, 16, 0.5, 0.0, BoundMode::kMeasurementDependent),
               std::domain_error);
}

TEST(Achievability, NoiselessIndependentChannelLeavesOnlyTheSlack) {
  TransitionMatrix w(2, 2);
  w << 1, 0, 0, 1;
  const ChannelSpec spec = ChannelSpec::fixed(w);
  const std::int64_t n = 30;
  const AchievabilityTerms below =
      achievability_bound(spec, n, 1, std::pow(2.0, n - 5), 0.5, 0.0, BoundMode::kMeasurementIndependent);
  EXPECT_EQ(below.tail_probability, 0.0);
  EXPECT_NEAR(below.value, 1 / std::sqrt(30.0), 1e-15);
  double previous = 1.0;
  for (int gap = 5; gap <= 25; gap += 5) {
    const double v = achievability_bound(spec, 100, 1, std::pow(2.0, 100 - gap), 0.5, 0.0,
                                         BoundMode::kMeasurementIndependent).value;
    ASSERT_LE(v, previous);
    previous = v;
  }
  EXPECT_EQ(achievability_bound(spec, n, 1, std::pow(2.0, n), 0.5, 0.0, BoundMode::kMeasurementIndependent).value,
            1.0);
}

TEST(Achievability, InformativeAndDecreasingAlongTheSecondOrderTrajectory) {
  const ChannelSpec spec = ChannelSpec::bsc(0.4);
  const CapacityReport r = capacity(spec);
  double previous = 1.0;
  for (const std::int64_t n : {100, 200}) {
    const ResolutionChoice choice = choose_resolution_M(r, n, 1, 0.1, MarginRule::kMinusHalfLogN);
    ASSERT_FALSE(choice.saturated);
    const double M = static_cast<double>(choice.M);
    const AchievabilityTerms t =
        achievability_bound(spec, n, 1, M, r.achievers[0], default_eta(M, 1), BoundMode::kMeasurementDependent);
    EXPECT_GT(t.value, 0.0);
    EXPECT_LT(t.value, 1.0);
    EXPECT_LT(t.value, previous);
    previous = t.value;
  }
}

TEST(Achievability, FeasibleMIsConsistentWithTheBound) {
  // The change-of-measure factor exp(n eta c) only falls below 1/eps once
  // M^d is of order n^2 c^2, hence the wide scan.
  const ChannelSpec spec = ChannelSpec::bsc(0.2);
  const double p = capacity(spec).achievers[0];
  const std::uint64_t M = achievability_feasible_M(spec, 100, 1, p, 0.5, 3'000'000);
  ASSERT_GE(M, 2u);
  const double m = static_cast<double>(M);
  EXPECT_LE(achievability_bound(spec, 100, 1, m, p, default_eta(m, 1), BoundMode::kMeasurementDependent).raw,
            0.5);
  EXPECT_EQ(achievability_feasible_M(spec, 100, 1, p, 0.5, 1000), 1u);
}

TEST(Converse, RejectsEmptyQuantileConstraints) {
  const ChannelSpec spec = ChannelSpec::bsc(0.4);
  EXPECT_THROW(converse_bound(spec, 40, 1, 0.5, 0.2, 0.2), std::domain_error);
  EXPECT_THROW(converse_bound(spec, 40, 1, 0.1, 0.0, 0.1), std::domain_error);
  EXPECT_THROW(converse_bound(spec, 40, 1, 0.1, 0.5, 0.1), std::domain_error);
  EXPECT_THROW(converse_bound(spec, 40, 1, 1.0, 0.1, 0.1), std::domain_error);
}

TEST(Converse, NoiselessPointMassAtTheUniformFraction) {
  const ChannelSpec spec = ChannelSpec::bec(0.0);
  const double beta = default_beta(40, 1);
  const double kappa = default_kappa(40);
  EXPECT_NEAR(beta, 1 / std::sqrt(40.0), 1e-15);
  ConverseOptions only_half;
  only_half.grid = false;
  only_half.extra_q = {0.5};
  const ConverseResult r = converse_bound(spec, 40, 1, 0.1, beta, kappa, only_half);
  EXPECT_NEAR(r.quantile, 40 * kLn2, 1e-10);
  EXPECT_NEAR(r.value, 40 * kLn2 - std::log(beta) - std::log(kappa), 1e-10);
  EXPECT_EQ(r.evaluated, 1);
  // Over the full grid the maximizing fraction is not the uniform one.
  const ConverseResult full = converse_bound(spec, 40, 1, 0.1, beta, kappa);
  EXPECT_GE(full.quantile, r.quantile);
  EXPECT_EQ(full.evaluated, 201);
}

TEST(Converse, UpperBoundsTheAchievableResolution) {
  // The 1/sqrt(n) slack alone is 0.1 at n = 100, so the target must exceed it.
  const ChannelSpec spec = ChannelSpec::bsc(0.2);
  const CapacityReport report = capacity(spec);
  const std::int64_t n = 100;
  ConverseOptions options;
  options.q_grid = 41;
  options.extra_q = report.achievers;
  const ConverseResult conv = converse_bound(spec, n, 1, 0.2, default_beta(n, 1), default_kappa(n), options);
  const std::uint64_t M =
      achievability_feasible_M(spec, n, 1, report.achievers[0], 0.2, 1'000'000, BoundMode::kMeasurementIndependent);
  EXPECT_GE(M, 2u);
  EXPECT_LE(std::log(double(M)), conv.value + std::log(double(n)));
  EXPECT_LE(std::log(double(M)), n * report.capacity);
  EXPECT_NEAR(conv.level, 0.2 + 3 / std::sqrt(100.0), 1e-12);
  EXPECT_EQ(conv.evaluated, 41 + 1);
}

TEST(NestedRcu, DeterministicAcrossThreadsAndBounded) {
  const ChannelSpec spec = ChannelSpec::bsc(0.4);
  const RcuEstimate one = nested_rcu_estimate(spec, 40, 1, 1.0, 0.5, 200, 9, 1);
  const RcuEstimate four = nested_rcu_estimate(spec, 40, 1, 1.0, 0.5, 200, 9, 4);
  EXPECT_EQ(one.mean, four.mean);
  EXPECT_EQ(one.std_error, four.std_error);
  EXPECT_GE(one.mean, 0.0);
  EXPECT_LE(one.mean, 1.0);
  const RcuEstimate many = nested_rcu_estimate(spec, 40, 1, 64.0, 0.5, 200, 9, 1);
  EXPECT_GE(many.mean, one.mean);
}

}  // namespace
}  // namespace qsearch
