#include <gtest/gtest.h>

#include <cmath>

#include "zebra/analytic.hpp"
#include "zebra/montecarlo.hpp"
#include "zebra/stats.hpp"

namespace {

using namespace zebra;

TEST(Samplers, DegenerateProbabilities) {
  TreeParams params(3);
  for (std::uint64_t t = 0; t < 20; ++t) {
    rng::TrialStream s(1, t);
    EXPECT_FALSE(sample_open_ray(params, Probability(0.0), 5, s));
    EXPECT_TRUE(sample_open_ray(params, Probability(1.0), 5, s));
    // All-closed or all-open trees have no alternating path of length 2.
    EXPECT_FALSE(sample_zebra_ray(params, Probability(0.0), 2, s));
    EXPECT_FALSE(sample_zebra_ray(params, Probability(1.0), 2, s));
    EXPECT_TRUE(sample_zebra_ray(params, Probability(0.0), 1, s));
  }
}

TEST(Samplers, DepthOneCountIsRootDegree) {
  for (std::uint64_t t = 0; t < 20; ++t) {
    rng::TrialStream s(9, t);
    EXPECT_EQ(count_zebra_connected(TreeParams(2), Probability(0.5), 1, s), 2U);
    EXPECT_EQ(count_zebra_connected(TreeParams(2, RootMode::FullCayley), Probability(0.3), 1, s), 3U);
  }
}

TEST(Samplers, RejectDepthZero) {
  rng::TrialStream s(0, 0);
  EXPECT_THROW(sample_open_ray(TreeParams(2), Probability(0.5), 0, s), InvalidArgument);
  EXPECT_THROW(EventSpec::zebra_ray(0), InvalidArgument);
}

TEST(Samplers, LazyMatchesMaterialized) {
  for (RootMode mode : {RootMode::RootedK, RootMode::FullCayley}) {
    TreeParams params(3, mode);
    for (std::uint64_t t = 0; t < 300; ++t) {
      rng::TrialStream s(42, t);
      Probability p(0.55);
      SigmaConfig sigma = sample_sigma(params, p, 4, s);
      EXPECT_EQ(sample_open_ray(params, p, 4, s), has_open_ray(sigma, 4));
      EXPECT_EQ(sample_zebra_ray(params, p, 4, s), has_zebra_ray(sigma, 4));
      EXPECT_EQ(sample_zebra_ray(params, p, 3, s, EdgeState::Closed), has_zebra_ray(sigma, 3, EdgeState::Closed));
      EXPECT_EQ(count_zebra_connected(params, p, 4, s), zebra_count(sigma, 4));
    }
  }
}

TEST(Estimates, KnownValuesWithinThreeSigma) {
  TreeParams params(2);
  Estimate open = estimate_probability(params, Probability(0.5), EventSpec::open_ray(1), 20'000, 7);
  EXPECT_NEAR(open.mean, 0.75, 3.0 * open.std_error);
  Estimate zebra = estimate_probability(params, Probability(0.5), EventSpec::zebra_ray(2), 20'000, 7);
  EXPECT_NEAR(zebra.mean, 0.9375, 3.0 * zebra.std_error);
  EXPECT_LE(zebra.ci95_low, zebra.mean);
  EXPECT_GE(zebra.ci95_high, zebra.mean);
  EXPECT_EQ(zebra.trials, 20'000U);
  EXPECT_EQ(zebra.seed, 7U);
}

TEST(Estimates, MeanCountAtDepthTwo) {
  Estimate x = estimate_mean(TreeParams(2), Probability(0.5), EventSpec::zebra_count(2), 20'000, 3);
  EXPECT_NEAR(x.mean, 2.0, 3.0 * x.std_error);
  EXPECT_THROW(estimate_probability(TreeParams(2), Probability(0.5), EventSpec::zebra_count(2), 10, 3),
               InvalidArgument);
}

TEST(Estimates, SingleTrial) {
  Estimate e = estimate_probability(TreeParams(2), Probability(1.0), EventSpec::open_ray(3), 1, 0);
  EXPECT_EQ(e.mean, 1.0);
  EXPECT_EQ(e.ci95_high, 1.0);
  EXPECT_GT(e.ci95_low, 0.0);
  EXPECT_THROW(estimate_probability(TreeParams(2), Probability(1.0), EventSpec::open_ray(3), 0, 0), InvalidArgument);
}

TEST(Estimates, IndependentOfWorkerCount) {
  TreeParams params(3);
  for (EventSpec ev : {EventSpec::zebra_ray(8), EventSpec::open_ray(6), EventSpec::zebra_count(5)}) {
    Estimate one = estimate_mean(params, Probability(0.45), ev, 3001, 11, 1);
    Estimate four = estimate_mean(params, Probability(0.45), ev, 3001, 11, 4);
    EXPECT_EQ(one.mean, four.mean);
    EXPECT_EQ(one.std_error, four.std_error);
  }
}

TEST(Wilson, Bounds) {
  Interval none = wilson_interval(0, 50);
  EXPECT_EQ(none.low, 0.0);
  EXPECT_GT(none.high, 0.0);
  Interval all = wilson_interval(50, 50);
  EXPECT_EQ(all.high, 1.0);
  EXPECT_LT(all.low, 1.0);
  Interval mid = wilson_interval(30, 100);
  EXPECT_LT(mid.low, 0.3);
  EXPECT_GT(mid.high, 0.3);
  // Reference value from the closed-form score interval.
  EXPECT_NEAR(mid.low, 0.2189488529, 1e-9);
  EXPECT_NEAR(mid.high, 0.3958485463, 1e-9);
}

TEST(BruteForce, ExactValues) {
  TreeParams params(2);
  EXPECT_EQ(brute_force_probability_exact(params, Rational(1, 2), EventSpec::zebra_ray(2)), Rational(15, 16));
  EXPECT_EQ(brute_force_probability_exact(params, Rational(1, 2), EventSpec::open_ray(1)), Rational(3, 4));
  EXPECT_EQ(brute_force_probability(params, Probability(0.0), EventSpec::open_ray(2)), 0.0);
  EXPECT_EQ(brute_force_probability_exact(params, Rational(1, 2), EventSpec::zebra_count(2)), Rational(2));
  EXPECT_THROW(brute_force_probability(TreeParams(3), Probability(0.5), EventSpec::zebra_ray(3)), TooLarge);
}

TEST(BruteForce, MatchesRecursionsAtManyPoints) {
  for (RootMode mode : {RootMode::RootedK, RootMode::FullCayley}) {
    TreeParams params(2, mode);
    for (double pv : {0.1, 0.37, 0.5, 0.9}) {
      Probability p(pv);
      for (std::uint32_t d = 1; d <= 3; ++d) {
        if (mode == RootMode::FullCayley && d == 3) continue;  // 2^21 configurations; skipped for speed
        EXPECT_NEAR(brute_force_probability(params, p, EventSpec::zebra_ray(d)), zebra_dp(params, p, d).back().z.value(),
                    1e-12);
        EXPECT_NEAR(brute_force_probability(params, p, EventSpec::open_ray(d)), open_ray_probability(params, p, d).value(),
                    1e-12);
        EXPECT_NEAR(brute_force_probability(params, p, EventSpec::zebra_count(d)), expected_zebra_count(params, p, d),
                    1e-12);
      }
    }
  }
}

TEST(BruteForce, LazySamplerAgrees) {
  TreeParams params(2);
  Probability p(0.4);
  double exact = brute_force_probability(params, p, EventSpec::zebra_ray(3));
  Estimate e = estimate_probability(params, p, EventSpec::zebra_ray(3), 20'000, 5);
  EXPECT_NEAR(e.mean, exact, 4.0 * e.std_error);
}

TEST(Witness, FindsFirstAlternatingPath) {
  TreeParams params(2);
  SigmaConfig sigma(params, 2);
  sigma.set(EdgeId(VertexAddress{1}), EdgeState::Open);
  sigma.set(EdgeId(VertexAddress{1, 1}), EdgeState::Closed);
  sigma.set(EdgeId(VertexAddress{0}), EdgeState::Closed);
  sigma.set(EdgeId(VertexAddress{0, 0}), EdgeState::Closed);
  sigma.set(EdgeId(VertexAddress{0, 1}), EdgeState::Open);
  sigma.set(EdgeId(VertexAddress{1, 0}), EdgeState::Open);
  EXPECT_EQ(find_zebra_witness(sigma, EdgeState::Open), (VertexAddress{1, 1}));
  EXPECT_EQ(find_zebra_witness(sigma, EdgeState::Closed), (VertexAddress{0, 1}));
  SigmaConfig open(params, 2, EdgeState::Open);
  EXPECT_FALSE(find_zebra_witness(open, EdgeState::Open).has_value());
}

TEST(Transform, TrialExamples) {
  for (std::uint64_t t = 0; t < 200; ++t) {
    EXPECT_TRUE(transform_equivalence_trial(TreeParams(3), Probability(0.5), 2, rng::TrialStream(2, t)));
    EXPECT_TRUE(transform_equivalence_trial(TreeParams(2, RootMode::FullCayley), Probability(0.3), 3,
                                            rng::TrialStream(2, t)));
  }
  EXPECT_THROW(transform_equivalence_trial(TreeParams(2), Probability(0.5), 0, rng::TrialStream(2, 0)),
               InvalidArgument);
}

TEST(Critical, DpMatchesFormula) {
  for (std::uint32_t k : {3U, 4U, 6U}) {
    TreeParams params(k);
    CriticalPair pair = zebra_critical_pair(params);
    EXPECT_NEAR(find_critical_dp(params, Side::Lower).value(), pair.p_low.value(), 1e-3) << k;
    EXPECT_NEAR(find_critical_dp(params, Side::Upper).value(), pair.p_high.value(), 1e-3) << k;
  }
  EXPECT_THROW(find_critical_dp(TreeParams(2), Side::Lower), NoBracket);
}

TEST(Critical, MonteCarloNearFormula) {
  TreeParams params(3);
  CriticalPair pair = zebra_critical_pair(params);
  EXPECT_NEAR(find_critical_mc(params, Side::Lower, 16, 4000, 1).value(), pair.p_low.value(), 0.03);
  EXPECT_NEAR(find_critical_mc(params, Side::Upper, 16, 4000, 1).value(), pair.p_high.value(), 0.03);
  EXPECT_THROW(find_critical_mc(TreeParams(2), Side::Lower, 16, 100, 1), NoBracket);
}

}  // namespace
