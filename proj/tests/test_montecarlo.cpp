#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "d2d/analytical.hpp"
#include "d2d/config.hpp"
#include "d2d/montecarlo.hpp"

using namespace d2d;

TEST(Rng, ReproducibleAndDistinctPerTrial) {
  TrialRng a(42, 7);
  TrialRng b(42, 7);
  TrialRng c(42, 8);
  TrialRng d(43, 7);
  const auto x = a();
  EXPECT_EQ(x, b());
  EXPECT_NE(x, c());
  EXPECT_NE(x, d());
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}

TEST(Blockage, Modes) {
  const ChannelParams ch;
  EXPECT_THROW(BlockageMode::los_ball(0.0), DomainError);
  const auto ball = BlockageMode::los_ball_median(ch);
  EXPECT_NEAR(ball.radius, std::numbers::ln2 / ch.blockage_rate, 1e-12);
  EXPECT_NEAR(los_probability(ball.radius, ch), 0.5, 1e-12);
  EXPECT_TRUE(ball.is_los(ball.radius - 1e-9, 0.99, ch));
  EXPECT_FALSE(ball.is_los(ball.radius + 1e-9, 0.0, ch));
  EXPECT_TRUE(BlockageMode::all_los().is_los(1e6, 0.99, ch));
  const auto iid = BlockageMode::iid_exponential();
  EXPECT_TRUE(iid.is_los(30.0, los_probability(30.0, ch) - 1e-9, ch));
  EXPECT_FALSE(iid.is_los(30.0, los_probability(30.0, ch) + 1e-9, ch));
}

TEST(Realization, StructuralInvariants) {
  const NetworkConfig cfg;
  const GainTable table = cfg.gain_table();
  NetworkRealization r;
  for (std::uint64_t t = 0; t < 200; ++t) {
    TrialRng rng(5, t);
    sample_realization(cfg, table, BlockageMode::iid_exponential(), rng, r);
    ASSERT_EQ(static_cast<int>(r.candidates.size()), cfg.cluster_tx_count);
    EXPECT_LE(r.intra_count, cfg.cluster_tx_count - 1);
    for (const auto& l : r.candidate_links) {
      EXPECT_TRUE(std::isfinite(l.distance));
      EXPECT_GT(l.fading, 0.0);
    }
    r.associate(AssociationModel::Closest);
    ASSERT_TRUE(r.serving.has_value());
    for (const auto& l : r.candidate_links) EXPECT_GE(l.distance, r.candidate_links[*r.serving].distance);
    int counted = 0;
    r.for_each_intra([&](const Link&) { ++counted; });
    EXPECT_EQ(counted, r.intra_count);
  }
}

TEST(Realization, NoLosCandidateMeansNoCoverage) {
  const NetworkConfig cfg;
  const GainTable table = cfg.gain_table();
  NetworkRealization r;
  TrialRng rng(1, 0);
  sample_realization(cfg, table, BlockageMode::los_ball(1e-6), rng, r);
  r.associate(AssociationModel::ClosestLos);
  EXPECT_FALSE(r.serving.has_value());
  EXPECT_EQ(simulate_sinr(r, cfg, table, {}), 0.0);
}

TEST(Sinr, OptionsNeedADenominator) {
  SinrOptions o;
  o.include_intra = false;
  o.include_inter = false;
  o.include_noise = false;
  EXPECT_THROW(o.validate(), UsageError);
  o.include_noise = true;
  EXPECT_NO_THROW(o.validate());
}

// Kolmogorov-Smirnov: nearest of M devices around a centre at distance v has
// CDF 1 - Q1(v / sigma, r / sigma)^M.
TEST(Sampling, NearestDistanceMatchesMarcumLaw) {
  NetworkConfig cfg;
  cfg.scatter_std = 20.0;
  const double v = 30.0;
  const GainTable table = cfg.gain_table();
  NetworkRealization r;
  std::vector<double> d;
  const int n = 4000;
  for (int t = 0; t < n; ++t) {
    TrialRng rng(11, static_cast<std::uint64_t>(t));
    sample_realization(cfg, table, BlockageMode::iid_exponential(), rng, r, v, 0.0);
    r.associate(AssociationModel::Closest);
    d.push_back(r.candidate_links[*r.serving].distance);
  }
  std::sort(d.begin(), d.end());
  double ks = 0.0;
  for (int i = 0; i < n; ++i) {
    const double f = 1.0 - std::pow(marcum_q1(v / cfg.scatter_std, d[i] / cfg.scatter_std), cfg.cluster_tx_count);
    ks = std::max({ks, std::abs(f - static_cast<double>(i) / n), std::abs(f - static_cast<double>(i + 1) / n)});
  }
  // 1% critical value
  EXPECT_LT(ks, 1.63 / std::sqrt(n));
}

TEST(Sampling, GammaFadingHasUnitMean) {
  const NetworkConfig cfg;
  const GainTable table = cfg.gain_table();
  detail::LinkSampler sampler(cfg, table, BlockageMode::all_los(), 0.0);
  double sum = 0.0;
  double sum_sq = 0.0;
  const int n = 200000;
  for (int t = 0; t < n; ++t) {
    TrialRng rng(3, static_cast<std::uint64_t>(t));
    const double g = sampler.link(Point2{10.0, 0.0}, rng).fading;
    sum += g;
    sum_sq += g * g;
  }
  const double mean = sum / n;
  EXPECT_NEAR(mean, 1.0, 0.01);
  // normalised Gamma(N, 1/N): variance 1/N
  EXPECT_NEAR(sum_sq / n - mean * mean, 1.0 / cfg.channel.nakagami_los, 0.01);
}

TEST(Estimate, HalfWidthAndBounds) {
  const auto e = make_estimate(250, 1000, 9);
  EXPECT_DOUBLE_EQ(e.p_hat, 0.25);
  EXPECT_NEAR(e.half_width_95, 1.96 * std::sqrt(0.25 * 0.75 / 1000.0), 1e-15);
  EXPECT_EQ(e.seed, 9u);
  EXPECT_NEAR(e.standard_error(), std::sqrt(0.25 * 0.75 / 1000.0), 1e-15);
}

TEST(Estimate, IndependentOfThreadCount) {
  const NetworkConfig cfg;
  SimulationSettings sim;
  sim.n_trials = 9000;
  sim.seed = 77;
  const double th[] = {1.0, 100.0};
  sim.threads = 1;
  const auto one = estimate_coverage_grid(cfg, kAllModels, th, sim);
  sim.threads = 4;
  const auto four = estimate_coverage_grid(cfg, kAllModels, th, sim);
  for (std::size_t m = 0; m < 3; ++m) {
    for (std::size_t j = 0; j < 2; ++j) EXPECT_EQ(one[m][j].p_hat, four[m][j].p_hat);
  }
  // variants share realizations: the full-options slice equals the plain grid
  const SinrOptions variants[] = {SinrOptions{}, SinrOptions{}};
  const auto cube = estimate_coverage_variants(cfg, kAllModels, variants, th, sim);
  EXPECT_EQ(cube[1][1][1].p_hat, one[1][1].p_hat);
}

TEST(Estimate, AgreesWithAnalyticalAtSmallCluster) {
  NetworkConfig cfg;
  cfg.mean_active = 2.0;
  SimulationSettings sim;
  sim.n_trials = 20000;
  sim.seed = 2024;
  const auto mc = estimate_coverage(cfg, AssociationModel::Uniform, cfg.sinr_threshold, sim);
  const double an = coverage(AssociationModel::Uniform, cfg.sinr_threshold, {}, cfg).value;
  EXPECT_NEAR(mc.p_hat, an, 4.0 * mc.standard_error() + 0.01);
}

TEST(LaplaceOracle, UniformIntraAgreesWithTransform) {
  const NetworkConfig cfg;
  const std::vector<LaplacePoint> pts = {{1e6, 1}, {1e7, 2}, {1e8, 1}};
  const LaplaceCondition cond{20.0, 0.0};
  const auto est = laplace_oracle(cfg, AssociationModel::Uniform, InterferenceSource::Intra, pts, cond, 50000, 8);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double a = laplace_intra(AssociationModel::Uniform, pts[i].n, pts[i].s, 20.0, std::nullopt, {}, cfg);
    EXPECT_NEAR(est[i].mean, a, 4.0 * est[i].standard_error);
  }
}
