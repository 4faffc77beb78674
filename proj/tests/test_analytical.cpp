#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "d2d/analytical.hpp"
#include "d2d/config.hpp"
#include "d2d/validation.hpp"

using namespace d2d;

namespace {

NetworkConfig table_two() { return ConfigSource{}.build(); }

}  // namespace

TEST(Constants, GammaTailBound) {
  EXPECT_DOUBLE_EQ(gamma_bound_constant(1), 1.0);
  EXPECT_NEAR(gamma_bound_constant(2), 2.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(gamma_bound_constant(3), 3.0 * std::pow(6.0, -1.0 / 3.0), 1e-15);
}

TEST(Constants, BinomialAndCompensatedSum) {
  EXPECT_DOUBLE_EQ(detail::binomial(10, 3), 120.0);
  EXPECT_DOUBLE_EQ(detail::binomial(5, 0), 1.0);
  std::vector<double> terms = {1e16, 1.0, -1e16, 1.0};
  EXPECT_DOUBLE_EQ(detail::compensated_sum(terms), 2.0);
}

TEST(LowerBound, PsiMatchesGammaFunctionForm) {
  for (double alpha : {2.25, 3.0, 3.76, 4.0}) {
    for (int n : {1, 2, 3, 5}) {
      EXPECT_NEAR(lower_bound_psi(alpha, n), oracle::lower_bound_psi(alpha, n),
                  1e-9 * oracle::lower_bound_psi(alpha, n))
          << alpha << ", " << n;
    }
  }
}

TEST(LowerBound, UnavailableAtFreeSpaceLosExponent) {
  EXPECT_THROW(coverage_lower_bound(100.0, table_two()), DomainError);
}

TEST(LowerBound, InUnitIntervalAndDecreasingInThreshold) {
  ConfigSource src;
  src.set("frequency_preset", "60");
  src.set("scatter_std", "10");
  src.set("mean_active", "10");
  const NetworkConfig cfg = src.build();
  double prev = 1.0;
  for (double db = 0.0; db <= 40.0; db += 5.0) {
    const double lb = coverage_lower_bound(db_to_linear(db), cfg);
    EXPECT_GE(lb, 0.0);
    EXPECT_LE(lb, prev + 1e-12);
    prev = lb;
  }
  // single active device: no interference, bound is 1
  NetworkConfig alone = cfg;
  alone.mean_active = 1.0;
  EXPECT_NEAR(coverage_lower_bound(100.0, alone), 1.0, 1e-12);
}

TEST(Laplace, TrivialArguments) {
  const NetworkConfig cfg = table_two();
  EXPECT_DOUBLE_EQ(laplace_intra(AssociationModel::Uniform, 1, 0.0, 20.0, std::nullopt, {}, cfg), 1.0);
  EXPECT_DOUBLE_EQ(laplace_inter(2, 0.0, cfg), 1.0);
  NetworkConfig alone = cfg;
  alone.mean_active = 1.0;
  EXPECT_DOUBLE_EQ(laplace_intra(AssociationModel::Closest, 1, 1e7, 20.0, 10.0, {}, alone), 1.0);
}

TEST(Laplace, DecreasingInArgument) {
  const NetworkConfig cfg = table_two();
  double prev_intra = 1.0;
  double prev_inter = 1.0;
  for (double s = 1e5; s < 1e11; s *= 10.0) {
    const double intra = laplace_intra(AssociationModel::Uniform, 1, s, 20.0, std::nullopt, {}, cfg);
    const double inter = laplace_inter(1, s, cfg);
    EXPECT_LT(intra, prev_intra);
    EXPECT_LT(inter, prev_inter);
    EXPECT_GT(inter, 0.0);
    prev_intra = intra;
    prev_inter = inter;
  }
}

TEST(Laplace, TruncationReducesIntraInterference) {
  const NetworkConfig cfg = table_two();
  const double s = 1e7;
  const double uniform = laplace_intra(AssociationModel::Uniform, 1, s, 20.0, std::nullopt, {}, cfg);
  const double closest = laplace_intra(AssociationModel::Closest, 1, s, 20.0, 15.0, {}, cfg);
  EXPECT_GT(closest, uniform);
}

TEST(Laplace, ArgumentChecks) {
  const NetworkConfig cfg = table_two();
  EXPECT_THROW(laplace_intra(AssociationModel::Closest, 1, 1e6, 20.0, std::nullopt, {}, cfg), UsageError);
  EXPECT_THROW(laplace_intra(AssociationModel::Uniform, 0, 1e6, 20.0, std::nullopt, {}, cfg), DomainError);
  CoverageFlags special;
  special.use_assumption2 = true;
  EXPECT_THROW(laplace_intra(AssociationModel::Closest, 1, 1e6, 20.0, 10.0, special, cfg), UsageError);
  EXPECT_THROW(laplace_inter(1, -1.0, cfg), DomainError);
}

TEST(InterTable, InterpolatesDirectExponent) {
  const NetworkConfig cfg = table_two();
  const InterferenceIntegrals integrals(cfg, cfg.gain_table(), {});
  const InterLaplaceTable table(integrals);
  EXPECT_GT(table.size(), 10u);
  for (double t : {3e6, 4.4e7, 1.7e8, 9e8, 6e9}) {
    const double direct = integrals.inter_exponent(t);
    EXPECT_NEAR(std::exp(-table.exponent(t)), std::exp(-direct), 1e-5) << "t = " << t;
  }
  EXPECT_EQ(table.exponent(0.0), 0.0);
}

// Regression values at the default configuration (sigma 20, mean active 5,
// 20 dB), corroborated against 1e5-trial simulation (within 0.005).
TEST(Coverage, DefaultConfigurationValues) {
  const NetworkConfig cfg = table_two();
  const CoverageEngine engine(cfg);
  const double gamma = cfg.sinr_threshold;
  const auto u = engine.coverage(AssociationModel::Uniform, gamma);
  const auto c = engine.coverage(AssociationModel::Closest, gamma);
  const auto l = engine.coverage(AssociationModel::ClosestLos, gamma);
  EXPECT_NEAR(u.value, 0.138223, 2e-4);
  EXPECT_NEAR(c.value, 0.710862, 2e-4);
  EXPECT_NEAR(l.value, 0.827019, 2e-4);
  EXPECT_TRUE(u.is_upper_bound);
  EXPECT_EQ(l.variant, "closest_los");
  EXPECT_LE(u.value, c.value);
  EXPECT_LE(c.value, l.value);
}

TEST(Coverage, SpecialCaseRestrictedToUniform) {
  const NetworkConfig cfg = table_two();
  CoverageFlags special;
  special.use_assumption2 = true;
  EXPECT_THROW(coverage(AssociationModel::Closest, 100.0, special, cfg), UsageError);
  const auto r = coverage(AssociationModel::Uniform, 100.0, special, cfg);
  EXPECT_GE(r.value, 0.0);
  EXPECT_LE(r.value, 1.0);
  EXPECT_EQ(r.variant, "uniform+intra_los_only");
}

TEST(Coverage, NonIncreasingInThresholdAndNonDecreasingInBoresight) {
  NetworkConfig cfg = table_two();
  CoverageFlags approx;
  approx.use_assumption1 = true;
  GainTable table = cfg.gain_table();
  const CoverageEngine base(cfg, table);
  table.boresight *= 3.0;
  const CoverageEngine boosted(cfg, table);
  double prev = 1.0;
  for (double db : {0.0, 10.0, 20.0, 30.0}) {
    const double p = base.coverage(AssociationModel::Closest, db_to_linear(db), approx).value;
    EXPECT_LE(p, prev + 1e-9);
    EXPECT_GE(boosted.coverage(AssociationModel::Closest, db_to_linear(db), approx).value, p - 1e-9);
    prev = p;
  }
}

TEST(Coverage, RejectsNonPositiveThreshold) {
  EXPECT_THROW(CoverageEngine(table_two()).coverage(AssociationModel::Uniform, 0.0), DomainError);
}

TEST(Ase, Arithmetic) {
  const NetworkConfig cfg = table_two();
  // 5 * 150e-6 * log2(101) * 0.4
  EXPECT_NEAR(ase_from_coverage(0.4, 100.0, cfg), 5.0 * 150e-6 * std::log2(101.0) * 0.4, 1e-18);
  EXPECT_NEAR(ase_from_coverage(0.4, 100.0, cfg), 1.9975e-3, 1e-6);
}

TEST(Ase, OptimizerScansEveryCountAndPrefersSmallerOnTies) {
  NetworkConfig cfg = table_two();
  // s exp(-s / 10) peaks at s = 10
  const auto best = optimize_mean_active(cfg, 100.0, [](int s) { return std::exp(-s / 10.0); });
  EXPECT_EQ(best.mean_active, 10);
  EXPECT_EQ(best.curve.size(), 40u);
  // exact tie between 2 * 0.5 and 4 * 0.25: smaller count wins
  const auto tie = optimize_mean_active(cfg, 100.0, [](int s) { return s == 2 ? 0.5 : s == 4 ? 0.25 : 0.0; });
  EXPECT_EQ(tie.mean_active, 2);
}

TEST(Engine, SharedAcrossThreads) {
  const NetworkConfig cfg = table_two();
  const CoverageEngine engine(cfg);
  CoverageFlags approx;
  approx.use_assumption1 = true;
  std::vector<double> a(4);
  std::vector<double> b(4);
  parallel_for(4, 4, [&](std::size_t i) { a[i] = engine.coverage(kAllModels[i % 3], 10.0 + i, approx).value; });
  for (std::size_t i = 0; i < 4; ++i) b[i] = engine.coverage(kAllModels[i % 3], 10.0 + i, approx).value;
  EXPECT_EQ(a, b);
}
