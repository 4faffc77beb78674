#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "d2d/model.hpp"
#include "d2d/validation.hpp"

using namespace d2d;

TEST(GainTable, DefaultPatternsGiveSectorProbabilities) {
  const NetworkConfig cfg;
  const GainTable t = cfg.gain_table();
  EXPECT_NEAR(t.entries[0].probability, 1.0 / 48.0, 1e-15);
  EXPECT_NEAR(t.entries[1].probability, 11.0 / 48.0, 1e-15);
  EXPECT_NEAR(t.entries[2].probability, 3.0 / 48.0, 1e-15);
  EXPECT_NEAR(t.entries[3].probability, 33.0 / 48.0, 1e-15);
  EXPECT_NEAR(t.entries[0].gain, 100.0, 1e-12);
  EXPECT_NEAR(t.entries[1].gain, 1.0, 1e-12);
  EXPECT_NEAR(t.entries[2].gain, 10.0, 1e-12);
  EXPECT_NEAR(t.entries[3].gain, 0.1, 1e-12);
  EXPECT_NEAR(t.boresight, 100.0, 1e-12);
}

TEST(GainTable, ArraySizeScalesEveryGain) {
  NetworkConfig cfg;
  const GainTable one = cfg.gain_table();
  cfg.antenna_elements = 10;
  const GainTable ten = cfg.gain_table();
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(ten.entries[i].gain, 100.0 * one.entries[i].gain, 1e-9);
    EXPECT_DOUBLE_EQ(ten.entries[i].probability, one.entries[i].probability);
  }
  EXPECT_NEAR(ten.boresight, 1e4, 1e-8);
}

TEST(GainTable, RejectsInvertedLobes) {
  EXPECT_THROW(build_gain_table(AntennaPattern::from_db(0, 10, 30), AntennaPattern::from_db(10, 0, 90), 1),
               ValidationError);
  EXPECT_THROW(build_gain_table(AntennaPattern::from_db(10, 0, 400), AntennaPattern::from_db(10, 0, 90), 1),
               ValidationError);
}

TEST(Channel, BlockageAndPathLoss) {
  const ChannelParams ch;
  EXPECT_NEAR(ch.blockage_rate, std::sqrt(2.0) / 30.0, 1e-15);
  EXPECT_DOUBLE_EQ(los_probability(0.0, ch), 1.0);
  EXPECT_NEAR(los_probability(30.0, ch), std::exp(-std::sqrt(2.0)), 1e-15);
  EXPECT_NEAR(path_loss(10.0, LinkState::Los, ch), ch.intercept_los / 100.0, 1e-20);
  EXPECT_NEAR(path_loss(10.0, LinkState::Nlos, ch), ch.intercept_nlos / 1e4, 1e-22);
  EXPECT_THROW(los_probability(-1.0, ch), DomainError);
}

TEST(Channel, FreeSpaceInterceptAt28GHz) {
  const double lambda = 299792458.0 / 28e9;
  EXPECT_NEAR(free_space_intercept(28e9), std::pow(lambda / (4.0 * std::numbers::pi), 2), 1e-18);
}

TEST(Noise, DefaultBandAndFigure) {
  // -174 dBm/Hz + 80 dB (100 MHz) + 10 dB NF - 23 dBm = -107 dB
  EXPECT_NEAR(default_noise_power(), std::pow(10.0, -10.7), 1e-22);
  EXPECT_NEAR(default_noise_power() / 2.0e-11, 1.0, 0.01);
}

TEST(NetworkConfig, Invariants) {
  NetworkConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.mean_active = 41;
  try {
    cfg.validate();
    FAIL() << "mean_active > M accepted";
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "mean_active");
  }
  cfg = {};
  cfg.mean_active = 0.5;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = {};
  cfg.channel.alpha_nlos = 1.5;
  EXPECT_THROW(cfg.validate(), ValidationError);
}

namespace {

double mass(const std::function<double(double)>& f, double lower, double upper) {
  return oracle::integrate(f, lower, upper);
}

}  // namespace

TEST(Distances, ServingDensitiesIntegrateToStatedMass) {
  NetworkConfig cfg;
  cfg.mean_active = 1.0;
  for (double v : {0.0, 15.0, 60.0}) {
    const double upper = v + 16.0 * cfg.scatter_std;
    const double eps = cfg.channel.blockage_rate;
    const double p_los = mass([&](double r) { return std::exp(-eps * r) * rician_pdf(r, v, cfg.variance()); }, 0.0,
                              upper);
    EXPECT_NEAR(mass([&](double r) { return serving_distance_pdf(AssociationModel::Uniform, r, v, cfg); }, 0, upper),
                1.0, 1e-9);
    EXPECT_NEAR(mass([&](double r) { return serving_distance_pdf(AssociationModel::Closest, r, v, cfg); }, 0, upper),
                1.0, 1e-9);
    EXPECT_NEAR(
        mass([&](double r) { return serving_distance_pdf(AssociationModel::ClosestLos, r, v, cfg); }, 0, upper),
        1.0 - std::pow(1.0 - p_los, cfg.cluster_tx_count), 1e-9);
  }
}

TEST(Distances, NearestLosTableMatchesDirectDensity) {
  NetworkConfig cfg;
  const double v = 25.0;
  const auto cdf = LosDistanceCdf::conditioned(cfg, v);
  for (double r : {1.0, 5.0, 12.0, 30.0, 70.0}) {
    const double tabulated = closest_los_serving_pdf(r, cdf, cfg.cluster_tx_count);
    const double direct = serving_distance_pdf(AssociationModel::ClosestLos, r, v, cfg);
    EXPECT_NEAR(tabulated, direct, 1e-7 * std::max(1e-3, direct)) << "r = " << r;
  }
}

TEST(Distances, TruncatedInterfererDensity) {
  const NetworkConfig cfg;
  const double v = 10.0;
  const double r = 18.0;
  EXPECT_EQ(interferer_distance_pdf(AssociationModel::Closest, 17.9, v, r, cfg), 0.0);
  EXPECT_GT(interferer_distance_pdf(AssociationModel::Closest, 18.1, v, r, cfg), 0.0);
  // the NLOS group of the nearest-LOS model is not truncated
  EXPECT_NEAR(interferer_distance_pdf(AssociationModel::ClosestLos, 5.0, v, r, cfg, LinkState::Nlos),
              rician_pdf(5.0, v, cfg.variance()), 1e-16);
  const double upper = v + 16.0 * cfg.scatter_std;
  EXPECT_NEAR(mass([&](double s) { return interferer_distance_pdf(AssociationModel::Closest, s, v, r, cfg); }, r,
                   upper),
              1.0, 1e-9);
}

TEST(Distances, UnconditionedClosestIsRayleighMinimum) {
  // min of M iid Ra(2 sigma^2) is Ra(2 sigma^2 / M)
  NetworkConfig cfg;
  for (double r : {0.5, 3.0, 8.0}) {
    EXPECT_NEAR(serving_distance_pdf_approx(AssociationModel::Closest, r, cfg),
                rayleigh_pdf(r, 2.0 * cfg.variance() / cfg.cluster_tx_count), 1e-12);
  }
}

TEST(Models, NamesRoundTrip) {
  for (auto m : kAllModels) EXPECT_EQ(parse_association_model(to_string(m)), m);
  EXPECT_THROW(parse_association_model("nearest"), UsageError);
}
