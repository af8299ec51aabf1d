#include <gtest/gtest.h>

#include <random>

#include "equiride/elasticity.h"
#include "equiride/error.h"
#include "support.h"

using namespace equiride;

namespace {

struct Planted {
  double b0, alpha, b1, b2, b3, b4;
};

// Bins on the default 1.45 window with y drawn from the LPM itself.
std::vector<BinObservation> planted_bins(Planted const& p, double x_origin, double sigma = 0.0,
                                         std::uint64_t seed = 0) {
  auto const w = DiscontinuityWindow::above(SurgeLevel{14});
  std::mt19937_64 rng{seed};
  std::normal_distribution<double> noise{0.0, sigma > 0.0 ? sigma : 1.0};
  std::vector<BinObservation> out;
  for (std::size_t b = 0; b < w.bin_count(); ++b) {
    BinObservation o;
    o.x1 = w.bin_center(b);
    o.i2 = o.x1 > w.cutoff;
    o.i1 = std::abs(o.x1 - w.cutoff) <= w.near_band + 1e-12;
    double const i1 = o.i1, i2 = o.i2, x = o.x1 - x_origin;
    o.y = p.b0 + p.alpha * i1 * i2 + p.b1 * i1 + p.b2 * (1 - i1) * i2 + p.b3 * (1 - i2) * x +
          p.b4 * i2 * x;
    if (sigma > 0.0) o.y += noise(rng);
    out.push_back(o);
  }
  return out;
}

SurgeAnnotatedTrip at_surge(double s) {
  auto t = fixtures::annotated(10.0, discretize_surge(s).tenths);
  t.surge_continuous = s;
  return t;
}

}  // namespace

TEST(Window, GeometryAndValidation) {
  auto const w = DiscontinuityWindow::above(SurgeLevel{14});
  EXPECT_DOUBLE_EQ(w.cutoff, 1.45);
  EXPECT_EQ(w.bin_count(), 50u);
  EXPECT_NEAR(w.bin_center(0), 1.401, 1e-12);
  EXPECT_NO_THROW(w.validate());
  // the window edges land in distinct displayed levels
  EXPECT_EQ(discretize_surge(w.cutoff - w.half_width), SurgeLevel{14});
  EXPECT_EQ(discretize_surge(w.cutoff + w.half_width - 1e-9), SurgeLevel{15});

  DiscontinuityWindow bad = w;
  bad.near_band = 0.0;
  EXPECT_THROW(bad.validate(), argument_error);
  bad = w;
  bad.half_width = 0.06;
  EXPECT_THROW(bad.validate(), argument_error);
  bad = w;
  bad.bin_width = 0.003;
  EXPECT_THROW(bad.validate(), argument_error);
}

TEST(Lpm, ZeroNoiseRecoveryAtBothOrigins) {
  Planted const p{0.9, -0.2, 0.05, -0.1, 0.4, -0.7};
  for (double origin : {0.0, 1.45}) {
    auto const bins = planted_bins(p, origin);
    auto const f = fit_lpm(bins, origin);
    EXPECT_NEAR(f.beta0, p.b0, 1e-9);
    EXPECT_NEAR(f.alpha, p.alpha, 1e-9);
    EXPECT_NEAR(f.beta1, p.b1, 1e-9);
    EXPECT_NEAR(f.beta2, p.b2, 1e-9);
    EXPECT_NEAR(f.beta3, p.b3, 1e-9);
    EXPECT_NEAR(f.beta4, p.b4, 1e-9);
    EXPECT_EQ(f.n_obs, bins.size());
    EXPECT_NEAR(f.residual_variance, 0.0, 1e-20);
  }
}

TEST(Lpm, ConstantOutcome) {
  auto const bins = planted_bins({0.6, 0, 0, 0, 0, 0}, 0.0);
  auto const f = fit_lpm(bins, 1.45);
  EXPECT_NEAR(f.alpha, 0.0, 1e-12);
  EXPECT_NEAR(f.beta0, 0.6, 1e-12);
}

TEST(Lpm, NoisyAlphaWithinTolerance) {
  Planted const p{1.0, -0.2, 0.0, -0.1, 0.5, -0.5};
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    auto const f = fit_lpm(planted_bins(p, 1.45, 0.02, seed), 1.45);
    EXPECT_NEAR(f.alpha, -0.2, 0.05) << "seed " << seed;
  }
}

TEST(Lpm, TooFewOrDegenerateBins) {
  auto bins = planted_bins({1, 0, 0, 0, 0, 0}, 0.0);
  bins.resize(9);
  EXPECT_THROW(fit_lpm(bins, 0.0), estimation_error);
  // all bins left of the cutoff: the i2 columns vanish
  auto left = planted_bins({1, 0, 0, 0, 0, 0}, 0.0);
  left.resize(25);
  try {
    fit_lpm(left, 1.45);
    FAIL();
  } catch (estimation_error const& e) {
    EXPECT_NE(std::string{e.what()}.find("i1*i2"), std::string::npos) << e.what();
  }
}

TEST(Rdd, UniformCountsGiveUnitYAndNoJump) {
  auto const w = DiscontinuityWindow::above(SurgeLevel{14});
  std::vector<SurgeAnnotatedTrip> trips;
  for (std::size_t b = 0; b < w.bin_count(); ++b) {
    for (int k = 0; k < 20; ++k) trips.push_back(at_surge(w.bin_center(b)));
  }
  auto const bins = build_rdd_dataset(trips, w);
  for (auto const& b : bins) EXPECT_DOUBLE_EQ(b.y, 1.0);
  EXPECT_NEAR(fit_lpm(bins, w.cutoff).alpha, 0.0, 1e-12);
}

TEST(Rdd, PlantedDropShowsOnTheRight) {
  auto const w = DiscontinuityWindow::above(SurgeLevel{14});
  std::vector<SurgeAnnotatedTrip> trips;
  for (std::size_t b = 0; b < w.bin_count(); ++b) {
    int const n = w.bin_center(b) > w.cutoff ? 70 : 100;
    for (int k = 0; k < n; ++k) trips.push_back(at_surge(w.bin_center(b)));
  }
  trips.push_back(at_surge(1.0));  // clamped trips are ignored
  trips.push_back(at_surge(1.7));  // outside the window
  auto const bins = build_rdd_dataset(trips, w);
  for (auto const& b : bins) EXPECT_NEAR(b.y, b.i2 ? 0.7 : 1.0, 1e-12);
  EXPECT_NEAR(fit_lpm(bins, w.cutoff).alpha, -0.3, 1e-9);
}

TEST(Rdd, SampledDropNearPlantedRatio) {
  auto const w = DiscontinuityWindow::above(SurgeLevel{14});
  std::mt19937_64 rng{12};
  std::uniform_real_distribution<double> u{1.40, 1.50};
  std::uniform_real_distribution<double> keep;
  std::vector<SurgeAnnotatedTrip> trips;
  while (trips.size() < 100'000) {
    double const s = u(rng);
    if (s >= 1.45 && keep(rng) > 0.7) continue;
    trips.push_back(at_surge(s));
  }
  auto const bins = build_rdd_dataset(trips, w);
  double left = 0, right = 0;
  for (auto const& b : bins) (b.i2 ? right : left) += b.y;
  EXPECT_NEAR(right / left, 0.7, 0.03);
}

TEST(Rdd, EmptySideIsEstimationError) {
  auto const w = DiscontinuityWindow::above(SurgeLevel{14});
  std::vector<SurgeAnnotatedTrip> trips{at_surge(1.41), at_surge(1.43)};
  EXPECT_THROW(build_rdd_dataset(trips, w), estimation_error);
}

TEST(Elasticity, HandArithmetic) {
  LpmFit f;
  f.alpha = -0.01;
  f.n_obs = 50;
  auto const e = estimate_elasticity(f, SurgeLevel{14}, 0.05);
  EXPECT_NEAR(e.delta_p, 0.1 / 1.4 * 100.0, 1e-12);
  EXPECT_NEAR(e.e_p, -0.2 / (0.1 / 1.4 * 100.0), 1e-12);
  EXPECT_NEAR(e.e_p, -0.028, 5e-4);
  f.alpha = 0.0;
  EXPECT_EQ(estimate_elasticity(f, SurgeLevel{14}, 0.05).e_p, 0.0);
  EXPECT_THROW(estimate_elasticity(f, SurgeLevel{14}, 0.0), argument_error);
}

TEST(Elasticity, TableSkipsCutoffsWithoutData) {
  std::vector<SurgeAnnotatedTrip> trips;
  auto const w = DiscontinuityWindow::above(SurgeLevel{14});
  for (std::size_t b = 0; b < w.bin_count(); ++b) {
    for (int k = 0; k < 10; ++k) trips.push_back(at_surge(w.bin_center(b)));
  }
  trips.push_back(at_surge(1.7));
  auto const table = estimate_elasticities(trips);
  ASSERT_EQ(table.estimates.size(), 3u);  // 1.4, 1.5, 1.6
  EXPECT_FALSE(table.estimates[0].skipped);
  EXPECT_TRUE(table.estimates[1].skipped);
  EXPECT_TRUE(table.estimates[2].skipped);
  EXPECT_FALSE(table.estimates[1].skip_reason.empty());
  EXPECT_EQ(table.by_departure_level().size(), 1u);
  EXPECT_EQ(table.by_arrival_level().begin()->first, SurgeLevel{15});
}

TEST(Surplus, TwoLevelSuccessiveHandInstance) {
  LevelStats levels{{SurgeLevel{10}, {1000, 10.0}}, {SurgeLevel{11}, {400, 12.0}}};
  std::map<SurgeLevel, double> e{{SurgeLevel{11}, -0.5}};
  auto const r = consumer_surplus(Cohort::kEda, levels, e, SurplusMode::kSuccessive);
  EXPECT_DOUBLE_EQ(r.total_surplus, 20'000.0);
  EXPECT_DOUBLE_EQ(r.average_surplus, 20'000.0 / 1400.0);
  EXPECT_DOUBLE_EQ(r.per_level.at(SurgeLevel{11}).contribution, 0.0);
}

TEST(Surplus, ZeroElasticityAndSingleLevel) {
  LevelStats levels{{SurgeLevel{10}, {1000, 10.0}}, {SurgeLevel{12}, {400, 12.0}}};
  std::map<SurgeLevel, double> zero{{SurgeLevel{12}, 0.0}};
  EXPECT_EQ(consumer_surplus(Cohort::kEda, levels, zero, SurplusMode::kCumulative).total_surplus, 0.0);
  LevelStats one{{SurgeLevel{13}, {500, 9.0}}};
  EXPECT_EQ(consumer_surplus(Cohort::kEda, one, {}, SurplusMode::kCumulative).total_surplus, 0.0);
}

TEST(Surplus, MissingElasticityIsEstimationError) {
  LevelStats levels{{SurgeLevel{10}, {1000, 10.0}}, {SurgeLevel{11}, {400, 12.0}}};
  EXPECT_THROW(consumer_surplus(Cohort::kEda, levels, {}, SurplusMode::kSuccessive),
               estimation_error);
}

namespace {

// Independent reading of the affordability sum.
double oracle_surplus(LevelStats const& levels, std::map<SurgeLevel, double> const& e,
                      bool cumulative, double min_trips) {
  double total = 0.0;
  for (auto const& [s, ss] : levels) {
    if (ss.num_trips < min_trips) continue;
    for (auto const& [i, si] : levels) {
      if (si.num_trips < min_trips || !(s < i)) continue;
      if (!cumulative && i.tenths != s.tenths + 1) continue;
      double const pct = (i.multiplier() - s.multiplier()) / s.multiplier() * 100.0;
      total += -e.at(i) * si.num_trips * pct * ss.avg_fare;
    }
  }
  return total;
}

struct RandomMarket {
  LevelStats levels;
  std::map<SurgeLevel, double> e;
};

RandomMarket random_market(std::mt19937_64& rng) {
  RandomMarket m;
  std::uniform_int_distribution<int> n_levels{1, 12}, trips{0, 3000}, skip{0, 3};
  std::uniform_real_distribution<double> fare{3, 60}, el{-3.0, 0.0};
  int tenths = 10;
  for (int k = n_levels(rng); k > 0; --k) {
    m.levels[SurgeLevel{tenths}] = {static_cast<double>(trips(rng)), fare(rng)};
    m.e[SurgeLevel{tenths}] = el(rng);
    tenths += 1 + (skip(rng) == 0 ? 1 : 0);
  }
  return m;
}

}  // namespace

TEST(Surplus, MatchesOracleAndCumulativeDominates) {
  std::mt19937_64 rng{31};
  for (int round = 0; round < 200; ++round) {
    auto const m = random_market(rng);
    auto const cum = consumer_surplus(Cohort::kEda, m.levels, m.e, SurplusMode::kCumulative);
    auto const suc = consumer_surplus(Cohort::kEda, m.levels, m.e, SurplusMode::kSuccessive);
    double const oc = oracle_surplus(m.levels, m.e, true, 100.0);
    double const os = oracle_surplus(m.levels, m.e, false, 100.0);
    EXPECT_NEAR(cum.total_surplus, oc, 1e-9 * std::max(1.0, oc));
    EXPECT_NEAR(suc.total_surplus, os, 1e-9 * std::max(1.0, os));
    EXPECT_GE(cum.total_surplus, suc.total_surplus);
    double sum = 0;
    for (auto const& [lvl, ls] : cum.per_level) sum += ls.contribution;
    EXPECT_DOUBLE_EQ(sum, cum.total_surplus);
  }
}

TEST(Surplus, ScalesLinearlyWithFares) {
  std::mt19937_64 rng{32};
  for (int round = 0; round < 50; ++round) {
    auto m = random_market(rng);
    double const k = std::uniform_real_distribution<double>{0.1, 10.0}(rng);
    auto const base = consumer_surplus(Cohort::kEda, m.levels, m.e, SurplusMode::kCumulative);
    for (auto& [lvl, s] : m.levels) s.avg_fare *= k;
    auto const scaled = consumer_surplus(Cohort::kEda, m.levels, m.e, SurplusMode::kCumulative);
    EXPECT_NEAR(scaled.total_surplus, k * base.total_surplus, 1e-9 * std::max(1.0, scaled.total_surplus));
  }
}

TEST(Surplus, SparseLevelsContributeNothing) {
  LevelStats levels{{SurgeLevel{10}, {1000, 10.0}},
                    {SurgeLevel{11}, {99, 12.0}},
                    {SurgeLevel{12}, {300, 14.0}}};
  // no elasticity for 1.1: it must never be looked up
  std::map<SurgeLevel, double> e{{SurgeLevel{12}, -1.0}};
  auto const r = consumer_surplus(Cohort::kEda, levels, e, SurplusMode::kCumulative);
  EXPECT_FALSE(r.per_level.at(SurgeLevel{11}).included);
  EXPECT_DOUBLE_EQ(r.total_surplus, 1.0 * 300 * 20.0 * 10.0);
}

TEST(Surplus, TripOverloadUsesArrivalElasticity) {
  std::vector<SurgeAnnotatedTrip> trips;
  for (int i = 0; i < 1000; ++i) trips.push_back(fixtures::annotated(10.0, 10));
  for (int i = 0; i < 400; ++i) trips.push_back(fixtures::annotated(12.0, 11));
  ElasticityTable table;
  ElasticityEstimate e;
  e.surge_left = SurgeLevel{10};
  e.e_p = -0.5;
  table.estimates.push_back(e);
  auto const r = consumer_surplus(Cohort::kEda, trips, table, SurplusMode::kSuccessive);
  EXPECT_DOUBLE_EQ(r.total_surplus, 20'000.0);
}
