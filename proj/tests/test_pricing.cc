#include <gtest/gtest.h>

#include <random>

#include "equiride/error.h"
#include "equiride/ingest.h"
#include "equiride/pricing.h"
#include "support.h"

using namespace equiride;
using fixtures::OracleStratum;

namespace {

RegionMap thirds() {
  RegionMap r;
  r.eda_areas = {"1"};
  r.populations = default_populations(3000.0);
  return r;
}

ElasticityTable table_of(std::map<int, double> const& by_tenths) {
  ElasticityTable t;
  for (auto const& [tenths, e] : by_tenths) {
    ElasticityEstimate est;
    est.surge_left = SurgeLevel{tenths};
    est.e_p = e;
    t.estimates.push_back(est);
  }
  return t;
}

// Fares priced exactly by a known linear rule in the regression features.
std::vector<SurgeAnnotatedTrip> planted_eda_trips(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng{seed};
  std::uniform_real_distribution<double> secs{200, 3000}, miles{0.5, 20};
  std::vector<SurgeAnnotatedTrip> out;
  for (std::size_t i = 0; i < n; ++i) {
    int const hour = static_cast<int>(rng() % 24);
    int const tenths = 10 + static_cast<int>(rng() % 8);
    auto t = fixtures::annotated(0.0, tenths, Cohort::kEda, hour, std::to_string(1 + rng() % 77));
    t.trip.duration_s = std::round(secs(rng));
    t.trip.distance_mi = std::round(miles(rng) * 10) / 10;
    double const bucket = static_cast<double>(area_bucket(t.trip.pickup_area, 16));
    t.trip.fare = 4.0 + 0.003 * t.trip.duration_s + 1.1 * t.trip.distance_mi +
                  2.5 * t.surge_displayed.multiplier() + 0.2 * hour + 0.15 * bucket;
    out.push_back(t);
  }
  return out;
}

}  // namespace

TEST(Policies, PaperAndFloorExamples) {
  auto const t12 = fixtures::annotated(12.0, 10);
  auto const t10 = fixtures::annotated(10.0, 10);
  auto const t3 = fixtures::annotated(3.0, 10);
  FlatDiscountPolicy const flat{5.0};
  EXPECT_DOUBLE_EQ(flat.price(t12), 7.0);
  EXPECT_DOUBLE_EQ(flat.price(t3), 2.5);
  EXPECT_EQ(flat.name(), "Baseline (-$5)");
  EXPECT_NEAR(FixedDiscountPolicy{0.42}.price(t10), 5.80, 1e-12);
  EXPECT_DOUBLE_EQ(StatusQuoPolicy{}.price(t12), 12.0);
  EXPECT_THROW(FixedDiscountPolicy{1.0}, argument_error);
  EXPECT_THROW(FlatDiscountPolicy{-1.0}, argument_error);

  std::vector<SurgeAnnotatedTrip> trips{t12, t3};
  EXPECT_EQ(apply_policy(trips, flat), (std::vector<double>{7.0, 2.5}));
}

TEST(Demand, UpliftArithmetic) {
  EXPECT_DOUBLE_EQ(demand_uplift(10.0, 9.0, -0.8, 100), 108.0);
  EXPECT_DOUBLE_EQ(demand_uplift(10.0, 10.0, -0.8, 100), 100.0);
  EXPECT_DOUBLE_EQ(demand_uplift(10.0, 3.0, 0.0, 100), 100.0);
  EXPECT_DOUBLE_EQ(expected_demand(10.0, 30.0, -1.0, 100), 0.0);
  EXPECT_THROW(demand_uplift(0.0, 1.0, -1.0, 10), argument_error);
  EXPECT_THROW(demand_uplift(1.0, 1.0, -1.0, -1), argument_error);
}

TEST(FairRide, PlantedLinearFaresFitExactly) {
  auto const trips = planted_eda_trips(3000, 1);
  auto const m = train_fairride(trips);
  EXPECT_TRUE(m.eda_only);
  EXPECT_TRUE(m.dropped.empty());
  for (auto const& t : trips) EXPECT_NEAR(m.predict(t), t.trip.fare, 1e-6);
  auto const c = m.coefficient_map();
  EXPECT_NEAR(c.at("distance_mi"), 1.1, 1e-8);
  EXPECT_NEAR(c.at("hour_05"), 1.0, 1e-8);
}

TEST(FairRide, RejectsNonEdaTrips) {
  auto trips = planted_eda_trips(1500, 2);
  trips.push_back(fixtures::annotated(10.0, 10, Cohort::kNonEda));
  EXPECT_THROW(train_fairride(trips), argument_error);
  EXPECT_NO_THROW(train_pooled_ols(trips));
}

TEST(FairRide, TooFewTripsIsDataError) {
  EXPECT_THROW(train_fairride(planted_eda_trips(999, 3)), data_error);
}

TEST(FairRide, ConstantFareAndDroppedColumns) {
  auto trips = planted_eda_trips(1200, 4);
  for (auto& t : trips) {
    t.trip.fare = 9.75;
    t.trip.start_time = fixtures::at_hour(8);  // every other hour column is all zero
  }
  auto const m = train_fairride(trips);
  EXPECT_NEAR(m.intercept(), 9.75, 1e-9);
  for (Eigen::Index j = 1; j < m.coefficients.size(); ++j) EXPECT_NEAR(m.coefficients(j), 0.0, 1e-9);
  // hour_08 duplicates the intercept; the other 22 hour columns are all zero
  EXPECT_EQ(m.dropped.size(), 23u);
  EXPECT_NE(std::find(m.dropped.begin(), m.dropped.end(), "hour_05"), m.dropped.end());
}

TEST(FairRide, PredictionIsFloored) {
  auto const trips = planted_eda_trips(1500, 5);
  auto m = train_fairride(trips);
  m.coefficients *= -1.0;
  EXPECT_DOUBLE_EQ(m.predict(trips[0]), kDefaultPriceFloor);
}

TEST(Strata, BuildDemandCountsAndElasticityChoice) {
  std::vector<SurgeAnnotatedTrip> trips;
  for (int i = 0; i < 3; ++i) trips.push_back(fixtures::annotated(10, 12, Cohort::kEda, 8));
  trips.push_back(fixtures::annotated(14, 13, Cohort::kEda, 8));
  trips.push_back(fixtures::annotated(20, 20, Cohort::kEda, 9));  // nearest estimate is 1.3
  trips.push_back(fixtures::annotated(50, 10, Cohort::kNonEda, 9));
  auto const d = build_demand(trips, table_of({{12, -1.5}, {13, -0.7}}));
  ASSERT_EQ(d.strata.size(), 2u);
  auto const& a = d.strata.at(StratumKey{8, "1", "2"});
  EXPECT_EQ(a.trip_count, 4.0);
  EXPECT_DOUBLE_EQ(a.avg_price, 11.0);
  EXPECT_EQ(a.modal_level, SurgeLevel{12});
  EXPECT_EQ(a.elasticity, -1.5);
  EXPECT_EQ(d.strata.at(StratumKey{9, "1", "2"}).elasticity, -0.7);
  EXPECT_EQ(d.trip_count(), 5.0);
  EXPECT_DOUBLE_EQ(d.revenue(), 64.0);
  EXPECT_THROW(build_demand(trips, ElasticityTable{}), estimation_error);
}

TEST(Scenario, Validation) {
  PricingScenario s;
  s.n = 0.0;
  EXPECT_THROW(s.validate(), config_error);
  s.n = 1.0;
  EXPECT_NO_THROW(s.validate());
  s.kind = ScenarioKind::kPlatformFunded;
  s.p_min = 0.0;
  EXPECT_THROW(s.validate(), config_error);
  s.p_min = 12;
  s.r = 0.0;
  EXPECT_THROW(s.validate(), config_error);
  s.r.reset();
  s.grid_step = 0.0;
  EXPECT_THROW(s.validate(), config_error);
  EXPECT_EQ(scenario_kind_from_string("PLATFORM_FUNDED"), ScenarioKind::kPlatformFunded);
  EXPECT_THROW(scenario_kind_from_string("charity"), config_error);
}

TEST(Solver, SingleStratumByHand) {
  auto const demand = fixtures::demand_from({{100, 10.0, -0.8}});
  PricingScenario s;
  s.n = 0.3;
  s.grid_step = 0.1;
  auto const sol = solve_fixedfairride(demand, s);
  ASSERT_TRUE(sol.feasible);
  EXPECT_NEAR(sol.delta, 0.2, 1e-12);
  EXPECT_EQ(sol.eta, 116.0);
  EXPECT_NEAR(sol.revenue, 116 * 10.0, 1e-9);  // gross: riders plus subsidy
  EXPECT_NEAR(sol.subsidy, 116 * 2.0, 1e-9);
  EXPECT_EQ(sol.baseline_eta, 100.0);
  ASSERT_EQ(sol.grid.size(), 3u);
  EXPECT_FALSE(sol.grid[2].feasible);
}

TEST(Solver, GovernmentMonotoneTakesLargestPointBelowCeiling) {
  std::mt19937_64 rng{51};
  for (int round = 0; round < 20; ++round) {
    auto const strata = fixtures::random_strata(rng, 10, -3.0, -0.5);
    PricingScenario s;
    s.n = 0.3;
    auto const sol = solve_fixedfairride(fixtures::demand_from(strata), s);
    ASSERT_TRUE(sol.feasible);
    EXPECT_NEAR(sol.delta, 0.29, 1e-12);
  }
}

TEST(Solver, MatchesBruteForceInBothScenarios) {
  std::mt19937_64 rng{52};
  int feasible = 0, infeasible = 0;
  for (int round = 0; round < 400; ++round) {
    auto const strata = fixtures::random_strata(rng, 10, -4.0, -0.2);
    auto const demand = fixtures::demand_from(strata);
    PricingScenario s;
    s.grid_step = round % 3 == 0 ? 0.05 : 0.01;
    bool const gov = round % 2 == 0;
    double r = 0.0;
    for (auto const& st : strata) r += st.count * st.avg_price;
    if (gov) {
      s.kind = ScenarioKind::kGovernmentSubsidy;
      s.n = std::uniform_real_distribution<double>{0.01, 1.0}(rng);
    } else {
      s.kind = ScenarioKind::kPlatformFunded;
      s.p_min = std::uniform_real_distribution<double>{2.0, 30.0}(rng);
    }
    auto const oracle = fixtures::brute_force(strata, gov, s.n, s.p_min, r, s.grid_step);
    auto const sol = solve_fixedfairride(demand, s);
    ASSERT_EQ(sol.feasible, oracle.feasible) << "round " << round;
    EXPECT_EQ(sol.grid.size(), oracle.grid_points);
    if (oracle.feasible) {
      ++feasible;
      EXPECT_NEAR(sol.delta, oracle.delta, s.grid_step / 10) << "round " << round;
      EXPECT_EQ(sol.eta, oracle.eta);
    } else {
      ++infeasible;
      for (auto const& g : sol.grid) EXPECT_FALSE(g.feasible);
    }
  }
  EXPECT_GT(feasible, 50);
  EXPECT_GT(infeasible, 20);
}

TEST(Solver, OptimalDiscountFallsAsDriverFloorRises) {
  std::mt19937_64 rng{53};
  for (int round = 0; round < 100; ++round) {
    auto const demand = fixtures::demand_from(fixtures::random_strata(rng, 10, -5.0, -1.2));
    double prev = 2.0;
    for (double p_min = 2.0; p_min <= 40.0; p_min += 1.0) {
      PricingScenario s;
      s.kind = ScenarioKind::kPlatformFunded;
      s.p_min = p_min;
      auto const sol = solve_fixedfairride(demand, s);
      double const delta = sol.feasible ? sol.delta : 0.0;
      EXPECT_LE(delta, prev + 1e-12) << "round " << round << " p_min " << p_min;
      prev = delta;
    }
  }
}

TEST(Solver, RevenueIdentityAtZeroDiscount) {
  std::mt19937_64 rng{54};
  for (int round = 0; round < 50; ++round) {
    auto const demand = fixtures::demand_from(fixtures::random_strata(rng));
    auto const g = evaluate_discount(demand, PricingScenario{}, 0.0);
    EXPECT_DOUBLE_EQ(g.eta, demand.trip_count());
    EXPECT_NEAR(g.revenue, demand.revenue(), 1e-9 * demand.revenue());
  }
}

TEST(Solver, InfeasibleReturnsFullAudit) {
  auto const demand = fixtures::demand_from({{100, 10.0, -0.5}, {50, 20.0, -0.3}});
  PricingScenario s;
  s.kind = ScenarioKind::kPlatformFunded;
  s.p_min = 12;
  auto const sol = solve_fixedfairride(demand, s);
  EXPECT_FALSE(sol.feasible);
  EXPECT_EQ(sol.grid.size(), 100u);
  for (std::size_t k = 0; k < sol.grid.size(); ++k) {
    EXPECT_NEAR(sol.grid[k].delta, (k + 1) * 0.01, 1e-12);
    EXPECT_FALSE(sol.grid[k].feasible);
  }
}

namespace {

struct Market {
  std::vector<SurgeAnnotatedTrip> trips;
  ElasticityTable table;
};

Market random_market(std::mt19937_64& rng) {
  Market m;
  std::uniform_real_distribution<double> fare{3, 45}, e{-3.0, -0.1};
  int const n = 200 + static_cast<int>(rng() % 800);
  for (int i = 0; i < n; ++i) {
    int const tenths = 10 + static_cast<int>(rng() % 5);
    bool const eda = rng() % 3 == 0;
    m.trips.push_back(fixtures::annotated(std::round(fare(rng) * 4) / 4, tenths,
                                          eda ? Cohort::kEda : Cohort::kNonEda,
                                          static_cast<int>(rng() % 4), std::to_string(rng() % 3),
                                          std::to_string(rng() % 3)));
  }
  std::map<int, double> el;
  for (int tenths = 10; tenths < 15; ++tenths) el[tenths] = e(rng);
  m.table = table_of(el);
  return m;
}

}  // namespace

TEST(Evaluate, IdentityPolicyEqualsBaseline) {
  std::mt19937_64 rng{61};
  auto const regions = thirds();
  for (int round = 0; round < 10; ++round) {
    auto const m = random_market(rng);
    auto const demand = build_demand(m.trips, m.table);
    EvaluationContext const ctx{m.trips, demand, regions, SurplusMode::kCumulative, 1.0};
    std::vector<SurgeAnnotatedTrip> eda;
    for (auto const& t : m.trips) {
      if (t.cohort == Cohort::kEda) eda.push_back(t);
    }
    auto const report = consumer_surplus(Cohort::kEda, eda, m.table, SurplusMode::kCumulative, 1.0);
    auto const base = fairness_summary(m.trips, report, regions);
    auto const same = evaluate_policy(ctx, StatusQuoPolicy{});
    EXPECT_EQ(same.eta, base.eta);
    EXPECT_EQ(same.r2, base.r2);
    EXPECT_NEAR(same.revenue, base.revenue, 1e-9 * base.revenue);
    EXPECT_NEAR(same.surplus, base.surplus, 1e-9 * std::max(1.0, base.surplus));
    EXPECT_EQ(evaluate_fixed_discount(ctx, 0.0).eta, base.eta);
  }
}

TEST(Evaluate, DiscountsNeverLowerTripsOrRideability) {
  std::mt19937_64 rng{62};
  auto const regions = thirds();
  for (int round = 0; round < 20; ++round) {
    auto const m = random_market(rng);
    auto const demand = build_demand(m.trips, m.table);
    EvaluationContext const ctx{m.trips, demand, regions};
    auto const base = evaluate_policy(ctx, StatusQuoPolicy{});
    double const amount = std::uniform_real_distribution<double>{0.5, 10}(rng);
    double const delta = std::uniform_real_distribution<double>{0.01, 0.9}(rng);
    for (auto const& s : {evaluate_policy(ctx, FlatDiscountPolicy{amount}),
                          evaluate_policy(ctx, FixedDiscountPolicy{delta}),
                          evaluate_fixed_discount(ctx, delta)}) {
      EXPECT_GE(s.eta, base.eta);
      ASSERT_TRUE(s.r2 && base.r2);
      EXPECT_GE(*s.r2, *base.r2);
    }
  }
}

TEST(Evaluate, SingleStratumByHand) {
  std::vector<SurgeAnnotatedTrip> trips;
  for (int i = 0; i < 100; ++i) trips.push_back(fixtures::annotated(10.0, 10, Cohort::kEda));
  for (int i = 0; i < 200; ++i) trips.push_back(fixtures::annotated(10.0, 10, Cohort::kNonEda));
  auto const regions = thirds();
  auto const demand = build_demand(trips, table_of({{10, -0.8}}));
  EvaluationContext const ctx{trips, demand, regions};
  for (auto const& s : {evaluate_fixed_discount(ctx, 0.1),
                        evaluate_policy(ctx, FixedDiscountPolicy{0.1}),
                        evaluate_policy(ctx, FlatDiscountPolicy{1.0})}) {
    EXPECT_EQ(s.eta, 108.0);
    EXPECT_NEAR(s.revenue, 108 * 9.0, 1e-9);
    EXPECT_NEAR(*s.r2, (108.0 / 1000.0) / (200.0 / 2000.0), 1e-12);
    EXPECT_EQ(s.surplus, 0.0);
  }
}

TEST(Evaluate, RunFixedFairRideSummarisesChosenDelta) {
  std::vector<SurgeAnnotatedTrip> trips;
  for (int i = 0; i < 100; ++i) trips.push_back(fixtures::annotated(10.0, 10, Cohort::kEda));
  for (int i = 0; i < 200; ++i) trips.push_back(fixtures::annotated(10.0, 10, Cohort::kNonEda));
  auto const regions = thirds();
  auto const demand = build_demand(trips, table_of({{10, -0.8}}));
  EvaluationContext const ctx{trips, demand, regions};
  PricingScenario s;
  s.n = 0.3;
  auto const sol = run_fixedfairride(ctx, s);
  EXPECT_NEAR(sol.delta, 0.29, 1e-12);
  EXPECT_EQ(sol.summary.eta, sol.eta);
  EXPECT_NEAR(sol.summary.revenue, sol.eta * (1.0 - sol.delta) * 10.0, 1e-9);
}
