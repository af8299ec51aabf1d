#include <gtest/gtest.h>

#include <cstdio>
#include <random>

#include "equiride/error.h"
#include "equiride/surge.h"
#include "equiride/synth.h"
#include "support.h"

using namespace equiride;

namespace {

// Half-up rounding done on the decimal digits rather than in floating point.
int round_tenths_by_digits(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  std::string const s{buf};
  auto const dot = s.find('.');
  int tenths = std::stoi(s.substr(0, dot)) * 10 + (s[dot + 1] - '0');
  if (s[dot + 2] >= '5') ++tenths;
  return tenths;
}

std::vector<TripRecord> linear_trips(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng{seed};
  std::uniform_real_distribution<double> secs{120, 3600}, miles{0.3, 25};
  std::vector<TripRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    double const d = std::round(secs(rng)), m = std::round(miles(rng) * 10) / 10;
    out.push_back(fixtures::make_trip("t" + std::to_string(i), 2.5 + 0.002 * d + 1.2 * m, d, m));
  }
  return out;
}

}  // namespace

TEST(Discretize, PaperAndBoundaryCases) {
  EXPECT_EQ(discretize_surge(1.449), SurgeLevel{14});
  EXPECT_EQ(discretize_surge(1.450), SurgeLevel{15});
  EXPECT_EQ(discretize_surge(1.0), SurgeLevel{10});
  EXPECT_EQ(discretize_surge(2.95), SurgeLevel{30});
  EXPECT_THROW(discretize_surge(0.99), argument_error);
}

TEST(Discretize, AgreesWithDecimalOracleOnThreeDecimalInputs) {
  for (int milli = 1000; milli <= 8000; ++milli) {
    double const x = milli / 1000.0;
    ASSERT_EQ(discretize_surge(x).tenths, round_tenths_by_digits(x)) << x;
  }
}

TEST(Ransac, NoiselessLinearFaresRecoveredExactly) {
  auto const trips = linear_trips(500, 1);
  auto const m = fit_baseline_ransac(trips);
  EXPECT_NEAR(m.intercept, 2.5, 1e-6);
  EXPECT_NEAR(m.per_second, 0.002, 1e-6);
  EXPECT_NEAR(m.per_mile, 1.2, 1e-6);
  EXPECT_EQ(m.inlier_count, trips.size());
  EXPECT_DOUBLE_EQ(m.inlier_fraction, 1.0);
}

TEST(Ransac, DoubledFaresExcludedFromInliers) {
  auto trips = linear_trips(1000, 2);
  std::mt19937_64 rng{99};
  std::vector<bool> surged(trips.size(), false);
  for (std::size_t i = 0; i < trips.size(); ++i) {
    if (rng() % 5 == 0) {
      trips[i].fare *= 2.0;
      surged[i] = true;
    }
  }
  auto const m = fit_baseline_ransac(trips);
  EXPECT_NEAR(m.intercept, 2.5, 0.05 * 2.5);
  EXPECT_NEAR(m.per_second, 0.002, 0.05 * 0.002);
  EXPECT_NEAR(m.per_mile, 1.2, 0.05 * 1.2);
  for (std::size_t i = 0; i < trips.size(); ++i) {
    bool const inlier = std::abs(trips[i].fare - m.predict(trips[i])) <= m.inlier_threshold;
    if (surged[i]) EXPECT_FALSE(inlier) << i;
  }
  std::size_t const n_surged = std::count(surged.begin(), surged.end(), true);
  EXPECT_EQ(m.inlier_count, trips.size() - n_surged);
}

TEST(Ransac, TooFewTripsIsDataError) {
  EXPECT_THROW(fit_baseline_ransac(linear_trips(49, 3)), data_error);
}

TEST(Ransac, SameSeedSameCoefficients) {
  SynthConfig cfg;
  cfg.n_trips = 5000;
  auto const d = generate(cfg);
  RansacOptions opt;
  opt.seed = 17;
  auto const a = fit_baseline_ransac(d.trips, opt);
  auto const b = fit_baseline_ransac(d.trips, opt);
  EXPECT_EQ(a, b);
  EXPECT_GE(a.per_second, 0.0);
  EXPECT_GE(a.per_mile, 0.0);
  EXPECT_GT(a.inlier_fraction, 0.0);
}

TEST(Annotate, IdentityAndPaperCutoffExamples) {
  BaselineFareModel m;
  m.intercept = 10.0;
  std::vector<LabeledTrip> in{{fixtures::make_trip("a", 10.0), Cohort::kEda},
                              {fixtures::make_trip("b", 14.49), Cohort::kEda},
                              {fixtures::make_trip("c", 14.51), Cohort::kNonEda},
                              {fixtures::make_trip("d", 7.0), Cohort::kNonEda}};
  auto const r = annotate_surge(in, m);
  ASSERT_EQ(r.trips.size(), 4u);
  EXPECT_EQ(r.trips[0].surge_displayed, SurgeLevel{10});
  EXPECT_DOUBLE_EQ(r.trips[0].surge_continuous, 1.0);
  EXPECT_EQ(r.trips[1].surge_displayed, SurgeLevel{14});
  EXPECT_EQ(r.trips[2].surge_displayed, SurgeLevel{15});
  EXPECT_EQ(r.trips[2].cohort, Cohort::kNonEda);
  EXPECT_DOUBLE_EQ(r.trips[3].surge_continuous, 1.0);  // below baseline clamps
}

TEST(Annotate, NonPositiveBaselineExcludedAndCounted) {
  BaselineFareModel m;
  m.intercept = -5.0;
  m.per_mile = 1.0;
  std::vector<LabeledTrip> in{{fixtures::make_trip("a", 10.0, 600, 3.0), Cohort::kEda},
                              {fixtures::make_trip("b", 10.0, 600, 8.0), Cohort::kEda}};
  auto const r = annotate_surge(in, m);
  EXPECT_EQ(r.excluded, 1u);
  ASSERT_EQ(r.trips.size(), 1u);
  EXPECT_EQ(r.trips[0].trip.trip_id, "b");
}

TEST(Annotate, HigherFareNeverLowersSurge) {
  BaselineFareModel m{2.0, 0.003, 1.1};
  std::mt19937_64 rng{6};
  std::uniform_real_distribution<double> fare{1, 100};
  for (int i = 0; i < 500; ++i) {
    double a = fare(rng), b = fare(rng);
    if (a > b) std::swap(a, b);
    std::vector<LabeledTrip> in{{fixtures::make_trip("a", a, 900, 4), Cohort::kEda},
                                {fixtures::make_trip("b", b, 900, 4), Cohort::kEda}};
    auto const r = annotate_surge(in, m);
    EXPECT_LE(r.trips[0].surge_continuous, r.trips[1].surge_continuous);
    EXPECT_LE(r.trips[0].surge_displayed, r.trips[1].surge_displayed);
  }
}

TEST(InferSurge, PerCohortModelsPreserveOrder) {
  SynthConfig cfg;
  cfg.n_trips = 4000;
  cfg.fare_rounding = 0.0;
  cfg.fare_noise_sigma = 0.0;
  auto const d = generate(cfg);
  std::vector<LabeledTrip> labeled;
  for (std::size_t i = 0; i < d.trips.size(); ++i) labeled.push_back({d.trips[i], d.cohorts[i]});
  auto const r = infer_surge(labeled);
  EXPECT_EQ(r.models.size(), 2u);
  ASSERT_EQ(r.trips.size(), labeled.size());
  std::size_t hit = 0;
  for (std::size_t i = 0; i < labeled.size(); ++i) {
    EXPECT_EQ(r.trips[i].trip.trip_id, labeled[i].trip.trip_id);
    hit += r.trips[i].surge_displayed == d.surge_displayed[i];
  }
  // zero noise and no rounding: recovery should be essentially perfect
  EXPECT_GE(static_cast<double>(hit) / labeled.size(), 0.99);
  auto const pooled = infer_surge(labeled, {}, true);
  EXPECT_EQ(pooled.models.at(Cohort::kEda), pooled.models.at(Cohort::kNonEda));
}

TEST(InferSurge, CountsFallBeyondNoSurgeOnRealisticSynth) {
  SynthConfig cfg;
  cfg.n_trips = 100'000;
  auto const d = generate(cfg);
  std::vector<LabeledTrip> labeled;
  for (std::size_t i = 0; i < d.trips.size(); ++i) labeled.push_back({d.trips[i], d.cohorts[i]});
  auto const r = infer_surge(labeled);
  std::map<SurgeLevel, std::size_t> counts;
  for (auto const& t : r.trips) ++counts[t.surge_displayed];
  std::size_t prev = SIZE_MAX;
  for (auto const& [level, n] : counts) {
    if (level <= kNoSurge) continue;
    if (n < 100) break;
    EXPECT_LE(n, prev) << level.str();
    prev = n;
  }
}
