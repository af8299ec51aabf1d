#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "equiride/surge_level.h"
#include "equiride/trip.h"

namespace equiride {

struct LabeledTrip {
  TripRecord trip;
  Cohort cohort{Cohort::kNonEda};
};

// fare ~ intercept + per_second * duration + per_mile * distance, fitted on
// the no-surge (inlier) trips.
struct BaselineFareModel {
  double intercept{0.0};
  double per_second{0.0};
  double per_mile{0.0};
  double inlier_threshold{0.0};
  double inlier_fraction{0.0};
  std::uint64_t seed{0};
  std::size_t inlier_count{0};
  std::size_t fitted_trips{0};

  double predict(double duration_s, double distance_mi) const {
    return intercept + per_second * duration_s + per_mile * distance_mi;
  }
  double predict(TripRecord const& t) const { return predict(t.duration_s, t.distance_mi); }

  bool operator==(BaselineFareModel const&) const = default;
};

enum class ThresholdRule {
  // factor * 1.4826 * MAD of the residuals of the least-median-of-squares
  // candidate, computed once and shared by every candidate.
  kMadScaled,
  // Caller-supplied threshold in USD.
  kFixed,
};

struct RansacOptions {
  std::size_t iterations{200};
  std::size_t sample_size{10};
  ThresholdRule threshold_rule{ThresholdRule::kMadScaled};
  double threshold_factor{2.5};
  double fixed_threshold{2.5};
  std::uint64_t seed{42};
  // Candidates are scored on a deterministic subset of at most this many trips.
  std::size_t max_eval{200'000};
  std::size_t refine_passes{3};
};

inline constexpr std::size_t kMinRansacTrips = 50;

BaselineFareModel fit_baseline_ransac(std::span<TripRecord const> trips,
                                      RansacOptions const& options = {});

struct SurgeAnnotatedTrip {
  TripRecord trip;
  Cohort cohort{Cohort::kNonEda};
  double surge_continuous{1.0};
  SurgeLevel surge_displayed{kNoSurge};
};

// Rounds half-up to the nearest 0.1. Throws argument_error below 1.0.
SurgeLevel discretize_surge(double surge_continuous);

struct AnnotationResult {
  std::vector<SurgeAnnotatedTrip> trips;
  std::size_t excluded{0};  // trips whose predicted baseline fare was <= 0
};

AnnotationResult annotate_surge(std::span<LabeledTrip const> trips,
                                BaselineFareModel const& model);

struct SurgeInference {
  std::map<Cohort, BaselineFareModel> models;
  std::vector<SurgeAnnotatedTrip> trips;
  std::size_t excluded{0};
};

// Fits one baseline per cohort (or a single pooled baseline) and annotates
// every trip with the model of its cohort. Output preserves input order.
SurgeInference infer_surge(std::span<LabeledTrip const> trips, RansacOptions const& options = {},
                           bool pooled = false);

}  // namespace equiride
