#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "equiride/surge.h"
#include "equiride/surge_level.h"

namespace equiride {

// Continuous-surge window around the point where the displayed level jumps.
struct DiscontinuityWindow {
  double cutoff{1.45};
  double half_width{0.05};
  double near_band{0.01};
  double bin_width{0.002};

  // Window around the jump from `left` to left.next().
  static DiscontinuityWindow above(SurgeLevel left, double half_width = 0.05,
                                   double near_band = 0.01, double bin_width = 0.002);

  std::size_t bin_count() const;
  double bin_center(std::size_t bin) const;
  void validate() const;  // throws argument_error
};

// One histogram bin of completed trips inside a window. `y` is the bin count
// normalized by the largest bin in the window and stands in for the
// probability that a request at that surge converts into a trip.
struct BinObservation {
  double x1{0.0};  // bin-center surge
  double y{0.0};
  int i1{0};  // |x1 - cutoff| <= near_band
  int i2{0};  // x1 > cutoff
  std::size_t count{0};
};

// Trips whose surge was clamped to exactly 1.0 are left out: their latent
// surge is censored and would pile into the first bin of the 1.05 window.
std::vector<BinObservation> build_rdd_dataset(std::span<SurgeAnnotatedTrip const> trips,
                                              DiscontinuityWindow const& window);

// Linear probability model
//   y = b0 + alpha*i1*i2 + b1*i1 + b2*(1-i1)*i2 + b3*(1-i2)*x + b4*i2*x
// with x = x1 - x_origin. With x_origin at the cutoff, alpha is the jump at
// the cutoff; with x_origin = 0 it is the jump extrapolated to zero surge.
struct LpmFit {
  double alpha{0.0};
  double beta0{0.0};
  double beta1{0.0};
  double beta2{0.0};
  double beta3{0.0};
  double beta4{0.0};
  double residual_variance{0.0};
  double x_origin{0.0};
  std::size_t n_obs{0};
};

inline constexpr std::size_t kMinLpmObservations = 10;

LpmFit fit_lpm(std::span<BinObservation const> bins, double x_origin);

struct ElasticityEstimate {
  SurgeLevel surge_left{kNoSurge};
  double alpha{0.0};
  double n_p{0.0};      // share of the cohort's trips displayed at surge_left
  double delta_p{0.0};  // percent price change across the cutoff
  double e_p{0.0};
  std::size_t n_obs{0};
  bool skipped{false};
  std::string skip_reason;
};

ElasticityEstimate estimate_elasticity(LpmFit const& fit, SurgeLevel surge_left, double n_p);

struct ElasticityTable {
  std::vector<ElasticityEstimate> estimates;  // ascending surge_left, skipped ones included

  ElasticityEstimate const* find(SurgeLevel surge_left) const;

  // E_p keyed by the level the jump arrives at (surge_left + 0.1), the
  // indexing consumer surplus uses. Skipped cutoffs are absent.
  std::map<SurgeLevel, double> by_arrival_level() const;

  // E_p keyed by surge_left: the response of trips displayed at that level.
  std::map<SurgeLevel, double> by_departure_level() const;
};

struct ElasticityOptions {
  double half_width{0.05};
  double near_band{0.01};
  double bin_width{0.002};
};

// Runs every cutoff between the lowest and highest displayed level of
// `trips` (one cohort). Failed cutoffs are kept as skipped entries.
ElasticityTable estimate_elasticities(std::span<SurgeAnnotatedTrip const> trips,
                                      ElasticityOptions const& options = {});

enum class SurplusMode { kCumulative, kSuccessive };

std::string_view to_string(SurplusMode m);
SurplusMode surplus_mode_from_string(std::string_view s);

struct LevelStat {
  double num_trips{0.0};
  double avg_fare{0.0};
};
using LevelStats = std::map<SurgeLevel, LevelStat>;

LevelStats level_stats(std::span<SurgeAnnotatedTrip const> trips);

struct LevelSurplus {
  double num_trips{0.0};
  double avg_fare{0.0};
  double contribution{0.0};
  bool included{false};
};

struct SurplusReport {
  Cohort cohort{Cohort::kEda};
  SurplusMode mode{SurplusMode::kCumulative};
  std::map<SurgeLevel, LevelSurplus> per_level;
  double total_surplus{0.0};
  double average_surplus{0.0};
  double total_trips{0.0};
};

inline constexpr double kDefaultMinLevelTrips = 100.0;

// Affordability: for every level s, sum over higher levels i of
// |E_p(i)| * numTrips_i * ((i - s) / s * 100) * avgFare_s. Successive mode
// keeps only i = s + 0.1. Levels with fewer than `min_trips` trips are left
// out entirely. `elasticity` is keyed by arrival level i.
SurplusReport consumer_surplus(Cohort cohort, LevelStats const& levels,
                               std::map<SurgeLevel, double> const& elasticity, SurplusMode mode,
                               double min_trips = kDefaultMinLevelTrips);

SurplusReport consumer_surplus(Cohort cohort, std::span<SurgeAnnotatedTrip const> trips,
                               ElasticityTable const& table, SurplusMode mode,
                               double min_trips = kDefaultMinLevelTrips);

}  // namespace equiride
