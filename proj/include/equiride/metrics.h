#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "equiride/elasticity.h"
#include "equiride/surge.h"
#include "equiride/trip.h"

namespace equiride {

struct GroupTripStats {
  std::string group_id;
  double trip_count{0.0};
  double population{1.0};
  bool disadvantaged{false};

  double avg_trips() const { return trip_count / population; }
};

// Relative Rideability: lowest per-capita trip rate among disadvantaged
// groups over the highest among the others. Not a coefficient of
// determination.
double relative_rideability(std::span<GroupTripStats const> groups);

// EDA / non-EDA groups with the region map's populations.
std::vector<GroupTripStats> cohort_groups(double eda_trips, double non_eda_trips,
                                          RegionMap const& regions);

struct FairnessSummary {
  std::optional<double> r2;  // empty when the ratio is undefined
  std::string r2_error;
  double eta{0.0};      // EDA trips
  double surplus{0.0};  // EDA consumer surplus, USD
  double avg_surplus{0.0};
  double revenue{0.0};  // fares paid on EDA trips, USD

  bool operator==(FairnessSummary const&) const = default;
};

// Baseline summary for the EDA cohort. `surplus` must be the EDA report
// computed from the same trips.
FairnessSummary fairness_summary(std::span<SurgeAnnotatedTrip const> trips,
                                 SurplusReport const& surplus, RegionMap const& regions);

}  // namespace equiride
