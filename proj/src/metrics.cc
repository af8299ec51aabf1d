#include "equiride/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "equiride/error.h"

namespace equiride {

double relative_rideability(std::span<GroupTripStats const> groups) {
  double lowest_disadvantaged = std::numeric_limits<double>::infinity();
  double highest_other = -std::numeric_limits<double>::infinity();
  bool has_disadvantaged = false, has_other = false;
  for (auto const& g : groups) {
    if (!(g.population > 0.0)) {
      throw argument_error{"group \"" + g.group_id + "\" needs a positive population"};
    }
    if (g.trip_count < 0.0) throw argument_error{"group \"" + g.group_id + "\" has negative trips"};
    if (g.disadvantaged) {
      has_disadvantaged = true;
      lowest_disadvantaged = std::min(lowest_disadvantaged, g.avg_trips());
    } else {
      has_other = true;
      highest_other = std::max(highest_other, g.avg_trips());
    }
  }
  if (!has_disadvantaged || !has_other) {
    throw argument_error{"relative rideability needs disadvantaged and non-disadvantaged groups"};
  }
  if (highest_other == 0.0) {
    throw undefined_ratio_error{"non-disadvantaged groups average zero trips"};
  }
  return lowest_disadvantaged / highest_other;
}

std::vector<GroupTripStats> cohort_groups(double eda_trips, double non_eda_trips,
                                          RegionMap const& regions) {
  return {{"EDA", eda_trips, regions.population(Cohort::kEda), true},
          {"NON_EDA", non_eda_trips, regions.population(Cohort::kNonEda), false}};
}

FairnessSummary fairness_summary(std::span<SurgeAnnotatedTrip const> trips,
                                 SurplusReport const& surplus, RegionMap const& regions) {
  if (surplus.cohort != Cohort::kEda) {
    throw argument_error{"fairness summary expects the EDA surplus report"};
  }
  FairnessSummary s;
  double non_eda = 0.0;
  for (auto const& t : trips) {
    if (t.cohort == Cohort::kEda) {
      s.eta += 1.0;
      s.revenue += t.trip.fare;
    } else {
      non_eda += 1.0;
    }
  }
  if (std::abs(surplus.total_trips - s.eta) > 0.5) {
    throw argument_error{"surplus report covers " + std::to_string(surplus.total_trips) +
                         " EDA trips but the trip list has " + std::to_string(s.eta)};
  }
  s.surplus = surplus.total_surplus;
  s.avg_surplus = surplus.average_surplus;
  try {
    auto const groups = cohort_groups(s.eta, non_eda, regions);
    s.r2 = relative_rideability(groups);
  } catch (undefined_ratio_error const& e) {
    s.r2_error = e.what();
  }
  return s;
}

}  // namespace equiride
