#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include "equiride/timestamp.h"

namespace equiride {

struct TripRecord {
  std::string trip_id;
  Timestamp start_time{};
  Timestamp end_time{};
  double duration_s{0.0};
  double distance_mi{0.0};
  std::optional<std::string> pickup_tract;
  std::optional<std::string> dropoff_tract;
  std::optional<std::string> pickup_area;
  std::optional<std::string> dropoff_area;
  double fare{0.0};
  double tip{0.0};
  double extra_charges{0.0};
  bool shared_authorized{false};

  bool operator==(TripRecord const&) const = default;
};

enum class Cohort { kEda, kNonEda };

std::string_view to_string(Cohort c);
Cohort cohort_from_string(std::string_view s);

struct RegionMap {
  std::set<std::string> eda_tracts;
  std::set<std::string> eda_areas;
  std::map<Cohort, double> populations;

  double population(Cohort c) const { return populations.at(c); }
};

}  // namespace equiride
