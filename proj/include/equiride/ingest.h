#pragma once

#include <cstddef>
#include <istream>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "equiride/trip.h"

namespace equiride {

// Source column name for every TripRecord field. Defaults follow the City of
// Chicago Transportation Network Providers trip export.
struct ColumnMap {
  std::string trip_id{"Trip ID"};
  std::string start_time{"Trip Start Timestamp"};
  std::string end_time{"Trip End Timestamp"};
  std::string duration{"Trip Seconds"};
  std::string distance{"Trip Miles"};
  std::string pickup_tract{"Pickup Census Tract"};
  std::string dropoff_tract{"Dropoff Census Tract"};
  std::string pickup_area{"Pickup Community Area"};
  std::string dropoff_area{"Dropoff Community Area"};
  std::string fare{"Fare"};
  std::string tip{"Tip"};
  std::string extra_charges{"Additional Charges"};
  std::string shared_authorized{"Shared Trip Authorized"};

  // Overrides keyed by TripRecord field name ("fare", "pickup_area", ...).
  void apply_overrides(std::map<std::string, std::string> const& overrides);
};

struct ParseResult {
  std::vector<TripRecord> trips;
  std::size_t rows{0};
  std::size_t skipped{0};
  // First few skip reasons, "line N: reason".
  std::vector<std::string> diagnostics;
  // Values of the requested extra columns, extra_columns.size() per kept trip.
  std::vector<std::string> extra;
};

ParseResult parse_trips(std::istream& source, ColumnMap const& columns = {}, char delim = ',',
                        std::vector<std::string> const& extra_columns = {});

// Header and row text in the default schema, without a line terminator.
std::string trip_csv_header();
std::string trip_csv_row(TripRecord const& t);

struct DateRange {
  Timestamp start;
  Timestamp end;  // inclusive
};

std::vector<TripRecord> filter_trips(std::span<TripRecord const> trips, DateRange const& range,
                                     bool exclude_shared);

// Region file: CSV with "id" and "kind" (tract|area) columns, or a JSON object
// {"tracts": [...], "areas": [...]}.
RegionMap load_region_map(std::istream& source, std::map<Cohort, double> populations);

// One third of residents in EDA regions, two thirds elsewhere.
std::map<Cohort, double> default_populations(double city_population = 2'700'000.0);

Cohort classify_trip(TripRecord const& trip, RegionMap const& regions);

}  // namespace equiride
