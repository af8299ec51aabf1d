#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "equiride/surge_level.h"
#include "equiride/trip.h"

namespace equiride {

struct SynthBaseline {
  double intercept{3.0};
  double per_second{0.004};
  double per_mile{1.0};

  double predict(double duration_s, double distance_mi) const {
    return intercept + per_second * duration_s + per_mile * distance_mi;
  }
};

// Levels 1.0 .. max_level with shares declining geometrically by `ratio`
// above 1.0; 1.0 keeps `base_share`.
std::map<SurgeLevel, double> geometric_surge_shares(double base_share = 0.8, double ratio = 0.8,
                                                    SurgeLevel max_level = SurgeLevel{30});

// Continuous surge inside level s is uniform on [s - 0.05, s + 0.05), except
// level 1.0: a point mass at exactly 1.0 (no surge) carrying
// `base_point_mass` of its share, the rest uniform on [1.0, 1.05).
struct SynthConfig {
  std::uint64_t seed{7};
  std::size_t n_trips{100'000};
  SynthBaseline baseline;
  std::map<SurgeLevel, double> surge_distribution{geometric_surge_shares()};  // level -> share
  // Left level of a cutoff -> fractional density drop across it. Must agree
  // with the shares; listed drops are checked, unlisted ones are implied.
  std::map<SurgeLevel, double> discontinuity_drops;
  double base_point_mass{0.8};
  double eda_share{0.3};
  double fare_noise_sigma{0.02};
  double fare_rounding{2.50};  // 0 disables rounding
  double min_fare{2.50};       // applied only when rounding
  double shared_fraction{0.05};
  double missing_tract_fraction{0.1};
  double median_miles{4.0};
  double miles_log_sigma{0.6};
  double min_seconds_per_mile{150.0};
  double max_seconds_per_mile{300.0};
  std::size_t areas{77};
  std::size_t eda_areas{20};
  std::size_t tracts_per_area{10};
  std::string start_date{"2021-01-01"};
  std::string end_date{"2021-10-31"};  // inclusive

  void validate() const;  // throws config_error
};

struct PlantedCutoff {
  SurgeLevel surge_left{kNoSurge};
  double cutoff{1.05};
  double density_left{0.0};
  double density_right{0.0};
  double drop{0.0};   // 1 - right/left
  double alpha{0.0};  // jump in max-normalized density
  double n_p{0.0};
  double delta_p{0.0};
  double e_p{0.0};
};

// Analytic per-cutoff truth from the configured shares.
std::vector<PlantedCutoff> planted_cutoffs(SynthConfig const& config);

struct SynthDataset {
  std::vector<TripRecord> trips;
  std::vector<Cohort> cohorts;
  std::vector<double> surge_continuous;
  std::vector<SurgeLevel> surge_displayed;
  RegionMap regions;
  std::vector<PlantedCutoff> cutoffs;
};

SynthDataset generate(SynthConfig const& config);

// Trips in the ingest default (Chicago) schema.
void write_trips_csv(std::ostream& out, std::vector<TripRecord> const& trips);

// {"tracts": [...], "areas": [...]}
void write_region_json(std::ostream& out, RegionMap const& regions);

// {"config": ..., "baseline": ..., "per_cutoff": {...}, "per_trip": [...]}
void write_ground_truth(std::ostream& out, SynthConfig const& config, SynthDataset const& data);

SynthConfig synth_config_from_json(nlohmann::json const& j);
nlohmann::json to_json(SynthConfig const& config);

}  // namespace equiride
