#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "equiride/elasticity.h"
#include "equiride/ingest.h"
#include "equiride/pricing.h"
#include "equiride/surge.h"

namespace equiride {

struct PipelineConfig {
  std::optional<std::filesystem::path> trips;
  std::optional<std::filesystem::path> regions;
  std::map<Cohort, double> populations{default_populations()};
  std::optional<std::string> start_date;
  std::optional<std::string> end_date;
  bool exclude_shared{true};
  std::map<std::string, std::string> columns;
  char delimiter{','};
  RansacOptions ransac;
  bool pooled_surge{false};
  ElasticityOptions elasticity;
  SurplusMode mode{SurplusMode::kCumulative};
  double min_level_trips{kDefaultMinLevelTrips};
  RegressionOptions regression;
  double flat_discount{5.0};
  PricingScenario scenario{ScenarioKind::kPlatformFunded, 0.3, 12.0, std::nullopt, 0.01};
  PricingScenario subsidy_scenario{ScenarioKind::kGovernmentSubsidy, 0.3, 12.0, std::nullopt, 0.01};
  std::vector<double> p_min_sweep{5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15};
};

// Relative paths inside the document resolve against `base_dir`.
PipelineConfig pipeline_config_from_json(nlohmann::json const& j,
                                         std::filesystem::path const& base_dir = {});
nlohmann::json to_json(PipelineConfig const& c);

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 14695981039346656037ULL);
std::string hash_file(std::filesystem::path const& p);  // 16 hex digits

// One output directory holding every stage's artifacts and state.json, which
// records each artifact's content hash and the upstream hashes it was built
// from. A stage refuses to run when an upstream stage has not run (missing)
// or its files no longer match their hashes (stale), unless forced.
class Pipeline {
public:
  Pipeline(std::filesystem::path out_dir, PipelineConfig config, bool force = false);

  // Loads the config snapshot from state.json (defaults when absent).
  static PipelineConfig stored_config(std::filesystem::path const& out_dir);

  nlohmann::json ingest();  // returns the ingest report
  SurgeInference surge();
  std::map<Cohort, ElasticityTable> elasticity();
  std::map<Cohort, SurplusReport> surplus();
  FairnessSummary metrics();
  DiscountSolution price();
  std::vector<std::filesystem::path> report();

  std::filesystem::path const& out_dir() const { return dir_; }
  PipelineConfig const& config() const { return config_; }
  nlohmann::json const& state() const { return state_; }

  // Verifies `stage` and everything it was built from; throws
  // missing_artifact_error / stale_artifact_error naming the stage.
  void require_stage(std::string const& stage, std::string const& consumer) const;
  std::filesystem::path artifact(std::string const& stage, std::string const& name) const;

private:
  void record(std::string const& stage, std::map<std::string, std::string> const& files,
              std::vector<std::string> const& upstream);
  void save_state() const;

  std::filesystem::path dir_;
  PipelineConfig config_;
  bool force_;
  nlohmann::json state_;
};

// Loaders shared by the pipeline and the service.
std::vector<SurgeAnnotatedTrip> load_annotated_trips(std::filesystem::path const& p);
RegionMap load_regions_artifact(std::filesystem::path const& p);
std::map<Cohort, ElasticityTable> load_elasticities(std::filesystem::path const& p);
nlohmann::json read_json(std::filesystem::path const& p);
void write_json(std::filesystem::path const& p, nlohmann::json const& j);

// Per-cohort trip counts and shares by displayed level.
nlohmann::json surge_shares(std::span<SurgeAnnotatedTrip const> trips);

}  // namespace equiride
