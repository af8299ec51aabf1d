#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "equiride/pipeline.h"
#include "equiride/pricing.h"

namespace httplib {
class Server;
}

namespace equiride {

// Everything the API reads, loaded once from a pipeline output directory and
// never modified afterwards.
struct ServiceState {
  PipelineConfig config;
  std::vector<SurgeAnnotatedTrip> trips;
  RegionMap regions;
  std::map<Cohort, ElasticityTable> elasticities;
  FareRegressionModel fairride;
  DemandResponse demand;
  nlohmann::json summary;
  nlohmann::json shares;
  nlohmann::json elasticities_doc;

  EvaluationContext context() const {
    return {trips, demand, regions, config.mode, config.min_level_trips};
  }
};

// Needs the ingest, surge, elasticity, metrics and price stages.
ServiceState load_service_state(std::filesystem::path const& out_dir, bool force = false);

struct ApiResponse {
  int status{200};
  nlohmann::json body;
};

// POST /api/whatif. Invalid bodies give 400 with {"error", "field"}.
ApiResponse whatif(ServiceState const& state, std::string const& body);

// Registers every /api route on `server`, with CORS headers for `origin`.
void mount_api(httplib::Server& server, ServiceState const& state, std::string origin = "*");

// "host:port", ":port" or "port"; falls back to $EQUIRIDE_BIND, then
// 127.0.0.1:8080.
std::pair<std::string, int> resolve_bind(std::optional<std::string> const& flag);

// Blocks until the server stops.
void serve(ServiceState const& state, std::string const& host, int port);

}  // namespace equiride
