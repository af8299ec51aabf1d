#pragma once

#include <istream>
#include <memory>
#include <ostream>
#include <span>
#include <vector>

#include "json.hpp"

#include "equiride/elasticity.h"
#include "equiride/metrics.h"
#include "equiride/pricing.h"
#include "equiride/surge.h"

namespace equiride {

// Trip tables: the ingest default columns plus "Cohort" (labeled), and
// "Surge Continuous" / "Surge Displayed" (annotated).
void write_labeled_trips(std::ostream& out, std::span<LabeledTrip const> trips);
std::vector<LabeledTrip> read_labeled_trips(std::istream& in);

void write_annotated_trips(std::ostream& out, std::span<SurgeAnnotatedTrip const> trips);
std::vector<SurgeAnnotatedTrip> read_annotated_trips(std::istream& in);

nlohmann::json to_json(RegionMap const& regions);
RegionMap region_map_from_json(nlohmann::json const& j);

nlohmann::json to_json(BaselineFareModel const& m);

nlohmann::json to_json(ElasticityTable const& table);
ElasticityTable elasticity_table_from_json(nlohmann::json const& j);
void write_elasticity_csv(std::ostream& out, Cohort cohort, ElasticityTable const& table,
                          bool header = true);

nlohmann::json to_json(SurplusReport const& report);

nlohmann::json to_json(FairnessSummary const& s);
FairnessSummary fairness_summary_from_json(nlohmann::json const& j);

nlohmann::json to_json(FareRegressionModel const& m);
FareRegressionModel fare_model_from_json(nlohmann::json const& j);

nlohmann::json to_json(PricingScenario const& s);
// {kind, n | p_min, r?, grid_step?}; `default_step` fills a missing grid_step.
PricingScenario scenario_from_json(nlohmann::json const& j, double default_step = 0.01);

nlohmann::json to_json(GridPoint const& p);
nlohmann::json to_json(DiscountSolution const& s);

// {"type": "fairride"} | {"type": "flat", "amount": 5} | {"type": "fixed", "delta": 0.3}.
// A fairride policy needs the trained model.
std::unique_ptr<PricingPolicy> policy_from_json(nlohmann::json const& j,
                                                FareRegressionModel const* fairride);

}  // namespace equiride
