#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "equiride/elasticity.h"
#include "equiride/metrics.h"
#include "equiride/surge.h"

namespace equiride {

inline constexpr double kDefaultPriceFloor = 2.50;

struct RegressionOptions {
  std::size_t area_buckets{16};
  double price_floor{kDefaultPriceFloor};
  std::size_t min_trips{1000};
};

// Linear fare model over duration, distance, displayed surge, hour-of-day
// one-hot and hashed pickup-area one-hot. FairRide is this model trained on
// EDA trips only; the pooled variant (all trips) is the ordinary least
// squares baseline.
struct FareRegressionModel {
  std::vector<std::string> feature_names;  // "intercept" first
  Eigen::VectorXd coefficients;
  std::vector<std::string> dropped;  // collinear one-hot columns fixed at 0
  std::size_t area_buckets{16};
  double price_floor{kDefaultPriceFloor};
  bool eda_only{true};

  double intercept() const { return coefficients(0); }
  std::map<std::string, double> coefficient_map() const;
  double predict(SurgeAnnotatedTrip const& t) const;  // floored
};

using FairRideModel = FareRegressionModel;

// Throws argument_error when any trip is not an EDA trip.
FairRideModel train_fairride(std::span<SurgeAnnotatedTrip const> eda_trips,
                             RegressionOptions const& options = {});

FareRegressionModel train_pooled_ols(std::span<SurgeAnnotatedTrip const> trips,
                                     RegressionOptions const& options = {});

std::size_t area_bucket(std::optional<std::string> const& area, std::size_t buckets);

class PricingPolicy {
public:
  virtual ~PricingPolicy() = default;
  virtual std::string name() const = 0;
  virtual double price(SurgeAnnotatedTrip const& t) const = 0;
};

class StatusQuoPolicy final : public PricingPolicy {
public:
  std::string name() const override { return "Original"; }
  double price(SurgeAnnotatedTrip const& t) const override { return t.trip.fare; }
};

class RegressionPolicy final : public PricingPolicy {
public:
  RegressionPolicy(FareRegressionModel model, std::string name)
      : model_{std::move(model)}, name_{std::move(name)} {}
  std::string name() const override { return name_; }
  double price(SurgeAnnotatedTrip const& t) const override { return model_.predict(t); }
  FareRegressionModel const& model() const { return model_; }

private:
  FareRegressionModel model_;
  std::string name_;
};

// fare - amount, never below the floor.
class FlatDiscountPolicy final : public PricingPolicy {
public:
  explicit FlatDiscountPolicy(double amount, double floor = kDefaultPriceFloor);
  std::string name() const override;
  double price(SurgeAnnotatedTrip const& t) const override;

private:
  double amount_;
  double floor_;
};

// (1 - delta) * fare.
class FixedDiscountPolicy final : public PricingPolicy {
public:
  explicit FixedDiscountPolicy(double delta);
  std::string name() const override;
  double price(SurgeAnnotatedTrip const& t) const override { return (1.0 - delta_) * t.trip.fare; }
  double delta() const { return delta_; }

private:
  double delta_;
};

std::vector<double> apply_policy(std::span<SurgeAnnotatedTrip const> trips,
                                 PricingPolicy const& policy);

// Trip count after a price change under constant point elasticity:
// n_old * (1 + E_p * dP%/100), not rounded, floored at 0.
double expected_demand(double old_price, double new_price, double e_p, double n_old);

// expected_demand rounded to a whole trip count.
double demand_uplift(double old_price, double new_price, double e_p, double n_old);

struct StratumKey {
  int hour{0};
  std::string pickup;
  std::string dropoff;

  auto operator<=>(StratumKey const&) const = default;
};

StratumKey stratum_key(TripRecord const& t);

struct Stratum {
  double trip_count{0.0};
  double avg_price{0.0};
  SurgeLevel modal_level{kNoSurge};
  double elasticity{0.0};
};

struct DemandResponse {
  ElasticityTable elasticities;
  std::map<StratumKey, Stratum> strata;

  double trip_count() const;
  double revenue() const;  // sum of trip_count * avg_price
};

// Strata over the EDA trips of `trips`. Each stratum responds with the
// elasticity of the jump above its modal displayed level, falling back to the
// nearest level that has an estimate.
DemandResponse build_demand(std::span<SurgeAnnotatedTrip const> trips,
                            ElasticityTable const& elasticities);

// Demand response with caller-chosen strata; used by tests and what-if tools.
DemandResponse make_demand(std::map<StratumKey, Stratum> strata);

enum class ScenarioKind { kGovernmentSubsidy, kPlatformFunded };

std::string_view to_string(ScenarioKind k);
ScenarioKind scenario_kind_from_string(std::string_view s);

struct PricingScenario {
  ScenarioKind kind{ScenarioKind::kGovernmentSubsidy};
  double n{0.3};       // subsidy ceiling, government only
  double p_min{12.0};  // driver floor per trip, platform only
  std::optional<double> r;  // status-quo revenue; defaults to the demand's
  double grid_step{0.01};

  void validate() const;  // throws config_error
};

struct GridPoint {
  double delta{0.0};
  double eta{0.0};
  double revenue{0.0};
  bool feasible{false};
};

struct DiscountSolution {
  PricingScenario scenario;
  double delta{0.0};
  double eta{0.0};
  double revenue{0.0};
  double subsidy{0.0};
  double baseline_eta{0.0};
  double baseline_revenue{0.0};
  FairnessSummary summary;
  bool feasible{false};
  std::vector<GridPoint> grid;
};

// One grid evaluation: every stratum repriced at (1 - delta) * avg_price.
GridPoint evaluate_discount(DemandResponse const& demand, PricingScenario const& scenario,
                            double delta);

// Grid search over delta = k * grid_step for the feasible delta with the most
// EDA trips, ties going to the larger discount. Infeasible instances return
// feasible = false with the full audit. `summary` is left empty.
DiscountSolution solve_fixedfairride(DemandResponse const& demand,
                                     PricingScenario const& scenario);

struct EvaluationContext {
  std::span<SurgeAnnotatedTrip const> trips;  // both cohorts
  DemandResponse const& demand;
  RegionMap const& regions;
  SurplusMode mode{SurplusMode::kCumulative};
  double min_level_trips{kDefaultMinLevelTrips};
};

// Reprices EDA trips (non-EDA prices ignored), responds per stratum and
// recomputes trips, R^2, consumer surplus and rider-paid revenue.
FairnessSummary evaluate_policy(EvaluationContext const& ctx, std::span<double const> new_prices);

FairnessSummary evaluate_policy(EvaluationContext const& ctx, PricingPolicy const& policy);

// Fixed discount evaluated on the solver's stratum arithmetic so that its trip
// count matches solve_fixedfairride exactly.
FairnessSummary evaluate_fixed_discount(EvaluationContext const& ctx, double delta);

// Solver plus the summary at the chosen delta.
DiscountSolution run_fixedfairride(EvaluationContext const& ctx, PricingScenario const& scenario);

}  // namespace equiride
