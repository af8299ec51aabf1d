#include "equiride/pricing.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <stdexcept>

#include "equiride/csv.h"
#include "equiride/error.h"
#include "equiride/least_squares.h"

namespace equiride {

namespace {

constexpr std::size_t kNumericFeatures = 4;  // intercept, duration, distance, surge

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string two_digit(std::size_t i) { return (i < 10 ? "0" : "") + std::to_string(i); }

std::vector<std::string> feature_names(std::size_t buckets) {
  std::vector<std::string> names{"intercept", "duration_s", "distance_mi", "surge_displayed"};
  for (std::size_t h = 1; h < 24; ++h) names.push_back("hour_" + two_digit(h));
  for (std::size_t b = 1; b < buckets; ++b) names.push_back("area_bucket_" + two_digit(b));
  return names;
}

void feature_row(SurgeAnnotatedTrip const& t, std::size_t buckets, std::vector<double>& row) {
  std::fill(row.begin(), row.end(), 0.0);
  row[0] = 1.0;
  row[1] = t.trip.duration_s;
  row[2] = t.trip.distance_mi;
  row[3] = t.surge_displayed.multiplier();
  auto const hour = static_cast<std::size_t>(hour_of_day(t.trip.start_time));
  if (hour > 0) row[kNumericFeatures + hour - 1] = 1.0;
  auto const bucket = area_bucket(t.trip.pickup_area, buckets);
  if (bucket > 0) row[kNumericFeatures + 23 + bucket - 1] = 1.0;
}

FareRegressionModel train_regression(std::span<SurgeAnnotatedTrip const> trips,
                                     RegressionOptions const& options, bool eda_only) {
  if (options.area_buckets == 0) throw argument_error{"area bucket count must be positive"};
  if (trips.size() < options.min_trips) {
    throw data_error{"fare regression needs at least " + std::to_string(options.min_trips) +
                     " trips, got " + std::to_string(trips.size())};
  }
  FareRegressionModel model;
  model.feature_names = feature_names(options.area_buckets);
  model.area_buckets = options.area_buckets;
  model.price_floor = options.price_floor;
  model.eda_only = eda_only;

  auto const k = model.feature_names.size();
  LeastSquares ls{k};
  std::vector<double> row(k);
  for (auto const& t : trips) {
    feature_row(t, options.area_buckets, row);
    ls.add_row(row, t.trip.fare);
  }
  auto droppable = std::make_unique<bool[]>(k);
  for (std::size_t j = 1; j < k; ++j) droppable[j] = true;  // intercept stays
  auto const sol = ls.solve(std::span<bool const>{droppable.get(), k}, model.feature_names);
  model.coefficients = sol.coef;
  for (auto const j : sol.dropped) model.dropped.push_back(model.feature_names[j]);
  return model;
}

}  // namespace

std::size_t area_bucket(std::optional<std::string> const& area, std::size_t buckets) {
  return static_cast<std::size_t>(fnv1a(area.value_or("")) % buckets);
}

std::map<std::string, double> FareRegressionModel::coefficient_map() const {
  std::map<std::string, double> out;
  for (std::size_t j = 0; j < feature_names.size(); ++j) {
    out[feature_names[j]] = coefficients(static_cast<Eigen::Index>(j));
  }
  return out;
}

double FareRegressionModel::predict(SurgeAnnotatedTrip const& t) const {
  std::vector<double> row(feature_names.size());
  feature_row(t, area_buckets, row);
  double p = 0.0;
  for (std::size_t j = 0; j < row.size(); ++j) p += row[j] * coefficients(static_cast<Eigen::Index>(j));
  return std::max(p, price_floor);
}

FairRideModel train_fairride(std::span<SurgeAnnotatedTrip const> eda_trips,
                             RegressionOptions const& options) {
  for (auto const& t : eda_trips) {
    if (t.cohort != Cohort::kEda) {
      throw argument_error{"FairRide trains on EDA trips only; trip \"" + t.trip.trip_id +
                           "\" is a non-EDA trip"};
    }
  }
  return train_regression(eda_trips, options, true);
}

FareRegressionModel train_pooled_ols(std::span<SurgeAnnotatedTrip const> trips,
                                     RegressionOptions const& options) {
  return train_regression(trips, options, false);
}

FlatDiscountPolicy::FlatDiscountPolicy(double amount, double floor)
    : amount_{amount}, floor_{floor} {
  if (amount < 0.0) throw argument_error{"flat discount must be nonnegative"};
}

std::string FlatDiscountPolicy::name() const {
  bool const whole = amount_ == std::floor(amount_);
  return "Baseline (-$" + format_fixed(amount_, whole ? 0 : 2) + ")";
}

double FlatDiscountPolicy::price(SurgeAnnotatedTrip const& t) const {
  return std::max(floor_, t.trip.fare - amount_);
}

FixedDiscountPolicy::FixedDiscountPolicy(double delta) : delta_{delta} {
  if (!(delta >= 0.0) || !(delta < 1.0)) throw argument_error{"discount must lie in [0, 1)"};
}

std::string FixedDiscountPolicy::name() const { return "Fixed discount " + format_fixed(delta_, 2); }

std::vector<double> apply_policy(std::span<SurgeAnnotatedTrip const> trips,
                                 PricingPolicy const& policy) {
  std::vector<double> out;
  out.reserve(trips.size());
  for (auto const& t : trips) out.push_back(policy.price(t));
  return out;
}

double expected_demand(double old_price, double new_price, double e_p, double n_old) {
  if (!(old_price > 0.0)) throw argument_error{"old price must be positive"};
  if (n_old < 0.0) throw argument_error{"trip count must be nonnegative"};
  double const change_pct = (new_price - old_price) / old_price * 100.0;
  return std::max(0.0, n_old * (1.0 + e_p * change_pct / 100.0));
}

double demand_uplift(double old_price, double new_price, double e_p, double n_old) {
  return std::round(expected_demand(old_price, new_price, e_p, n_old));
}

StratumKey stratum_key(TripRecord const& t) {
  auto endpoint = [](std::optional<std::string> const& area,
                     std::optional<std::string> const& tract) {
    if (area) return *area;
    return "tract:" + tract.value_or("");
  };
  return {hour_of_day(t.start_time), endpoint(t.pickup_area, t.pickup_tract),
          endpoint(t.dropoff_area, t.dropoff_tract)};
}

double DemandResponse::trip_count() const {
  double n = 0.0;
  for (auto const& [key, s] : strata) n += s.trip_count;
  return n;
}

double DemandResponse::revenue() const {
  double r = 0.0;
  for (auto const& [key, s] : strata) r += s.trip_count * s.avg_price;
  return r;
}

DemandResponse build_demand(std::span<SurgeAnnotatedTrip const> trips,
                            ElasticityTable const& elasticities) {
  auto const by_level = elasticities.by_departure_level();
  if (by_level.empty()) throw estimation_error{"no elasticity estimates to drive demand"};

  struct Acc {
    double count{0.0};
    double fare_sum{0.0};
    std::map<SurgeLevel, std::size_t> levels;
  };
  std::map<StratumKey, Acc> acc;
  for (auto const& t : trips) {
    if (t.cohort != Cohort::kEda) continue;
    auto& a = acc[stratum_key(t.trip)];
    a.count += 1.0;
    a.fare_sum += t.trip.fare;
    ++a.levels[t.surge_displayed];
  }

  DemandResponse demand;
  demand.elasticities = elasticities;
  for (auto const& [key, a] : acc) {
    Stratum s;
    s.trip_count = a.count;
    s.avg_price = a.fare_sum / a.count;
    std::size_t best = 0;
    for (auto const& [level, n] : a.levels) {
      if (n > best) {
        best = n;
        s.modal_level = level;
      }
    }
    auto it = by_level.find(s.modal_level);
    if (it == by_level.end()) {
      int best_gap = std::numeric_limits<int>::max();
      for (auto cand = by_level.begin(); cand != by_level.end(); ++cand) {
        int const gap = std::abs(cand->first.tenths - s.modal_level.tenths);
        if (gap < best_gap) {
          best_gap = gap;
          it = cand;
        }
      }
    }
    s.elasticity = it->second;
    demand.strata.emplace(key, s);
  }
  return demand;
}

DemandResponse make_demand(std::map<StratumKey, Stratum> strata) {
  DemandResponse d;
  d.strata = std::move(strata);
  return d;
}

std::string_view to_string(ScenarioKind k) {
  return k == ScenarioKind::kGovernmentSubsidy ? "GOVERNMENT_SUBSIDY" : "PLATFORM_FUNDED";
}

ScenarioKind scenario_kind_from_string(std::string_view s) {
  if (s == "GOVERNMENT_SUBSIDY") return ScenarioKind::kGovernmentSubsidy;
  if (s == "PLATFORM_FUNDED") return ScenarioKind::kPlatformFunded;
  throw config_error{"unknown scenario kind \"" + std::string{s} + "\""};
}

void PricingScenario::validate() const {
  if (!(grid_step > 0.0) || !(grid_step < 1.0)) throw config_error{"grid_step must lie in (0, 1)"};
  if (kind == ScenarioKind::kGovernmentSubsidy) {
    if (!(n > 0.0) || n > 1.0) throw config_error{"subsidy ceiling n must lie in (0, 1]"};
  } else {
    if (!(p_min > 0.0)) throw config_error{"p_min must be positive"};
    if (r && !(*r > 0.0)) throw config_error{"r must be positive"};
  }
}

namespace {

bool constraints_hold(PricingScenario const& scenario, double r, double delta, double eta,
                      double rider_paid) {
  if (scenario.kind == ScenarioKind::kGovernmentSubsidy) {
    return delta > 0.0 && delta < scenario.n;
  }
  return delta > 0.0 && delta < 1.0 && rider_paid >= std::max(r, eta * scenario.p_min);
}

struct DiscountTotals {
  double eta{0.0};
  double rider_paid{0.0};
  double gross{0.0};
};

DiscountTotals discount_totals(DemandResponse const& demand, double delta) {
  DiscountTotals t;
  for (auto const& [key, s] : demand.strata) {
    double const new_price = (1.0 - delta) * s.avg_price;
    double const n = demand_uplift(s.avg_price, new_price, s.elasticity, s.trip_count);
    t.eta += n;
    t.rider_paid += n * new_price;
    t.gross += n * s.avg_price;
  }
  return t;
}

}  // namespace

GridPoint evaluate_discount(DemandResponse const& demand, PricingScenario const& scenario,
                            double delta) {
  double const r = scenario.r.value_or(demand.revenue());
  auto const t = discount_totals(demand, delta);
  GridPoint p;
  p.delta = delta;
  p.eta = t.eta;
  p.revenue = scenario.kind == ScenarioKind::kGovernmentSubsidy ? t.gross : t.rider_paid;
  p.feasible = constraints_hold(scenario, r, delta, t.eta, t.rider_paid);
  return p;
}

DiscountSolution solve_fixedfairride(DemandResponse const& demand,
                                     PricingScenario const& scenario) {
  scenario.validate();
  if (demand.strata.empty()) throw argument_error{"demand has no strata"};

  DiscountSolution sol;
  sol.scenario = scenario;
  sol.baseline_eta = demand.trip_count();
  sol.baseline_revenue = scenario.r.value_or(demand.revenue());

  double const upper = scenario.kind == ScenarioKind::kGovernmentSubsidy ? scenario.n : 1.0;
  auto const steps = static_cast<std::size_t>(std::floor(upper / scenario.grid_step + 1e-9));
  std::optional<std::size_t> best;
  for (std::size_t k = 1; k <= steps; ++k) {
    // Snap to 1e-9 so that k * step lands on the decimal grid value.
    double const delta = std::round(static_cast<double>(k) * scenario.grid_step * 1e9) / 1e9;
    sol.grid.push_back(evaluate_discount(demand, scenario, delta));
    auto const& p = sol.grid.back();
    if (p.feasible && (!best || p.eta >= sol.grid[*best].eta)) best = sol.grid.size() - 1;
  }
  if (!best) return sol;

  auto const& p = sol.grid[*best];
  sol.feasible = true;
  sol.delta = p.delta;
  sol.eta = p.eta;
  sol.revenue = p.revenue;
  auto const totals = discount_totals(demand, p.delta);
  if (scenario.kind == ScenarioKind::kGovernmentSubsidy) sol.subsidy = totals.gross - totals.rider_paid;
  if (!constraints_hold(scenario, sol.baseline_revenue, sol.delta, totals.eta, totals.rider_paid)) {
    throw std::logic_error{"fixed discount solution violates its scenario constraints"};
  }
  return sol;
}

namespace {

FairnessSummary evaluate_core(EvaluationContext const& ctx,
                              std::map<StratumKey, double> const& stratum_new_price,
                              auto&& trip_price) {
  std::map<StratumKey, double> weight;
  double eta = 0.0;
  for (auto const& [key, s] : ctx.demand.strata) {
    auto const it = stratum_new_price.find(key);
    if (it == stratum_new_price.end()) {
      throw argument_error{"demand stratum without trips in the evaluated trip set"};
    }
    double const n = demand_uplift(s.avg_price, it->second, s.elasticity, s.trip_count);
    weight[key] = n / s.trip_count;
    eta += n;
  }

  LevelStats levels;
  double revenue = 0.0;
  double non_eda = 0.0;
  for (std::size_t i = 0; i < ctx.trips.size(); ++i) {
    auto const& t = ctx.trips[i];
    if (t.cohort != Cohort::kEda) {
      non_eda += 1.0;
      continue;
    }
    auto const w_it = weight.find(stratum_key(t.trip));
    if (w_it == weight.end()) throw argument_error{"EDA trip outside the demand strata"};
    double const w = w_it->second;
    double const price = trip_price(i);
    auto& l = levels[t.surge_displayed];
    l.num_trips += w;
    l.avg_fare += w * price;
    revenue += w * price;
  }
  for (auto& [level, l] : levels) l.avg_fare = l.num_trips > 0.0 ? l.avg_fare / l.num_trips : 0.0;

  auto const report = consumer_surplus(Cohort::kEda, levels,
                                       ctx.demand.elasticities.by_arrival_level(), ctx.mode,
                                       ctx.min_level_trips);
  FairnessSummary s;
  s.eta = eta;
  s.revenue = revenue;
  s.surplus = report.total_surplus;
  s.avg_surplus = report.average_surplus;
  try {
    auto const groups = cohort_groups(eta, non_eda, ctx.regions);
    s.r2 = relative_rideability(groups);
  } catch (undefined_ratio_error const& e) {
    s.r2_error = e.what();
  }
  return s;
}

}  // namespace

FairnessSummary evaluate_policy(EvaluationContext const& ctx, std::span<double const> new_prices) {
  if (new_prices.size() != ctx.trips.size()) {
    throw argument_error{"repriced list does not match the trip list"};
  }
  std::map<StratumKey, std::pair<double, double>> sums;
  for (std::size_t i = 0; i < ctx.trips.size(); ++i) {
    auto const& t = ctx.trips[i];
    if (t.cohort != Cohort::kEda) continue;
    auto& [sum, count] = sums[stratum_key(t.trip)];
    sum += new_prices[i];
    count += 1.0;
  }
  std::map<StratumKey, double> avg;
  for (auto const& [key, sc] : sums) avg[key] = sc.first / sc.second;
  return evaluate_core(ctx, avg, [&](std::size_t i) { return new_prices[i]; });
}

FairnessSummary evaluate_policy(EvaluationContext const& ctx, PricingPolicy const& policy) {
  std::vector<double> prices;
  prices.reserve(ctx.trips.size());
  for (auto const& t : ctx.trips) {
    prices.push_back(t.cohort == Cohort::kEda ? policy.price(t) : t.trip.fare);
  }
  return evaluate_policy(ctx, prices);
}

FairnessSummary evaluate_fixed_discount(EvaluationContext const& ctx, double delta) {
  std::map<StratumKey, double> avg;
  for (auto const& [key, s] : ctx.demand.strata) avg[key] = (1.0 - delta) * s.avg_price;
  return evaluate_core(ctx, avg,
                       [&](std::size_t i) { return (1.0 - delta) * ctx.trips[i].trip.fare; });
}

DiscountSolution run_fixedfairride(EvaluationContext const& ctx, PricingScenario const& scenario) {
  auto sol = solve_fixedfairride(ctx.demand, scenario);
  sol.summary = evaluate_fixed_discount(ctx, sol.feasible ? sol.delta : 0.0);
  return sol;
}

}  // namespace equiride
