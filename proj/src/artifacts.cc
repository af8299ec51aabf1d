#include "equiride/artifacts.h"

#include <charconv>

#include "equiride/csv.h"
#include "equiride/error.h"
#include "equiride/ingest.h"

namespace equiride {

namespace {

using nlohmann::json;

double to_double(std::string const& s, char const* what) {
  double v = 0.0;
  auto const [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw data_error{std::string{"artifact has a bad "} + what + " value \"" + s + "\""};
  }
  return v;
}

ParseResult parse_artifact(std::istream& in, std::vector<std::string> const& extra) {
  auto result = parse_trips(in, {}, ',', extra);
  if (result.skipped > 0) {
    throw data_error{"trip artifact has " + std::to_string(result.skipped) +
                     " unreadable rows, first: " + result.diagnostics.front()};
  }
  return result;
}

json nullable(std::optional<double> v) { return v ? json(*v) : json(nullptr); }

template <class T>
T field(json const& j, char const* key, std::string const& prefix) {
  if (!j.contains(key)) throw field_error{prefix + key, "required"};
  try {
    return j.at(key).get<T>();
  } catch (json::exception const&) {
    throw field_error{prefix + key, "has the wrong type"};
  }
}

}  // namespace

void write_labeled_trips(std::ostream& out, std::span<LabeledTrip const> trips) {
  out << trip_csv_header() << ",Cohort\n";
  for (auto const& t : trips) out << trip_csv_row(t.trip) << ',' << to_string(t.cohort) << '\n';
}

std::vector<LabeledTrip> read_labeled_trips(std::istream& in) {
  auto parsed = parse_artifact(in, {"Cohort"});
  std::vector<LabeledTrip> out;
  out.reserve(parsed.trips.size());
  for (std::size_t i = 0; i < parsed.trips.size(); ++i) {
    out.push_back({std::move(parsed.trips[i]), cohort_from_string(parsed.extra[i])});
  }
  return out;
}

void write_annotated_trips(std::ostream& out, std::span<SurgeAnnotatedTrip const> trips) {
  out << trip_csv_header() << ",Cohort,Surge Continuous,Surge Displayed\n";
  for (auto const& t : trips) {
    out << trip_csv_row(t.trip) << ',' << to_string(t.cohort) << ','
        << format_shortest(t.surge_continuous) << ',' << t.surge_displayed.str() << '\n';
  }
}

std::vector<SurgeAnnotatedTrip> read_annotated_trips(std::istream& in) {
  auto parsed = parse_artifact(in, {"Cohort", "Surge Continuous", "Surge Displayed"});
  std::vector<SurgeAnnotatedTrip> out;
  out.reserve(parsed.trips.size());
  for (std::size_t i = 0; i < parsed.trips.size(); ++i) {
    auto const* e = &parsed.extra[3 * i];
    out.push_back({std::move(parsed.trips[i]), cohort_from_string(e[0]),
                   to_double(e[1], "surge"),
                   SurgeLevel::from_multiplier(to_double(e[2], "surge level"))});
  }
  return out;
}

json to_json(RegionMap const& r) {
  return {{"tracts", r.eda_tracts},
          {"areas", r.eda_areas},
          {"populations",
           {{"EDA_TRIP", r.population(Cohort::kEda)},
            {"NON_EDA_TRIP", r.population(Cohort::kNonEda)}}}};
}

RegionMap region_map_from_json(json const& j) {
  RegionMap r;
  r.eda_tracts = j.at("tracts").get<std::set<std::string>>();
  r.eda_areas = j.at("areas").get<std::set<std::string>>();
  for (auto const& [k, v] : j.at("populations").items()) {
    r.populations[cohort_from_string(k)] = v.get<double>();
  }
  return r;
}

json to_json(BaselineFareModel const& m) {
  return {{"intercept", m.intercept},
          {"per_second", m.per_second},
          {"per_mile", m.per_mile},
          {"inlier_threshold", m.inlier_threshold},
          {"inlier_fraction", m.inlier_fraction},
          {"inlier_count", m.inlier_count},
          {"fitted_trips", m.fitted_trips},
          {"seed", m.seed}};
}

json to_json(ElasticityTable const& table) {
  json rows = json::array();
  for (auto const& e : table.estimates) {
    rows.push_back({{"surge_left", e.surge_left.str()},
                    {"cutoff", e.surge_left.upper_cutoff()},
                    {"alpha", e.alpha},
                    {"n_p", e.n_p},
                    {"delta_p", e.delta_p},
                    {"E_p", e.e_p},
                    {"n_obs", e.n_obs},
                    {"skipped", e.skipped},
                    {"skip_reason", e.skip_reason}});
  }
  return {{"estimates", rows}};
}

ElasticityTable elasticity_table_from_json(json const& j) {
  ElasticityTable table;
  for (auto const& row : j.at("estimates")) {
    ElasticityEstimate e;
    e.surge_left = SurgeLevel::from_multiplier(std::stod(row.at("surge_left").get<std::string>()));
    e.alpha = row.at("alpha").get<double>();
    e.n_p = row.at("n_p").get<double>();
    e.delta_p = row.at("delta_p").get<double>();
    e.e_p = row.at("E_p").get<double>();
    e.n_obs = row.at("n_obs").get<std::size_t>();
    e.skipped = row.at("skipped").get<bool>();
    e.skip_reason = row.at("skip_reason").get<std::string>();
    table.estimates.push_back(std::move(e));
  }
  return table;
}

void write_elasticity_csv(std::ostream& out, Cohort cohort, ElasticityTable const& table,
                          bool header) {
  if (header) out << "cohort,surge_left,cutoff,alpha,n_p,delta_p,E_p,n_obs,skipped,skip_reason\n";
  for (auto const& e : table.estimates) {
    out << to_string(cohort) << ',' << e.surge_left.str() << ','
        << format_fixed(e.surge_left.upper_cutoff(), 2) << ',' << format_shortest(e.alpha) << ','
        << format_shortest(e.n_p) << ',' << format_shortest(e.delta_p) << ','
        << format_shortest(e.e_p) << ',' << e.n_obs << ',' << (e.skipped ? "true" : "false")
        << ',' << csv_escape(e.skip_reason) << '\n';
  }
}

json to_json(SurplusReport const& r) {
  json levels = json::array();
  for (auto const& [level, l] : r.per_level) {
    levels.push_back({{"level", level.str()},
                      {"num_trips", l.num_trips},
                      {"avg_fare", l.avg_fare},
                      {"contribution", l.contribution},
                      {"included", l.included}});
  }
  return {{"cohort", to_string(r.cohort)},
          {"mode", to_string(r.mode)},
          {"total_surplus", r.total_surplus},
          {"average_surplus", r.average_surplus},
          {"total_trips", r.total_trips},
          {"per_level", levels}};
}

json to_json(FairnessSummary const& s) {
  json j{{"r2", nullable(s.r2)},
         {"eta", s.eta},
         {"surplus", s.surplus},
         {"avg_surplus", s.avg_surplus},
         {"revenue", s.revenue}};
  if (!s.r2_error.empty()) j["r2_error"] = s.r2_error;
  return j;
}

FairnessSummary fairness_summary_from_json(json const& j) {
  FairnessSummary s;
  if (!j.at("r2").is_null()) s.r2 = j.at("r2").get<double>();
  s.r2_error = j.value("r2_error", "");
  s.eta = j.at("eta").get<double>();
  s.surplus = j.at("surplus").get<double>();
  s.avg_surplus = j.at("avg_surplus").get<double>();
  s.revenue = j.at("revenue").get<double>();
  return s;
}

json to_json(FareRegressionModel const& m) {
  return {{"features", m.feature_names},
          {"coefficients", std::vector<double>(m.coefficients.begin(), m.coefficients.end())},
          {"dropped", m.dropped},
          {"area_buckets", m.area_buckets},
          {"price_floor", m.price_floor},
          {"training_cohort", m.eda_only ? "EDA_TRIP" : "ALL"}};
}

FareRegressionModel fare_model_from_json(json const& j) {
  FareRegressionModel m;
  m.feature_names = j.at("features").get<std::vector<std::string>>();
  auto const coef = j.at("coefficients").get<std::vector<double>>();
  if (coef.size() != m.feature_names.size()) throw data_error{"fare model coefficient count mismatch"};
  m.coefficients = Eigen::Map<Eigen::VectorXd const>(coef.data(), static_cast<Eigen::Index>(coef.size()));
  m.dropped = j.at("dropped").get<std::vector<std::string>>();
  m.area_buckets = j.at("area_buckets").get<std::size_t>();
  m.price_floor = j.at("price_floor").get<double>();
  m.eda_only = j.at("training_cohort").get<std::string>() == "EDA_TRIP";
  return m;
}

json to_json(PricingScenario const& s) {
  json j{{"kind", to_string(s.kind)}, {"grid_step", s.grid_step}};
  if (s.kind == ScenarioKind::kGovernmentSubsidy) {
    j["n"] = s.n;
  } else {
    j["p_min"] = s.p_min;
    if (s.r) j["r"] = *s.r;
  }
  return j;
}

PricingScenario scenario_from_json(json const& j, double default_step) {
  std::string const prefix = "scenario.";
  if (!j.is_object()) throw field_error{"scenario", "must be an object"};
  PricingScenario s;
  try {
    s.kind = scenario_kind_from_string(field<std::string>(j, "kind", prefix));
  } catch (field_error const&) {
    throw;
  } catch (config_error const&) {
    throw field_error{prefix + "kind", "must be GOVERNMENT_SUBSIDY or PLATFORM_FUNDED"};
  }
  s.grid_step = j.contains("grid_step") ? field<double>(j, "grid_step", prefix) : default_step;
  if (!(s.grid_step > 0.0 && s.grid_step < 1.0)) {
    throw field_error{prefix + "grid_step", "must lie in (0, 1)"};
  }
  if (s.kind == ScenarioKind::kGovernmentSubsidy) {
    s.n = field<double>(j, "n", prefix);
    if (!(s.n > 0.0 && s.n <= 1.0)) throw field_error{prefix + "n", "must lie in (0, 1]"};
  } else {
    s.p_min = field<double>(j, "p_min", prefix);
    if (!(s.p_min > 0.0)) throw field_error{prefix + "p_min", "must be positive"};
    if (j.contains("r") && !j.at("r").is_null()) {
      s.r = field<double>(j, "r", prefix);
      if (!(*s.r > 0.0)) throw field_error{prefix + "r", "must be positive"};
    }
  }
  return s;
}

json to_json(GridPoint const& p) {
  return {{"delta", p.delta}, {"eta", p.eta}, {"revenue", p.revenue}, {"feasible", p.feasible}};
}

json to_json(DiscountSolution const& s) {
  json grid = json::array();
  for (auto const& p : s.grid) grid.push_back(to_json(p));
  json j{{"scenario", to_json(s.scenario)},
         {"feasible", s.feasible},
         {"delta", s.feasible ? json(s.delta) : json(nullptr)},
         {"eta", s.feasible ? json(s.eta) : json(nullptr)},
         {"revenue", s.feasible ? json(s.revenue) : json(nullptr)},
         {"subsidy", s.subsidy},
         {"baseline_eta", s.baseline_eta},
         {"baseline_revenue", s.baseline_revenue},
         {"summary", to_json(s.summary)},
         {"grid", grid}};
  return j;
}

std::unique_ptr<PricingPolicy> policy_from_json(json const& j, FareRegressionModel const* fairride) {
  if (!j.is_object()) throw field_error{"policy", "must be an object"};
  auto const type = field<std::string>(j, "type", "policy.");
  if (type == "fairride") {
    if (!fairride) throw field_error{"policy.type", "fairride needs a trained model"};
    return std::make_unique<RegressionPolicy>(*fairride, "FairRide");
  }
  if (type == "flat") {
    double const amount = j.contains("amount") ? field<double>(j, "amount", "policy.") : 5.0;
    double const floor =
        j.contains("floor") ? field<double>(j, "floor", "policy.") : kDefaultPriceFloor;
    if (!(amount >= 0.0)) throw field_error{"policy.amount", "must be nonnegative"};
    return std::make_unique<FlatDiscountPolicy>(amount, floor);
  }
  if (type == "fixed") {
    double const delta = field<double>(j, "delta", "policy.");
    if (!(delta >= 0.0 && delta < 1.0)) throw field_error{"policy.delta", "must lie in [0, 1)"};
    return std::make_unique<FixedDiscountPolicy>(delta);
  }
  throw field_error{"policy.type", "must be fairride, flat or fixed"};
}

}  // namespace equiride
