#include "equiride/pipeline.h"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "equiride/artifacts.h"
#include "equiride/csv.h"
#include "equiride/error.h"
#include "equiride/metrics.h"

namespace equiride {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr char const* kStateFile = "state.json";

std::ifstream open_in(fs::path const& p) {
  std::ifstream in{p, std::ios::binary};
  if (!in) throw config_error{"cannot open " + p.string()};
  return in;
}

std::ofstream open_out(fs::path const& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out{p, std::ios::binary};
  if (!out) throw config_error{"cannot write " + p.string()};
  return out;
}

RansacOptions ransac_from_json(json const& j) {
  RansacOptions o;
  for (auto const& [key, v] : j.items()) {
    if (key == "iterations") o.iterations = v.get<std::size_t>();
    else if (key == "sample_size") o.sample_size = v.get<std::size_t>();
    else if (key == "threshold_rule") {
      auto const rule = v.get<std::string>();
      if (rule == "mad") o.threshold_rule = ThresholdRule::kMadScaled;
      else if (rule == "fixed") o.threshold_rule = ThresholdRule::kFixed;
      else throw field_error{"ransac.threshold_rule", "must be mad or fixed"};
    } else if (key == "threshold_factor") o.threshold_factor = v.get<double>();
    else if (key == "fixed_threshold") o.fixed_threshold = v.get<double>();
    else if (key == "seed") o.seed = v.get<std::uint64_t>();
    else if (key == "max_eval") o.max_eval = v.get<std::size_t>();
    else if (key == "refine_passes") o.refine_passes = v.get<std::size_t>();
    else throw field_error{"ransac." + key, "unknown key"};
  }
  return o;
}

json to_json(RansacOptions const& o) {
  return {{"iterations", o.iterations},
          {"sample_size", o.sample_size},
          {"threshold_rule", o.threshold_rule == ThresholdRule::kMadScaled ? "mad" : "fixed"},
          {"threshold_factor", o.threshold_factor},
          {"fixed_threshold", o.fixed_threshold},
          {"seed", o.seed},
          {"max_eval", o.max_eval},
          {"refine_passes", o.refine_passes}};
}

SurplusReport surplus_report_from_json(json const& j) {
  SurplusReport r;
  r.cohort = cohort_from_string(j.at("cohort").get<std::string>());
  r.mode = surplus_mode_from_string(j.at("mode").get<std::string>());
  r.total_surplus = j.at("total_surplus").get<double>();
  r.average_surplus = j.at("average_surplus").get<double>();
  r.total_trips = j.at("total_trips").get<double>();
  for (auto const& l : j.at("per_level")) {
    auto& out = r.per_level[SurgeLevel::from_multiplier(std::stod(l.at("level").get<std::string>()))];
    out.num_trips = l.at("num_trips").get<double>();
    out.avg_fare = l.at("avg_fare").get<double>();
    out.contribution = l.at("contribution").get<double>();
    out.included = l.at("included").get<bool>();
  }
  return r;
}

std::vector<SurgeAnnotatedTrip> of_cohort(std::span<SurgeAnnotatedTrip const> trips, Cohort c) {
  std::vector<SurgeAnnotatedTrip> out;
  for (auto const& t : trips) {
    if (t.cohort == c) out.push_back(t);
  }
  return out;
}

std::string num(std::optional<double> v) { return v ? format_shortest(*v) : std::string{}; }

json nullable(std::optional<double> v) { return v ? json(*v) : json(nullptr); }

std::optional<double> change_pct(std::optional<double> now, std::optional<double> base) {
  if (!now || !base || *base == 0.0) return std::nullopt;
  return (*now / *base - 1.0) * 100.0;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hash_file(fs::path const& p) {
  auto in = open_in(p);
  std::uint64_t h = 14695981039346656037ULL;
  std::vector<char> buf(1 << 20);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    h = fnv1a64({buf.data(), static_cast<std::size_t>(in.gcount())}, h);
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

PipelineConfig pipeline_config_from_json(json const& j, fs::path const& base_dir) {
  if (!j.is_object()) throw config_error{"pipeline config must be a JSON object"};
  PipelineConfig c;
  auto resolve = [&](std::string const& s) {
    fs::path p{s};
    return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
  };
  double const step = j.value("grid_step", c.scenario.grid_step);
  c.scenario.grid_step = step;
  c.subsidy_scenario.grid_step = step;
  for (auto const& [key, v] : j.items()) {
    try {
      if (key == "trips") c.trips = resolve(v.get<std::string>());
      else if (key == "regions") c.regions = resolve(v.get<std::string>());
      else if (key == "populations") {
        c.populations.clear();
        for (auto const& [k, p] : v.items()) c.populations[cohort_from_string(k)] = p.get<double>();
      } else if (key == "date_range") {
        if (v.contains("start")) c.start_date = v.at("start").get<std::string>();
        if (v.contains("end")) c.end_date = v.at("end").get<std::string>();
      } else if (key == "exclude_shared") c.exclude_shared = v.get<bool>();
      else if (key == "columns") c.columns = v.get<std::map<std::string, std::string>>();
      else if (key == "delimiter") {
        auto const d = v.get<std::string>();
        if (d.size() != 1) throw field_error{"delimiter", "must be one character"};
        c.delimiter = d[0];
      } else if (key == "ransac") c.ransac = ransac_from_json(v);
      else if (key == "pooled_surge") c.pooled_surge = v.get<bool>();
      else if (key == "elasticity") {
        c.elasticity.half_width = v.value("half_width", c.elasticity.half_width);
        c.elasticity.near_band = v.value("near_band", c.elasticity.near_band);
        c.elasticity.bin_width = v.value("bin_width", c.elasticity.bin_width);
      } else if (key == "surplus") {
        if (v.contains("mode")) c.mode = surplus_mode_from_string(v.at("mode").get<std::string>());
        c.min_level_trips = v.value("min_level_trips", c.min_level_trips);
      } else if (key == "regression") {
        c.regression.area_buckets = v.value("area_buckets", c.regression.area_buckets);
        c.regression.price_floor = v.value("price_floor", c.regression.price_floor);
        c.regression.min_trips = v.value("min_trips", c.regression.min_trips);
      } else if (key == "flat_discount") c.flat_discount = v.get<double>();
      else if (key == "scenario") c.scenario = scenario_from_json(v, step);
      else if (key == "subsidy_scenario") {
        c.subsidy_scenario = scenario_from_json(v, step);
        if (c.subsidy_scenario.kind != ScenarioKind::kGovernmentSubsidy) {
          throw field_error{"subsidy_scenario.kind", "must be GOVERNMENT_SUBSIDY"};
        }
      } else if (key == "p_min_sweep") c.p_min_sweep = v.get<std::vector<double>>();
      else if (key == "grid_step") continue;
      else throw field_error{key, "unknown key"};
    } catch (json::exception const& e) {
      throw field_error{key, e.what()};
    } catch (argument_error const& e) {
      throw field_error{key, e.what()};
    }
  }
  for (auto const& [cohort, p] : c.populations) {
    if (!(p > 0.0)) throw field_error{"populations", "must be positive"};
  }
  c.scenario.validate();
  c.subsidy_scenario.validate();
  return c;
}

json to_json(PipelineConfig const& c) {
  json j{{"populations",
          {{"EDA_TRIP", c.populations.at(Cohort::kEda)},
           {"NON_EDA_TRIP", c.populations.at(Cohort::kNonEda)}}},
         {"exclude_shared", c.exclude_shared},
         {"columns", c.columns},
         {"delimiter", std::string(1, c.delimiter)},
         {"ransac", to_json(c.ransac)},
         {"pooled_surge", c.pooled_surge},
         {"elasticity",
          {{"half_width", c.elasticity.half_width},
           {"near_band", c.elasticity.near_band},
           {"bin_width", c.elasticity.bin_width}}},
         {"surplus", {{"mode", to_string(c.mode)}, {"min_level_trips", c.min_level_trips}}},
         {"regression",
          {{"area_buckets", c.regression.area_buckets},
           {"price_floor", c.regression.price_floor},
           {"min_trips", c.regression.min_trips}}},
         {"flat_discount", c.flat_discount},
         {"scenario", to_json(c.scenario)},
         {"subsidy_scenario", to_json(c.subsidy_scenario)},
         {"p_min_sweep", c.p_min_sweep}};
  if (c.trips) j["trips"] = fs::absolute(*c.trips).string();
  if (c.regions) j["regions"] = fs::absolute(*c.regions).string();
  if (c.start_date || c.end_date) {
    j["date_range"] = json::object();
    if (c.start_date) j["date_range"]["start"] = *c.start_date;
    if (c.end_date) j["date_range"]["end"] = *c.end_date;
  }
  return j;
}

json read_json(fs::path const& p) {
  auto in = open_in(p);
  auto j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw data_error{p.string() + " is not valid JSON"};
  return j;
}

void write_json(fs::path const& p, json const& j) {
  auto out = open_out(p);
  out << j.dump(2) << '\n';
}

std::vector<SurgeAnnotatedTrip> load_annotated_trips(fs::path const& p) {
  auto in = open_in(p);
  return read_annotated_trips(in);
}

RegionMap load_regions_artifact(fs::path const& p) { return region_map_from_json(read_json(p)); }

std::map<Cohort, ElasticityTable> load_elasticities(fs::path const& p) {
  std::map<Cohort, ElasticityTable> out;
  auto const doc = read_json(p);
  for (auto const& [k, v] : doc.items()) {
    out[cohort_from_string(k)] = elasticity_table_from_json(v);
  }
  return out;
}

json surge_shares(std::span<SurgeAnnotatedTrip const> trips) {
  std::map<Cohort, std::map<SurgeLevel, double>> counts;
  std::map<Cohort, double> totals;
  for (auto const& t : trips) {
    counts[t.cohort][t.surge_displayed] += 1.0;
    totals[t.cohort] += 1.0;
  }
  json out = json::object();
  for (auto const& [cohort, levels] : counts) {
    json rows = json::array();
    for (auto const& [level, n] : levels) {
      rows.push_back({{"level", level.str()}, {"trips", n}, {"share", n / totals[cohort]}});
    }
    out[std::string{to_string(cohort)}] = {{"total", totals[cohort]}, {"levels", rows}};
  }
  return out;
}

Pipeline::Pipeline(fs::path out_dir, PipelineConfig config, bool force)
    : dir_{std::move(out_dir)}, config_{std::move(config)}, force_{force} {
  fs::create_directories(dir_);
  auto const state_path = dir_ / kStateFile;
  state_ = fs::exists(state_path) ? read_json(state_path) : json{{"stages", json::object()}};
  if (!state_.contains("stages")) state_["stages"] = json::object();
}

PipelineConfig Pipeline::stored_config(fs::path const& out_dir) {
  auto const p = out_dir / kStateFile;
  if (!fs::exists(p)) return {};
  auto const state = read_json(p);
  if (!state.contains("config")) return {};
  return pipeline_config_from_json(state.at("config"));
}

fs::path Pipeline::artifact(std::string const& stage, std::string const& name) const {
  auto const& stages = state_.at("stages");
  if (!stages.contains(stage) || !stages.at(stage).at("artifacts").contains(name)) {
    throw missing_artifact_error{stage, "stage " + stage + " has no artifact " + name};
  }
  return dir_ / stages.at(stage).at("artifacts").at(name).at("path").get<std::string>();
}

void Pipeline::require_stage(std::string const& stage, std::string const& consumer) const {
  auto const& stages = state_.at("stages");
  if (!stages.contains(stage)) {
    throw missing_artifact_error{stage, consumer + " needs the output of stage \"" + stage +
                                            "\"; run `equiride " + stage + "` first"};
  }
  auto const& entry = stages.at(stage);
  for (auto const& [name, a] : entry.at("artifacts").items()) {
    auto const p = dir_ / a.at("path").get<std::string>();
    if (!fs::exists(p)) {
      throw missing_artifact_error{stage, "artifact " + p.string() + " of stage \"" + stage +
                                              "\" is missing; rerun `equiride " + stage + "`"};
    }
    if (!force_ && hash_file(p) != a.at("hash").get<std::string>()) {
      throw stale_artifact_error{stage, "artifact " + p.string() + " of stage \"" + stage +
                                            "\" changed since it was written; rerun `equiride " +
                                            stage + "` or pass --force"};
    }
  }
  for (auto const& [upstream, hashes] : entry.at("inputs").items()) {
    if (!stages.contains(upstream)) {
      throw missing_artifact_error{upstream, "stage \"" + stage + "\" was built from stage \"" +
                                                 upstream + "\", which has no record"};
    }
    auto const& current = stages.at(upstream).at("artifacts");
    for (auto const& [name, hash] : hashes.items()) {
      if (!force_ && (!current.contains(name) || current.at(name).at("hash") != hash)) {
        throw stale_artifact_error{stage, "stage \"" + stage + "\" is older than its input from \"" +
                                              upstream + "\"; rerun `equiride " + stage +
                                              "` or pass --force"};
      }
    }
    require_stage(upstream, consumer);
  }
}

void Pipeline::record(std::string const& stage, std::map<std::string, std::string> const& files,
                      std::vector<std::string> const& upstream) {
  json entry{{"artifacts", json::object()}, {"inputs", json::object()}};
  for (auto const& [name, rel] : files) {
    entry["artifacts"][name] = {{"path", rel}, {"hash", hash_file(dir_ / rel)}};
  }
  for (auto const& u : upstream) {
    json hashes = json::object();
    for (auto const& [name, a] : state_["stages"][u]["artifacts"].items()) hashes[name] = a["hash"];
    entry["inputs"][u] = hashes;
  }
  state_["config"] = to_json(config_);
  state_["stages"][stage] = entry;
  save_state();
}

void Pipeline::save_state() const {
  auto const tmp = dir_ / (std::string{kStateFile} + ".tmp");
  write_json(tmp, state_);
  fs::rename(tmp, dir_ / kStateFile);
}

json Pipeline::ingest() {
  if (!config_.trips) throw config_error{"no trip file: pass --input or set \"trips\" in the config"};
  auto const trips_path = *config_.trips;
  auto const regions_path =
      config_.regions ? *config_.regions : trips_path.parent_path() / "regions.json";
  if (!fs::exists(regions_path)) {
    throw config_error{"no region file: set \"regions\" in the config (looked for " +
                       regions_path.string() + ")"};
  }

  ColumnMap columns;
  columns.apply_overrides(config_.columns);
  auto in = open_in(trips_path);
  auto const parsed = parse_trips(in, columns, config_.delimiter);
  auto rin = open_in(regions_path);
  auto const regions = load_region_map(rin, config_.populations);

  DateRange range{Timestamp::min(), Timestamp::max()};
  if (config_.start_date) {
    auto const d = parse_date(*config_.start_date);
    if (!d) throw config_error{"bad date_range.start \"" + *config_.start_date + "\""};
    range.start = *d;
  }
  if (config_.end_date) {
    auto const d = parse_date(*config_.end_date);
    if (!d) throw config_error{"bad date_range.end \"" + *config_.end_date + "\""};
    range.end = *d + std::chrono::seconds{86399};
  }
  auto const kept = filter_trips(parsed.trips, range, config_.exclude_shared);

  std::vector<LabeledTrip> labeled;
  labeled.reserve(kept.size());
  std::size_t eda = 0;
  for (auto const& t : kept) {
    labeled.push_back({t, classify_trip(t, regions)});
    eda += labeled.back().cohort == Cohort::kEda;
  }
  {
    auto out = open_out(dir_ / "labeled_trips.csv");
    write_labeled_trips(out, labeled);
  }
  write_json(dir_ / "regions.json", to_json(regions));
  json report{{"rows", parsed.rows},
              {"parsed", parsed.trips.size()},
              {"skipped", parsed.skipped},
              {"diagnostics", parsed.diagnostics},
              {"filtered_out", parsed.trips.size() - kept.size()},
              {"kept", kept.size()},
              {"eda_trips", eda},
              {"non_eda_trips", kept.size() - eda}};
  write_json(dir_ / "ingest_report.json", report);
  record("ingest",
         {{"labeled_trips", "labeled_trips.csv"},
          {"regions", "regions.json"},
          {"report", "ingest_report.json"}},
         {});
  return report;
}

SurgeInference Pipeline::surge() {
  require_stage("ingest", "surge");
  auto in = open_in(artifact("ingest", "labeled_trips"));
  auto const labeled = read_labeled_trips(in);
  auto inference = infer_surge(labeled, config_.ransac, config_.pooled_surge);
  {
    auto out = open_out(dir_ / "annotated_trips.csv");
    write_annotated_trips(out, inference.trips);
  }
  json models = json::object();
  for (auto const& [cohort, m] : inference.models) models[std::string{to_string(cohort)}] = to_json(m);
  write_json(dir_ / "surge_models.json",
             {{"pooled", config_.pooled_surge}, {"excluded", inference.excluded}, {"models", models}});
  record("surge", {{"annotated_trips", "annotated_trips.csv"}, {"models", "surge_models.json"}},
         {"ingest"});
  return inference;
}

std::map<Cohort, ElasticityTable> Pipeline::elasticity() {
  require_stage("surge", "elasticity");
  auto const trips = load_annotated_trips(artifact("surge", "annotated_trips"));
  std::map<Cohort, ElasticityTable> tables;
  json j = json::object();
  for (auto const c : {Cohort::kEda, Cohort::kNonEda}) {
    auto const cohort = of_cohort(trips, c);
    if (cohort.empty()) continue;
    tables[c] = estimate_elasticities(cohort, config_.elasticity);
    j[std::string{to_string(c)}] = to_json(tables[c]);
  }
  write_json(dir_ / "elasticities.json", j);
  {
    auto out = open_out(dir_ / "elasticities.csv");
    bool header = true;
    for (auto const& [c, table] : tables) {
      write_elasticity_csv(out, c, table, header);
      header = false;
    }
  }
  record("elasticity", {{"table", "elasticities.json"}, {"csv", "elasticities.csv"}}, {"surge"});
  return tables;
}

std::map<Cohort, SurplusReport> Pipeline::surplus() {
  require_stage("surge", "surplus");
  require_stage("elasticity", "surplus");
  auto const trips = load_annotated_trips(artifact("surge", "annotated_trips"));
  auto const tables = load_elasticities(artifact("elasticity", "table"));
  std::map<Cohort, SurplusReport> reports;
  json j{{"mode", to_string(config_.mode)}};
  for (auto const& [c, table] : tables) {
    reports[c] = consumer_surplus(c, of_cohort(trips, c), table, config_.mode,
                                  config_.min_level_trips);
    j[std::string{to_string(c)}] = to_json(reports[c]);
  }
  write_json(dir_ / "surplus.json", j);
  record("surplus", {{"report", "surplus.json"}}, {"surge", "elasticity"});
  return reports;
}

FairnessSummary Pipeline::metrics() {
  require_stage("ingest", "metrics");
  require_stage("surge", "metrics");
  require_stage("surplus", "metrics");
  auto const trips = load_annotated_trips(artifact("surge", "annotated_trips"));
  auto const regions = load_regions_artifact(artifact("ingest", "regions"));
  auto const surplus_doc = read_json(artifact("surplus", "report"));
  auto const key = std::string{to_string(Cohort::kEda)};
  if (!surplus_doc.contains(key)) throw data_error{"surplus report has no EDA cohort"};
  auto const summary = fairness_summary(trips, surplus_report_from_json(surplus_doc.at(key)), regions);

  double non_eda = 0.0;
  for (auto const& t : trips) non_eda += t.cohort == Cohort::kNonEda;
  json groups = json::array();
  for (auto const& g : cohort_groups(summary.eta, non_eda, regions)) {
    groups.push_back({{"group_id", g.group_id},
                      {"trip_count", g.trip_count},
                      {"population", g.population},
                      {"avg_trips", g.avg_trips()},
                      {"disadvantaged", g.disadvantaged}});
  }
  auto j = to_json(summary);
  j["groups"] = groups;
  write_json(dir_ / "summary.json", j);
  record("metrics", {{"summary", "summary.json"}}, {"ingest", "surge", "surplus"});
  return summary;
}

DiscountSolution Pipeline::price() {
  require_stage("ingest", "price");
  require_stage("surge", "price");
  require_stage("elasticity", "price");
  auto const trips = load_annotated_trips(artifact("surge", "annotated_trips"));
  auto const regions = load_regions_artifact(artifact("ingest", "regions"));
  auto const tables = load_elasticities(artifact("elasticity", "table"));
  if (!tables.contains(Cohort::kEda)) throw data_error{"no EDA elasticity table"};

  auto const eda = of_cohort(trips, Cohort::kEda);
  auto const fairride = train_fairride(eda, config_.regression);
  auto const pooled = train_pooled_ols(trips, config_.regression);
  auto const demand = build_demand(trips, tables.at(Cohort::kEda));
  EvaluationContext const ctx{trips, demand, regions, config_.mode, config_.min_level_trips};
  auto const solution = run_fixedfairride(ctx, config_.scenario);

  write_json(dir_ / "fairride_model.json", to_json(fairride));
  write_json(dir_ / "pooled_model.json", to_json(pooled));
  write_json(dir_ / "solution.json", to_json(solution));
  record("price",
         {{"fairride_model", "fairride_model.json"},
          {"pooled_model", "pooled_model.json"},
          {"solution", "solution.json"}},
         {"ingest", "surge", "elasticity"});
  return solution;
}

std::vector<fs::path> Pipeline::report() {
  for (auto const* stage : {"ingest", "surge", "elasticity", "surplus", "metrics", "price"}) {
    require_stage(stage, "report");
  }
  auto const trips = load_annotated_trips(artifact("surge", "annotated_trips"));
  auto const regions = load_regions_artifact(artifact("ingest", "regions"));
  auto const tables = load_elasticities(artifact("elasticity", "table"));
  auto const baseline = fairness_summary_from_json(read_json(artifact("metrics", "summary")));
  auto const fairride = fare_model_from_json(read_json(artifact("price", "fairride_model")));
  auto const pooled = fare_model_from_json(read_json(artifact("price", "pooled_model")));
  auto const surplus_doc = read_json(artifact("surplus", "report"));

  auto const demand = build_demand(trips, tables.at(Cohort::kEda));
  EvaluationContext const ctx{trips, demand, regions, config_.mode, config_.min_level_trips};

  struct Row {
    std::string policy;
    FairnessSummary s;
    std::optional<double> delta;
    bool feasible{true};
  };
  std::vector<Row> rows;
  rows.push_back({"Original", baseline, std::nullopt, true});
  rows.push_back({FlatDiscountPolicy{config_.flat_discount, config_.regression.price_floor}.name(),
                  evaluate_policy(ctx, FlatDiscountPolicy{config_.flat_discount,
                                                          config_.regression.price_floor}),
                  std::nullopt, true});
  rows.push_back({"OLS (all trips)", evaluate_policy(ctx, RegressionPolicy{pooled, "OLS"}),
                  std::nullopt, true});
  rows.push_back({"FairRide", evaluate_policy(ctx, RegressionPolicy{fairride, "FairRide"}),
                  std::nullopt, true});
  for (auto const& scenario : {config_.subsidy_scenario, config_.scenario}) {
    auto const sol = run_fixedfairride(ctx, scenario);
    std::string const label =
        scenario.kind == ScenarioKind::kGovernmentSubsidy
            ? "FixedFairRide (n = " + format_fixed(scenario.n, 2) + ")"
            : "FixedFairRide (p_min = " + format_shortest(scenario.p_min) + ")";
    rows.push_back({label, sol.summary,
                    sol.feasible ? std::optional<double>{sol.delta} : std::nullopt, sol.feasible});
  }

  auto const rdir = dir_ / "report";
  fs::create_directories(rdir);
  std::map<std::string, std::string> files;

  {
    json j = json::array();
    auto out = open_out(rdir / "table1.csv");
    out << "policy,trips,trips_change_pct,r2,r2_change_pct,surplus,revenue,delta,feasible\n";
    for (auto const& r : rows) {
      auto const dt = change_pct(r.s.eta, baseline.eta);
      auto const dr = change_pct(r.s.r2, baseline.r2);
      out << csv_escape(r.policy) << ',' << format_shortest(r.s.eta) << ',' << num(dt) << ','
          << num(r.s.r2) << ',' << num(dr) << ',' << format_shortest(r.s.surplus) << ','
          << format_shortest(r.s.revenue) << ',' << num(r.delta) << ','
          << (r.feasible ? "true" : "false") << '\n';
      j.push_back({{"policy", r.policy},
                   {"trips", r.s.eta},
                   {"trips_change_pct", nullable(dt)},
                   {"r2", nullable(r.s.r2)},
                   {"r2_change_pct", nullable(dr)},
                   {"surplus", r.s.surplus},
                   {"revenue", r.s.revenue},
                   {"delta", nullable(r.delta)},
                   {"feasible", r.feasible}});
    }
    write_json(rdir / "table1.json", j);
    files["table1_csv"] = "report/table1.csv";
    files["table1_json"] = "report/table1.json";
  }
  {
    json j = json::array();
    auto out = open_out(rdir / "table2.csv");
    out << "p_min,delta,eta,revenue,feasible\n";
    for (double const p_min : config_.p_min_sweep) {
      auto scenario = config_.scenario;
      scenario.kind = ScenarioKind::kPlatformFunded;
      scenario.p_min = p_min;
      auto const sol = solve_fixedfairride(demand, scenario);
      out << format_shortest(p_min) << ',' << (sol.feasible ? format_shortest(sol.delta) : "")
          << ',' << (sol.feasible ? format_shortest(sol.eta) : "") << ','
          << (sol.feasible ? format_shortest(sol.revenue) : "") << ','
          << (sol.feasible ? "true" : "false") << '\n';
      j.push_back({{"p_min", p_min},
                   {"delta", sol.feasible ? json(sol.delta) : json(nullptr)},
                   {"eta", sol.feasible ? json(sol.eta) : json(nullptr)},
                   {"revenue", sol.feasible ? json(sol.revenue) : json(nullptr)},
                   {"feasible", sol.feasible}});
    }
    write_json(rdir / "table2.json", j);
    files["table2_csv"] = "report/table2.csv";
    files["table2_json"] = "report/table2.json";
  }
  {
    auto const shares = surge_shares(trips);
    auto out = open_out(rdir / "surge_shares.csv");
    out << "cohort,level,trips,share\n";
    for (auto const& [cohort, c] : shares.items()) {
      for (auto const& l : c.at("levels")) {
        out << cohort << ',' << l.at("level").get<std::string>() << ','
            << format_shortest(l.at("trips").get<double>()) << ','
            << format_shortest(l.at("share").get<double>()) << '\n';
      }
    }
    write_json(rdir / "surge_shares.json", shares);
    files["surge_shares_csv"] = "report/surge_shares.csv";
    files["surge_shares_json"] = "report/surge_shares.json";
  }
  {
    auto out = open_out(rdir / "surplus.csv");
    out << "cohort,level,num_trips,avg_fare,contribution,included\n";
    for (auto const& [cohort, r] : surplus_doc.items()) {
      if (!r.is_object()) continue;
      for (auto const& l : r.at("per_level")) {
        out << cohort << ',' << l.at("level").get<std::string>() << ','
            << format_shortest(l.at("num_trips").get<double>()) << ','
            << format_shortest(l.at("avg_fare").get<double>()) << ','
            << format_shortest(l.at("contribution").get<double>()) << ','
            << (l.at("included").get<bool>() ? "true" : "false") << '\n';
      }
      out << cohort << ",total," << format_shortest(r.at("total_trips").get<double>()) << ",,"
          << format_shortest(r.at("total_surplus").get<double>()) << ",\n";
    }
    write_json(rdir / "surplus.json", surplus_doc);
    files["surplus_csv"] = "report/surplus.csv";
    files["surplus_json"] = "report/surplus.json";
  }
  record("report", files, {"ingest", "surge", "elasticity", "surplus", "metrics", "price"});
  std::vector<fs::path> paths;
  for (auto const& [name, rel] : files) paths.push_back(dir_ / rel);
  return paths;
}

}  // namespace equiride
