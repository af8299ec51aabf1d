#include "equiride/synth.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "equiride/csv.h"
#include "equiride/error.h"
#include "equiride/ingest.h"
#include "equiride/surge.h"
#include "equiride/timestamp.h"

namespace equiride {

namespace {

constexpr double kLevelWidth = 0.1;
constexpr double kBaseWidth = 0.05;  // continuous part of level 1.0
constexpr std::int64_t kTimestampQuantum = 900;

double density(SynthConfig const& c, SurgeLevel level) {
  auto const it = c.surge_distribution.find(level);
  if (it == c.surge_distribution.end()) return 0.0;
  if (level == kNoSurge) return it->second * (1.0 - c.base_point_mass) / kBaseWidth;
  return it->second / kLevelWidth;
}

void require(bool ok, std::string const& message) {
  if (!ok) throw config_error{"synth: " + message};
}

SurgeLevel level_key(std::string const& s) {
  double const m = std::stod(s);
  auto const level = SurgeLevel::from_multiplier(m);
  require(std::abs(m * 10.0 - level.tenths) < 1e-6, "\"" + s + "\" is not a 0.1 surge level");
  return level;
}

SurgeLevel cutoff_key(std::string const& s) {
  double const c = std::stod(s);
  auto const left = SurgeLevel::from_multiplier(c - 0.05);
  require(std::abs(left.upper_cutoff() - c) < 1e-6, "\"" + s + "\" is not a surge cutoff (x.x5)");
  return left;
}

std::string cutoff_str(SurgeLevel left) { return format_fixed(left.upper_cutoff(), 2); }

std::string tract_id(std::size_t area, std::size_t k) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "17031%06zu", area * 100 + k);
  return buf;
}

}  // namespace

std::map<SurgeLevel, double> geometric_surge_shares(double base_share, double ratio,
                                                    SurgeLevel max_level) {
  std::map<SurgeLevel, double> shares{{kNoSurge, base_share}};
  if (base_share >= 1.0 || max_level <= kNoSurge) return shares;
  double total = 0.0;
  double w = 1.0;
  for (auto l = kNoSurge.next(); l <= max_level; l = l.next(), w *= ratio) total += w;
  w = 1.0;
  for (auto l = kNoSurge.next(); l <= max_level; l = l.next(), w *= ratio) {
    shares[l] = (1.0 - base_share) * w / total;
  }
  return shares;
}

void SynthConfig::validate() const {
  require(n_trips > 0, "n_trips must be positive");
  require(!surge_distribution.empty(), "surge_distribution is empty");
  double sum = 0.0;
  for (auto const& [level, share] : surge_distribution) {
    require(level >= kNoSurge, "surge level " + level.str() + " is below 1.0");
    require(share >= 0.0, "negative share at " + level.str());
    sum += share;
  }
  require(std::abs(sum - 1.0) < 1e-9, "surge shares sum to " + format_shortest(sum) + ", not 1");
  require(base_point_mass >= 0.0 && base_point_mass <= 1.0, "base_point_mass must lie in [0, 1]");
  for (auto const& [left, drop] : discontinuity_drops) {
    require(drop >= 0.0 && drop < 1.0, "drop at " + cutoff_str(left) + " must lie in [0, 1)");
    double const dl = density(*this, left);
    double const dr = density(*this, left.next());
    require(dl > 0.0, "infeasible shares: no density left of cutoff " + cutoff_str(left));
    double const implied = 1.0 - dr / dl;
    require(std::abs(implied - drop) < 1e-9,
            "infeasible shares: drop " + format_shortest(drop) + " at " + cutoff_str(left) +
                " but shares imply " + format_shortest(implied));
  }
  require(eda_share >= 0.0 && eda_share <= 1.0, "eda_share must lie in [0, 1]");
  require(fare_noise_sigma >= 0.0 && fare_noise_sigma < 0.5, "fare_noise_sigma must lie in [0, 0.5)");
  require(fare_rounding >= 0.0, "fare_rounding must be nonnegative");
  require(min_fare >= 0.0, "min_fare must be nonnegative");
  require(shared_fraction >= 0.0 && shared_fraction <= 1.0, "shared_fraction must lie in [0, 1]");
  require(missing_tract_fraction >= 0.0 && missing_tract_fraction <= 1.0,
          "missing_tract_fraction must lie in [0, 1]");
  require(median_miles > 0.0 && miles_log_sigma >= 0.0, "bad trip length distribution");
  require(min_seconds_per_mile > 0.0 && min_seconds_per_mile <= max_seconds_per_mile,
          "bad seconds-per-mile range");
  require(areas >= 2 && eda_areas >= 1 && eda_areas < areas, "need 1 <= eda_areas < areas");
  require(tracts_per_area >= 1 && tracts_per_area < 100, "tracts_per_area must lie in [1, 99]");
  auto const start = parse_date(start_date);
  auto const end = parse_date(end_date);
  require(start && end, "bad start_date or end_date");
  require(*start <= *end, "start_date is after end_date");
}

std::vector<PlantedCutoff> planted_cutoffs(SynthConfig const& config) {
  std::vector<PlantedCutoff> out;
  for (auto const& [left, share] : config.surge_distribution) {
    if (!config.surge_distribution.contains(left.next())) continue;
    PlantedCutoff p;
    p.surge_left = left;
    p.cutoff = left.upper_cutoff();
    p.density_left = density(config, left);
    p.density_right = density(config, left.next());
    double const top = std::max(p.density_left, p.density_right);
    if (top <= 0.0 || share <= 0.0) continue;
    p.drop = p.density_left > 0.0 ? 1.0 - p.density_right / p.density_left : 0.0;
    p.alpha = (p.density_right - p.density_left) / top;
    p.n_p = share;
    p.delta_p = kLevelWidth / left.multiplier() * 100.0;
    p.e_p = p.alpha / p.n_p / p.delta_p;
    out.push_back(p);
  }
  return out;
}

SynthDataset generate(SynthConfig const& config) {
  config.validate();
  std::mt19937_64 rng{config.seed};
  std::uniform_real_distribution<double> unit{0.0, 1.0};
  std::normal_distribution<double> gauss{0.0, 1.0};

  SynthDataset out;
  out.cutoffs = planted_cutoffs(config);

  std::vector<std::size_t> area_ids(config.areas);
  for (std::size_t i = 0; i < config.areas; ++i) area_ids[i] = i + 1;
  std::shuffle(area_ids.begin(), area_ids.end(), rng);
  std::vector<std::size_t> eda(area_ids.begin(), area_ids.begin() + config.eda_areas);
  std::vector<std::size_t> other(area_ids.begin() + config.eda_areas, area_ids.end());
  std::sort(eda.begin(), eda.end());
  std::sort(other.begin(), other.end());
  for (auto a : eda) {
    out.regions.eda_areas.insert(std::to_string(a));
    for (std::size_t k = 0; k < config.tracts_per_area; ++k) out.regions.eda_tracts.insert(tract_id(a, k));
  }
  out.regions.populations = default_populations();

  std::vector<SurgeLevel> levels;
  std::vector<double> weights;
  for (auto const& [level, share] : config.surge_distribution) {
    levels.push_back(level);
    weights.push_back(share);
  }
  std::discrete_distribution<std::size_t> pick_level{weights.begin(), weights.end()};
  std::uniform_int_distribution<std::size_t> pick_eda{0, eda.size() - 1};
  std::uniform_int_distribution<std::size_t> pick_other{0, other.size() - 1};
  std::uniform_int_distribution<std::size_t> pick_any{0, config.areas - 1};
  std::uniform_int_distribution<std::size_t> pick_tract{0, config.tracts_per_area - 1};

  auto const t0 = parse_date(config.start_date)->time_since_epoch().count();
  auto const t1 = parse_date(config.end_date)->time_since_epoch().count() + 86400;
  std::uniform_int_distribution<std::int64_t> pick_time{t0, t1 - 1};
  std::lognormal_distribution<double> miles_dist{std::log(config.median_miles), config.miles_log_sigma};
  std::uniform_real_distribution<double> pace{config.min_seconds_per_mile, config.max_seconds_per_mile};

  out.trips.reserve(config.n_trips);
  out.cohorts.reserve(config.n_trips);
  out.surge_continuous.reserve(config.n_trips);
  out.surge_displayed.reserve(config.n_trips);

  auto endpoint = [&](std::size_t area, std::optional<std::string>& tract,
                      std::optional<std::string>& area_field) {
    area_field = std::to_string(area);
    auto const k = pick_tract(rng);
    if (unit(rng) >= config.missing_tract_fraction) tract = tract_id(area, k);
  };

  for (std::size_t i = 0; i < config.n_trips; ++i) {
    TripRecord t;
    char id[32];
    std::snprintf(id, sizeof(id), "syn%010zu", i);
    t.trip_id = id;

    bool const is_eda = unit(rng) < config.eda_share;
    std::size_t pickup = 0;
    std::size_t dropoff = 0;
    if (is_eda) {
      bool const eda_pickup = unit(rng) < 0.5;
      std::size_t const e = eda[pick_eda(rng)];
      std::size_t const a = area_ids[pick_any(rng)];
      pickup = eda_pickup ? e : a;
      dropoff = eda_pickup ? a : e;
    } else {
      pickup = other[pick_other(rng)];
      dropoff = other[pick_other(rng)];
    }
    endpoint(pickup, t.pickup_tract, t.pickup_area);
    endpoint(dropoff, t.dropoff_tract, t.dropoff_area);

    auto const level = levels[pick_level(rng)];
    double surge = 1.0;
    if (level == kNoSurge) {
      if (unit(rng) >= config.base_point_mass) {
        do {
          surge = 1.0 + kBaseWidth * unit(rng);
        } while (discretize_surge(surge) != level);
      }
    } else {
      do {
        surge = level.multiplier() - 0.05 + kLevelWidth * unit(rng);
      } while (surge < 1.0 || discretize_surge(surge) != level);
    }

    double const miles = std::clamp(std::round(miles_dist(rng) * 10.0) / 10.0, 0.1, 60.0);
    double const seconds = std::max(60.0, std::round(miles * pace(rng)));
    t.distance_mi = miles;
    t.duration_s = seconds;
    auto const start = pick_time(rng) / kTimestampQuantum * kTimestampQuantum;
    auto const end = (start + static_cast<std::int64_t>(seconds) + kTimestampQuantum / 2) /
                     kTimestampQuantum * kTimestampQuantum;
    t.start_time = Timestamp{std::chrono::seconds{start}};
    t.end_time = Timestamp{std::chrono::seconds{end}};

    double const noise = std::max(0.1, 1.0 + config.fare_noise_sigma * gauss(rng));
    double fare = surge * config.baseline.predict(seconds, miles) * noise;
    if (config.fare_rounding > 0.0) {
      fare = std::max(config.min_fare, std::round(fare / config.fare_rounding) * config.fare_rounding);
    }
    t.fare = fare;
    t.tip = unit(rng) < 0.3 ? std::round(1.0 + 4.0 * unit(rng)) : 0.0;
    t.extra_charges = unit(rng) < 0.1 ? 2.5 : 0.0;
    t.shared_authorized = unit(rng) < config.shared_fraction;

    out.cohorts.push_back(classify_trip(t, out.regions));
    out.trips.push_back(std::move(t));
    out.surge_continuous.push_back(surge);
    out.surge_displayed.push_back(level);
  }
  return out;
}

void write_trips_csv(std::ostream& out, std::vector<TripRecord> const& trips) {
  out << trip_csv_header() << '\n';
  for (auto const& t : trips) out << trip_csv_row(t) << '\n';
}

void write_region_json(std::ostream& out, RegionMap const& regions) {
  nlohmann::json j;
  j["tracts"] = regions.eda_tracts;
  j["areas"] = regions.eda_areas;
  out << j.dump(2) << '\n';
}

void write_ground_truth(std::ostream& out, SynthConfig const& config, SynthDataset const& data) {
  nlohmann::json head;
  head["config"] = to_json(config);
  head["baseline"] = {{"intercept", config.baseline.intercept},
                      {"per_second", config.baseline.per_second},
                      {"per_mile", config.baseline.per_mile}};
  auto& cutoffs = head["per_cutoff"] = nlohmann::json::object();
  for (auto const& p : data.cutoffs) {
    cutoffs[cutoff_str(p.surge_left)] = {{"surge_left", p.surge_left.str()},
                                         {"alpha", p.alpha},
                                         {"E_p", p.e_p},
                                         {"n_p", p.n_p},
                                         {"delta_p", p.delta_p},
                                         {"drop", p.drop},
                                         {"density_left", p.density_left},
                                         {"density_right", p.density_right}};
  }
  // per_trip can run to millions of rows; stream it rather than build a DOM.
  auto text = head.dump();
  text.pop_back();
  out << text << ",\"per_trip\":[";
  for (std::size_t i = 0; i < data.trips.size(); ++i) {
    if (i) out << ',';
    out << "{\"trip_id\":" << nlohmann::json(data.trips[i].trip_id).dump() << ",\"cohort\":\""
        << to_string(data.cohorts[i]) << "\",\"surge_continuous\":"
        << format_shortest(data.surge_continuous[i]) << ",\"surge_displayed\":"
        << data.surge_displayed[i].str() << '}';
  }
  out << "]}\n";
}

SynthConfig synth_config_from_json(nlohmann::json const& j) {
  require(j.is_object(), "config must be a JSON object");
  SynthConfig c;
  try {
    for (auto const& [key, v] : j.items()) {
      if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "n_trips") c.n_trips = v.get<std::size_t>();
      else if (key == "baseline") {
        c.baseline.intercept = v.value("intercept", c.baseline.intercept);
        c.baseline.per_second = v.value("per_second", c.baseline.per_second);
        c.baseline.per_mile = v.value("per_mile", c.baseline.per_mile);
      } else if (key == "surge_distribution") {
        c.surge_distribution.clear();
        for (auto const& [level, share] : v.items()) c.surge_distribution[level_key(level)] = share.get<double>();
      } else if (key == "discontinuity_drops") {
        for (auto const& [cut, drop] : v.items()) c.discontinuity_drops[cutoff_key(cut)] = drop.get<double>();
      } else if (key == "base_point_mass") c.base_point_mass = v.get<double>();
      else if (key == "eda_share") c.eda_share = v.get<double>();
      else if (key == "fare_noise_sigma") c.fare_noise_sigma = v.get<double>();
      else if (key == "fare_rounding") c.fare_rounding = v.get<double>();
      else if (key == "min_fare") c.min_fare = v.get<double>();
      else if (key == "shared_fraction") c.shared_fraction = v.get<double>();
      else if (key == "missing_tract_fraction") c.missing_tract_fraction = v.get<double>();
      else if (key == "median_miles") c.median_miles = v.get<double>();
      else if (key == "miles_log_sigma") c.miles_log_sigma = v.get<double>();
      else if (key == "min_seconds_per_mile") c.min_seconds_per_mile = v.get<double>();
      else if (key == "max_seconds_per_mile") c.max_seconds_per_mile = v.get<double>();
      else if (key == "areas") c.areas = v.get<std::size_t>();
      else if (key == "eda_areas") c.eda_areas = v.get<std::size_t>();
      else if (key == "tracts_per_area") c.tracts_per_area = v.get<std::size_t>();
      else if (key == "start_date") c.start_date = v.get<std::string>();
      else if (key == "end_date") c.end_date = v.get<std::string>();
      else require(false, "unknown key \"" + key + "\"");
    }
  } catch (nlohmann::json::exception const& e) {
    throw config_error{std::string{"synth: "} + e.what()};
  } catch (std::invalid_argument const&) {
    throw config_error{"synth: non-numeric surge level or cutoff"};
  }
  c.validate();
  return c;
}

nlohmann::json to_json(SynthConfig const& c) {
  nlohmann::json shares = nlohmann::json::object();
  for (auto const& [level, share] : c.surge_distribution) shares[level.str()] = share;
  nlohmann::json drops = nlohmann::json::object();
  for (auto const& [left, drop] : c.discontinuity_drops) drops[cutoff_str(left)] = drop;
  return {{"seed", c.seed},
          {"n_trips", c.n_trips},
          {"baseline",
           {{"intercept", c.baseline.intercept},
            {"per_second", c.baseline.per_second},
            {"per_mile", c.baseline.per_mile}}},
          {"surge_distribution", shares},
          {"discontinuity_drops", drops},
          {"base_point_mass", c.base_point_mass},
          {"eda_share", c.eda_share},
          {"fare_noise_sigma", c.fare_noise_sigma},
          {"fare_rounding", c.fare_rounding},
          {"min_fare", c.min_fare},
          {"shared_fraction", c.shared_fraction},
          {"missing_tract_fraction", c.missing_tract_fraction},
          {"median_miles", c.median_miles},
          {"miles_log_sigma", c.miles_log_sigma},
          {"min_seconds_per_mile", c.min_seconds_per_mile},
          {"max_seconds_per_mile", c.max_seconds_per_mile},
          {"areas", c.areas},
          {"eda_areas", c.eda_areas},
          {"tracts_per_area", c.tracts_per_area},
          {"start_date", c.start_date},
          {"end_date", c.end_date}};
}

}  // namespace equiride
