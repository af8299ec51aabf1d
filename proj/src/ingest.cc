#include "equiride/ingest.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <iterator>
#include <optional>
#include <sstream>

#include "json.hpp"

#include "equiride/csv.h"
#include "equiride/error.h"

namespace equiride {

namespace {

constexpr std::size_t kMaxDiagnostics = 50;

std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '$') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  auto const [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<bool> parse_bool(std::string_view s) {
  s = trim(s);
  std::string lower;
  std::transform(s.begin(), s.end(), std::back_inserter(lower),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower.empty() || lower == "false" || lower == "f" || lower == "0" || lower == "no") {
    return false;
  }
  if (lower == "true" || lower == "t" || lower == "1" || lower == "yes") return true;
  return std::nullopt;
}

std::optional<std::string> parse_id(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  return std::string{s};
}

struct ColumnIndex {
  static constexpr std::size_t kMissing = static_cast<std::size_t>(-1);
  std::size_t trip_id, start_time, end_time, duration, distance, pickup_tract, dropoff_tract,
      pickup_area, dropoff_area, fare, tip, extra_charges, shared_authorized;
};

ColumnIndex resolve_header(std::vector<std::string> const& header, ColumnMap const& cm) {
  auto find = [&](std::string const& name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (trim(header[i]) == name) return i;
    }
    return ColumnIndex::kMissing;
  };
  ColumnIndex idx{find(cm.trip_id),       find(cm.start_time),   find(cm.end_time),
                  find(cm.duration),      find(cm.distance),     find(cm.pickup_tract),
                  find(cm.dropoff_tract), find(cm.pickup_area),  find(cm.dropoff_area),
                  find(cm.fare),          find(cm.tip),          find(cm.extra_charges),
                  find(cm.shared_authorized)};

  std::vector<std::string> missing;
  auto require = [&](std::size_t i, std::string const& name) {
    if (i == ColumnIndex::kMissing) missing.push_back(name);
  };
  require(idx.trip_id, cm.trip_id);
  require(idx.start_time, cm.start_time);
  require(idx.end_time, cm.end_time);
  require(idx.duration, cm.duration);
  require(idx.distance, cm.distance);
  require(idx.fare, cm.fare);
  if (idx.pickup_tract == ColumnIndex::kMissing && idx.pickup_area == ColumnIndex::kMissing) {
    missing.push_back(cm.pickup_tract + "|" + cm.pickup_area);
  }
  if (idx.dropoff_tract == ColumnIndex::kMissing && idx.dropoff_area == ColumnIndex::kMissing) {
    missing.push_back(cm.dropoff_tract + "|" + cm.dropoff_area);
  }
  if (!missing.empty()) {
    std::string msg = "trip file header is missing required columns:";
    for (auto const& m : missing) msg += " \"" + m + "\"";
    throw config_error{msg};
  }
  return idx;
}

}  // namespace

void ColumnMap::apply_overrides(std::map<std::string, std::string> const& overrides) {
  std::map<std::string, std::string*> const fields{
      {"trip_id", &trip_id},
      {"start_time", &start_time},
      {"end_time", &end_time},
      {"duration", &duration},
      {"distance", &distance},
      {"pickup_tract", &pickup_tract},
      {"dropoff_tract", &dropoff_tract},
      {"pickup_area", &pickup_area},
      {"dropoff_area", &dropoff_area},
      {"fare", &fare},
      {"tip", &tip},
      {"extra_charges", &extra_charges},
      {"shared_authorized", &shared_authorized}};
  for (auto const& [key, name] : overrides) {
    auto const it = fields.find(key);
    if (it == fields.end()) throw config_error{"unknown column map field \"" + key + "\""};
    *it->second = name;
  }
}

ParseResult parse_trips(std::istream& source, ColumnMap const& columns, char delim,
                        std::vector<std::string> const& extra_columns) {
  CsvReader reader{source, delim};
  std::vector<std::string> row;
  if (!reader.next(row)) throw config_error{"trip file has no header row"};
  auto const idx = resolve_header(row, columns);
  std::vector<std::size_t> extra_idx;
  for (auto const& name : extra_columns) {
    auto const it = std::find_if(row.begin(), row.end(), [&](auto const& h) { return trim(h) == name; });
    if (it == row.end()) throw config_error{"trip file header is missing column \"" + name + "\""};
    extra_idx.push_back(static_cast<std::size_t>(it - row.begin()));
  }

  ParseResult result;
  auto skip = [&](std::string reason) {
    ++result.skipped;
    if (result.diagnostics.size() < kMaxDiagnostics) {
      result.diagnostics.push_back("line " + std::to_string(reader.line()) + ": " + reason);
    }
  };
  auto cell = [&](std::size_t i) -> std::string_view {
    return i == ColumnIndex::kMissing || i >= row.size() ? std::string_view{} : row[i];
  };

  while (reader.next(row)) {
    ++result.rows;
    TripRecord t;
    t.trip_id = std::string{trim(cell(idx.trip_id))};

    auto const fare = parse_number(cell(idx.fare));
    if (!fare) {
      skip(trim(cell(idx.fare)).empty() ? "missing fare" : "unparseable fare");
      continue;
    }
    t.pickup_tract = parse_id(cell(idx.pickup_tract));
    t.pickup_area = parse_id(cell(idx.pickup_area));
    t.dropoff_tract = parse_id(cell(idx.dropoff_tract));
    t.dropoff_area = parse_id(cell(idx.dropoff_area));
    if (!t.pickup_tract && !t.pickup_area) {
      skip("missing pickup location");
      continue;
    }
    if (!t.dropoff_tract && !t.dropoff_area) {
      skip("missing dropoff location");
      continue;
    }

    auto const start = parse_timestamp(cell(idx.start_time));
    auto const end = parse_timestamp(cell(idx.end_time));
    if (!start || !end) {
      skip("unparseable timestamp");
      continue;
    }
    auto const duration = parse_number(cell(idx.duration));
    auto const distance = parse_number(cell(idx.distance));
    if (!duration || !distance) {
      skip("unparseable duration or distance");
      continue;
    }
    auto const tip = idx.tip == ColumnIndex::kMissing || trim(cell(idx.tip)).empty()
                         ? std::optional<double>{0.0}
                         : parse_number(cell(idx.tip));
    auto const extra =
        idx.extra_charges == ColumnIndex::kMissing || trim(cell(idx.extra_charges)).empty()
            ? std::optional<double>{0.0}
            : parse_number(cell(idx.extra_charges));
    auto const shared = parse_bool(cell(idx.shared_authorized));
    if (!tip || !extra || !shared) {
      skip("unparseable tip, charges or shared flag");
      continue;
    }
    if (*fare < 0.0 || *duration < 0.0 || *distance < 0.0 || *tip < 0.0 || *extra < 0.0) {
      skip("negative amount");
      continue;
    }
    if (*end < *start) {
      skip("end before start");
      continue;
    }

    t.start_time = *start;
    t.end_time = *end;
    t.duration_s = *duration;
    t.distance_mi = *distance;
    t.fare = *fare;
    t.tip = *tip;
    t.extra_charges = *extra;
    t.shared_authorized = *shared;
    for (auto const i : extra_idx) result.extra.emplace_back(trim(cell(i)));
    result.trips.push_back(std::move(t));
  }
  return result;
}

std::string trip_csv_header() {
  ColumnMap const c;
  return join_csv({c.trip_id, c.start_time, c.end_time, c.duration, c.distance, c.pickup_tract,
                   c.dropoff_tract, c.pickup_area, c.dropoff_area, c.fare, c.tip,
                   c.extra_charges, c.shared_authorized});
}

std::string trip_csv_row(TripRecord const& t) {
  std::string row = csv_escape(t.trip_id);
  auto add = [&row](std::string_view field) {
    row += ',';
    row += field;
  };
  add(format_timestamp(t.start_time));
  add(format_timestamp(t.end_time));
  add(format_shortest(t.duration_s));
  add(format_shortest(t.distance_mi));
  add(csv_escape(t.pickup_tract.value_or("")));
  add(csv_escape(t.dropoff_tract.value_or("")));
  add(csv_escape(t.pickup_area.value_or("")));
  add(csv_escape(t.dropoff_area.value_or("")));
  add(format_shortest(t.fare));
  add(format_shortest(t.tip));
  add(format_shortest(t.extra_charges));
  add(t.shared_authorized ? "true" : "false");
  return row;
}

std::vector<TripRecord> filter_trips(std::span<TripRecord const> trips, DateRange const& range,
                                     bool exclude_shared) {
  if (range.end < range.start) throw argument_error{"date range end precedes start"};
  std::vector<TripRecord> out;
  for (auto const& t : trips) {
    if (t.start_time < range.start || t.start_time > range.end) continue;
    if (exclude_shared && t.shared_authorized) continue;
    out.push_back(t);
  }
  return out;
}

RegionMap load_region_map(std::istream& source, std::map<Cohort, double> populations) {
  for (auto const c : {Cohort::kEda, Cohort::kNonEda}) {
    auto const it = populations.find(c);
    if (it == populations.end()) {
      throw config_error{"missing population for cohort " + std::string{to_string(c)}};
    }
    if (!(it->second > 0.0)) {
      throw config_error{"population for cohort " + std::string{to_string(c)} +
                         " must be positive"};
    }
  }

  RegionMap regions;
  regions.populations = std::move(populations);

  std::string const text{std::istreambuf_iterator<char>{source}, {}};
  auto const first = text.find_first_not_of(" \t\r\n\xEF\xBB\xBF");
  if (first != std::string::npos && text[first] == '{') {
    auto const doc = nlohmann::json::parse(text, nullptr, false);
    if (doc.is_discarded()) throw data_error{"region file is not valid JSON"};
    auto collect = [&](char const* key, std::set<std::string>& into) {
      if (!doc.contains(key)) return;
      for (auto const& v : doc.at(key)) {
        auto id = v.is_string() ? v.get<std::string>() : v.dump();
        if (!trim(id).empty()) into.insert(std::string{trim(id)});
      }
    };
    collect("tracts", regions.eda_tracts);
    collect("areas", regions.eda_areas);
  } else {
    std::istringstream in{text};
    CsvReader reader{in};
    std::vector<std::string> row;
    if (reader.next(row)) {
      std::size_t id_col = 0, kind_col = 1;
      for (std::size_t i = 0; i < row.size(); ++i) {
        auto const name = trim(row[i]);
        if (name == "id") id_col = i;
        if (name == "kind") kind_col = i;
      }
      while (reader.next(row)) {
        if (row.size() <= std::max(id_col, kind_col)) continue;
        auto const id = trim(row[id_col]);
        auto const kind = trim(row[kind_col]);
        if (id.empty()) continue;
        if (kind == "tract") {
          regions.eda_tracts.insert(std::string{id});
        } else if (kind == "area") {
          regions.eda_areas.insert(std::string{id});
        } else {
          throw data_error{"region file line " + std::to_string(reader.line()) +
                           ": unknown kind \"" + std::string{kind} + "\""};
        }
      }
    }
  }
  if (regions.eda_tracts.empty() && regions.eda_areas.empty()) {
    throw data_error{"region file lists no EDA identifiers"};
  }
  return regions;
}

std::map<Cohort, double> default_populations(double city_population) {
  return {{Cohort::kEda, city_population / 3.0}, {Cohort::kNonEda, city_population * 2.0 / 3.0}};
}

namespace {

bool endpoint_in_eda(std::optional<std::string> const& tract,
                     std::optional<std::string> const& area, RegionMap const& regions) {
  if (tract) return regions.eda_tracts.contains(*tract);
  return area && regions.eda_areas.contains(*area);
}

}  // namespace

Cohort classify_trip(TripRecord const& trip, RegionMap const& regions) {
  return endpoint_in_eda(trip.pickup_tract, trip.pickup_area, regions) ||
                 endpoint_in_eda(trip.dropoff_tract, trip.dropoff_area, regions)
             ? Cohort::kEda
             : Cohort::kNonEda;
}

std::string_view to_string(Cohort c) { return c == Cohort::kEda ? "EDA_TRIP" : "NON_EDA_TRIP"; }

Cohort cohort_from_string(std::string_view s) {
  s = trim(s);
  if (s == "EDA_TRIP" || s == "EDA") return Cohort::kEda;
  if (s == "NON_EDA_TRIP" || s == "NON_EDA") return Cohort::kNonEda;
  throw argument_error{"unknown cohort \"" + std::string{s} + "\""};
}

}  // namespace equiride
