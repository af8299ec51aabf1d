#include "equiride/elasticity.h"

#include <algorithm>
#include <array>
#include <cmath>

#include "equiride/error.h"
#include "equiride/least_squares.h"

namespace equiride {

DiscontinuityWindow DiscontinuityWindow::above(SurgeLevel left, double half_width,
                                               double near_band, double bin_width) {
  return {left.upper_cutoff(), half_width, near_band, bin_width};
}

std::size_t DiscontinuityWindow::bin_count() const {
  return static_cast<std::size_t>(std::llround(2.0 * half_width / bin_width));
}

double DiscontinuityWindow::bin_center(std::size_t bin) const {
  return cutoff - half_width + (static_cast<double>(bin) + 0.5) * bin_width;
}

void DiscontinuityWindow::validate() const {
  if (!(near_band > 0.0) || near_band > half_width) {
    throw argument_error{"window needs 0 < near_band <= half_width"};
  }
  if (half_width > 0.05 + 1e-12) {
    throw argument_error{"window half width must not exceed 0.05 (adjacent cutoffs overlap)"};
  }
  if (!(bin_width > 0.0)) throw argument_error{"bin width must be positive"};
  double const bins = 2.0 * half_width / bin_width;
  if (std::abs(bins - std::round(bins)) > 1e-6 || std::round(bins) < 2.0) {
    throw argument_error{"bin width must divide the window evenly"};
  }
}

std::vector<BinObservation> build_rdd_dataset(std::span<SurgeAnnotatedTrip const> trips,
                                              DiscontinuityWindow const& window) {
  window.validate();
  auto const n_bins = window.bin_count();
  double const lo = window.cutoff - window.half_width;
  double const hi = window.cutoff + window.half_width;

  std::vector<std::size_t> counts(n_bins, 0);
  for (auto const& t : trips) {
    double const s = t.surge_continuous;
    if (s <= 1.0 || s < lo || s >= hi) continue;
    auto bin = static_cast<std::ptrdiff_t>(std::floor((s - lo) / window.bin_width));
    bin = std::clamp<std::ptrdiff_t>(bin, 0, static_cast<std::ptrdiff_t>(n_bins) - 1);
    ++counts[static_cast<std::size_t>(bin)];
  }

  std::size_t left = 0, right = 0, max_count = 0;
  std::vector<BinObservation> bins(n_bins);
  for (std::size_t b = 0; b < n_bins; ++b) {
    auto& o = bins[b];
    o.x1 = window.bin_center(b);
    o.i2 = o.x1 > window.cutoff ? 1 : 0;
    o.i1 = std::abs(o.x1 - window.cutoff) <= window.near_band + 1e-12 ? 1 : 0;
    o.count = counts[b];
    (o.i2 ? right : left) += counts[b];
    max_count = std::max(max_count, counts[b]);
  }
  if (left == 0 || right == 0) {
    throw estimation_error{"no trips " + std::string{left == 0 ? "left" : "right"} +
                           " of surge cutoff " + std::to_string(window.cutoff)};
  }
  for (auto& o : bins) o.y = static_cast<double>(o.count) / static_cast<double>(max_count);
  return bins;
}

LpmFit fit_lpm(std::span<BinObservation const> bins, double x_origin) {
  if (bins.size() < kMinLpmObservations) {
    throw estimation_error{"linear probability model needs at least " +
                           std::to_string(kMinLpmObservations) + " observations"};
  }
  static std::array<std::string, 6> const names{"const",         "i1*i2",       "i1",
                                                "(1-i1)*i2",     "(1-i2)*x1",   "i2*x1"};
  LeastSquares ls{6, bins.size()};
  for (auto const& b : bins) {
    double const i1 = b.i1, i2 = b.i2, x = b.x1 - x_origin;
    std::array<double, 6> const row{1.0, i1 * i2, i1, (1.0 - i1) * i2, (1.0 - i2) * x, i2 * x};
    ls.add_row(row, b.y);
  }
  auto const sol = ls.solve({}, names);

  LpmFit fit;
  fit.beta0 = sol.coef(0);
  fit.alpha = sol.coef(1);
  fit.beta1 = sol.coef(2);
  fit.beta2 = sol.coef(3);
  fit.beta3 = sol.coef(4);
  fit.beta4 = sol.coef(5);
  fit.n_obs = bins.size();
  fit.x_origin = x_origin;
  fit.residual_variance =
      bins.size() > 6 ? sol.rss / static_cast<double>(bins.size() - 6) : 0.0;
  return fit;
}

ElasticityEstimate estimate_elasticity(LpmFit const& fit, SurgeLevel surge_left, double n_p) {
  if (!(n_p > 0.0) || n_p > 1.0) throw argument_error{"N_p must lie in (0, 1]"};
  if (surge_left.tenths <= 0) throw argument_error{"surge level must be positive"};
  ElasticityEstimate e;
  e.surge_left = surge_left;
  e.alpha = fit.alpha;
  e.n_p = n_p;
  e.delta_p = 0.1 / surge_left.multiplier() * 100.0;
  e.e_p = (fit.alpha / n_p) / e.delta_p;
  e.n_obs = fit.n_obs;
  return e;
}

ElasticityEstimate const* ElasticityTable::find(SurgeLevel surge_left) const {
  for (auto const& e : estimates) {
    if (e.surge_left == surge_left) return &e;
  }
  return nullptr;
}

std::map<SurgeLevel, double> ElasticityTable::by_arrival_level() const {
  std::map<SurgeLevel, double> out;
  for (auto const& e : estimates) {
    if (!e.skipped) out.emplace(e.surge_left.next(), e.e_p);
  }
  return out;
}

std::map<SurgeLevel, double> ElasticityTable::by_departure_level() const {
  std::map<SurgeLevel, double> out;
  for (auto const& e : estimates) {
    if (!e.skipped) out.emplace(e.surge_left, e.e_p);
  }
  return out;
}

ElasticityTable estimate_elasticities(std::span<SurgeAnnotatedTrip const> trips,
                                      ElasticityOptions const& options) {
  ElasticityTable table;
  if (trips.empty()) return table;

  std::map<SurgeLevel, std::size_t> counts;
  for (auto const& t : trips) ++counts[t.surge_displayed];
  auto const lowest = counts.begin()->first;
  auto const highest = counts.rbegin()->first;
  double const total = static_cast<double>(trips.size());

  for (auto level = lowest; level < highest; level = level.next()) {
    ElasticityEstimate e;
    e.surge_left = level;
    e.delta_p = 0.1 / level.multiplier() * 100.0;
    auto const it = counts.find(level);
    double const n_p = it == counts.end() ? 0.0 : static_cast<double>(it->second) / total;
    e.n_p = n_p;
    try {
      auto const window = DiscontinuityWindow::above(level, options.half_width,
                                                     options.near_band, options.bin_width);
      auto const bins = build_rdd_dataset(trips, window);
      auto const fit = fit_lpm(bins, window.cutoff);
      if (n_p == 0.0) throw estimation_error{"no trips displayed at " + level.str() + "x"};
      e = estimate_elasticity(fit, level, n_p);
    } catch (error const& ex) {
      e.skipped = true;
      e.skip_reason = ex.what();
    }
    table.estimates.push_back(std::move(e));
  }
  return table;
}

std::string_view to_string(SurplusMode m) {
  return m == SurplusMode::kCumulative ? "cumulative" : "successive";
}

SurplusMode surplus_mode_from_string(std::string_view s) {
  if (s == "cumulative" || s == "CUMULATIVE") return SurplusMode::kCumulative;
  if (s == "successive" || s == "SUCCESSIVE") return SurplusMode::kSuccessive;
  throw argument_error{"unknown surplus mode \"" + std::string{s} + "\""};
}

LevelStats level_stats(std::span<SurgeAnnotatedTrip const> trips) {
  LevelStats out;
  for (auto const& t : trips) {
    auto& s = out[t.surge_displayed];
    s.num_trips += 1.0;
    s.avg_fare += t.trip.fare;
  }
  for (auto& [level, s] : out) s.avg_fare /= s.num_trips;
  return out;
}

SurplusReport consumer_surplus(Cohort cohort, LevelStats const& levels,
                               std::map<SurgeLevel, double> const& elasticity, SurplusMode mode,
                               double min_trips) {
  SurplusReport report;
  report.cohort = cohort;
  report.mode = mode;

  std::vector<SurgeLevel> included;
  for (auto const& [level, stat] : levels) {
    report.per_level[level] = {stat.num_trips, stat.avg_fare, 0.0, stat.num_trips >= min_trips};
    report.total_trips += stat.num_trips;
    if (stat.num_trips >= min_trips) included.push_back(level);
  }

  for (auto const s : included) {
    auto& entry = report.per_level[s];
    for (auto const i : included) {
      if (i <= s) continue;
      if (mode == SurplusMode::kSuccessive && i != s.next()) continue;
      auto const e = elasticity.find(i);
      if (e == elasticity.end()) {
        throw estimation_error{"no elasticity estimate for surge level " + i.str() + "x"};
      }
      double const price_step = static_cast<double>(i.tenths - s.tenths) / s.tenths * 100.0;
      entry.contribution +=
          std::abs(e->second) * levels.at(i).num_trips * price_step * entry.avg_fare;
    }
    report.total_surplus += entry.contribution;
  }
  report.average_surplus = report.total_trips > 0.0 ? report.total_surplus / report.total_trips : 0.0;
  return report;
}

SurplusReport consumer_surplus(Cohort cohort, std::span<SurgeAnnotatedTrip const> trips,
                               ElasticityTable const& table, SurplusMode mode, double min_trips) {
  return consumer_surplus(cohort, level_stats(trips), table.by_arrival_level(), mode, min_trips);
}

}  // namespace equiride
