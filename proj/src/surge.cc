#include "equiride/surge.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <unordered_set>

#include "equiride/error.h"
#include "equiride/least_squares.h"

namespace equiride {

namespace {

constexpr double kMadToSigma = 1.4826;
constexpr double kMinThreshold = 1e-7;
constexpr std::size_t kMaxResampleAttempts = 100;

struct Coefs {
  double intercept, per_second, per_mile;
  double residual(TripRecord const& t) const {
    return t.fare - (intercept + per_second * t.duration_s + per_mile * t.distance_mi);
  }
};

// Draws `k` distinct indices from [0, n): rejection for small samples,
// partial Fisher-Yates otherwise.
std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k, std::mt19937_64& rng) {
  if (k * 4 < n) {
    std::uniform_int_distribution<std::size_t> pick{0, n - 1};
    std::vector<std::size_t> out;
    std::unordered_set<std::size_t> seen;
    while (out.size() < k) {
      auto const i = pick(rng);
      if (seen.insert(i).second) out.push_back(i);
    }
    return out;
  }
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick{i, n - 1};
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(k);
  return pool;
}

std::optional<Coefs> least_squares_fit(std::vector<TripRecord const*> const& rows) {
  LeastSquares ls{3, rows.size() + 1};
  for (auto const* t : rows) {
    double const x[3] = {1.0, t->duration_s, t->distance_mi};
    ls.add_row(x, t->fare);
  }
  try {
    auto const sol = ls.solve();
    return Coefs{sol.coef(0), sol.coef(1), sol.coef(2)};
  } catch (estimation_error const&) {
    return std::nullopt;
  }
}

double median_inplace(std::vector<double>& v) {
  auto const mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  double m = *mid;
  if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), mid));
  return m;
}

// Least squares on the inliers with nonnegative slopes: a negative slope is
// pinned to zero and the remaining coefficients refit.
Coefs refit(std::vector<TripRecord const*> const& rows) {
  for (int mask = 0; mask < 4; ++mask) {
    bool const use_sec = (mask & 1) == 0;
    bool const use_mile = (mask & 2) == 0;
    std::size_t const k = 1 + (use_sec ? 1 : 0) + (use_mile ? 1 : 0);
    LeastSquares ls{k, 4096};
    std::vector<double> x(k);
    for (auto const* t : rows) {
      std::size_t j = 0;
      x[j++] = 1.0;
      if (use_sec) x[j++] = t->duration_s;
      if (use_mile) x[j++] = t->distance_mi;
      ls.add_row(x, t->fare);
    }
    LinearSolution sol;
    try {
      sol = ls.solve();
    } catch (estimation_error const&) {
      continue;
    }
    Coefs c{sol.coef(0), 0.0, 0.0};
    std::size_t j = 1;
    if (use_sec) c.per_second = sol.coef(static_cast<Eigen::Index>(j++));
    if (use_mile) c.per_mile = sol.coef(static_cast<Eigen::Index>(j++));
    if (c.per_second >= 0.0 && c.per_mile >= 0.0) return c;
  }
  throw data_error{"baseline fare refit failed on the inlier set"};
}

}  // namespace

BaselineFareModel fit_baseline_ransac(std::span<TripRecord const> trips,
                                      RansacOptions const& options) {
  if (options.sample_size < 3) throw argument_error{"RANSAC sample size must be at least 3"};
  if (options.iterations == 0) throw argument_error{"RANSAC needs at least one iteration"};

  std::vector<TripRecord const*> eligible;
  for (auto const& t : trips) {
    if (t.duration_s > 0.0 && t.distance_mi > 0.0) eligible.push_back(&t);
  }
  if (eligible.size() < std::max(kMinRansacTrips, options.sample_size)) {
    throw data_error{"baseline fit needs at least " + std::to_string(kMinRansacTrips) +
                     " trips with positive duration and distance, got " +
                     std::to_string(eligible.size())};
  }

  std::mt19937_64 rng{options.seed};

  std::vector<TripRecord const*> eval;
  if (eligible.size() > options.max_eval) {
    for (auto const i : sample_indices(eligible.size(), options.max_eval, rng)) {
      eval.push_back(eligible[i]);
    }
  } else {
    eval = eligible;
  }

  std::vector<Coefs> candidates;
  std::vector<TripRecord const*> sample(options.sample_size);
  for (std::size_t it = 0; it < options.iterations; ++it) {
    std::optional<Coefs> fit;
    for (std::size_t attempt = 0; attempt < kMaxResampleAttempts && !fit; ++attempt) {
      auto const idx = sample_indices(eligible.size(), options.sample_size, rng);
      for (std::size_t i = 0; i < idx.size(); ++i) sample[i] = eligible[idx[i]];
      fit = least_squares_fit(sample);
    }
    if (!fit) throw data_error{"trip durations and distances are collinear"};
    if (fit->per_second < 0.0 || fit->per_mile < 0.0) continue;
    candidates.push_back(*fit);
  }
  if (candidates.empty()) {
    throw data_error{"no RANSAC sample produced nonnegative per-second and per-mile rates"};
  }

  std::vector<double> scratch(eval.size());
  auto abs_residuals = [&](Coefs const& c) {
    for (std::size_t i = 0; i < eval.size(); ++i) scratch[i] = std::abs(c.residual(*eval[i]));
  };

  double threshold = options.fixed_threshold;
  if (options.threshold_rule == ThresholdRule::kMadScaled) {
    std::size_t best = 0;
    double best_median = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      abs_residuals(candidates[c]);
      double const m = median_inplace(scratch);
      if (m < best_median) {
        best_median = m;
        best = c;
      }
    }
    for (std::size_t i = 0; i < eval.size(); ++i) scratch[i] = candidates[best].residual(*eval[i]);
    double const center = median_inplace(scratch);
    for (std::size_t i = 0; i < eval.size(); ++i) {
      scratch[i] = std::abs(candidates[best].residual(*eval[i]) - center);
    }
    double const mad = median_inplace(scratch);
    threshold = std::max(options.threshold_factor * kMadToSigma * mad, kMinThreshold);
  }
  if (!(threshold > 0.0)) throw argument_error{"inlier threshold must be positive"};

  std::size_t best = 0;
  std::size_t best_count = 0;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    std::size_t count = 0;
    for (auto const* t : eval) count += std::abs(candidates[c].residual(*t)) <= threshold ? 1 : 0;
    if (count > best_count) {
      best_count = count;
      best = c;
    }
  }

  Coefs model = candidates[best];
  std::vector<TripRecord const*> inliers;
  auto select = [&](Coefs const& c) {
    inliers.clear();
    for (auto const* t : eligible) {
      if (std::abs(c.residual(*t)) <= threshold) inliers.push_back(t);
    }
  };
  select(model);
  for (std::size_t pass = 0; pass <= options.refine_passes; ++pass) {
    if (inliers.size() < 3) break;
    model = refit(inliers);
    auto const previous = inliers.size();
    select(model);
    if (inliers.size() == previous && pass > 0) break;
  }

  BaselineFareModel out;
  out.intercept = model.intercept;
  out.per_second = model.per_second;
  out.per_mile = model.per_mile;
  out.inlier_threshold = threshold;
  out.inlier_count = inliers.size();
  out.fitted_trips = eligible.size();
  out.inlier_fraction = static_cast<double>(inliers.size()) / static_cast<double>(eligible.size());
  out.seed = options.seed;
  if (out.inlier_count == 0) throw data_error{"baseline fit found no inliers"};
  return out;
}

SurgeLevel discretize_surge(double surge_continuous) {
  if (!(surge_continuous >= 1.0)) {
    throw argument_error{"continuous surge must be at least 1.0"};
  }
  // The epsilon keeps decimal midpoints such as 1.45 (stored as 1.4499...)
  // rounding up.
  auto const tenths = static_cast<std::int32_t>(std::floor(surge_continuous * 10.0 + 0.5 + 1e-9));
  return SurgeLevel{std::max(tenths, kNoSurge.tenths)};
}

AnnotationResult annotate_surge(std::span<LabeledTrip const> trips,
                                BaselineFareModel const& model) {
  AnnotationResult out;
  out.trips.reserve(trips.size());
  for (auto const& lt : trips) {
    double const baseline = model.predict(lt.trip);
    if (!(baseline > 0.0)) {
      ++out.excluded;
      continue;
    }
    double const surge = std::max(1.0, lt.trip.fare / baseline);
    out.trips.push_back({lt.trip, lt.cohort, surge, discretize_surge(surge)});
  }
  return out;
}

SurgeInference infer_surge(std::span<LabeledTrip const> trips, RansacOptions const& options,
                           bool pooled) {
  SurgeInference out;
  if (pooled) {
    std::vector<TripRecord> all;
    all.reserve(trips.size());
    for (auto const& lt : trips) all.push_back(lt.trip);
    auto const model = fit_baseline_ransac(all, options);
    out.models = {{Cohort::kEda, model}, {Cohort::kNonEda, model}};
  } else {
    for (auto const cohort : {Cohort::kEda, Cohort::kNonEda}) {
      std::vector<TripRecord> group;
      for (auto const& lt : trips) {
        if (lt.cohort == cohort) group.push_back(lt.trip);
      }
      if (group.empty()) continue;
      out.models.emplace(cohort, fit_baseline_ransac(group, options));
    }
  }
  out.trips.reserve(trips.size());
  for (auto const& lt : trips) {
    auto const& model = out.models.at(lt.cohort);
    double const baseline = model.predict(lt.trip);
    if (!(baseline > 0.0)) {
      ++out.excluded;
      continue;
    }
    double const surge = std::max(1.0, lt.trip.fare / baseline);
    out.trips.push_back({lt.trip, lt.cohort, surge, discretize_surge(surge)});
  }
  return out;
}

}  // namespace equiride
