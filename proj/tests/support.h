#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "equiride/pricing.h"
#include "equiride/surge.h"
#include "equiride/trip.h"

namespace equiride::fixtures {

inline Timestamp at_hour(int hour, int day = 0) {
  using namespace std::chrono;
  return sys_days{year{2021} / March / (day + 1)} + hours{hour};
}

inline TripRecord make_trip(std::string id, double fare, double duration_s = 600.0,
                            double distance_mi = 3.0, int hour = 8, std::string pickup = "1",
                            std::string dropoff = "2") {
  TripRecord t;
  t.trip_id = std::move(id);
  t.start_time = at_hour(hour);
  t.end_time = t.start_time + std::chrono::seconds{static_cast<long>(duration_s)};
  t.duration_s = duration_s;
  t.distance_mi = distance_mi;
  t.pickup_area = std::move(pickup);
  t.dropoff_area = std::move(dropoff);
  t.fare = fare;
  return t;
}

inline SurgeAnnotatedTrip annotated(double fare, int tenths, Cohort cohort = Cohort::kEda,
                                    int hour = 8, std::string pickup = "1",
                                    std::string dropoff = "2") {
  static int counter = 0;
  SurgeAnnotatedTrip t;
  t.trip = make_trip("a" + std::to_string(counter++), fare, 600.0, 3.0, hour, std::move(pickup),
                     std::move(dropoff));
  t.cohort = cohort;
  t.surge_displayed = SurgeLevel{tenths};
  t.surge_continuous = tenths / 10.0;
  return t;
}

// One stratum of a hand-built market, in the order the solver iterates.
struct OracleStratum {
  double count;
  double avg_price;
  double elasticity;
};

struct OracleResult {
  bool feasible{false};
  double delta{0.0};
  double eta{0.0};
  std::size_t grid_points{0};
};

// Exhaustive enumeration of the discount grid, written from the scenario
// definitions without touching the solver.
inline OracleResult brute_force(std::vector<OracleStratum> const& strata, bool government,
                                double n, double p_min, double r, double step) {
  double const upper = government ? n : 1.0;
  OracleResult best;
  auto const k_max = static_cast<long>(std::floor(upper / step + 1e-9));
  for (long k = 1; k <= k_max; ++k) {
    double const delta = static_cast<double>(k) * step;
    double eta = 0.0;
    double paid = 0.0;
    for (auto const& s : strata) {
      double const price = (1.0 - delta) * s.avg_price;
      double const pct = (price - s.avg_price) / s.avg_price * 100.0;
      double const trips = std::max(0.0, std::round(s.count * (1.0 + s.elasticity * pct / 100.0)));
      eta += trips;
      paid += trips * price;
    }
    ++best.grid_points;
    bool const ok = government ? (delta > 0.0 && delta < n - 1e-12)
                               : (delta < 1.0 - 1e-12 && paid >= std::max(r, eta * p_min));
    if (ok && (!best.feasible || eta >= best.eta)) {
      best.feasible = true;
      best.delta = delta;
      best.eta = eta;
    }
  }
  return best;
}

// Strata keyed by hour so that map order equals vector order.
inline DemandResponse demand_from(std::vector<OracleStratum> const& strata) {
  std::map<StratumKey, Stratum> m;
  for (std::size_t i = 0; i < strata.size(); ++i) {
    Stratum s;
    s.trip_count = strata[i].count;
    s.avg_price = strata[i].avg_price;
    s.elasticity = strata[i].elasticity;
    m.emplace(StratumKey{static_cast<int>(i), "p", "d"}, s);
  }
  return make_demand(std::move(m));
}

inline std::vector<OracleStratum> random_strata(std::mt19937_64& rng, std::size_t max_strata = 10,
                                                double e_lo = -4.0, double e_hi = -0.2) {
  std::uniform_int_distribution<std::size_t> n_pick{1, max_strata};
  std::uniform_int_distribution<int> count_pick{1, 500};
  std::uniform_real_distribution<double> price_pick{4.0, 40.0};
  std::uniform_real_distribution<double> e_pick{e_lo, e_hi};
  std::vector<OracleStratum> out(n_pick(rng));
  for (auto& s : out) {
    s.count = count_pick(rng);
    s.avg_price = std::round(price_pick(rng) * 100.0) / 100.0;
    s.elasticity = e_pick(rng);
  }
  return out;
}

}  // namespace equiride::fixtures
