#include "equiride/service.h"

#include <cstdlib>
#include <iostream>

#include "httplib.h"

#include "equiride/artifacts.h"
#include "equiride/error.h"

namespace equiride {

namespace {

using nlohmann::json;

json nullable(std::optional<double> v) { return v ? json(*v) : json(nullptr); }

ApiResponse bad_request(std::string const& field, std::string const& message) {
  return {400, {{"error", message}, {"field", field}}};
}

json result(std::optional<double> delta, FairnessSummary const& s, double eta, double revenue,
            bool feasible, json grid) {
  return {{"delta", nullable(delta)},
          {"eta", eta},
          {"r2", nullable(s.r2)},
          {"surplus", s.surplus},
          {"avg_surplus", s.avg_surplus},
          {"revenue", revenue},
          {"feasible", feasible},
          {"grid", std::move(grid)}};
}

json run_fixed(ServiceState const& state, PricingScenario const& scenario,
               std::optional<double> delta) {
  auto const ctx = state.context();
  if (delta) {
    auto const point = evaluate_discount(state.demand, scenario, *delta);
    auto const summary = evaluate_fixed_discount(ctx, *delta);
    return result(*delta, summary, point.eta, point.revenue, point.feasible,
                  json::array({to_json(point)}));
  }
  auto const sol = run_fixedfairride(ctx, scenario);
  json grid = json::array();
  for (auto const& p : sol.grid) grid.push_back(to_json(p));
  if (!sol.feasible) {
    return result(std::nullopt, sol.summary, sol.summary.eta, sol.summary.revenue, false,
                  std::move(grid));
  }
  auto out = result(sol.delta, sol.summary, sol.eta, sol.revenue, true, std::move(grid));
  out["subsidy"] = sol.subsidy;
  return out;
}

json run_policy(ServiceState const& state, PricingPolicy const& policy,
                std::optional<PricingScenario> const& scenario) {
  auto const ctx = state.context();
  auto const summary = evaluate_policy(ctx, policy);
  double paid = 0.0;
  double original = 0.0;
  for (auto const& t : state.trips) {
    if (t.cohort != Cohort::kEda) continue;
    paid += policy.price(t);
    original += t.trip.fare;
  }
  double const effective = original > 0.0 ? 1.0 - paid / original : 0.0;
  bool feasible = true;
  if (scenario) {
    if (scenario->kind == ScenarioKind::kGovernmentSubsidy) {
      feasible = effective > 0.0 && effective < scenario->n;
    } else {
      double const r = scenario->r.value_or(state.demand.revenue());
      feasible = summary.revenue >= std::max(r, summary.eta * scenario->p_min);
    }
  }
  auto out = result(effective, summary, summary.eta, summary.revenue, feasible, json::array());
  out["policy"] = policy.name();
  return out;
}

}  // namespace

ServiceState load_service_state(std::filesystem::path const& out_dir, bool force) {
  Pipeline const pipeline{out_dir, Pipeline::stored_config(out_dir), force};
  for (auto const* stage : {"ingest", "surge", "elasticity", "metrics", "price"}) {
    pipeline.require_stage(stage, "serve");
  }
  ServiceState s;
  s.config = pipeline.config();
  s.trips = load_annotated_trips(pipeline.artifact("surge", "annotated_trips"));
  s.regions = load_regions_artifact(pipeline.artifact("ingest", "regions"));
  s.elasticities = load_elasticities(pipeline.artifact("elasticity", "table"));
  if (!s.elasticities.contains(Cohort::kEda)) throw data_error{"no EDA elasticity table"};
  s.fairride = fare_model_from_json(read_json(pipeline.artifact("price", "fairride_model")));
  s.demand = build_demand(s.trips, s.elasticities.at(Cohort::kEda));
  s.summary = read_json(pipeline.artifact("metrics", "summary"));
  s.shares = surge_shares(s.trips);
  s.elasticities_doc = json::object();
  for (auto const& [c, table] : s.elasticities) s.elasticities_doc[std::string{to_string(c)}] = to_json(table);
  return s;
}

ApiResponse whatif(ServiceState const& state, std::string const& body) {
  auto const req = json::parse(body, nullptr, false);
  if (req.is_discarded()) return bad_request("body", "not valid JSON");
  if (!req.is_object()) return bad_request("body", "must be a JSON object");
  for (auto const& [key, v] : req.items()) {
    if (key != "mechanism" && key != "scenario" && key != "delta" && key != "amount") {
      return bad_request(key, "unknown field");
    }
  }
  if (!req.contains("mechanism") || !req.at("mechanism").is_string()) {
    return bad_request("mechanism", "required: one of fixed, fairride, flat");
  }
  auto const mechanism = req.at("mechanism").get<std::string>();
  if (mechanism != "fixed" && mechanism != "fairride" && mechanism != "flat") {
    return bad_request("mechanism", "must be one of fixed, fairride, flat");
  }

  std::optional<double> delta;
  if (req.contains("delta") && !req.at("delta").is_null()) {
    if (mechanism != "fixed") return bad_request("delta", "only applies to the fixed mechanism");
    if (!req.at("delta").is_number()) return bad_request("delta", "must be a number");
    delta = req.at("delta").get<double>();
    if (!(*delta >= 0.0 && *delta < 1.0)) return bad_request("delta", "must lie in [0, 1)");
  }
  std::optional<double> amount;
  if (req.contains("amount")) {
    if (mechanism != "flat") return bad_request("amount", "only applies to the flat mechanism");
    if (!req.at("amount").is_number()) return bad_request("amount", "must be a number");
    amount = req.at("amount").get<double>();
    if (!(*amount >= 0.0)) return bad_request("amount", "must be nonnegative");
  }

  std::optional<PricingScenario> scenario;
  try {
    if (req.contains("scenario")) {
      scenario = scenario_from_json(req.at("scenario"), state.config.scenario.grid_step);
    }
  } catch (field_error const& e) {
    return bad_request(e.field, e.message);
  }
  if (mechanism == "fixed" && !scenario) return bad_request("scenario", "required for fixed");

  try {
    json out;
    if (mechanism == "fixed") {
      out = run_fixed(state, *scenario, delta);
    } else if (mechanism == "flat") {
      FlatDiscountPolicy const policy{amount.value_or(state.config.flat_discount),
                                      state.config.regression.price_floor};
      out = run_policy(state, policy, scenario);
    } else {
      out = run_policy(state, RegressionPolicy{state.fairride, "FairRide"}, scenario);
    }
    out["mechanism"] = mechanism;
    return {200, out};
  } catch (argument_error const& e) {
    return bad_request("body", e.what());
  } catch (error const& e) {
    return {500, {{"error", e.what()}}};
  }
}

void mount_api(httplib::Server& server, ServiceState const& state, std::string origin) {
  server.set_default_headers({{"Access-Control-Allow-Origin", origin},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                              {"Access-Control-Allow-Headers", "Content-Type"}});
  auto send = [](httplib::Response& res, int status, json const& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json; charset=utf-8");
  };
  server.Options(R"(/api/.*)", [](httplib::Request const&, httplib::Response& res) {
    res.status = 204;
  });
  server.Get("/api/health", [send](httplib::Request const&, httplib::Response& res) {
    send(res, 200, {{"status", "ok"}});
  });
  server.Get("/api/summary", [&state, send](httplib::Request const&, httplib::Response& res) {
    send(res, 200, state.summary);
  });
  server.Get("/api/surge-shares", [&state, send](httplib::Request const&, httplib::Response& res) {
    send(res, 200, state.shares);
  });
  server.Get("/api/elasticities", [&state, send](httplib::Request const&, httplib::Response& res) {
    send(res, 200, state.elasticities_doc);
  });
  server.Post("/api/whatif", [&state, send](httplib::Request const& req, httplib::Response& res) {
    auto const r = whatif(state, req.body);
    send(res, r.status, r.body);
  });
}

std::pair<std::string, int> resolve_bind(std::optional<std::string> const& flag) {
  std::string spec = flag.value_or("");
  if (spec.empty()) {
    if (char const* env = std::getenv("EQUIRIDE_BIND")) spec = env;
  }
  if (spec.empty()) spec = "127.0.0.1:8080";
  auto const colon = spec.rfind(':');
  std::string host = colon == std::string::npos ? "127.0.0.1" : spec.substr(0, colon);
  if (host.empty()) host = "127.0.0.1";
  auto const port_text = colon == std::string::npos ? spec : spec.substr(colon + 1);
  int port = 0;
  try {
    std::size_t used = 0;
    port = std::stoi(port_text, &used);
    if (used != port_text.size()) port = -1;
  } catch (std::exception const&) {
    port = -1;
  }
  if (port < 0 || port > 65535) throw config_error{"bad bind address \"" + spec + "\""};
  return {host, port};
}

void serve(ServiceState const& state, std::string const& host, int port) {
  httplib::Server server;
  mount_api(server, state);
  std::cerr << "serving on http://" << host << ':' << port << "/api\n";
  if (!server.listen(host, port)) throw config_error{"cannot bind " + host + ":" + std::to_string(port)};
}

}  // namespace equiride
