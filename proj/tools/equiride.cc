// equiride: command-line driver for the pricing-fairness pipeline.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "equiride/artifacts.h"
#include "equiride/error.h"
#include "equiride/pipeline.h"
#include "equiride/service.h"
#include "equiride/synth.h"

namespace fs = std::filesystem;
using namespace equiride;
using nlohmann::json;

namespace {

struct Options {
  std::optional<std::string> config;
  std::optional<std::string> input;
  std::string out{"equiride-out"};
  std::optional<std::string> scenario;
  std::optional<std::string> mode;
  std::optional<double> grid_step;
  std::optional<std::uint64_t> seed;
  bool force{false};
  std::optional<std::string> bind;
  std::optional<std::size_t> n_trips;
};

PipelineConfig resolve_config(Options const& o) {
  PipelineConfig c;
  if (o.config) {
    fs::path const p{*o.config};
    c = pipeline_config_from_json(read_json(p), fs::absolute(p).parent_path());
  } else {
    c = Pipeline::stored_config(o.out);
  }
  if (o.input) c.trips = fs::absolute(*o.input);
  if (o.mode) c.mode = surplus_mode_from_string(*o.mode);
  if (o.seed) c.ransac.seed = *o.seed;
  if (o.scenario) c.scenario = scenario_from_json(read_json(*o.scenario), c.scenario.grid_step);
  if (o.grid_step) {
    c.scenario.grid_step = *o.grid_step;
    c.subsidy_scenario.grid_step = *o.grid_step;
  }
  c.scenario.validate();
  c.subsidy_scenario.validate();
  return c;
}

void print_summary(char const* label, FairnessSummary const& s) {
  std::cout << label << ": " << to_json(s).dump() << '\n';
}

int run_stage(std::string const& name, Options const& o) {
  Pipeline p{o.out, resolve_config(o), o.force};
  if (name == "ingest") {
    std::cout << p.ingest().dump(2) << '\n';
  } else if (name == "surge") {
    auto const r = p.surge();
    for (auto const& [c, m] : r.models) std::cout << to_string(c) << ": " << to_json(m).dump() << '\n';
    std::cout << "annotated " << r.trips.size() << " trips, excluded " << r.excluded << '\n';
  } else if (name == "elasticity") {
    for (auto const& [c, table] : p.elasticity()) write_elasticity_csv(std::cout, c, table);
  } else if (name == "surplus") {
    for (auto const& [c, r] : p.surplus()) {
      std::cout << to_string(c) << ": total " << r.total_surplus << ", average "
                << r.average_surplus << " over " << r.total_trips << " trips\n";
    }
  } else if (name == "metrics") {
    print_summary("baseline", p.metrics());
  } else if (name == "price") {
    auto j = to_json(p.price());
    j.erase("grid");
    std::cout << j.dump(2) << '\n';
  } else if (name == "report") {
    for (auto const& f : p.report()) std::cout << f.string() << '\n';
  }
  return 0;
}

int run_synth(Options const& o) {
  SynthConfig c;
  if (o.config) c = synth_config_from_json(read_json(*o.config));
  if (o.seed) c.seed = *o.seed;
  if (o.n_trips) c.n_trips = *o.n_trips;
  c.validate();
  fs::path const dir{o.out};
  fs::create_directories(dir);
  auto const data = generate(c);
  {
    std::ofstream out{dir / "trips.csv", std::ios::binary};
    write_trips_csv(out, data.trips);
  }
  {
    std::ofstream out{dir / "regions.json", std::ios::binary};
    write_region_json(out, data.regions);
  }
  {
    std::ofstream out{dir / "ground_truth.json", std::ios::binary};
    write_ground_truth(out, c, data);
  }
  write_json(dir / "synth_config.json", to_json(c));
  if (!fs::exists(dir / "pipeline.json")) {
    write_json(dir / "pipeline.json", {{"trips", "trips.csv"}, {"regions", "regions.json"}});
  }
  std::cout << "wrote " << data.trips.size() << " trips to " << (dir / "trips.csv").string() << '\n';
  return 0;
}

int run_serve(Options const& o) {
  auto const state = load_service_state(o.out, o.force);
  auto const [host, port] = resolve_bind(o.bind);
  serve(state, host, port);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ride-hailing pricing fairness pipeline"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "Pipeline config JSON");
    sub->add_option("--input", o.input, "Trip CSV (overrides config \"trips\")");
    sub->add_option("--out", o.out, "Output directory")->capture_default_str();
    sub->add_option("--scenario", o.scenario, "Pricing scenario JSON");
    sub->add_option("--mode", o.mode, "Surplus mode")->check(CLI::IsMember({"cumulative", "successive"}));
    sub->add_option("--grid-step", o.grid_step, "Discount grid step");
    sub->add_option("--seed", o.seed, "RANSAC seed");
    sub->add_flag("--force", o.force, "Run even if upstream artifacts are stale");
  };

  std::vector<std::pair<std::string, std::string>> const stages{
      {"ingest", "Parse, filter and label trips"},
      {"surge", "Fit baseline fares and infer surge"},
      {"elasticity", "Estimate price elasticities per cohort"},
      {"surplus", "Consumer surplus per cohort"},
      {"metrics", "Baseline fairness summary"},
      {"price", "Train FairRide and solve FixedFairRide"},
      {"report", "Write comparison tables and figure data"},
      {"run", "Run every stage from ingest to report"}};
  for (auto const& [name, help] : stages) common(app.add_subcommand(name, help));

  auto* synth = app.add_subcommand("synth", "Generate a synthetic trip dataset");
  synth->add_option("--config", o.config, "Synth config JSON");
  synth->add_option("--out", o.out, "Output directory")->capture_default_str();
  synth->add_option("--seed", o.seed, "Random seed");
  synth->add_option("--n-trips", o.n_trips, "Number of trips");

  auto* serve_cmd = app.add_subcommand("serve", "Serve the what-if HTTP API");
  serve_cmd->add_option("--out", o.out, "Pipeline output directory")->capture_default_str();
  serve_cmd->add_option("--bind", o.bind, "host:port (default $EQUIRIDE_BIND or 127.0.0.1:8080)");
  serve_cmd->add_flag("--force", o.force, "Serve even if artifacts are stale");

  try {
    app.parse(argc, argv);
  } catch (CLI::ParseError const& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }
  auto const* sub = app.get_subcommands().front();
  std::string const name = sub->get_name();

  try {
    if (name == "synth") return run_synth(o);
    if (name == "serve") return run_serve(o);
    if (name == "run") {
      for (auto const* stage : {"ingest", "surge", "elasticity", "surplus", "metrics", "price", "report"}) {
        std::cout << "== " << stage << '\n';
        run_stage(stage, o);
      }
      return 0;
    }
    return run_stage(name, o);
  } catch (missing_artifact_error const& e) {
    std::cerr << "error: missing upstream stage \"" << e.stage << "\": " << e.what() << '\n';
    return 5;
  } catch (stale_artifact_error const& e) {
    std::cerr << "error: stale stage \"" << e.stage << "\": " << e.what() << '\n';
    return 6;
  } catch (config_error const& e) {
    std::cerr << "error: config: " << e.what() << '\n';
    return 2;
  } catch (argument_error const& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (data_error const& e) {
    std::cerr << "error: data: " << e.what() << '\n';
    return 3;
  } catch (estimation_error const& e) {
    std::cerr << "error: estimation: " << e.what() << '\n';
    return 4;
  } catch (std::exception const& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
