// geese: plan and simulate UAV-delivered cloudlet deployments.
#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "geese/errors.hpp"
#include "geese/interface.hpp"

using namespace geese;
using nlohmann::json;

namespace {

struct Globals {
  std::string catalog_path;
  std::optional<std::uint64_t> seed;
  bool verify = false;
  std::string format = "json";
};

std::optional<Catalog> catalog_override(const Globals& g) {
  if (g.catalog_path.empty()) return std::nullopt;
  return load_catalog_file(g.catalog_path);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw Error("cannot write " + path);
}

int cmd_plan(const Globals& g, const std::string& scenario_path) {
  const iface::Scenario s = iface::load_scenario_file(scenario_path, catalog_override(g));
  const planner::AllocationModel model = planner::build_model(s.request, s.catalog);
  const planner::Outcome outcome = planner::solve(model);
  std::cout << iface::plan_document(outcome, model, g.verify);
  return planner::is_optimal(outcome) ? 0 : 2;
}

int cmd_sweep(const Globals& g, const std::string& scenario_path) {
  const iface::Scenario s = iface::load_scenario_file(scenario_path, catalog_override(g));
  if (!s.reference) throw UsageError("scenario has no reference_selection to compare against");
  const auto rep = planner::compare_with_reference(s.request, s.catalog, *s.reference);
  std::cout << planner::canonical_document(planner::to_json(rep));
  return 0;
}

struct SimulateArgs {
  std::string scenario;
  bool collab = false;
  bool delivery = false;
  std::string regime = "encased_dry";
  std::string role = "workers";
  int jobs = sim::kDefaultJobs;
  int workers = 3;
  int reps = 1;
  double work_ms = sim::kDefaultJobWorkMs;
  int retry_budget = 0;
  std::string plan_file;
  std::string plan_inline;
  std::string csv_path;
  bool unballasted = false;
};

int cmd_simulate(const Globals& g, const SimulateArgs& a) {
  if (a.collab == a.delivery) throw UsageError("choose exactly one of --collab or --delivery");
  std::optional<iface::Scenario> scenario;
  if (!a.scenario.empty()) scenario = iface::load_scenario_file(a.scenario, catalog_override(g));
  const Catalog catalog = scenario ? scenario->catalog : catalog_override(g).value_or(default_catalog());
  const std::uint64_t seed = g.seed.value_or(scenario ? scenario->seed : 0);

  sim::SimReport report;
  json doc;
  if (a.collab) {
    auto regime = parse_regime(a.regime);
    auto role = parse_role(a.role);
    if (!regime) throw UsageError("unknown regime '" + a.regime + "'");
    if (!role) throw UsageError("unknown role '" + a.role + "'");
    sim::CollabConfig config;
    if (scenario && scenario->collab) {
      json j = *scenario->collab;
      j["seed"] = seed;
      config = sim::collab_config_from_json(j, catalog.calibration);
    } else {
      config = sim::collab_config(catalog.calibration, *regime, *role, a.workers, a.jobs, seed);
      config.per_job_work_ms = a.work_ms;
      config.retry_budget = a.retry_budget;
      if (auto f = sim::validate(config); !f.empty()) throw ValidationError(std::move(f));
    }
    if (a.reps > 1) {
      const auto mc = sim::run_monte_carlo(config, a.reps);
      report = mc.first;
      doc = sim::to_json(mc);
    } else {
      report = sim::simulate_collaborative(config);
      doc = sim::to_json(report);
    }
  } else {
    if (!scenario) throw UsageError("--delivery needs a scenario file for the tour");
    if (a.plan_file.empty() && a.plan_inline.empty()) throw UsageError("--delivery needs --plan FILE or --plan-inline JSON");
    const std::string text = a.plan_file.empty() ? a.plan_inline : slurp(a.plan_file);
    const planner::Plan plan = planner::plan_from_json(json_util::parse(text, "plan"));
    sim::DeliveryOptions opts;
    opts.unballasted = a.unballasted;
    report = sim::simulate_delivery(plan, scenario->request, catalog, opts);
    doc = sim::to_json(report);
  }

  if (!a.csv_path.empty()) write_file(a.csv_path, sim::to_csv(report));
  if (g.format == "csv") {
    std::cout << sim::to_csv(report);
  } else {
    std::cout << planner::canonical_document(doc);
  }
  return 0;
}

int cmd_catalog(const Globals& g, const std::string& validate_path) {
  const Catalog c = validate_path.empty() ? catalog_override(g).value_or(default_catalog())
                                          : load_catalog_file(validate_path);
  std::cout << serialize_catalog(c);
  return 0;
}

iface::Service* g_service = nullptr;

void on_signal(int) {
  if (g_service) g_service->stop();
}

int cmd_serve(const Globals& g, const std::string& bind, std::string state_dir) {
  const auto colon = bind.rfind(':');
  if (colon == std::string::npos) throw UsageError("--bind expects HOST:PORT");
  const std::string host = bind.substr(0, colon);
  const int port = std::stoi(bind.substr(colon + 1));
  if (state_dir.empty()) state_dir = iface::default_state_dir().string();
  iface::Service service(catalog_override(g).value_or(default_catalog()), state_dir);
  const int bound = service.bind(host, port);
  std::cerr << "geese: serving on " << host << ":" << bound << " (state " << state_dir << ")" << std::endl;
  g_service = &service;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  service.run();
  g_service = nullptr;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Plan and simulate UAV-delivered cloudlet deployments"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--catalog", g.catalog_path, "Catalog document (default: built-in)");
  app.add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& s) { g.seed = s; }, "Random seed");
  app.add_flag("--verify", g.verify, "Cross-check plans against the exhaustive oracle");
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"json", "csv"}));

  std::string scenario;
  auto* plan = app.add_subcommand("plan", "Solve a scenario; exit 0 optimal, 2 infeasible, 1 error");
  plan->add_option("scenario", scenario, "Scenario file")->required();

  auto* sweep = app.add_subcommand("sweep", "Compare a reference selection with the optimum over a calibration grid");
  sweep->add_option("scenario", scenario, "Scenario file")->required();

  SimulateArgs sa;
  auto* simulate = app.add_subcommand("simulate", "Run a collaborative or delivery simulation");
  simulate->add_option("scenario", sa.scenario, "Scenario file");
  simulate->add_flag("--collab", sa.collab, "Master/worker processing over calibrated links");
  simulate->add_flag("--delivery", sa.delivery, "Battery accounting for a plan's missions");
  simulate->add_option("--regime", sa.regime, "surface, encased_dry, depth1 or depth2");
  simulate->add_option("--role", sa.role, "Submerged side: master or workers");
  simulate->add_option("--jobs", sa.jobs, "Number of jobs");
  simulate->add_option("--workers", sa.workers, "Number of workers");
  simulate->add_option("--reps", sa.reps, "Monte Carlo repetitions");
  simulate->add_option("--work-ms", sa.work_ms, "Base per-job work in ms");
  simulate->add_option("--retry-budget", sa.retry_budget, "Retries per job (uncalibrated extension)");
  simulate->add_option("--plan", sa.plan_file, "Plan document for --delivery");
  simulate->add_option("--plan-inline", sa.plan_inline, "Plan document given inline");
  simulate->add_option("--csv", sa.csv_path, "Also write the CSV export here");
  simulate->add_flag("--unballasted", sa.unballasted, "Underwater containers carry no ballast");

  std::string validate_path;
  auto* catalog = app.add_subcommand("catalog", "Print the catalog in canonical form");
  catalog->add_option("--validate", validate_path, "Load and validate this catalog instead");

  std::string bind = "127.0.0.1:8080";
  std::string state_dir;
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--bind", bind, "HOST:PORT");
  serve->add_option("--state-dir", state_dir, "Run log directory (default: $GEESE_STATE_DIR or ./geese-state)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*plan) return cmd_plan(g, scenario);
    if (*sweep) return cmd_sweep(g, scenario);
    if (*simulate) return cmd_simulate(g, sa);
    if (*catalog) return cmd_catalog(g, validate_path);
    if (*serve) return cmd_serve(g, bind, state_dir);
  } catch (const UsageError& e) {
    std::cerr << "geese: usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "geese: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
