#include <doctest.h>

#include "../support/oracles.hpp"
#include "../support/random_scenarios.hpp"
#include "geese/discrepancy.hpp"
#include "geese/errors.hpp"
#include "geese/planner.hpp"

using namespace geese;
using namespace geese::planner;

namespace {

const std::vector<Modality> kAll{Modality::aerial, Modality::ground, Modality::underwater};

DeploymentRequest use_case() {
  DeploymentRequest r;
  r.workload_users = 1500;
  r.response_bound_ms = 2000;
  r.legs = {{"A", kAll, 3600, 500, {}}, {"B", {Modality::aerial, Modality::ground}, 7200, 1000, {}}};
  return r;
}

DeploymentRequest one_leg(int w, double tau, double dwell = 600, double dist = 200) {
  DeploymentRequest r;
  r.workload_users = w;
  r.response_bound_ms = tau;
  r.legs = {{"A", kAll, dwell, dist, {}}};
  return r;
}

// Catalog restricted to one cloudlet type and one ground UAV.
Catalog single_type(const char* cloudlet) {
  Catalog c = default_catalog();
  c.cloudlets = {*c.find_cloudlet(cloudlet)};
  c.uavs = {*c.find_uav("romeo-v2")};
  c.fleet_bound = {{"romeo-v2", 3}};
  return c;
}

Plan plan_of(const Outcome& o) {
  REQUIRE(std::holds_alternative<Plan>(o));
  return std::get<Plan>(o);
}

}  // namespace

TEST_CASE("use-case model has a variable per UAV/cloudlet pair") {
  const AllocationModel m = build_model(use_case(), default_catalog());
  CHECK(m.variables.size() >= default_catalog().uavs.size() * default_catalog().cloudlets.size());
  CHECK(m.demands.size() == 2);
  for (const auto& v : m.variables) {
    const auto& u = default_catalog().uavs[v.uav];
    if (u.modality == Modality::underwater) CHECK(v.excluded_by.rfind("modality", 0) == 0);
    if (u.modality == Modality::aerial) CHECK(v.excluded_by.rfind("roundtrip", 0) == 0);
  }
}

TEST_CASE("use case under default calibration selects no aerial units") {
  const Outcome o = plan_multi_leg(use_case(), default_catalog());
  const Plan& p = plan_of(o);
  CHECK(p.units_of(Modality::aerial) == 0);
  CHECK(p.units_of(Modality::ground) == p.units_total);
  CHECK(p.total_cost == 10.0);
  REQUIRE(p.assignments.size() == 1);
  CHECK(p.assignments[0].cloudlet_id == "cat4-type3");
  CHECK(p.assignments[0].units == 2);
  CHECK(canonical_document(o) == canonical_document(oracle_enumerate(build_model(use_case(), default_catalog()))));
}

TEST_CASE("cost alone keeps aerial units out when they can finish the tour") {
  DeploymentRequest r = one_leg(600, 2000, 30, 100);
  r.legs[0].allowed_modalities = {Modality::aerial, Modality::ground};
  const AllocationModel m = build_model(r, default_catalog());
  bool aerial_eligible = false;
  for (const auto& v : m.variables) {
    if (default_catalog().uavs[v.uav].modality == Modality::aerial && v.upper_bound > 0) aerial_eligible = true;
  }
  REQUIRE(aerial_eligible);
  const Plan& p = plan_of(solve(m));
  CHECK(p.units_of(Modality::aerial) == 0);
}

TEST_CASE("a single leg is the same problem as solve") {
  DeploymentRequest r = use_case();
  r.legs.resize(1);
  CHECK(canonical_document(plan_multi_leg(r, default_catalog())) ==
        canonical_document(solve(build_model(r, default_catalog()))));
}

TEST_CASE("zero workload yields the empty plan") {
  const AllocationModel m = build_model(one_leg(0, 2000), default_catalog());
  for (const Outcome& o : {solve(m), oracle_enumerate(m)}) {
    const Plan& p = plan_of(o);
    CHECK(p.assignments.empty());
    CHECK(p.total_cost == 0.0);
    CHECK(p.units_total == 0);
  }
}

TEST_CASE("workload of 300 on a 150-user cloudlet forces two units") {
  const Catalog c = single_type("cat2-type1");
  const Plan& p = plan_of(solve(build_model(one_leg(300, 5000), c)));
  CHECK(p.units_total == 2);
  CHECK(p.capacity_total == 300);
  CHECK(std::get<Plan>(solve(build_model(one_leg(301, 5000), c))).units_total == 3);
}

TEST_CASE("a 1 ms bound is a response infeasibility") {
  const AllocationModel m = build_model(one_leg(1500, 1), default_catalog());
  for (const Outcome& o : {solve(m), oracle_enumerate(m)}) {
    REQUIRE(std::holds_alternative<Infeasibility>(o));
    const auto& inf = std::get<Infeasibility>(o);
    CHECK(inf.has(ConstraintId::response));
    CHECK(inf.violated[0].shortfall == doctest::Approx(221.0 - 1.0));
  }
}

TEST_CASE("dwell beyond every endurance is a roundtrip infeasibility") {
  const AllocationModel m = build_model(one_leg(100, 2000, 1e6), default_catalog());
  for (const Outcome& o : {solve(m), oracle_enumerate(m)}) {
    REQUIRE(std::holds_alternative<Infeasibility>(o));
    CHECK(std::get<Infeasibility>(o).has(ConstraintId::roundtrip));
  }
}

TEST_CASE("no modality common to all legs is a modality infeasibility") {
  DeploymentRequest r = use_case();
  r.legs[0].allowed_modalities = {Modality::underwater};
  r.legs[1].allowed_modalities = {Modality::aerial};
  const Outcome o = solve(build_model(r, default_catalog()));
  REQUIRE(std::holds_alternative<Infeasibility>(o));
  CHECK(std::get<Infeasibility>(o).has(ConstraintId::modality));
  CHECK(std::get<Infeasibility>(o).violated[0].shortfall == 1500);
}

TEST_CASE("too much workload for the fleet names workload and fleet") {
  const Outcome o = solve(build_model(one_leg(100000, 5000), default_catalog()));
  REQUIRE(std::holds_alternative<Infeasibility>(o));
  const auto& inf = std::get<Infeasibility>(o);
  CHECK(inf.has(ConstraintId::workload));
  CHECK(inf.has(ConstraintId::fleet));
}

TEST_CASE("invalid requests are rejected") {
  DeploymentRequest r = one_leg(10, 0);
  CHECK_THROWS_AS(build_model(r, default_catalog()), ValidationError);
  r = one_leg(-1, 100);
  CHECK_THROWS_AS(build_model(r, default_catalog()), ValidationError);
  r = one_leg(10, 100);
  r.legs.clear();
  CHECK_THROWS_AS(build_model(r, default_catalog()), ValidationError);
  r = one_leg(10, 100);
  r.legs[0].allowed_modalities.clear();
  CHECK_THROWS_AS(build_model(r, default_catalog()), ValidationError);
}

TEST_CASE("solver matches the library oracle and an independent brute force") {
  for (std::uint64_t seed = 1000; seed < 1150; ++seed) {
    CAPTURE(seed);
    const auto in = scenario_gen::random_instance(seed);
    const AllocationModel m = build_model(in.request, in.catalog);
    const Outcome a = solve(m);
    const Outcome b = oracle_enumerate(m);
    REQUIRE(canonical_document(a) == canonical_document(b));
    if (in.request.metric == ResponseMetric::image) {
      const auto brute = oracle::brute_force_image(in.request, in.catalog);
      REQUIRE(brute.feasible == is_optimal(a));
      if (brute.feasible) {
        CHECK(std::get<Plan>(a).selection == brute.counts);
        CHECK(std::get<Plan>(a).total_cost == doctest::Approx(brute.cost));
      }
    }
    if (const Plan* p = std::get_if<Plan>(&a)) CHECK(revalidate(m, *p).empty());
  }
}

TEST_CASE("relaxing the bound or lowering the workload never raises cost") {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    CAPTURE(seed);
    auto in = scenario_gen::random_instance(seed);
    const Outcome base = solve(build_model(in.request, in.catalog));
    if (!is_optimal(base)) continue;
    const double cost = std::get<Plan>(base).total_cost;
    DeploymentRequest relaxed = in.request;
    relaxed.response_bound_ms *= 1.5;
    const Outcome r1 = solve(build_model(relaxed, in.catalog));
    REQUIRE(is_optimal(r1));
    CHECK(std::get<Plan>(r1).total_cost <= cost + 1e-9);
    DeploymentRequest lighter = in.request;
    lighter.workload_users /= 2;
    const Outcome r2 = solve(build_model(lighter, in.catalog));
    if (in.request.metric == ResponseMetric::image) {
      REQUIRE(is_optimal(r2));
      CHECK(std::get<Plan>(r2).total_cost <= cost + 1e-9);
    }
  }
}

TEST_CASE("scaling every cost weight leaves the argmin unchanged") {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    CAPTURE(seed);
    const auto in = scenario_gen::random_instance(seed);
    const Outcome base = solve(build_model(in.request, in.catalog));
    if (!is_optimal(base)) continue;
    for (double k : {0.5, 3.0, 7.25}) {
      Catalog scaled = in.catalog;
      for (auto& u : scaled.uavs) u.cost_alpha *= k;
      for (auto& c : scaled.cloudlets) c.cost_beta *= k;
      const Outcome o = solve(build_model(in.request, scaled));
      REQUIRE(is_optimal(o));
      CHECK(std::get<Plan>(o).selection == std::get<Plan>(base).selection);
      CHECK(std::get<Plan>(o).total_cost == doctest::Approx(k * std::get<Plan>(base).total_cost));
    }
  }
}

TEST_CASE("identical inputs serialize identically") {
  const std::string a = canonical_document(plan_multi_leg(use_case(), default_catalog()));
  const std::string b = canonical_document(plan_multi_leg(use_case(), default_catalog()));
  CHECK(a == b);
  CHECK(a.back() == '\n');
}

TEST_CASE("ties prefer lighter payloads, then earlier catalog entries") {
  Catalog c = default_catalog();
  c.uavs = {*c.find_uav("romeo-v2")};
  c.fleet_bound = {{"romeo-v2", 3}};
  c.cloudlets = {*default_catalog().find_cloudlet("cat4-type1"), *default_catalog().find_cloudlet("cat3-type2")};
  DeploymentRequest r = one_leg(350, 5000);
  r.cost_overrides.beta = {{"cat4-type1", 1.0}, {"cat3-type2", 1.0}};
  // Both single units cover 350 users at equal cost; the 300 gm one wins.
  const Plan& p = plan_of(solve(build_model(r, c)));
  REQUIRE(p.assignments.size() == 1);
  CHECK(p.assignments[0].cloudlet_id == "cat3-type2");

  c.cloudlets = {*default_catalog().find_cloudlet("cat4-type1"), *default_catalog().find_cloudlet("cat4-type2")};
  const Plan& q = plan_of(solve(build_model(one_leg(350, 5000), c)));
  REQUIRE(q.assignments.size() == 1);
  CHECK(q.assignments[0].cloudlet_id == "cat4-type1");
}

TEST_CASE("cost overrides resolve by id before class") {
  DeploymentRequest r = one_leg(100, 5000);
  r.cost_overrides.alpha = {{"ground", 7.0}, {"romeo-v2", 2.0}, {"aerial", 0.5}};
  r.cost_overrides.beta = {{"category-1", 9.0}, {"cat1-type1", 0.25}};
  const AllocationModel m = build_model(r, default_catalog());
  for (const auto& v : m.variables) {
    const auto& u = default_catalog().uavs[v.uav];
    const auto& c = default_catalog().cloudlets[v.cloudlet];
    if (u.id == "romeo-v2") CHECK(v.alpha == 2.0);
    if (u.modality == Modality::aerial) CHECK(v.alpha == 0.5);
    if (c.id == "cat1-type1") CHECK(v.beta == 0.25);
  }
}

TEST_CASE("the web metric uses the load curve at each unit's share") {
  Catalog c = single_type("cat3-type1");  // two Galaxy S5
  DeploymentRequest r = one_leg(200, 5000);
  r.metric = ResponseMetric::web;
  const Plan& p = plan_of(solve(build_model(r, c)));
  REQUIRE(p.units_total == 1);
  // 200 users on one unit: 100 per phone.
  CHECK(p.mean_response_ms == doctest::Approx(oracle::interpolate(20, 371, 90, 1149, 100)));
  r.response_form = ResponseForm::literal;
  CHECK(plan_of(solve(build_model(r, c))).mean_response_ms == doctest::Approx(oracle::interpolate(20, 371, 90, 1149, 100)));
  // Cloudlets without any calibrated device are not eligible for web loads.
  const AllocationModel m = build_model(r, single_type("cat4-type1"));
  CHECK(m.active_variables() == 0);
}

TEST_CASE("the high capacity switch counts the top of the range") {
  const Catalog c = single_type("cat2-type1");
  DeploymentRequest r = one_leg(340, 5000);
  CHECK(plan_of(solve(build_model(r, c))).units_total == 3);
  r.capacity_accounting = CapacityAccounting::high;
  CHECK(plan_of(solve(build_model(r, c))).units_total == 2);
}

TEST_CASE("per-leg workloads use the largest demand") {
  DeploymentRequest r = use_case();
  r.legs[0].workload_users = 300;
  r.legs[1].workload_users = 900;
  const Plan& p = plan_of(solve(build_model(r, default_catalog())));
  CHECK(p.capacity_total >= 900);
}

TEST_CASE("the oracle refuses huge spaces") {
  Catalog c = default_catalog();
  for (auto& [id, b] : c.fleet_bound) b = 12;
  const AllocationModel m = build_model(one_leg(100, 5000), c);
  CHECK(oracle_search_space(m) > kOracleLimit);
  CHECK_THROWS_AS(oracle_enumerate(m), SearchSpaceTooLarge);
}

TEST_CASE("request JSON round trip") {
  DeploymentRequest r = use_case();
  r.cost_overrides.alpha["ground"] = 2;
  r.roundtrip_budget_s = 9000;
  r.metric = ResponseMetric::web;
  CHECK(request_from_json(to_json(r)) == r);
  nlohmann::json bad = to_json(r);
  bad["metric"] = "video";
  CHECK_THROWS_AS(request_from_json(bad), ParseError);
}

TEST_CASE("plan JSON round trip keeps ids and counts") {
  const Plan& p = plan_of(plan_multi_leg(use_case(), default_catalog()));
  const Plan back = plan_from_json(to_json(p));
  REQUIRE(back.assignments.size() == p.assignments.size());
  CHECK(back.assignments[0].uav_id == p.assignments[0].uav_id);
  CHECK(back.assignments[0].units == p.assignments[0].units);
  CHECK(back.total_cost == p.total_cost);
}

TEST_CASE("discrepancy report against the field selection") {
  const ReferenceSelection ref{{"romeo-v2", "cat3-type2", 2}, {"romeo-v2", "cat4-type1", 2}};
  const DiscrepancyReport rep = compare_with_reference(use_case(), default_catalog(), ref);
  CHECK(rep.oracle_certificate == "cost-equal");
  CHECK_FALSE(rep.reference_feasible);  // four ground units exceed the default bound of 3
  CHECK(rep.sweep.size() == 54);
  for (const auto& pt : rep.sweep) {
    if (pt.feasible) {
      if (pt.reference_feasible) CHECK(pt.optimal_cost <= pt.reference_cost + 1e-9);
      for (const auto& g : pt.optimum) CHECK(g.uav_id == "romeo-v2");
    }
  }
  const auto j = to_json(rep);
  CHECK(j.at("reference").size() == 2);
  CHECK(j.at("default_matches_reference") == false);
}
