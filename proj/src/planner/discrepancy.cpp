#include "geese/discrepancy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "geese/errors.hpp"

namespace geese::planner {

using nlohmann::json;

std::string_view to_string(BetaScheme s) {
  switch (s) {
    case BetaScheme::category: return "category";
    case BetaScheme::latency: return "latency";
    case BetaScheme::uniform: return "uniform";
  }
  return "category";
}

ReferenceSelection groups_of(const Plan& plan) {
  ReferenceSelection out;
  for (const auto& a : plan.assignments) out.push_back({a.uav_id, a.cloudlet_id, a.units});
  return out;
}

Selection selection_of(const AllocationModel& model, const ReferenceSelection& reference) {
  Selection x(model.variables.size(), 0);
  const auto& cat = model.catalog;
  for (const auto& g : reference) {
    const UavSpec* u = cat.find_uav(g.uav_id);
    const CloudletSpec* c = cat.find_cloudlet(g.cloudlet_id);
    if (!u || !c) throw ConsistencyError("reference selection names unknown ids " + g.uav_id + "/" + g.cloudlet_id);
    const auto ui = static_cast<std::size_t>(u - cat.uavs.data());
    const auto ci = static_cast<std::size_t>(c - cat.cloudlets.data());
    x[ui * cat.cloudlets.size() + ci] += g.units;
  }
  return x;
}

namespace {

std::vector<std::string> reference_problems(const AllocationModel& model, const Selection& x) {
  std::vector<std::string> out;
  std::vector<int> used(model.fleet_bound.size(), 0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] == 0) continue;
    const Variable& v = model.variables[i];
    used[v.uav] += x[i];
    if (!v.excluded_by.empty()) {
      out.push_back(model.catalog.uavs[v.uav].id + "/" + model.catalog.cloudlets[v.cloudlet].id + " excluded (" +
                    v.excluded_by + ")");
    }
  }
  for (std::size_t u = 0; u < used.size(); ++u) {
    if (used[u] > model.fleet_bound[u]) {
      out.push_back("fleet: " + std::to_string(used[u]) + " units of " + model.catalog.uavs[u].id + " exceed bound " +
                    std::to_string(model.fleet_bound[u]));
    }
  }
  const Evaluation e = evaluate(model, x);
  for (const auto& leg : e.legs) {
    if (!leg.workload_ok) {
      out.push_back("workload: capacity " + std::to_string(leg.capacity) + " < " + std::to_string(leg.workload) +
                    " at leg " + leg.location_id);
    }
    if (!leg.response_ok) {
      std::ostringstream s;
      s << "response: mean " << leg.mean_response_ms << " ms over bound at leg " << leg.location_id;
      out.push_back(s.str());
    }
  }
  return out;
}

ReferenceSelection sorted(ReferenceSelection r) {
  std::sort(r.begin(), r.end(), [](const UnitGroup& a, const UnitGroup& b) {
    return std::tie(a.uav_id, a.cloudlet_id, a.units) < std::tie(b.uav_id, b.cloudlet_id, b.units);
  });
  return r;
}

json groups_json(const ReferenceSelection& r) {
  json out = json::array();
  for (const auto& g : r) out.push_back({{"uav", g.uav_id}, {"cloudlet", g.cloudlet_id}, {"units", g.units}});
  return out;
}

}  // namespace

DiscrepancyReport compare_with_reference(const DeploymentRequest& request, const Catalog& catalog,
                                         const ReferenceSelection& reference, const SweepAxes& axes) {
  DiscrepancyReport rep;
  rep.reference = reference;

  const AllocationModel base = build_model(request, catalog);
  rep.default_outcome = solve(base);
  try {
    const Outcome oracle = oracle_enumerate(base);
    const bool same = std::visit(
        [](const auto& a, const auto& b) -> bool {
          using A = std::decay_t<decltype(a)>;
          using B = std::decay_t<decltype(b)>;
          if constexpr (std::is_same_v<A, Plan> && std::is_same_v<B, Plan>) {
            return std::abs(a.total_cost - b.total_cost) <= 1e-9 * std::max(1.0, std::abs(a.total_cost)) &&
                   a.selection == b.selection;
          } else if constexpr (std::is_same_v<A, Infeasibility> && std::is_same_v<B, Infeasibility>) {
            return true;
          } else {
            return false;
          }
        },
        rep.default_outcome, oracle);
    rep.oracle_certificate = same ? "cost-equal" : "mismatch";
  } catch (const SearchSpaceTooLarge& e) {
    rep.oracle_certificate = std::string("not-run: ") + e.what();
  }

  const Selection ref_x = selection_of(base, reference);
  rep.reference_problems = reference_problems(base, ref_x);
  rep.reference_feasible = rep.reference_problems.empty();
  rep.reference_cost = evaluate(base, ref_x).total_cost;
  const ReferenceSelection ref_sorted = sorted(reference);

  for (double ga : axes.ground_alpha) {
    for (BetaScheme bs : axes.beta) {
      for (int fb : axes.ground_fleet_bound) {
        for (CapacityAccounting cap : axes.capacity) {
          SweepPoint pt;
          pt.ground_alpha = ga;
          pt.beta = bs;
          pt.ground_fleet_bound = fb;
          pt.capacity = cap;
          std::ostringstream label;
          label << "alpha.ground=" << ga << " beta=" << to_string(bs) << " fleet.ground=" << fb
                << " capacity=" << (cap == CapacityAccounting::low ? "low" : "high");
          pt.label = label.str();

          DeploymentRequest r = request;
          r.capacity_accounting = cap;
          r.cost_overrides.alpha["ground"] = ga;
          for (const auto& c : catalog.cloudlets) {
            if (bs == BetaScheme::latency) r.cost_overrides.beta[c.id] = c.per_image_latency_ms() / 1000.0;
            if (bs == BetaScheme::uniform) r.cost_overrides.beta[c.id] = 1.0;
          }
          Catalog cat = catalog;
          for (const auto& u : cat.uavs) {
            if (u.modality == Modality::ground) cat.fleet_bound[u.id] = fb;
          }
          const AllocationModel m = build_model(r, cat);
          const Outcome o = solve(m);
          const Selection x = selection_of(m, reference);
          const Evaluation ev = evaluate(m, x);
          pt.reference_feasible = ev.feasible() && reference_problems(m, x).empty();
          pt.reference_cost = ev.total_cost;
          if (const Plan* p = std::get_if<Plan>(&o)) {
            pt.feasible = true;
            pt.optimal_cost = p->total_cost;
            pt.optimum = groups_of(*p);
            pt.reference_is_optimum = sorted(pt.optimum) == ref_sorted;
            pt.reference_cost_equal =
                pt.reference_feasible &&
                std::abs(pt.reference_cost - pt.optimal_cost) <= 1e-9 * std::max(1.0, std::abs(pt.optimal_cost));
          }
          if (pt.reference_is_optimum || pt.reference_cost_equal) rep.matching_points.push_back(pt.label);
          rep.sweep.push_back(std::move(pt));
        }
      }
    }
  }
  return rep;
}

json to_json(const DiscrepancyReport& rep) {
  json sweep = json::array();
  for (const auto& pt : rep.sweep) {
    json j = {{"label", pt.label},
              {"ground_alpha", pt.ground_alpha},
              {"beta", std::string(to_string(pt.beta))},
              {"ground_fleet_bound", pt.ground_fleet_bound},
              {"capacity", pt.capacity == CapacityAccounting::low ? "low" : "high"},
              {"feasible", pt.feasible},
              {"reference_feasible", pt.reference_feasible},
              {"reference_cost", pt.reference_cost},
              {"reference_is_optimum", pt.reference_is_optimum},
              {"reference_cost_equal", pt.reference_cost_equal}};
    if (pt.feasible) {
      j["optimal_cost"] = pt.optimal_cost;
      j["optimum"] = groups_json(pt.optimum);
    }
    sweep.push_back(std::move(j));
  }
  const Plan* p = std::get_if<Plan>(&rep.default_outcome);
  return {{"schema_version", 1},
          {"reference", groups_json(rep.reference)},
          {"reference_feasible", rep.reference_feasible},
          {"reference_problems", rep.reference_problems},
          {"reference_cost", rep.reference_cost},
          {"default_plan", to_json(rep.default_outcome)},
          {"default_matches_reference", p && sorted(groups_of(*p)) == sorted(rep.reference)},
          {"oracle_certificate", rep.oracle_certificate},
          {"sweep", sweep},
          {"matching_points", rep.matching_points}};
}

}  // namespace geese::planner
