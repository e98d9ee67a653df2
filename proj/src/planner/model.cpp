#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "geese/errors.hpp"
#include "geese/perf_models.hpp"
#include "geese/planner.hpp"

namespace geese::planner {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

double resolve_alpha(const CostOverrides& o, const UavSpec& u) {
  if (auto it = o.alpha.find(u.id); it != o.alpha.end()) return it->second;
  if (auto it = o.alpha.find(std::string(to_string(u.modality))); it != o.alpha.end()) return it->second;
  return u.cost_alpha;
}

double resolve_beta(const CostOverrides& o, const CloudletSpec& c) {
  if (auto it = o.beta.find(c.id); it != o.beta.end()) return it->second;
  if (auto it = o.beta.find("category-" + std::to_string(c.category)); it != o.beta.end()) return it->second;
  return c.cost_beta;
}

bool within(double value, double bound) { return value <= bound + 1e-9 * std::max(1.0, std::abs(bound)); }

}  // namespace

bool Leg::allows(Modality m) const {
  return std::find(allowed_modalities.begin(), allowed_modalities.end(), m) != allowed_modalities.end();
}

int DeploymentRequest::leg_workload(std::size_t leg) const {
  return legs.at(leg).workload_users.value_or(workload_users);
}

std::vector<std::string> validate_request(const DeploymentRequest& r) {
  std::vector<std::string> f;
  if (r.workload_users < 0) f.push_back("workload_users must be >= 0");
  if (!(r.response_bound_ms > 0)) f.push_back("response_bound_ms must be > 0");
  if (r.legs.empty()) f.push_back("at least one leg is required");
  for (const auto& leg : r.legs) {
    const std::string who = "leg '" + leg.location_id + "'";
    if (leg.allowed_modalities.empty()) f.push_back(who + ": allowed_modalities is empty");
    if (leg.dwell_s < 0) f.push_back(who + ": dwell_s must be >= 0");
    if (leg.distance_from_prev_m < 0) f.push_back(who + ": distance_from_prev_m must be >= 0");
    if (leg.workload_users && *leg.workload_users < 0) f.push_back(who + ": workload_users must be >= 0");
  }
  if (r.roundtrip_budget_s && !(*r.roundtrip_budget_s > 0)) f.push_back("roundtrip_budget_s must be > 0");
  if (r.return_distance_m && *r.return_distance_m < 0) f.push_back("return_distance_m must be >= 0");
  for (const auto& [k, v] : r.cost_overrides.alpha) {
    if (!(v >= 0)) f.push_back("alpha override '" + k + "' must be >= 0");
  }
  for (const auto& [k, v] : r.cost_overrides.beta) {
    if (!(v >= 0)) f.push_back("beta override '" + k + "' must be >= 0");
  }
  return f;
}

std::string_view to_string(ConstraintId c) {
  switch (c) {
    case ConstraintId::workload: return "workload";
    case ConstraintId::response: return "response";
    case ConstraintId::roundtrip: return "roundtrip";
    case ConstraintId::modality: return "modality";
    case ConstraintId::fleet: return "fleet";
  }
  return "workload";
}

bool Infeasibility::has(ConstraintId c) const {
  return std::any_of(violated.begin(), violated.end(), [&](const Violation& v) { return v.constraint == c; });
}

int AllocationModel::max_workload() const {
  int w = 0;
  for (const auto& d : demands) w = std::max(w, d.workload);
  return w;
}

std::size_t AllocationModel::active_variables() const {
  return static_cast<std::size_t>(
      std::count_if(variables.begin(), variables.end(), [](const Variable& v) { return v.upper_bound > 0; }));
}

bool Evaluation::feasible() const {
  return bounds_ok && std::all_of(legs.begin(), legs.end(),
                                  [](const LegEvaluation& l) { return l.workload_ok && l.response_ok; });
}

int Plan::units_of(Modality m) const {
  int n = 0;
  for (const auto& a : assignments) {
    if (a.modality == m) n += a.units;
  }
  return n;
}

AllocationModel build_model(const DeploymentRequest& request, const Catalog& catalog) {
  if (auto f = validate_request(request); !f.empty()) throw ValidationError(std::move(f));

  AllocationModel m;
  m.catalog = catalog;
  m.request = request;
  for (std::size_t i = 0; i < request.legs.size(); ++i) {
    m.demands.push_back({request.legs[i].location_id, request.leg_workload(i)});
  }
  for (const auto& u : catalog.uavs) m.fleet_bound.push_back(catalog.fleet_bound_for(u.id));

  double outbound_m = 0.0;
  double dwell_s = 0.0;
  for (const auto& leg : request.legs) {
    outbound_m += leg.distance_from_prev_m;
    dwell_s += leg.dwell_s;
  }
  const double tour_m = outbound_m + request.return_distance_m.value_or(outbound_m);
  const auto& cal = catalog.calibration;
  const double usable_intervals = (1.0 - cal.battery_floor) / cal.interval_fraction;

  for (std::size_t ui = 0; ui < catalog.uavs.size(); ++ui) {
    const UavSpec& u = catalog.uavs[ui];
    for (std::size_t ci = 0; ci < catalog.cloudlets.size(); ++ci) {
      const CloudletSpec& c = catalog.cloudlets[ci];
      Variable v;
      v.uav = ui;
      v.cloudlet = ci;
      v.alpha = resolve_alpha(request.cost_overrides, u);
      v.beta = resolve_beta(request.cost_overrides, c);
      v.unit_cost = v.alpha + v.beta;
      v.capacity = request.capacity_accounting == CapacityAccounting::low ? cloudlet_capacity(c)
                                                                          : c.capacity_users.high;
      v.payload_gm = c.payload_weight_gm;
      v.round_trip_s = tour_m / u.speed_m_per_s + dwell_s;
      v.compute_devices = std::max(1, catalog.compute_device_count(c));

      if (request.metric == ResponseMetric::image) {
        v.min_response_ms = c.per_image_latency_ms();
      } else {
        for (const auto& dc : c.devices) {
          if (cal.load_curve(dc.device_id)) {
            v.load_device = dc.device_id;
            break;
          }
        }
        if (!v.load_device.empty()) {
          const LoadCurve& curve = *cal.load_curve(v.load_device);
          if (request.response_form == ResponseForm::literal) {
            v.min_response_ms = perf::response_time_at_load(curve, perf::kMaxBenchmarkUsers);
          } else {
            v.min_response_ms = perf::response_time_at_load(curve, perf::kMinBenchmarkUsers);
            v.load_dependent = true;
          }
        }
      }

      auto blocked_leg = std::find_if(request.legs.begin(), request.legs.end(),
                                      [&](const Leg& leg) { return !leg.allows(u.modality); });
      if (blocked_leg != request.legs.end()) {
        v.excluded_by = "modality: " + std::string(to_string(u.modality)) + " not allowed at leg '" +
                        blocked_leg->location_id + "'";
      } else {
        try {
          double payload = effective_payload(c, u);
          auto curve = perf::endurance_curve(u);
          payload = std::clamp(payload, curve.min_payload(), curve.max_payload());
          v.endurance_budget_s = usable_intervals * curve.at(payload);
          if (request.roundtrip_budget_s) v.endurance_budget_s = std::min(v.endurance_budget_s, *request.roundtrip_budget_s);
          if (!within(v.round_trip_s, v.endurance_budget_s)) {
            v.excluded_by = "roundtrip: tour needs " + fmt(v.round_trip_s) + " s, budget " + fmt(v.endurance_budget_s) + " s";
          }
        } catch (const InfeasiblePairingError& e) {
          v.excluded_by = std::string("payload: ") + e.what();
        }
        if (v.excluded_by.empty() && request.metric == ResponseMetric::web && v.load_device.empty()) {
          v.excluded_by = "response: no load curve for any device of '" + c.id + "'";
        }
      }
      v.upper_bound = v.excluded_by.empty() ? m.fleet_bound[ui] : 0;
      m.variables.push_back(std::move(v));
    }
  }

  const int need = m.max_workload();
  if (need > 0) {
    auto starts_with = [](const std::string& s, std::string_view p) { return s.rfind(p, 0) == 0; };
    bool any_modality = std::any_of(m.variables.begin(), m.variables.end(),
                                    [&](const Variable& v) { return !starts_with(v.excluded_by, "modality"); });
    if (!any_modality) {
      std::string detail = "no UAV modality is allowed at every leg";
      for (const auto& leg : request.legs) {
        detail += "; " + leg.location_id + ":";
        for (auto mod : leg.allowed_modalities) detail += " " + std::string(to_string(mod));
      }
      m.structural.push_back({ConstraintId::modality, static_cast<double>(need), detail});
    } else {
      bool any_roundtrip = false;
      double best_gap = kInf;
      for (const auto& v : m.variables) {
        if (starts_with(v.excluded_by, "modality") || starts_with(v.excluded_by, "payload")) continue;
        if (starts_with(v.excluded_by, "roundtrip")) {
          best_gap = std::min(best_gap, v.round_trip_s - v.endurance_budget_s);
        } else {
          any_roundtrip = true;
        }
      }
      if (!any_roundtrip && best_gap < kInf) {
        m.structural.push_back({ConstraintId::roundtrip, best_gap,
                                "no UAV/cloudlet pairing completes the tour within its battery budget"});
      }
    }
  }
  return m;
}

double unit_response_ms(const AllocationModel& model, const Variable& var, int workload, int fleet_capacity) {
  if (!var.load_dependent) return var.min_response_ms;
  long long share = 0;
  if (fleet_capacity > 0) {
    share = (static_cast<long long>(var.capacity) * workload + fleet_capacity - 1) / fleet_capacity;
  }
  long long per_device = (share + var.compute_devices - 1) / var.compute_devices;
  per_device = std::max<long long>(per_device, perf::kMinBenchmarkUsers);
  if (per_device > perf::kMaxBenchmarkUsers) return kInf;
  const LoadCurve* curve = model.catalog.calibration.load_curve(var.load_device);
  return perf::response_time_at_load(*curve, static_cast<int>(per_device));
}

Evaluation evaluate(const AllocationModel& model, const Selection& x) {
  Evaluation e;
  const auto& vars = model.variables;
  std::vector<int> used(model.fleet_bound.size(), 0);
  for (std::size_t i = 0; i < vars.size(); ++i) {
    const int n = i < x.size() ? x[i] : 0;
    if (n == 0) continue;
    const Variable& v = vars[i];
    if (n < 0 || n > v.upper_bound) e.bounds_ok = false;
    used[v.uav] += n;
    e.alpha_cost += n * v.alpha;
    e.beta_cost += n * v.beta;
    e.payload_gm += n * v.payload_gm;
    e.units += n;
    e.capacity += n * v.capacity;
  }
  e.total_cost = e.alpha_cost + e.beta_cost;
  for (std::size_t u = 0; u < used.size(); ++u) {
    if (used[u] > model.fleet_bound[u]) e.bounds_ok = false;
  }

  const double tau = model.request.response_bound_ms;
  for (const auto& d : model.demands) {
    LegEvaluation le;
    le.location_id = d.location_id;
    le.workload = d.workload;
    le.capacity = e.capacity;
    le.workload_ok = e.capacity >= d.workload;
    if (e.units > 0) {
      double sum = 0.0;
      for (std::size_t i = 0; i < vars.size(); ++i) {
        const int n = i < x.size() ? x[i] : 0;
        if (n > 0) sum += n * unit_response_ms(model, vars[i], d.workload, e.capacity);
      }
      le.mean_response_ms = sum / e.units;
      le.response_ok = within(le.mean_response_ms, tau);
    }
    e.legs.push_back(std::move(le));
  }
  return e;
}

bool preferred(const Evaluation& a, const Selection& sa, const Evaluation& b, const Selection& sb) {
  const double tol = 1e-9 * std::max({1.0, std::abs(a.total_cost), std::abs(b.total_cost)});
  if (a.total_cost < b.total_cost - tol) return true;
  if (a.total_cost > b.total_cost + tol) return false;
  if (a.payload_gm < b.payload_gm - 1e-9) return true;
  if (a.payload_gm > b.payload_gm + 1e-9) return false;
  const std::size_t n = std::max(sa.size(), sb.size());
  for (std::size_t i = 0; i < n; ++i) {
    const int xa = i < sa.size() ? sa[i] : 0;
    const int xb = i < sb.size() ? sb[i] : 0;
    if (xa != xb) return xa > xb;
  }
  return false;
}

Plan make_plan(const AllocationModel& model, const Selection& selection) {
  const Evaluation e = evaluate(model, selection);
  Plan p;
  p.selection = selection;
  p.selection.resize(model.variables.size(), 0);
  p.total_cost = e.total_cost;
  p.alpha_cost = e.alpha_cost;
  p.beta_cost = e.beta_cost;
  p.capacity_total = e.capacity;
  p.units_total = e.units;
  p.payload_total_gm = e.payload_gm;

  std::size_t binding = 0;
  for (std::size_t i = 0; i < model.demands.size(); ++i) {
    if (model.demands[i].workload > model.demands[binding].workload) binding = i;
  }
  const int binding_workload = model.demands.empty() ? 0 : model.demands[binding].workload;
  p.mean_response_ms = e.legs.empty() ? 0.0 : e.legs[binding].mean_response_ms;

  std::vector<std::string> leg_ids;
  for (const auto& leg : model.request.legs) leg_ids.push_back(leg.location_id);

  std::vector<int> used(model.fleet_bound.size(), 0);
  for (std::size_t i = 0; i < model.variables.size(); ++i) {
    const int n = p.selection[i];
    if (n == 0) continue;
    const Variable& v = model.variables[i];
    used[v.uav] += n;
    Assignment a;
    a.uav_id = model.catalog.uavs[v.uav].id;
    a.cloudlet_id = model.catalog.cloudlets[v.cloudlet].id;
    a.modality = model.catalog.uavs[v.uav].modality;
    a.units = n;
    a.legs = leg_ids;
    a.unit_cost = v.unit_cost;
    a.unit_capacity = v.capacity;
    a.payload_gm = v.payload_gm;
    a.round_trip_s = v.round_trip_s;
    a.endurance_budget_s = v.endurance_budget_s;
    a.response_ms = unit_response_ms(model, v, binding_workload, e.capacity);
    p.assignments.push_back(std::move(a));
  }

  for (const auto& le : e.legs) {
    p.slack.push_back({ConstraintId::workload, le.location_id, static_cast<double>(le.capacity - le.workload)});
    p.slack.push_back({ConstraintId::response, le.location_id,
                       e.units > 0 ? model.request.response_bound_ms - le.mean_response_ms
                                   : model.request.response_bound_ms});
  }
  for (std::size_t u = 0; u < used.size(); ++u) {
    p.slack.push_back({ConstraintId::fleet, model.catalog.uavs[u].id, static_cast<double>(model.fleet_bound[u] - used[u])});
  }
  for (const auto& a : p.assignments) {
    p.slack.push_back({ConstraintId::roundtrip, a.uav_id + "/" + a.cloudlet_id, a.endurance_budget_s - a.round_trip_s});
  }
  return p;
}

Infeasibility diagnose(const AllocationModel& model) {
  Infeasibility inf;
  if (!model.structural.empty()) {
    inf.violated = model.structural;
    return inf;
  }
  const int need = model.max_workload();

  int max_capacity = 0;
  int best_unit = 0;
  for (std::size_t u = 0; u < model.fleet_bound.size(); ++u) {
    int best = 0;
    for (const auto& v : model.variables) {
      if (v.uav == u && v.upper_bound > 0) best = std::max(best, v.capacity);
    }
    max_capacity += best * model.fleet_bound[u];
    best_unit = std::max(best_unit, best);
  }
  if (best_unit == 0) {
    // Every pairing was excluded for a reason other than modality or endurance.
    std::string reason = "no usable UAV/cloudlet pairing";
    for (const auto& v : model.variables) {
      if (!v.excluded_by.empty()) {
        reason += "; e.g. " + v.excluded_by;
        break;
      }
    }
    inf.violated.push_back({ConstraintId::response, 0.0, reason});
    return inf;
  }
  if (max_capacity < need) {
    const int gap = need - max_capacity;
    inf.violated.push_back({ConstraintId::workload, static_cast<double>(gap),
                            "fleet at full bound serves " + std::to_string(max_capacity) + " of " +
                                std::to_string(need) + " users"});
    inf.violated.push_back({ConstraintId::fleet, std::ceil(static_cast<double>(gap) / best_unit),
                            "additional units needed beyond fleet_bound"});
    return inf;
  }

  double fastest = kInf;
  for (const auto& v : model.variables) {
    if (v.upper_bound > 0) fastest = std::min(fastest, v.min_response_ms);
  }
  const double tau = model.request.response_bound_ms;
  if (fastest > tau) {
    inf.violated.push_back({ConstraintId::response, fastest - tau,
                            "fastest eligible cloudlet responds in " + fmt(fastest) + " ms, bound " + fmt(tau) + " ms"});
  } else {
    inf.violated.push_back({ConstraintId::response, 0.0,
                            "no selection meets the workload and the response bound together"});
  }
  return inf;
}

std::vector<std::string> revalidate(const AllocationModel& model, const Plan& plan) {
  std::vector<std::string> problems;
  const Catalog& cat = model.catalog;
  const DeploymentRequest& req = model.request;
  if (plan.certificate != Certificate::optimal) problems.push_back("certificate is not optimal");

  std::map<std::string, int> per_uav;
  int capacity = 0;
  int units = 0;
  double cost = 0.0;
  double outbound = 0.0;
  double dwell = 0.0;
  for (const auto& leg : req.legs) {
    outbound += leg.distance_from_prev_m;
    dwell += leg.dwell_s;
  }
  const double tour_m = outbound + req.return_distance_m.value_or(outbound);
  Selection sel(model.variables.size(), 0);

  for (const auto& a : plan.assignments) {
    const UavSpec* u = cat.find_uav(a.uav_id);
    const CloudletSpec* c = cat.find_cloudlet(a.cloudlet_id);
    if (!u || !c) {
      problems.push_back("unknown ids in assignment " + a.uav_id + "/" + a.cloudlet_id);
      continue;
    }
    if (a.units <= 0) problems.push_back("non-positive unit count for " + a.uav_id + "/" + a.cloudlet_id);
    if (c->payload_weight_gm > u->max_payload_gm) problems.push_back(c->id + " does not fit " + u->id);
    for (const auto& leg : req.legs) {
      if (!leg.allows(u->modality)) problems.push_back(u->id + " not allowed at leg " + leg.location_id);
    }
    const double t = tour_m / u->speed_m_per_s + dwell;
    double budget = (1.0 - cat.calibration.battery_floor) / cat.calibration.interval_fraction *
                    perf::operational_time(*u, std::clamp(c->payload_weight_gm, u->endurance_points.front().payload_gm,
                                                          u->endurance_points.back().payload_gm));
    if (req.roundtrip_budget_s) budget = std::min(budget, *req.roundtrip_budget_s);
    if (!within(t, budget)) problems.push_back(u->id + "/" + c->id + " cannot finish the tour");
    per_uav[u->id] += a.units;
    const int cap = req.capacity_accounting == CapacityAccounting::low ? c->capacity_users.low : c->capacity_users.high;
    capacity += a.units * cap;
    units += a.units;
    cost += a.units * (resolve_alpha(req.cost_overrides, *u) + resolve_beta(req.cost_overrides, *c));

    const std::size_t ui = static_cast<std::size_t>(u - cat.uavs.data());
    const std::size_t ci = static_cast<std::size_t>(c - cat.cloudlets.data());
    sel[ui * cat.cloudlets.size() + ci] += a.units;
  }
  for (const auto& [id, n] : per_uav) {
    if (n > cat.fleet_bound_for(id)) problems.push_back("fleet bound exceeded for " + id);
  }
  for (std::size_t i = 0; i < req.legs.size(); ++i) {
    const int w = req.leg_workload(i);
    if (capacity < w) problems.push_back("workload not covered at leg " + req.legs[i].location_id);
    if (units > 0) {
      double sum = 0.0;
      for (std::size_t vi = 0; vi < sel.size(); ++vi) {
        if (sel[vi] > 0) sum += sel[vi] * unit_response_ms(model, model.variables[vi], w, capacity);
      }
      if (!within(sum / units, req.response_bound_ms)) {
        problems.push_back("mean response exceeds bound at leg " + req.legs[i].location_id);
      }
    } else if (w > 0) {
      problems.push_back("no units deployed for a positive workload");
    }
  }
  if (capacity != plan.capacity_total) problems.push_back("capacity_total mismatch");
  if (units != plan.units_total) problems.push_back("units_total mismatch");
  if (std::abs(cost - plan.total_cost) > 1e-9 * std::max(1.0, std::abs(cost))) problems.push_back("total_cost mismatch");
  return problems;
}

}  // namespace geese::planner
