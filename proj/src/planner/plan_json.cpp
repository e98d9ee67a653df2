#include "geese/errors.hpp"
#include "geese/planner.hpp"

namespace geese::planner {

using nlohmann::json;
using json_util::FieldReader;

namespace {

std::string_view to_string(ResponseMetric m) { return m == ResponseMetric::image ? "image" : "web"; }
std::string_view to_string(ResponseForm f) { return f == ResponseForm::interpreted ? "interpreted" : "literal"; }
std::string_view to_string(CapacityAccounting c) { return c == CapacityAccounting::low ? "low" : "high"; }

template <typename E>
E parse_choice(const FieldReader& r, std::string_view key, E fallback,
               std::initializer_list<std::pair<std::string_view, E>> choices) {
  if (!r.has(key)) return fallback;
  const std::string s = r.text(key);
  std::string expected;
  for (const auto& [name, value] : choices) {
    if (s == name) return value;
    expected += (expected.empty() ? "" : ", ") + std::string(name);
  }
  r.fail(key, "unknown value '" + s + "' (expected " + expected + ")");
}

std::map<std::string, double> number_map(const FieldReader& r, std::string_view key) {
  std::map<std::string, double> out;
  if (!r.has(key)) return out;
  FieldReader m = r.object(key);
  if (!m.node().is_object()) r.fail(key, "expected an object");
  for (const auto& item : m.node().items()) out[item.key()] = m.number(item.key());
  return out;
}

}  // namespace

json to_json(const Plan& plan) {
  json assignments = json::array();
  for (const auto& a : plan.assignments) {
    assignments.push_back({{"uav", a.uav_id},
                           {"cloudlet", a.cloudlet_id},
                           {"modality", std::string(to_string(a.modality))},
                           {"units", a.units},
                           {"legs", a.legs},
                           {"unit_cost", a.unit_cost},
                           {"unit_capacity_users", a.unit_capacity},
                           {"payload_gm", a.payload_gm},
                           {"round_trip_s", a.round_trip_s},
                           {"endurance_budget_s", a.endurance_budget_s},
                           {"response_ms", a.response_ms}});
  }
  json slack = json::array();
  for (const auto& s : plan.slack) {
    slack.push_back({{"constraint", std::string(to_string(s.constraint))}, {"scope", s.scope}, {"residual", s.residual}});
  }
  return {{"schema_version", 1},
          {"certificate", "optimal"},
          {"assignments", assignments},
          {"cost", {{"total", plan.total_cost}, {"alpha", plan.alpha_cost}, {"beta", plan.beta_cost}}},
          {"capacity_total_users", plan.capacity_total},
          {"units_total", plan.units_total},
          {"payload_total_gm", plan.payload_total_gm},
          {"mean_response_ms", plan.mean_response_ms},
          {"slack", slack}};
}

json to_json(const Infeasibility& inf) {
  json violated = json::array();
  for (const auto& v : inf.violated) {
    violated.push_back(
        {{"constraint", std::string(to_string(v.constraint))}, {"shortfall", v.shortfall}, {"detail", v.detail}});
  }
  return {{"schema_version", 1}, {"certificate", "infeasible"}, {"violated", violated}};
}

json to_json(const Outcome& outcome) {
  return std::visit([](const auto& o) { return to_json(o); }, outcome);
}

std::string canonical_document(const json& doc) { return doc.dump(2) + "\n"; }

std::string canonical_document(const Outcome& outcome) { return canonical_document(to_json(outcome)); }

Plan plan_from_json(const json& j) {
  FieldReader r(j, "", nullptr);
  if (!j.is_object()) r.fail_here("plan must be an object");
  const std::string cert = r.text("certificate");
  if (cert != "optimal") r.fail("certificate", "expected an optimal plan, found '" + cert + "'");
  Plan p;
  const auto& arr = r.array("assignments");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    FieldReader ar = r.element("assignments", i);
    Assignment a;
    a.uav_id = ar.text("uav");
    a.cloudlet_id = ar.text("cloudlet");
    a.units = static_cast<int>(ar.integer("units"));
    if (a.units < 1) ar.fail("units", "must be >= 1");
    if (ar.has("modality")) {
      auto m = parse_modality(ar.text("modality"));
      if (!m) ar.fail("modality", "unknown modality");
      a.modality = *m;
    }
    a.unit_cost = ar.number_or("unit_cost", 0.0);
    a.unit_capacity = static_cast<int>(ar.integer_or("unit_capacity_users", 0));
    a.payload_gm = ar.number_or("payload_gm", 0.0);
    a.round_trip_s = ar.number_or("round_trip_s", 0.0);
    a.endurance_budget_s = ar.number_or("endurance_budget_s", 0.0);
    a.response_ms = ar.number_or("response_ms", 0.0);
    if (ar.has("legs")) {
      for (const auto& l : ar.array("legs")) {
        if (!l.is_string()) ar.fail("legs", "expected leg ids");
        a.legs.push_back(l.get<std::string>());
      }
    }
    p.units_total += a.units;
    p.assignments.push_back(std::move(a));
  }
  if (r.has("cost")) {
    FieldReader cr = r.object("cost");
    p.total_cost = cr.number_or("total", 0.0);
    p.alpha_cost = cr.number_or("alpha", 0.0);
    p.beta_cost = cr.number_or("beta", 0.0);
  }
  p.capacity_total = static_cast<int>(r.integer_or("capacity_total_users", 0));
  p.payload_total_gm = r.number_or("payload_total_gm", 0.0);
  p.mean_response_ms = r.number_or("mean_response_ms", 0.0);
  return p;
}

json to_json(const DeploymentRequest& r) {
  json legs = json::array();
  for (const auto& leg : r.legs) {
    json mods = json::array();
    for (auto m : leg.allowed_modalities) mods.push_back(std::string(geese::to_string(m)));
    json l = {{"location_id", leg.location_id},
              {"allowed_modalities", mods},
              {"dwell_s", leg.dwell_s},
              {"distance_from_prev_m", leg.distance_from_prev_m}};
    if (leg.workload_users) l["workload_users"] = *leg.workload_users;
    legs.push_back(std::move(l));
  }
  json j = {{"workload_users", r.workload_users},
            {"response_bound_ms", r.response_bound_ms},
            {"legs", legs},
            {"metric", std::string(to_string(r.metric))},
            {"response_form", std::string(to_string(r.response_form))},
            {"capacity_accounting", std::string(to_string(r.capacity_accounting))},
            {"cost_overrides", {{"alpha", r.cost_overrides.alpha}, {"beta", r.cost_overrides.beta}}}};
  if (r.roundtrip_budget_s) j["roundtrip_budget_s"] = *r.roundtrip_budget_s;
  if (r.return_distance_m) j["return_distance_m"] = *r.return_distance_m;
  return j;
}

DeploymentRequest request_from_json(const json& j, const std::string& path, const json_util::LineIndex* index) {
  FieldReader r(j, path, index);
  if (!j.is_object()) r.fail_here("request must be an object");
  DeploymentRequest req;
  req.workload_users = static_cast<int>(r.integer("workload_users"));
  req.response_bound_ms = r.number("response_bound_ms");
  const auto& legs = r.array("legs");
  for (std::size_t i = 0; i < legs.size(); ++i) {
    FieldReader lr = r.element("legs", i);
    if (!lr.node().is_object()) lr.fail_here("leg must be an object");
    Leg leg;
    leg.location_id = lr.text("location_id");
    const auto& mods = lr.array("allowed_modalities");
    for (std::size_t k = 0; k < mods.size(); ++k) {
      auto m = mods[k].is_string() ? parse_modality(mods[k].get<std::string>()) : std::nullopt;
      if (!m) lr.fail("allowed_modalities", "entry " + std::to_string(k) + " is not aerial, ground or underwater");
      leg.allowed_modalities.push_back(*m);
    }
    leg.dwell_s = lr.number_or("dwell_s", 0.0);
    leg.distance_from_prev_m = lr.number_or("distance_from_prev_m", 0.0);
    if (lr.has("workload_users")) leg.workload_users = static_cast<int>(lr.integer("workload_users"));
    req.legs.push_back(std::move(leg));
  }
  req.metric = parse_choice(r, "metric", ResponseMetric::image,
                            {{"image", ResponseMetric::image}, {"web", ResponseMetric::web}});
  req.response_form = parse_choice(r, "response_form", ResponseForm::interpreted,
                                   {{"interpreted", ResponseForm::interpreted}, {"literal", ResponseForm::literal}});
  req.capacity_accounting = parse_choice(r, "capacity_accounting", CapacityAccounting::low,
                                         {{"low", CapacityAccounting::low}, {"high", CapacityAccounting::high}});
  if (r.has("cost_overrides")) {
    FieldReader co = r.object("cost_overrides");
    if (!co.node().is_object()) r.fail("cost_overrides", "expected an object");
    req.cost_overrides.alpha = number_map(co, "alpha");
    req.cost_overrides.beta = number_map(co, "beta");
  }
  req.roundtrip_budget_s = r.optional_number("roundtrip_budget_s");
  req.return_distance_m = r.optional_number("return_distance_m");
  return req;
}

}  // namespace geese::planner
