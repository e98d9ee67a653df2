#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "geese/catalog.hpp"
#include "geese/json_util.hpp"

// Edge delivery model: choose how many (UAV, cloudlet) units to send so
// that the fleet covers the requested workload at every leg, keeps the
// mean response time under the bound, and every unit can finish its tour
// on the usable part of its battery, at minimum transport cost.
namespace geese::planner {

// Which per-request latency a unit contributes to the response constraint.
enum class ResponseMetric {
  image,  // per-image latency from the batch benchmark (batch / 10)
  web,    // per-request latency from the device load curve
};

// How the response constraint treats load.
enum class ResponseForm {
  interpreted,  // latency at each unit's proportional share of users
  literal,      // load-independent constant per unit
};

enum class CapacityAccounting { low, high };

struct Leg {
  std::string location_id;
  std::vector<Modality> allowed_modalities;
  double dwell_s = 0.0;
  double distance_from_prev_m = 0.0;
  std::optional<int> workload_users;  // defaults to the request workload

  bool allows(Modality m) const;
  bool operator==(const Leg&) const = default;
};

// Keys: alpha by UAV id or modality name, beta by cloudlet id or
// "category-N". A UAV/cloudlet id takes precedence over its class.
struct CostOverrides {
  std::map<std::string, double> alpha;
  std::map<std::string, double> beta;
  bool operator==(const CostOverrides&) const = default;
};

struct DeploymentRequest {
  int workload_users = 0;
  double response_bound_ms = 0.0;
  std::vector<Leg> legs;
  CostOverrides cost_overrides;
  ResponseMetric metric = ResponseMetric::image;
  ResponseForm response_form = ResponseForm::interpreted;
  CapacityAccounting capacity_accounting = CapacityAccounting::low;
  std::optional<double> roundtrip_budget_s;
  // Distance from the last leg back to the source; defaults to retracing
  // the outbound path.
  std::optional<double> return_distance_m;

  int leg_workload(std::size_t leg) const;
  bool operator==(const DeploymentRequest&) const = default;
};

std::vector<std::string> validate_request(const DeploymentRequest& request);

enum class ConstraintId { workload, response, roundtrip, modality, fleet };
std::string_view to_string(ConstraintId c);

struct Violation {
  ConstraintId constraint = ConstraintId::workload;
  double shortfall = 0.0;
  std::string detail;
  bool operator==(const Violation&) const = default;
};

struct Infeasibility {
  std::vector<Violation> violated;
  bool has(ConstraintId c) const;
  bool operator==(const Infeasibility&) const = default;
};

// One integer decision variable: units of this UAV carrying this cloudlet
// over the whole tour.
struct Variable {
  std::size_t uav = 0;       // catalog index
  std::size_t cloudlet = 0;  // catalog index
  int upper_bound = 0;       // 0 when the pairing is excluded
  std::string excluded_by;
  double alpha = 0.0;
  double beta = 0.0;
  double unit_cost = 0.0;
  int capacity = 0;
  double payload_gm = 0.0;
  double round_trip_s = 0.0;
  double endurance_budget_s = 0.0;
  // Exact latency for load-independent metrics; a lower bound otherwise.
  double min_response_ms = 0.0;
  bool load_dependent = false;
  std::string load_device;  // web metric only
  int compute_devices = 1;
};

struct LegDemand {
  std::string location_id;
  int workload = 0;
};

struct AllocationModel {
  Catalog catalog;
  DeploymentRequest request;
  std::vector<Variable> variables;  // UAV-major, catalog order
  std::vector<int> fleet_bound;     // per catalog UAV
  std::vector<LegDemand> demands;
  std::vector<Violation> structural;  // pairings ruled out before search

  int max_workload() const;
  std::size_t active_variables() const;
};

using Selection = std::vector<int>;  // unit count per variable

struct LegEvaluation {
  std::string location_id;
  int workload = 0;
  int capacity = 0;
  double mean_response_ms = 0.0;
  bool workload_ok = true;
  bool response_ok = true;
};

struct Evaluation {
  double total_cost = 0.0;
  double alpha_cost = 0.0;
  double beta_cost = 0.0;
  double payload_gm = 0.0;
  int units = 0;
  int capacity = 0;
  bool bounds_ok = true;
  std::vector<LegEvaluation> legs;

  bool feasible() const;
};

// Constraint check and objective for a full selection.
Evaluation evaluate(const AllocationModel& model, const Selection& selection);

// Response latency of one unit of `var` when the fleet serving `workload`
// users has `fleet_capacity` in total.
double unit_response_ms(const AllocationModel& model, const Variable& var, int workload, int fleet_capacity);

// Strict "a is preferred over b": lower cost, then lower total payload,
// then more units on earlier catalog entries.
bool preferred(const Evaluation& a, const Selection& sa, const Evaluation& b, const Selection& sb);

struct Assignment {
  std::string uav_id;
  std::string cloudlet_id;
  Modality modality = Modality::ground;
  int units = 0;
  std::vector<std::string> legs;
  double unit_cost = 0.0;
  int unit_capacity = 0;
  double payload_gm = 0.0;
  double round_trip_s = 0.0;
  double endurance_budget_s = 0.0;
  double response_ms = 0.0;
};

struct Slack {
  ConstraintId constraint = ConstraintId::workload;
  std::string scope;
  double residual = 0.0;
};

enum class Certificate { optimal, infeasible };

struct Plan {
  std::vector<Assignment> assignments;
  double total_cost = 0.0;
  double alpha_cost = 0.0;
  double beta_cost = 0.0;
  int capacity_total = 0;
  int units_total = 0;
  double payload_total_gm = 0.0;
  double mean_response_ms = 0.0;
  std::vector<Slack> slack;
  Certificate certificate = Certificate::optimal;
  Selection selection;

  int units_of(Modality m) const;
};

using Outcome = std::variant<Plan, Infeasibility>;

inline bool is_optimal(const Outcome& o) { return std::holds_alternative<Plan>(o); }

AllocationModel build_model(const DeploymentRequest& request, const Catalog& catalog);

// Exact branch-and-bound over the bounded integer space.
Outcome solve(const AllocationModel& model);

inline constexpr double kOracleLimit = 1e7;

// Number of candidate vectors the oracle would scan.
double oracle_search_space(const AllocationModel& model);

// Exhaustive scan; throws SearchSpaceTooLarge above `limit` candidates.
Outcome oracle_enumerate(const AllocationModel& model, double limit = kOracleLimit);

// One fleet visits every leg in order and returns to the source.
Outcome plan_multi_leg(const DeploymentRequest& request, const Catalog& catalog);

Plan make_plan(const AllocationModel& model, const Selection& selection);
Infeasibility diagnose(const AllocationModel& model);

// Problems found when re-checking a plan against the model from scratch;
// empty for a sound plan.
std::vector<std::string> revalidate(const AllocationModel& model, const Plan& plan);

// Canonical documents (sorted keys, two-space indent, trailing newline).
nlohmann::json to_json(const Plan& plan);
nlohmann::json to_json(const Infeasibility& inf);
nlohmann::json to_json(const Outcome& outcome);
std::string canonical_document(const Outcome& outcome);
std::string canonical_document(const nlohmann::json& doc);

// Reads a plan document back. Only ids and unit counts are trusted by
// consumers; the remaining fields are informational.
Plan plan_from_json(const nlohmann::json& j);

nlohmann::json to_json(const DeploymentRequest& request);
DeploymentRequest request_from_json(const nlohmann::json& j, const std::string& path = "",
                                    const json_util::LineIndex* index = nullptr);

}  // namespace geese::planner
