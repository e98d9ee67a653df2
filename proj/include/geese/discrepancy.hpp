#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "geese/planner.hpp"

// Compares a reference selection (for example one reported from a field
// trial) with the planner's optimum, and searches a grid of cost and fleet
// settings for one under which the reference becomes the optimum.
namespace geese::planner {

struct UnitGroup {
  std::string uav_id;
  std::string cloudlet_id;
  int units = 0;
  bool operator==(const UnitGroup&) const = default;
};

using ReferenceSelection = std::vector<UnitGroup>;

enum class BetaScheme {
  category,  // beta = weight class (catalog default)
  latency,   // beta = per-image latency in seconds
  uniform,   // beta = 1
};
std::string_view to_string(BetaScheme s);

struct SweepAxes {
  std::vector<double> ground_alpha{0.5, 1.0, 2.0};
  std::vector<BetaScheme> beta{BetaScheme::category, BetaScheme::latency, BetaScheme::uniform};
  std::vector<int> ground_fleet_bound{3, 4, 5};
  std::vector<CapacityAccounting> capacity{CapacityAccounting::low, CapacityAccounting::high};
};

struct SweepPoint {
  std::string label;
  double ground_alpha = 1.0;
  BetaScheme beta = BetaScheme::category;
  int ground_fleet_bound = 3;
  CapacityAccounting capacity = CapacityAccounting::low;
  bool feasible = false;
  double optimal_cost = 0.0;
  ReferenceSelection optimum;
  bool reference_feasible = false;
  double reference_cost = 0.0;
  bool reference_is_optimum = false;
  bool reference_cost_equal = false;
};

struct DiscrepancyReport {
  ReferenceSelection reference;
  Outcome default_outcome;
  std::string oracle_certificate;  // "cost-equal", "mismatch" or "not-run: ..."
  bool reference_feasible = false;
  std::vector<std::string> reference_problems;
  double reference_cost = 0.0;
  std::vector<SweepPoint> sweep;
  std::vector<std::string> matching_points;
};

ReferenceSelection groups_of(const Plan& plan);

// The reference as a selection vector over `model`; ConsistencyError for
// ids the catalog does not know.
Selection selection_of(const AllocationModel& model, const ReferenceSelection& reference);

DiscrepancyReport compare_with_reference(const DeploymentRequest& request, const Catalog& catalog,
                                         const ReferenceSelection& reference, const SweepAxes& axes = {});

nlohmann::json to_json(const DiscrepancyReport& report);

}  // namespace geese::planner
