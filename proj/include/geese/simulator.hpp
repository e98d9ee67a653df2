#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "geese/catalog.hpp"
#include "geese/planner.hpp"

namespace geese::sim {

// Cat-4 type-2 takes 8 s per 10 images on three phones: 2.4 s per image
// on one device.
inline constexpr double kDefaultJobWorkMs = 2400.0;
inline constexpr int kDefaultJobs = 50;

struct CollabConfig {
  int n_workers = 3;
  int n_jobs = kDefaultJobs;
  double per_job_work_ms = kDefaultJobWorkMs;
  LinkModel master_link;               // defaults to a surface link
  std::vector<LinkModel> worker_links;  // one per worker; missing entries are surface links
  std::uint64_t seed = 0;
  // Not calibrated: the measured completion rates assume no retransmission.
  int retry_budget = 0;
};

std::vector<std::string> validate(const CollabConfig& config);

// Submerges the master or every worker in `regime`; the other side stays
// at the surface.
CollabConfig collab_config(const Calibration& calibration, Regime regime, Role submerged, int workers, int jobs,
                           std::uint64_t seed);

enum class JobOutcome { completed, lost };
std::string_view to_string(JobOutcome o);

struct JobTrace {
  int job_id = 0;
  int assigned_worker = 0;  // 1-based
  std::int64_t dispatched_at_us = 0;
  JobOutcome outcome = JobOutcome::completed;
  std::optional<std::int64_t> completed_at_us;
  int attempts = 1;

  bool operator==(const JobTrace&) const = default;
};

struct ResponseSummary {
  std::size_t count = 0;
  double mean_ms = 0.0;
  double p50_ms = 0.0;
  double p95_ms = 0.0;
  bool operator==(const ResponseSummary&) const = default;
};

ResponseSummary summarize(std::vector<double> samples_ms);

struct BatteryPoint {
  double t_s = 0.0;
  double remaining = 1.0;
  std::string phase;
  bool operator==(const BatteryPoint&) const = default;
};

struct UnitMission {
  std::string uav_id;
  std::string cloudlet_id;
  int unit = 1;
  double payload_gm = 0.0;
  double interval_seconds = 0.0;  // operational seconds per battery interval
  std::vector<BatteryPoint> timeline;
  bool aborted = false;
  std::optional<double> abort_at_s;
  double final_remaining = 1.0;
  bool operator==(const UnitMission&) const = default;
};

struct SimReport {
  std::string kind;  // "collab" or "delivery"
  std::size_t n_jobs = 0;
  std::size_t completed = 0;
  double success_rate = 1.0;
  ResponseSummary response;
  std::vector<JobTrace> traces;
  std::vector<UnitMission> missions;
  std::vector<std::string> disagreements;

  bool operator==(const SimReport&) const = default;
};

SimReport simulate_collaborative(const CollabConfig& config);

struct MonteCarloReport {
  int repetitions = 0;
  double mean_success = 0.0;
  double sd_success = 0.0;
  double half_width = 0.0;  // 95% normal approximation
  double mean_response_ms = 0.0;
  std::vector<double> rep_success;
  SimReport first;  // the first repetition in full
};

// Repetition r runs with seed splitmix64(config.seed + r).
MonteCarloReport run_monte_carlo(const CollabConfig& config, int repetitions);

struct DeliveryOptions {
  // Underwater container flooded without ballast: endurance drops to the
  // calibrated unballasted fraction.
  bool unballasted = false;
};

// One unit flying the request's tour. Payloads below the measured range
// (an empty container) are evaluated at its lower end.
UnitMission simulate_unit_mission(const UavSpec& uav, double payload_gm, const planner::DeploymentRequest& request,
                                  const Calibration& calibration, const DeliveryOptions& options = {});

SimReport simulate_delivery(const planner::Plan& plan, const planner::DeploymentRequest& request,
                            const Catalog& catalog, const DeliveryOptions& options = {});

nlohmann::json to_json(const SimReport& report);
nlohmann::json to_json(const MonteCarloReport& report);
nlohmann::json to_json(const CollabConfig& config);
CollabConfig collab_config_from_json(const nlohmann::json& j, const Calibration& calibration);

// One row per job trace (collab) or per battery point (delivery).
std::string to_csv(const SimReport& report);

}  // namespace geese::sim
