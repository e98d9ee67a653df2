#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace geese {

enum class Regime { surface, encased_dry, depth1, depth2 };
enum class Role { master, workers };

std::string_view to_string(Regime r);
std::string_view to_string(Role r);
std::optional<Regime> parse_regime(std::string_view s);
std::optional<Role> parse_role(std::string_view s);

// Order along which link quality may only degrade.
inline int depth_rank(Regime r) {
  switch (r) {
    case Regime::surface:
    case Regime::encased_dry: return 0;
    case Regime::depth1: return 1;
    case Regime::depth2: return 2;
  }
  return 0;
}

struct LoadAnchor {
  int users = 0;
  double response_ms = 0.0;
  bool operator==(const LoadAnchor&) const = default;
};

// Response time and battery life of one device under concurrent load.
struct LoadCurve {
  std::string device_id;
  std::vector<LoadAnchor> anchors;
  double battery_hours_at_100_users = 0.0;
  bool operator==(const LoadCurve&) const = default;
};

// Per-job link quality for one submersion regime as seen from one side
// of the master/worker topology.
struct LinkModel {
  Regime regime = Regime::surface;
  Role role = Role::workers;
  double per_job_success_p = 1.0;
  double latency_multiplier = 1.0;
  bool operator==(const LinkModel&) const = default;
};

struct Calibration {
  std::vector<LoadCurve> load_curves;
  std::vector<LinkModel> links;
  double idle_cap_hours = 48.0;
  // Endurance multiplier for an underwater container without ballast.
  double unballasted_factor = 0.3;
  // Battery fraction below which a mission must not continue.
  double battery_floor = 0.5;
  // Battery fraction drained per endurance-curve interval.
  double interval_fraction = 0.1;

  const LoadCurve* load_curve(std::string_view device_id) const;
  const LinkModel* link(Regime regime, Role role) const;

  bool operator==(const Calibration&) const = default;
};

}  // namespace geese
