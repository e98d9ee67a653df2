#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "geese/calibration.hpp"
#include "geese/json_util.hpp"

namespace geese {

enum class Modality { aerial, ground, underwater };

std::string_view to_string(Modality m);
std::optional<Modality> parse_modality(std::string_view s);

struct DeviceSpec {
  std::string id;
  std::string name;
  std::string cpu_desc;
  std::string gpu_desc;
  double ram_gb = 0.0;
  double unit_weight_gm = 0.0;

  // Battery packs and other passive parts carry no CPU description.
  bool is_compute() const { return !cpu_desc.empty(); }

  bool operator==(const DeviceSpec&) const = default;
};

struct DeviceCount {
  std::string device_id;
  int count = 0;
  bool operator==(const DeviceCount&) const = default;
};

struct CapacityRange {
  int low = 0;
  int high = 0;
  bool operator==(const CapacityRange&) const = default;
};

struct CloudletSpec {
  std::string id;
  int category = 0;  // weight class, 100 gm per step
  int type_index = 0;
  std::string label;
  std::vector<DeviceCount> devices;
  // Class weight used for planning; the printed component sum is kept separately.
  double payload_weight_gm = 0.0;
  double component_weight_gm = 0.0;
  double batch_latency_s = 0.0;  // time to process 10 images of 224x224
  CapacityRange capacity_users;
  double cost_beta = 0.0;

  double class_weight_gm() const { return category * 100.0; }
  // Per-request latency for image workloads.
  double per_image_latency_ms() const { return batch_latency_s * 100.0; }

  bool operator==(const CloudletSpec&) const = default;
};

struct EndurancePoint {
  double payload_gm = 0.0;
  double seconds = 0.0;  // operational time per battery interval
  bool operator==(const EndurancePoint&) const = default;
};

struct UavSpec {
  std::string id;
  Modality modality = Modality::aerial;
  std::string model_name;
  double max_payload_gm = 0.0;
  std::vector<EndurancePoint> endurance_points;
  double speed_m_per_s = 0.0;
  double cost_alpha = 0.0;
  double container_tare_gm = 0.0;
  double ballast_gm = 0.0;

  bool operator==(const UavSpec&) const = default;
};

// Immutable after load; share by const reference.
struct Catalog {
  int schema_version = 1;
  std::vector<DeviceSpec> devices;
  std::vector<CloudletSpec> cloudlets;
  std::vector<UavSpec> uavs;
  std::map<std::string, int> fleet_bound;
  Calibration calibration;

  const DeviceSpec* find_device(std::string_view id) const;
  const CloudletSpec* find_cloudlet(std::string_view id) const;
  const UavSpec* find_uav(std::string_view id) const;
  int fleet_bound_for(std::string_view uav_id) const;

  // Sum of member device weights.
  double device_weight_gm(const CloudletSpec& c) const;
  int compute_device_count(const CloudletSpec& c) const;

  bool operator==(const Catalog&) const = default;
};

inline constexpr int kCatalogSchemaVersion = 1;
inline constexpr int kDefaultFleetBound = 3;

// Parses and validates a catalog document. Throws ParseError on schema
// violations (with field and line) and ValidationError listing every
// invariant that fails.
Catalog load_catalog(std::string_view document);
Catalog load_catalog_file(const std::filesystem::path& path);

// Builds a catalog from an already-parsed document. `source` is used only
// to resolve line numbers for diagnostics and may be empty.
Catalog catalog_from_json(const nlohmann::json& doc, std::string_view source = {});

nlohmann::json to_json(const Catalog& catalog);
std::string serialize_catalog(const Catalog& catalog);

// Every invariant failure, empty when the catalog is valid.
std::vector<std::string> validate_catalog(const Catalog& catalog);

std::string_view default_catalog_document();
const Catalog& default_catalog();

// Calibration block handling, shared with scenario overrides.
Calibration calibration_from_json(const nlohmann::json& j, const Calibration& base, std::string_view source = {});
Calibration calibration_from_json_at(const nlohmann::json& j, const Calibration& base, const std::string& path,
                                     const json_util::LineIndex* index);
nlohmann::json to_json(const Calibration& c);

// Payload the UAV's endurance curve must be evaluated at. The curves were
// measured with the container (and, underwater, the neutralizing ballast)
// already fitted, so this is the cloudlet's class weight for every modality.
double effective_payload(const CloudletSpec& cloudlet, const UavSpec& uav);

// Planning capacity w_j: the low end of the measured concurrent-user range.
int cloudlet_capacity(const CloudletSpec& cloudlet);

}  // namespace geese
