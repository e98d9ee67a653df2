#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include <json.hpp>

#include "geese/catalog.hpp"
#include "geese/discrepancy.hpp"
#include "geese/planner.hpp"
#include "geese/simulator.hpp"

namespace geese::iface {

inline constexpr const char* kToolkitVersion = "0.1.0";
inline constexpr int kScenarioSchemaVersion = 1;

struct Scenario {
  int schema_version = kScenarioSchemaVersion;
  planner::DeploymentRequest request;
  Catalog catalog;
  std::uint64_t seed = 0;
  std::optional<planner::ReferenceSelection> reference;
  std::optional<nlohmann::json> collab;  // optional collaborative-run config
};

// `catalog_override` replaces the scenario's catalog_ref when set.
// Relative catalog paths resolve against the scenario's directory.
Scenario load_scenario_file(const std::filesystem::path& path, const std::optional<Catalog>& catalog_override = {});
Scenario load_scenario(std::string_view text, const std::filesystem::path& base_dir,
                       const std::optional<Catalog>& catalog_override = {});

std::string sha256_hex(std::string_view data);

// Content hash of the planning inputs, stable across re-serialization.
std::string input_digest(const planner::DeploymentRequest& request, const Catalog& catalog);
std::string input_digest(const nlohmann::json& inputs);
nlohmann::json plan_inputs(const planner::DeploymentRequest& request, const Catalog& catalog);

// Plan document as printed by the CLI and served over HTTP. With `verify`
// the oracle result is attached under "verification".
std::string plan_document(const planner::Outcome& outcome, const planner::AllocationModel& model, bool verify);

// Newline-delimited, append-only run records under a state directory.
class RunLog {
 public:
  explicit RunLog(std::filesystem::path dir);

  std::int64_t append(const std::string& kind, const nlohmann::json& inputs, const nlohmann::json& result);
  std::optional<nlohmann::json> get(std::int64_t run_id) const;
  nlohmann::json list() const;
  const std::filesystem::path& file() const { return file_; }

 private:
  std::filesystem::path file_;
  mutable std::mutex mu_;
  std::int64_t last_id_ = 0;
};

std::filesystem::path default_state_dir();

class Service {
 public:
  Service(Catalog catalog, std::filesystem::path state_dir);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Binds and returns the port (0 picks a free one); throws on failure.
  int bind(const std::string& host, int port);
  void run();  // blocks until stop()
  void stop();
  bool running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace geese::iface
