#include <chrono>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include "geese/errors.hpp"
#include "geese/interface.hpp"

namespace geese::iface {

using nlohmann::json;
using json_util::FieldReader;

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

planner::ReferenceSelection reference_from_json(const FieldReader& r) {
  planner::ReferenceSelection out;
  const auto& arr = r.array("reference_selection");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    FieldReader g = r.element("reference_selection", i);
    out.push_back({g.text("uav"), g.text("cloudlet"), static_cast<int>(g.integer("units"))});
  }
  return out;
}

}  // namespace

Scenario load_scenario(std::string_view text, const std::filesystem::path& base_dir,
                       const std::optional<Catalog>& catalog_override) {
  const json doc = json_util::parse(text, "scenario");
  const json_util::LineIndex index(text);
  FieldReader r(doc, "", &index);
  if (!doc.is_object()) r.fail_here("scenario must be an object");

  Scenario s;
  s.schema_version = static_cast<int>(r.integer("schema_version"));
  if (s.schema_version != kScenarioSchemaVersion) {
    r.fail("schema_version", "unsupported scenario schema_version " + std::to_string(s.schema_version));
  }
  if (!r.has("request")) r.fail("request", "missing required field");
  s.request = planner::request_from_json(doc.at("request"), "/request", &index);

  if (catalog_override) {
    s.catalog = *catalog_override;
  } else if (r.has("catalog_ref")) {
    const json& ref = doc.at("catalog_ref");
    if (ref.is_string()) {
      std::filesystem::path p = ref.get<std::string>();
      if (p.is_relative()) p = base_dir / p;
      s.catalog = load_catalog_file(p);
    } else if (ref.is_object()) {
      s.catalog = catalog_from_json(ref, {});
    } else {
      r.fail("catalog_ref", "expected a file path or an inline catalog object");
    }
  } else {
    s.catalog = default_catalog();
  }

  if (r.has("calibration")) {
    s.catalog.calibration =
        calibration_from_json_at(doc.at("calibration"), s.catalog.calibration, "/calibration", &index);
    if (auto f = validate_catalog(s.catalog); !f.empty()) throw ValidationError(std::move(f));
  }
  if (r.has("seed")) {
    const json& seed = doc.at("seed");
    if (!seed.is_number_integer() || (seed.is_number_integer() && !seed.is_number_unsigned() && seed.get<long long>() < 0)) {
      r.fail("seed", "expected a non-negative integer");
    }
    s.seed = seed.get<std::uint64_t>();
  }
  if (r.has("reference_selection")) s.reference = reference_from_json(r);
  if (r.has("collab")) s.collab = doc.at("collab");
  return s;
}

Scenario load_scenario_file(const std::filesystem::path& path, const std::optional<Catalog>& catalog_override) {
  return load_scenario(read_file(path), path.parent_path(), catalog_override);
}

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) throw Error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 0xf];
  }
  return out;
}

json plan_inputs(const planner::DeploymentRequest& request, const Catalog& catalog) {
  return {{"request", planner::to_json(request)}, {"catalog", to_json(catalog)}};
}

std::string input_digest(const json& inputs) { return sha256_hex(inputs.dump()); }

std::string input_digest(const planner::DeploymentRequest& request, const Catalog& catalog) {
  return input_digest(plan_inputs(request, catalog));
}

std::string plan_document(const planner::Outcome& outcome, const planner::AllocationModel& model, bool verify) {
  json doc = planner::to_json(outcome);
  if (verify) {
    json v;
    try {
      const planner::Outcome oracle = planner::oracle_enumerate(model);
      const auto* a = std::get_if<planner::Plan>(&outcome);
      const auto* b = std::get_if<planner::Plan>(&oracle);
      bool same;
      if (a && b) {
        same = std::abs(a->total_cost - b->total_cost) <= 1e-9 * std::max(1.0, std::abs(a->total_cost)) &&
               a->selection == b->selection;
        v["oracle_cost"] = b->total_cost;
      } else {
        same = !a && !b;
      }
      v["oracle"] = !same ? "mismatch" : (a ? "cost-equal" : "both-infeasible");
    } catch (const SearchSpaceTooLarge& e) {
      v["oracle"] = "not-run";
      v["reason"] = e.what();
    }
    if (const auto* p = std::get_if<planner::Plan>(&outcome)) v["revalidation"] = planner::revalidate(model, *p);
    doc["verification"] = v;
  }
  return planner::canonical_document(doc);
}

std::filesystem::path default_state_dir() {
  if (const char* env = std::getenv("GEESE_STATE_DIR"); env && *env) return env;
  return "geese-state";
}

}  // namespace geese::iface
