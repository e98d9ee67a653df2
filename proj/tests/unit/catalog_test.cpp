#include <doctest.h>

#include <algorithm>

#include "geese/catalog.hpp"
#include "geese/errors.hpp"

using namespace geese;

namespace {

// Table 1, transcribed independently of data/default_catalog.json.
struct Row {
  const char* id;
  double batch_s;
  int low;
  int high;
};
constexpr Row kTable1[] = {
    {"cat1-type1", 50.0, 36, 40},    {"cat2-type1", 37.5, 150, 170}, {"cat2-type2", 4.46, 210, 230},
    {"cat2-type3", 58.0, 280, 300},  {"cat3-type1", 19.0, 300, 320}, {"cat3-type2", 7.4, 360, 380},
    {"cat3-type3", 29.0, 580, 600},  {"cat4-type1", 2.21, 420, 440}, {"cat4-type2", 8.0, 400, 420},
    {"cat4-type3", 19.3, 880, 900},
};

bool mentions(const ValidationError& e, const std::string& needle) {
  return std::any_of(e.failures().begin(), e.failures().end(),
                     [&](const std::string& f) { return f.find(needle) != std::string::npos; });
}

}  // namespace

TEST_CASE("default catalog has exactly the Table 1 rows") {
  const Catalog& c = default_catalog();
  REQUIRE(c.cloudlets.size() == std::size(kTable1));
  for (const auto& row : kTable1) {
    CAPTURE(row.id);
    const CloudletSpec* s = c.find_cloudlet(row.id);
    REQUIRE(s != nullptr);
    CHECK(s->batch_latency_s == row.batch_s);
    CHECK(s->capacity_users.low == row.low);
    CHECK(s->capacity_users.high == row.high);
  }
}

TEST_CASE("category-2 type-1 is LG g4 plus a smart watch at 197 gm") {
  const CloudletSpec* s = default_catalog().find_cloudlet("cat2-type1");
  REQUIRE(s);
  CHECK(s->component_weight_gm == 197.0);
  CHECK(s->batch_latency_s == 37.5);
  CHECK(s->capacity_users == CapacityRange{150, 170});
  CHECK(default_catalog().device_weight_gm(*s) == 197.0);
  REQUIRE(s->devices.size() == 2);
  CHECK(s->devices[0].device_id == "lg-g4");
  CHECK(s->devices[1].device_id == "watch-active2");
}

TEST_CASE("cat3-type3 keeps its printed component sum and plans with the class weight") {
  const CloudletSpec* s = default_catalog().find_cloudlet("cat3-type3");
  REQUIRE(s);
  CHECK(s->component_weight_gm == 209.0);
  CHECK(s->payload_weight_gm == 300.0);
}

TEST_CASE("four UAVs with the shipped invariants") {
  const Catalog& c = default_catalog();
  REQUIRE(c.uavs.size() == 4);
  const UavSpec* ray = c.find_uav("powerray");
  REQUIRE(ray);
  CHECK(ray->modality == Modality::underwater);
  CHECK(ray->ballast_gm == 830.0);
  for (const auto& u : c.uavs) {
    CAPTURE(u.id);
    CHECK(u.max_payload_gm == 400.0);
    CHECK(u.endurance_points.back().seconds <= u.endurance_points.front().seconds);
    if (u.modality != Modality::underwater) CHECK(u.ballast_gm == 0.0);
    CHECK(c.fleet_bound_for(u.id) == 3);
  }
}

TEST_CASE("default cost weights follow the modality ordering") {
  const Catalog& c = default_catalog();
  CHECK(c.find_uav("romeo-v2")->cost_alpha == 1.0);
  CHECK(c.find_uav("powerray")->cost_alpha == 3.0);
  CHECK(c.find_uav("powereye")->cost_alpha == 10.0);
  CHECK(c.find_uav("phantom3")->cost_alpha == 10.0);
  for (const auto& s : c.cloudlets) CHECK(s.cost_beta == s.category);
}

TEST_CASE("cloudlet_capacity is the low end") {
  const Catalog& c = default_catalog();
  CHECK(cloudlet_capacity(*c.find_cloudlet("cat2-type1")) == 150);
  CHECK(cloudlet_capacity(*c.find_cloudlet("cat4-type3")) == 880);
  CHECK(cloudlet_capacity(*c.find_cloudlet("cat1-type1")) == 36);
}

TEST_CASE("effective_payload") {
  const Catalog& c = default_catalog();
  CloudletSpec three = *c.find_cloudlet("cat3-type1");
  CHECK(effective_payload(three, *c.find_uav("romeo-v2")) == 300.0);
  CHECK(effective_payload(*c.find_cloudlet("cat4-type1"), *c.find_uav("powerray")) == 400.0);
  CloudletSpec heavy = three;
  heavy.payload_weight_gm = 500.0;
  CHECK_THROWS_AS(effective_payload(heavy, *c.find_uav("phantom3")), InfeasiblePairingError);
}

TEST_CASE("serialize then load gives an identical catalog") {
  const Catalog& c = default_catalog();
  const Catalog back = load_catalog(serialize_catalog(c));
  CHECK(back == c);
  CHECK(serialize_catalog(back) == serialize_catalog(c));
}

TEST_CASE("empty document reports missing UAVs") {
  for (const char* doc : {"", "  \n", "{}"}) {
    CAPTURE(doc);
    try {
      load_catalog(doc);
      FAIL("expected a validation error");
    } catch (const ValidationError& e) {
      CHECK(mentions(e, "no UAVs defined"));
    }
  }
}

TEST_CASE("schema violations name the field and line") {
  const std::string doc = R"({
  "schema_version": 1,
  "devices": [],
  "cloudlets": [
    {"id": "x", "category": "two"}
  ],
  "uavs": []
})";
  try {
    load_catalog(doc);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 5);
    CHECK(e.field().find("category") != std::string::npos);
  }
}

TEST_CASE("malformed JSON reports a line") {
  try {
    load_catalog("{\n  \"schema_version\": 1,\n  \"devices\": [,]\n}");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("invariant violations are all listed") {
  nlohmann::json doc = to_json(default_catalog());
  doc["cloudlets"][0]["capacity_users"] = {50, 40};
  doc["cloudlets"][1]["batch_latency_s"] = 0;
  doc["cloudlets"][2]["payload_weight_gm"] = 900;
  doc["uavs"][0]["endurance_points"] = {{400, 100}, {100, 150}};
  doc["devices"].push_back(doc["devices"][0]);
  try {
    catalog_from_json(doc);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(e.failures().size() >= 5);
    CHECK(mentions(e, "cat1-type1"));
    CHECK(mentions(e, "cat2-type1"));
    CHECK(mentions(e, "cat2-type2"));
    CHECK(mentions(e, "powereye"));
    CHECK(mentions(e, "not unique"));
  }
}

TEST_CASE("unresolved device references fail validation") {
  nlohmann::json doc = to_json(default_catalog());
  doc["cloudlets"][0]["devices"][0]["device"] = "nope";
  CHECK_THROWS_AS(catalog_from_json(doc), ValidationError);
}

TEST_CASE("unsupported schema_version is a parse error") {
  nlohmann::json doc = to_json(default_catalog());
  doc["schema_version"] = 2;
  CHECK_THROWS_AS(catalog_from_json(doc), ParseError);
}

TEST_CASE("calibration overrides merge per device and per link") {
  const Catalog& c = default_catalog();
  nlohmann::json over = {{"load_curves", {{{"device", "rpi4b"}, {"anchors", {{20, 310}, {90, 760}}}, {"battery_hours_at_100_users", 4}}}},
                         {"links", {{{"regime", "depth1"}, {"role", "master"}, {"success_p", 0.85}, {"latency_multiplier", 2.0}}}}};
  Calibration merged = calibration_from_json(over, c.calibration);
  CHECK(merged.load_curve("rpi4b")->anchors[0].response_ms == 310.0);
  CHECK(merged.load_curve("galaxy-s5")->anchors[0].response_ms == 371.0);
  CHECK(merged.link(Regime::depth1, Role::master)->per_job_success_p == 0.85);
  CHECK(merged.link(Regime::depth2, Role::master)->per_job_success_p == 0.62);
}
