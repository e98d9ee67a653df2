#include <doctest.h>

#include <httplib.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <thread>

#include "geese/errors.hpp"
#include "geese/interface.hpp"

using namespace geese;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("geese_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }

const char* kUseCaseRequest = R"({
  "workload_users": 1500,
  "response_bound_ms": 2000,
  "legs": [
    {"location_id": "A", "allowed_modalities": ["aerial", "ground", "underwater"], "dwell_s": 3600, "distance_from_prev_m": 500},
    {"location_id": "B", "allowed_modalities": ["aerial", "ground"], "dwell_s": 7200, "distance_from_prev_m": 1000}
  ]
})";

struct RunningService {
  iface::Service service;
  int port;
  std::thread thread;

  RunningService(const fs::path& dir) : service(default_catalog(), dir), port(service.bind("127.0.0.1", 0)) {
    thread = std::thread([this] { service.run(); });
    for (int i = 0; i < 200 && !service.running(); ++i) std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  ~RunningService() {
    service.stop();
    thread.join();
  }
};

}  // namespace

TEST_CASE("SHA-256 of a known vector") {
  CHECK(iface::sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(iface::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("scenario loading resolves catalogs and overrides") {
  const fs::path dir = temp_dir("scenario");
  write(dir / "cat.json", serialize_catalog(default_catalog()));
  write(dir / "s.json", std::string(R"({"schema_version": 1, "catalog_ref": "cat.json", "seed": 5,
    "calibration": {"battery_floor": 0.4}, "request": )") + kUseCaseRequest + "}");
  const iface::Scenario s = iface::load_scenario_file(dir / "s.json");
  CHECK(s.seed == 5);
  CHECK(s.request.workload_users == 1500);
  CHECK(s.catalog.calibration.battery_floor == 0.4);
  CHECK(s.catalog.cloudlets == default_catalog().cloudlets);

  json inline_doc = json::parse(std::string(R"({"schema_version": 1, "request": )") + kUseCaseRequest + "}");
  inline_doc["catalog_ref"] = to_json(default_catalog());
  const iface::Scenario t = iface::load_scenario(inline_doc.dump(), dir);
  CHECK(t.catalog == default_catalog());
  fs::remove_all(dir);
}

TEST_CASE("malformed scenarios name the line and field") {
  const std::string doc = "{\n  \"schema_version\": 1,\n  \"request\": {\n    \"workload_users\": \"many\"\n  }\n}";
  try {
    iface::load_scenario(doc, ".");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 4);
    CHECK(e.field() == "/request/workload_users");
  }
  CHECK_THROWS_AS(iface::load_scenario(R"({"schema_version": 9, "request": {}})", "."), ParseError);
}

TEST_CASE("input digest survives re-serialization") {
  const auto req = planner::request_from_json(json::parse(kUseCaseRequest));
  const json inputs = iface::plan_inputs(req, default_catalog());
  const json reparsed = json::parse(inputs.dump(2));
  CHECK(iface::input_digest(reparsed) == iface::input_digest(req, default_catalog()));
}

TEST_CASE("run log is append-only with monotonic ids") {
  const fs::path dir = temp_dir("runlog");
  {
    iface::RunLog log(dir);
    CHECK(log.append("plan", {{"x", 1}}, {{"y", 2}}) == 1);
    CHECK(log.append("plan", {{"x", 2}}, {{"y", 3}}) == 2);
  }
  iface::RunLog log(dir);
  CHECK(log.append("collab", {{"x", 3}}, {}) == 3);
  CHECK(log.list().size() == 3);
  const auto rec = log.get(2);
  REQUIRE(rec);
  CHECK(rec->at("input_digest") == iface::input_digest(rec->at("inputs")));
  CHECK_FALSE(log.get(9));
  fs::remove_all(dir);
}

TEST_CASE("service round trip") {
  const fs::path dir = temp_dir("service");
  RunningService rs(dir);
  httplib::Client cli("127.0.0.1", rs.port);

  auto cat = cli.Get("/catalog");
  REQUIRE(cat);
  CHECK(cat->status == 200);
  CHECK(cat->body == serialize_catalog(default_catalog()));

  auto end = cli.Get("/models/endurance?uav=powereye&payload=250");
  REQUIRE(end);
  CHECK(json::parse(end->body).at("operational_seconds") == 127.5);
  CHECK(cli.Get("/models/endurance?uav=nope&payload=250")->status == 404);
  CHECK(cli.Get("/models/endurance?uav=powereye&payload=900")->status == 422);

  auto plan = cli.Post("/plan", kUseCaseRequest, "application/json");
  REQUIRE(plan);
  CHECK(plan->status == 200);
  const auto req = planner::request_from_json(json::parse(kUseCaseRequest));
  const auto model = planner::build_model(req, default_catalog());
  CHECK(plan->body == iface::plan_document(planner::solve(model), model, false));
  const std::string run_id = plan->get_header_value("X-Run-Id");
  const std::string digest = plan->get_header_value("X-Input-Digest");
  CHECK(digest == iface::input_digest(req, default_catalog()));

  auto run = cli.Get(("/runs/" + run_id).c_str());
  REQUIRE(run);
  CHECK(run->status == 200);
  const json rec = json::parse(run->body);
  CHECK(rec.at("input_digest") == digest);
  CHECK(iface::input_digest(rec.at("inputs")) == digest);
  CHECK(planner::canonical_document(rec.at("result")) == plan->body);

  auto empty = cli.Post("/plan", R"({"workload_users": 0, "response_bound_ms": 2000,
    "legs": [{"location_id": "A", "allowed_modalities": ["ground"]}]})", "application/json");
  REQUIRE(empty);
  CHECK(empty->status == 200);
  CHECK(json::parse(empty->body).at("assignments").empty());

  auto delivery = cli.Post("/simulate/delivery", json{{"plan_id", std::stoll(run_id)}}.dump(), "application/json");
  REQUIRE(delivery);
  CHECK(delivery->status == 200);
  CHECK(json::parse(delivery->body).at("disagreements").empty());

  auto collab = cli.Post("/simulate/collab", R"({"workers": 3, "jobs": 50, "regime": "encased_dry", "seed": 3})",
                         "application/json");
  REQUIRE(collab);
  CHECK(json::parse(collab->body).at("success_rate") == 1.0);

  auto bad = cli.Post("/plan", R"({"workload_users": 10, "response_bound_ms": -1, "legs": []})", "application/json");
  REQUIRE(bad);
  CHECK(bad->status == 422);
  CHECK(cli.Post("/plan", "{oops", "application/json")->status == 400);
  CHECK(cli.Get("/runs/999")->status == 404);
  CHECK(cli.Post("/simulate/delivery", R"({"plan_id": 999})", "application/json")->status == 404);

  auto runs = cli.Get("/runs");
  REQUIRE(runs);
  CHECK(json::parse(runs->body).size() == 4);
  fs::remove_all(dir);
}

TEST_CASE("concurrent plan requests never interleave records") {
  const fs::path dir = temp_dir("concurrent");
  {
    RunningService rs(dir);
    std::vector<std::thread> threads;
    std::vector<std::string> bodies(6);
    for (int i = 0; i < 6; ++i) {
      threads.emplace_back([&, i] {
        httplib::Client cli("127.0.0.1", rs.port);
        auto res = cli.Post("/plan", kUseCaseRequest, "application/json");
        if (res) bodies[i] = res->body;
      });
    }
    for (auto& t : threads) t.join();
    for (const auto& b : bodies) CHECK(b == bodies[0]);
  }
  std::ifstream in(dir / "runs.ndjson");
  std::set<long long> ids;
  std::string line;
  while (std::getline(in, line)) ids.insert(json::parse(line).at("run_id").get<long long>());
  CHECK(ids.size() == 6);
  CHECK(*ids.rbegin() == 6);
  fs::remove_all(dir);
}

TEST_CASE("an unwritable state dir fails at startup") {
  CHECK_THROWS_AS(iface::Service(default_catalog(), "/proc/geese-state"), Error);
}
