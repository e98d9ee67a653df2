#include <httplib.h>

#include "geese/errors.hpp"
#include "geese/interface.hpp"
#include "geese/perf_models.hpp"

namespace geese::iface {

using nlohmann::json;

namespace {

constexpr const char* kJson = "application/json";

void send_error(httplib::Response& res, int status, const std::string& message,
                const std::vector<std::string>& failures = {}) {
  json body = {{"error", message}};
  if (!failures.empty()) body["failures"] = failures;
  res.status = status;
  res.set_content(planner::canonical_document(body), kJson);
}

// Maps toolkit exceptions onto HTTP statuses.
template <typename F>
void guarded(httplib::Response& res, F&& f) {
  try {
    f();
  } catch (const ValidationError& e) {
    send_error(res, 422, "validation failed", e.failures());
  } catch (const ParseError& e) {
    send_error(res, 400, e.what());
  } catch (const json::exception& e) {
    send_error(res, 400, e.what());
  } catch (const DomainError& e) {
    send_error(res, 422, e.what());
  } catch (const ConsistencyError& e) {
    send_error(res, 409, e.what());
  } catch (const UsageError& e) {
    send_error(res, 400, e.what());
  } catch (const std::exception& e) {
    send_error(res, 500, e.what());
  }
}

bool truthy(const httplib::Request& req, const char* key) {
  if (!req.has_param(key)) return false;
  const std::string v = req.get_param_value(key);
  return v == "1" || v == "true" || v == "yes";
}

}  // namespace

struct Service::Impl {
  Catalog catalog;
  RunLog log;
  httplib::Server server;

  Impl(Catalog c, const std::filesystem::path& dir) : catalog(std::move(c)), log(dir) { routes(); }

  void routes() {
    server.set_read_timeout(120, 0);
    server.set_write_timeout(120, 0);

    server.Get("/catalog", [this](const httplib::Request&, httplib::Response& res) {
      res.set_content(serialize_catalog(catalog), kJson);
    });

    server.Get("/models/endurance", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        if (!req.has_param("uav") || !req.has_param("payload")) throw UsageError("uav and payload are required");
        const std::string id = req.get_param_value("uav");
        const UavSpec* u = catalog.find_uav(id);
        if (!u) {
          send_error(res, 404, "unknown UAV '" + id + "'");
          return;
        }
        double payload = 0.0;
        try {
          payload = std::stod(req.get_param_value("payload"));
        } catch (const std::exception&) {
          throw UsageError("payload must be a number");
        }
        const double seconds = perf::operational_time(*u, payload);
        json body = {{"uav", id},
                     {"payload_gm", payload},
                     {"operational_seconds", seconds},
                     {"interval_fraction", catalog.calibration.interval_fraction}};
        res.set_content(planner::canonical_document(body), kJson);
      });
    });

    server.Post("/plan", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const json body = json_util::parse(req.body, "request body");
        const json_util::LineIndex index(req.body);
        const planner::DeploymentRequest request = planner::request_from_json(body, "", &index);
        const planner::AllocationModel model = planner::build_model(request, catalog);
        const planner::Outcome outcome = planner::solve(model);
        const std::string doc = plan_document(outcome, model, truthy(req, "verify"));
        const json inputs = plan_inputs(request, catalog);
        const auto id = log.append("plan", inputs, json::parse(doc));
        res.set_header("X-Run-Id", std::to_string(id));
        res.set_header("X-Input-Digest", input_digest(inputs));
        res.set_content(doc, kJson);
      });
    });

    server.Post("/simulate/collab", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const json body = json_util::parse(req.body, "request body");
        const sim::CollabConfig config = sim::collab_config_from_json(body, catalog.calibration);
        const int reps = body.is_object() ? body.value("reps", 1) : 1;
        json result = reps > 1 ? sim::to_json(sim::run_monte_carlo(config, reps))
                               : sim::to_json(sim::simulate_collaborative(config));
        json inputs = {{"config", sim::to_json(config)}, {"reps", reps}};
        const auto id = log.append("collab", inputs, result);
        res.set_header("X-Run-Id", std::to_string(id));
        res.set_header("X-Input-Digest", input_digest(inputs));
        res.set_content(planner::canonical_document(result), kJson);
      });
    });

    server.Post("/simulate/delivery", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const json body = json_util::parse(req.body, "request body");
        if (!body.is_object()) throw UsageError("body must be an object");
        json plan_doc;
        json request_doc;
        if (body.contains("plan_id")) {
          const auto rec = log.get(body.at("plan_id").get<std::int64_t>());
          if (!rec || rec->value("kind", "") != "plan") {
            send_error(res, 404, "no plan run with that id");
            return;
          }
          plan_doc = rec->at("result");
          request_doc = rec->at("inputs").at("request");
        } else if (body.contains("plan")) {
          if (!body.contains("request")) throw UsageError("an inline plan needs its request");
          plan_doc = body.at("plan");
          request_doc = body.at("request");
        } else {
          throw UsageError("either plan_id or plan is required");
        }
        const planner::Plan plan = planner::plan_from_json(plan_doc);
        const planner::DeploymentRequest request = planner::request_from_json(request_doc);
        sim::DeliveryOptions opts;
        opts.unballasted = body.value("unballasted", false);
        const json result = sim::to_json(sim::simulate_delivery(plan, request, catalog, opts));
        json inputs = {{"plan", plan_doc}, {"request", request_doc}, {"unballasted", opts.unballasted}};
        const auto id = log.append("delivery", inputs, result);
        res.set_header("X-Run-Id", std::to_string(id));
        res.set_header("X-Input-Digest", input_digest(inputs));
        res.set_content(planner::canonical_document(result), kJson);
      });
    });

    server.Get("/runs", [this](const httplib::Request&, httplib::Response& res) {
      res.set_content(planner::canonical_document(log.list()), kJson);
    });

    server.Get(R"(/runs/(\d+))", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const auto rec = log.get(std::stoll(req.matches[1].str()));
        if (!rec) {
          send_error(res, 404, "no run " + req.matches[1].str());
          return;
        }
        res.set_content(planner::canonical_document(*rec), kJson);
      });
    });
  }
};

Service::Service(Catalog catalog, std::filesystem::path state_dir)
    : impl_(std::make_unique<Impl>(std::move(catalog), state_dir)) {}

Service::~Service() { stop(); }

int Service::bind(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound <= 0) throw Error("cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void Service::run() { impl_->server.listen_after_bind(); }

void Service::stop() {
  if (impl_) impl_->server.stop();
}

bool Service::running() const { return impl_->server.is_running(); }

}  // namespace geese::iface
