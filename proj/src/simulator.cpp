#include "geese/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <queue>
#include <sstream>

#include "geese/errors.hpp"
#include "geese/perf_models.hpp"
#include "geese/rng.hpp"

namespace geese::sim {

using nlohmann::json;

namespace {

LinkModel surface_link(Role role) { return {Regime::surface, role, 1.0, 1.0}; }

const LinkModel& worker_link(const CollabConfig& c, int w, const LinkModel& fallback) {
  return static_cast<std::size_t>(w) < c.worker_links.size() ? c.worker_links[w] : fallback;
}

std::string ms_text(std::int64_t us) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%lld.%03lld", static_cast<long long>(us / 1000), static_cast<long long>(us % 1000));
  return buf;
}

double percentile(const std::vector<double>& sorted, double q) {
  // Nearest rank.
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sorted.size())));
  return sorted[std::max<std::size_t>(rank, 1) - 1];
}

json link_json(const LinkModel& l) {
  return {{"regime", std::string(to_string(l.regime))},
          {"role", std::string(to_string(l.role))},
          {"success_p", l.per_job_success_p},
          {"latency_multiplier", l.latency_multiplier}};
}

}  // namespace

std::string_view to_string(JobOutcome o) { return o == JobOutcome::completed ? "completed" : "lost"; }

std::vector<std::string> validate(const CollabConfig& c) {
  std::vector<std::string> f;
  if (c.n_workers < 1) f.push_back("n_workers must be >= 1");
  if (c.n_jobs < 0) f.push_back("n_jobs must be >= 0");
  if (!(c.per_job_work_ms >= 0)) f.push_back("per_job_work_ms must be >= 0");
  if (c.retry_budget < 0) f.push_back("retry_budget must be >= 0");
  auto check = [&](const LinkModel& l, const std::string& who) {
    if (!(l.per_job_success_p >= 0 && l.per_job_success_p <= 1)) f.push_back(who + ": success probability outside [0, 1]");
    if (!(l.latency_multiplier >= 1)) f.push_back(who + ": latency multiplier must be >= 1");
  };
  check(c.master_link, "master link");
  for (std::size_t i = 0; i < c.worker_links.size(); ++i) check(c.worker_links[i], "worker link " + std::to_string(i + 1));
  if (static_cast<int>(c.worker_links.size()) > std::max(c.n_workers, 0)) f.push_back("more worker links than workers");
  return f;
}

CollabConfig collab_config(const Calibration& calibration, Regime regime, Role submerged, int workers, int jobs,
                           std::uint64_t seed) {
  CollabConfig c;
  c.n_workers = workers;
  c.n_jobs = jobs;
  c.seed = seed;
  c.master_link = surface_link(Role::master);
  LinkModel w = surface_link(Role::workers);
  if (submerged == Role::master) {
    c.master_link = perf::link_model(calibration, regime, Role::master);
  } else {
    w = perf::link_model(calibration, regime, Role::workers);
  }
  c.worker_links.assign(static_cast<std::size_t>(std::max(workers, 0)), w);
  return c;
}

ResponseSummary summarize(std::vector<double> samples) {
  ResponseSummary s;
  s.count = samples.size();
  if (samples.empty()) return s;
  std::sort(samples.begin(), samples.end());
  double sum = 0.0;
  for (double v : samples) sum += v;
  s.mean_ms = sum / static_cast<double>(samples.size());
  s.p50_ms = percentile(samples, 0.50);
  s.p95_ms = percentile(samples, 0.95);
  return s;
}

SimReport simulate_collaborative(const CollabConfig& config) {
  if (auto f = validate(config); !f.empty()) throw ValidationError(std::move(f));

  SimReport rep;
  rep.kind = "collab";
  rep.n_jobs = static_cast<std::size_t>(config.n_jobs);
  if (config.n_jobs == 0) return rep;

  const int n = config.n_workers;
  const LinkModel fallback = surface_link(Role::workers);
  // Each direction of a job crosses both links once; the per-direction
  // probability is the square root so a round trip matches the calibrated
  // per-job rate.
  std::vector<double> leg_p(static_cast<std::size_t>(n));
  std::vector<std::int64_t> latency_us(static_cast<std::size_t>(n));
  for (int w = 0; w < n; ++w) {
    const LinkModel& wl = worker_link(config, w, fallback);
    leg_p[w] = std::sqrt(config.master_link.per_job_success_p) * std::sqrt(wl.per_job_success_p);
    latency_us[w] = std::llround(config.per_job_work_ms * 1000.0 * config.master_link.latency_multiplier *
                                 wl.latency_multiplier);
  }

  std::vector<std::vector<int>> queue(static_cast<std::size_t>(n));
  for (int j = 0; j < config.n_jobs; ++j) queue[j % n].push_back(j);
  std::vector<std::size_t> next(static_cast<std::size_t>(n), 0);
  rep.traces.resize(static_cast<std::size_t>(config.n_jobs));

  enum class Kind { dispatch, finish };
  struct Event {
    std::int64_t t_us;
    std::uint64_t seq;
    Kind kind;
    int worker;
    int job;
    bool operator>(const Event& o) const { return std::tie(t_us, seq) > std::tie(o.t_us, o.seq); }
  };
  std::priority_queue<Event, std::vector<Event>, std::greater<>> events;
  std::uint64_t seq = 0;
  Rng rng(config.seed);

  for (int w = 0; w < n; ++w) events.push({0, seq++, Kind::dispatch, w, -1});

  std::vector<int> attempts(static_cast<std::size_t>(config.n_jobs), 0);
  while (!events.empty()) {
    const Event ev = events.top();
    events.pop();
    if (ev.kind == Kind::dispatch) {
      auto& q = queue[ev.worker];
      if (next[ev.worker] == q.size()) continue;
      const int job = q[next[ev.worker]];
      JobTrace& tr = rep.traces[job];
      tr.job_id = job;
      tr.assigned_worker = ev.worker + 1;
      if (attempts[job] == 0) tr.dispatched_at_us = ev.t_us;
      tr.attempts = ++attempts[job];
      if (rng.bernoulli(leg_p[ev.worker])) {
        events.push({ev.t_us + latency_us[ev.worker], seq++, Kind::finish, ev.worker, job});
      } else {
        if (attempts[job] > config.retry_budget) {
          tr.outcome = JobOutcome::lost;
          ++next[ev.worker];
        }
        events.push({ev.t_us, seq++, Kind::dispatch, ev.worker, -1});
      }
    } else {
      JobTrace& tr = rep.traces[ev.job];
      if (rng.bernoulli(leg_p[ev.worker])) {
        tr.outcome = JobOutcome::completed;
        tr.completed_at_us = ev.t_us;
        ++next[ev.worker];
      } else if (attempts[ev.job] > config.retry_budget) {
        tr.outcome = JobOutcome::lost;
        ++next[ev.worker];
      }
      events.push({ev.t_us, seq++, Kind::dispatch, ev.worker, -1});
    }
  }

  std::vector<double> responses;
  for (const auto& tr : rep.traces) {
    if (tr.outcome == JobOutcome::completed) {
      ++rep.completed;
      responses.push_back(static_cast<double>(*tr.completed_at_us - tr.dispatched_at_us) / 1000.0);
    }
  }
  rep.success_rate = static_cast<double>(rep.completed) / static_cast<double>(rep.n_jobs);
  rep.response = summarize(std::move(responses));
  return rep;
}

MonteCarloReport run_monte_carlo(const CollabConfig& config, int repetitions) {
  if (repetitions < 1) throw ValidationError({"repetitions must be >= 1"});
  MonteCarloReport mc;
  mc.repetitions = repetitions;
  double response_sum = 0.0;
  std::size_t response_n = 0;
  for (int r = 0; r < repetitions; ++r) {
    CollabConfig c = config;
    c.seed = splitmix64(config.seed + static_cast<std::uint64_t>(r));
    SimReport rep = simulate_collaborative(c);
    mc.rep_success.push_back(rep.success_rate);
    response_sum += rep.response.mean_ms * static_cast<double>(rep.response.count);
    response_n += rep.response.count;
    if (r == 0) mc.first = std::move(rep);
  }
  double sum = 0.0;
  for (double s : mc.rep_success) sum += s;
  mc.mean_success = sum / repetitions;
  double ss = 0.0;
  for (double s : mc.rep_success) ss += (s - mc.mean_success) * (s - mc.mean_success);
  mc.sd_success = repetitions > 1 ? std::sqrt(ss / (repetitions - 1)) : 0.0;
  mc.half_width = 1.96 * mc.sd_success / std::sqrt(static_cast<double>(repetitions));
  mc.mean_response_ms = response_n > 0 ? response_sum / static_cast<double>(response_n) : 0.0;
  return mc;
}

UnitMission simulate_unit_mission(const UavSpec& uav, double payload_gm, const planner::DeploymentRequest& request,
                                  const Calibration& cal, const DeliveryOptions& options) {
  UnitMission m;
  m.uav_id = uav.id;
  m.payload_gm = payload_gm;
  const auto curve = perf::endurance_curve(uav);
  if (payload_gm > curve.max_payload()) {
    throw InfeasiblePairingError("payload " + std::to_string(payload_gm) + " gm exceeds the measured range of '" +
                                 uav.id + "'");
  }
  m.interval_seconds = curve.at(std::max(payload_gm, curve.min_payload()));
  if (options.unballasted && uav.modality == Modality::underwater) m.interval_seconds *= cal.unballasted_factor;

  const double rate = cal.interval_fraction / m.interval_seconds;  // battery fraction per second
  double t = 0.0;
  double battery = 1.0;
  m.timeline.push_back({0.0, 1.0, "start"});

  struct Phase {
    std::string name;
    double seconds;
  };
  std::vector<Phase> phases;
  double outbound = 0.0;
  for (const auto& leg : request.legs) {
    outbound += leg.distance_from_prev_m;
    phases.push_back({"travel:" + leg.location_id, leg.distance_from_prev_m / uav.speed_m_per_s});
    phases.push_back({"dwell:" + leg.location_id, leg.dwell_s});
  }
  phases.push_back({"return", request.return_distance_m.value_or(outbound) / uav.speed_m_per_s});

  const double floor = cal.battery_floor;
  const double eps = 1e-12;
  for (const auto& ph : phases) {
    if (ph.seconds <= 0) continue;
    const double after = battery - rate * ph.seconds;
    if (after < floor - eps) {
      const double dt = (battery - floor) / rate;
      t += dt;
      battery = floor;
      m.timeline.push_back({t, battery, "abort:" + ph.name});
      m.aborted = true;
      m.abort_at_s = t;
      break;
    }
    t += ph.seconds;
    battery = after;
    m.timeline.push_back({t, battery, ph.name});
  }
  m.final_remaining = battery;
  return m;
}

SimReport simulate_delivery(const planner::Plan& plan, const planner::DeploymentRequest& request,
                            const Catalog& catalog, const DeliveryOptions& options) {
  if (plan.certificate != planner::Certificate::optimal) throw UsageError("delivery needs an optimal plan");
  if (auto f = planner::validate_request(request); !f.empty()) throw ValidationError(std::move(f));
  SimReport rep;
  rep.kind = "delivery";
  for (const auto& a : plan.assignments) {
    const UavSpec* u = catalog.find_uav(a.uav_id);
    const CloudletSpec* c = catalog.find_cloudlet(a.cloudlet_id);
    if (!u) throw ConsistencyError("plan references unknown UAV '" + a.uav_id + "'");
    if (!c) throw ConsistencyError("plan references unknown cloudlet '" + a.cloudlet_id + "'");
    for (int k = 1; k <= a.units; ++k) {
      UnitMission m = simulate_unit_mission(*u, c->payload_weight_gm, request, catalog.calibration, options);
      m.cloudlet_id = c->id;
      m.unit = k;
      if (m.aborted) {
        std::ostringstream s;
        s << u->id << "/" << c->id << " unit " << k << " reached the battery floor at " << *m.abort_at_s
          << " s before returning; the plan's round-trip check disagrees with the battery model";
        rep.disagreements.push_back(s.str());
      }
      rep.missions.push_back(std::move(m));
    }
  }
  rep.n_jobs = rep.missions.size();
  rep.completed = static_cast<std::size_t>(
      std::count_if(rep.missions.begin(), rep.missions.end(), [](const UnitMission& m) { return !m.aborted; }));
  rep.success_rate = rep.n_jobs == 0 ? 1.0 : static_cast<double>(rep.completed) / static_cast<double>(rep.n_jobs);
  return rep;
}

json to_json(const SimReport& r) {
  json traces = json::array();
  for (const auto& t : r.traces) {
    json j = {{"job_id", t.job_id},
              {"assigned_worker", t.assigned_worker},
              {"dispatched_at_ms", static_cast<double>(t.dispatched_at_us) / 1000.0},
              {"outcome", std::string(to_string(t.outcome))}};
    if (t.completed_at_us) j["completed_at_ms"] = static_cast<double>(*t.completed_at_us) / 1000.0;
    if (t.attempts != 1) j["attempts"] = t.attempts;
    traces.push_back(std::move(j));
  }
  json missions = json::array();
  for (const auto& m : r.missions) {
    json tl = json::array();
    for (const auto& p : m.timeline) tl.push_back({{"t_s", p.t_s}, {"remaining", p.remaining}, {"phase", p.phase}});
    json j = {{"uav", m.uav_id},
              {"cloudlet", m.cloudlet_id},
              {"unit", m.unit},
              {"payload_gm", m.payload_gm},
              {"interval_seconds", m.interval_seconds},
              {"aborted", m.aborted},
              {"final_remaining", m.final_remaining},
              {"battery_timeline", tl}};
    if (m.abort_at_s) j["abort_at_s"] = *m.abort_at_s;
    missions.push_back(std::move(j));
  }
  json out = {{"schema_version", 1},
              {"kind", r.kind},
              {"success_rate", r.success_rate},
              {"completed", r.completed},
              {"total", r.n_jobs},
              {"response_ms",
               {{"count", r.response.count},
                {"mean", r.response.mean_ms},
                {"p50", r.response.p50_ms},
                {"p95", r.response.p95_ms}}}};
  if (r.kind == "delivery") {
    out["missions"] = missions;
    out["disagreements"] = r.disagreements;
  } else {
    out["traces"] = traces;
  }
  return out;
}

json to_json(const MonteCarloReport& mc) {
  return {{"schema_version", 1},
          {"kind", "collab-monte-carlo"},
          {"repetitions", mc.repetitions},
          {"success_rate", {{"mean", mc.mean_success}, {"sd", mc.sd_success}, {"half_width_95", mc.half_width}}},
          {"mean_response_ms", mc.mean_response_ms},
          {"rep_success", mc.rep_success},
          {"first_repetition", to_json(mc.first)}};
}

json to_json(const CollabConfig& c) {
  json workers = json::array();
  for (const auto& l : c.worker_links) workers.push_back(link_json(l));
  return {{"workers", c.n_workers},
          {"jobs", c.n_jobs},
          {"per_job_work_ms", c.per_job_work_ms},
          {"master_link", link_json(c.master_link)},
          {"worker_links", workers},
          {"seed", c.seed},
          {"retry_budget", c.retry_budget}};
}

CollabConfig collab_config_from_json(const json& j, const Calibration& cal) {
  json_util::FieldReader r(j, "", nullptr);
  if (!j.is_object()) r.fail_here("collab config must be an object");
  const int workers = static_cast<int>(r.integer_or("workers", 3));
  const int jobs = static_cast<int>(r.integer_or("jobs", kDefaultJobs));
  std::uint64_t seed = 0;
  if (r.has("seed")) {
    const json& s = j.at("seed");
    if (!s.is_number_integer()) r.fail("seed", "expected an unsigned integer");
    seed = s.get<std::uint64_t>();
  }
  const std::string regime_s = r.text_or("regime", "encased_dry");
  const std::string role_s = r.text_or("role", "workers");
  auto regime = parse_regime(regime_s);
  auto role = parse_role(role_s);
  if (!regime) r.fail("regime", "unknown regime '" + regime_s + "'");
  if (!role) r.fail("role", "unknown role '" + role_s + "'");
  CollabConfig c = collab_config(cal, *regime, *role, workers, jobs, seed);
  c.per_job_work_ms = r.number_or("per_job_work_ms", kDefaultJobWorkMs);
  c.retry_budget = static_cast<int>(r.integer_or("retry_budget", 0));
  auto read_link = [&](const json_util::FieldReader& lr, LinkModel base) {
    base.per_job_success_p = lr.number_or("success_p", base.per_job_success_p);
    base.latency_multiplier = lr.number_or("latency_multiplier", base.latency_multiplier);
    return base;
  };
  if (r.has("master_link")) c.master_link = read_link(r.object("master_link"), c.master_link);
  if (r.has("worker_links")) {
    const auto& arr = r.array("worker_links");
    c.worker_links.clear();
    for (std::size_t i = 0; i < arr.size(); ++i) {
      c.worker_links.push_back(read_link(r.element("worker_links", i), surface_link(Role::workers)));
    }
  }
  if (auto f = validate(c); !f.empty()) throw ValidationError(std::move(f));
  return c;
}

std::string to_csv(const SimReport& r) {
  std::ostringstream out;
  if (r.kind == "delivery") {
    out << "uav,cloudlet,unit,t_s,remaining,phase\n";
    for (const auto& m : r.missions) {
      for (const auto& p : m.timeline) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.3f,%.6f", p.t_s, p.remaining);
        out << m.uav_id << ',' << m.cloudlet_id << ',' << m.unit << ',' << buf << ',' << p.phase << '\n';
      }
    }
    return out.str();
  }
  out << "job_id,assigned_worker,dispatched_at_ms,outcome,completed_at_ms\n";
  for (const auto& t : r.traces) {
    out << t.job_id << ',' << t.assigned_worker << ',' << ms_text(t.dispatched_at_us) << ',' << to_string(t.outcome)
        << ',' << (t.completed_at_us ? ms_text(*t.completed_at_us) : "") << '\n';
  }
  return out.str();
}

}  // namespace geese::sim
