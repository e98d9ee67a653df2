#include "geese/catalog.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "geese/errors.hpp"
#include "geese/json_util.hpp"

namespace geese {

using json_util::FieldReader;
using json_util::LineIndex;
using nlohmann::json;

std::string_view to_string(Modality m) {
  switch (m) {
    case Modality::aerial: return "aerial";
    case Modality::ground: return "ground";
    case Modality::underwater: return "underwater";
  }
  return "aerial";
}

std::optional<Modality> parse_modality(std::string_view s) {
  if (s == "aerial") return Modality::aerial;
  if (s == "ground") return Modality::ground;
  if (s == "underwater") return Modality::underwater;
  return std::nullopt;
}

const DeviceSpec* Catalog::find_device(std::string_view id) const {
  auto it = std::find_if(devices.begin(), devices.end(), [&](const DeviceSpec& d) { return d.id == id; });
  return it == devices.end() ? nullptr : &*it;
}

const CloudletSpec* Catalog::find_cloudlet(std::string_view id) const {
  auto it = std::find_if(cloudlets.begin(), cloudlets.end(), [&](const CloudletSpec& c) { return c.id == id; });
  return it == cloudlets.end() ? nullptr : &*it;
}

const UavSpec* Catalog::find_uav(std::string_view id) const {
  auto it = std::find_if(uavs.begin(), uavs.end(), [&](const UavSpec& u) { return u.id == id; });
  return it == uavs.end() ? nullptr : &*it;
}

int Catalog::fleet_bound_for(std::string_view uav_id) const {
  auto it = fleet_bound.find(std::string(uav_id));
  return it == fleet_bound.end() ? kDefaultFleetBound : it->second;
}

double Catalog::device_weight_gm(const CloudletSpec& c) const {
  double total = 0.0;
  for (const auto& dc : c.devices) {
    if (const auto* d = find_device(dc.device_id)) total += d->unit_weight_gm * dc.count;
  }
  return total;
}

int Catalog::compute_device_count(const CloudletSpec& c) const {
  int n = 0;
  for (const auto& dc : c.devices) {
    if (const auto* d = find_device(dc.device_id); d && d->is_compute()) n += dc.count;
  }
  return n;
}

double effective_payload(const CloudletSpec& cloudlet, const UavSpec& uav) {
  if (cloudlet.payload_weight_gm > uav.max_payload_gm) {
    std::ostringstream msg;
    msg << "cloudlet '" << cloudlet.id << "' (" << cloudlet.payload_weight_gm << " gm) exceeds the "
        << uav.max_payload_gm << " gm payload bound of UAV '" << uav.id << "'";
    throw InfeasiblePairingError(msg.str());
  }
  return cloudlet.payload_weight_gm;
}

int cloudlet_capacity(const CloudletSpec& cloudlet) { return cloudlet.capacity_users.low; }

namespace {

DeviceSpec device_from_json(const FieldReader& r) {
  DeviceSpec d;
  d.id = r.text("id");
  d.name = r.text_or("name", d.id);
  d.cpu_desc = r.text_or("cpu_desc", "");
  d.gpu_desc = r.text_or("gpu_desc", "");
  d.ram_gb = r.number_or("ram_gb", 0.0);
  d.unit_weight_gm = r.number("unit_weight_gm");
  return d;
}

CloudletSpec cloudlet_from_json(const FieldReader& r) {
  CloudletSpec c;
  c.id = r.text("id");
  c.category = static_cast<int>(r.integer("category"));
  c.type_index = static_cast<int>(r.integer_or("type_index", 1));
  c.label = r.text_or("label", c.id);
  const auto& devs = r.array("devices");
  for (std::size_t i = 0; i < devs.size(); ++i) {
    FieldReader dr = r.element("devices", i);
    c.devices.push_back({dr.text("device"), static_cast<int>(dr.integer_or("count", 1))});
  }
  c.payload_weight_gm = r.number_or("payload_weight_gm", c.class_weight_gm());
  c.component_weight_gm = r.number_or("component_weight_gm", 0.0);
  c.batch_latency_s = r.number("batch_latency_s");
  const auto& cap = r.array("capacity_users");
  if (cap.size() != 2) r.fail("capacity_users", "expected [low, high]");
  for (std::size_t i = 0; i < 2; ++i) {
    if (!cap[i].is_number_integer()) r.fail("capacity_users", "capacity bounds must be integers");
  }
  c.capacity_users = {cap[0].get<int>(), cap[1].get<int>()};
  // Default beta: payload class in hundreds of grams.
  c.cost_beta = r.number_or("cost_beta", static_cast<double>(c.category));
  return c;
}

UavSpec uav_from_json(const FieldReader& r) {
  UavSpec u;
  u.id = r.text("id");
  std::string mod = r.text("modality");
  auto m = parse_modality(mod);
  if (!m) r.fail("modality", "unknown modality '" + mod + "' (expected aerial, ground or underwater)");
  u.modality = *m;
  u.model_name = r.text_or("model_name", u.id);
  u.max_payload_gm = r.number("max_payload_gm");
  const auto& pts = r.array("endurance_points");
  for (std::size_t i = 0; i < pts.size(); ++i) {
    std::string p = json_util::pointer_append(r.path_of("endurance_points"), i);
    const json& pt = pts[i];
    if (!pt.is_array() || pt.size() != 2) {
      throw ParseError(p, r.index() ? r.index()->line_of(p) : 0, "expected [payload_gm, seconds]");
    }
    u.endurance_points.push_back({json_util::as_number(pt[0], p + "/0", r.index()),
                                  json_util::as_number(pt[1], p + "/1", r.index())});
  }
  u.speed_m_per_s = r.number("speed_m_per_s");
  u.cost_alpha = r.number("cost_alpha");
  u.container_tare_gm = r.number_or("container_tare_gm", 0.0);
  u.ballast_gm = r.number_or("ballast_gm", 0.0);
  return u;
}

LinkModel link_from_json(const FieldReader& r) {
  LinkModel l;
  std::string regime = r.text("regime");
  auto reg = parse_regime(regime);
  if (!reg) r.fail("regime", "unknown regime '" + regime + "'");
  std::string role = r.text("role");
  auto rl = parse_role(role);
  if (!rl) r.fail("role", "unknown role '" + role + "'");
  l.regime = *reg;
  l.role = *rl;
  l.per_job_success_p = r.number("success_p");
  l.latency_multiplier = r.number("latency_multiplier");
  return l;
}

LoadCurve load_curve_from_json(const FieldReader& r) {
  LoadCurve lc;
  lc.device_id = r.text("device");
  const auto& anchors = r.array("anchors");
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    std::string p = json_util::pointer_append(r.path_of("anchors"), i);
    const json& a = anchors[i];
    if (!a.is_array() || a.size() != 2 || !a[0].is_number_integer()) {
      throw ParseError(p, r.index() ? r.index()->line_of(p) : 0, "expected [users, response_ms]");
    }
    lc.anchors.push_back({a[0].get<int>(), json_util::as_number(a[1], p + "/1", r.index())});
  }
  lc.battery_hours_at_100_users = r.number("battery_hours_at_100_users");
  return lc;
}

json endurance_to_json(const std::vector<EndurancePoint>& pts) {
  json arr = json::array();
  for (const auto& p : pts) arr.push_back(json::array({p.payload_gm, p.seconds}));
  return arr;
}

}  // namespace

Calibration calibration_from_json(const json& j, const Calibration& base, std::string_view source) {
  LineIndex index;
  if (!source.empty()) index = LineIndex(source);
  return calibration_from_json_at(j, base, "/calibration", source.empty() ? nullptr : &index);
}

Calibration calibration_from_json_at(const json& j, const Calibration& base, const std::string& path,
                                     const LineIndex* index) {
  FieldReader r(j, path, index);
  Calibration c = base;
  if (r.has("load_curves")) {
    // Per-device replacement so an override can touch a single curve.
    const auto& arr = r.array("load_curves");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      LoadCurve lc = load_curve_from_json(r.element("load_curves", i));
      auto it = std::find_if(c.load_curves.begin(), c.load_curves.end(),
                             [&](const LoadCurve& x) { return x.device_id == lc.device_id; });
      if (it != c.load_curves.end()) {
        *it = std::move(lc);
      } else {
        c.load_curves.push_back(std::move(lc));
      }
    }
  }
  if (r.has("links")) {
    const auto& arr = r.array("links");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      LinkModel l = link_from_json(r.element("links", i));
      auto it = std::find_if(c.links.begin(), c.links.end(),
                             [&](const LinkModel& x) { return x.regime == l.regime && x.role == l.role; });
      if (it != c.links.end()) {
        *it = l;
      } else {
        c.links.push_back(l);
      }
    }
  }
  c.idle_cap_hours = r.number_or("idle_cap_hours", c.idle_cap_hours);
  c.unballasted_factor = r.number_or("unballasted_factor", c.unballasted_factor);
  c.battery_floor = r.number_or("battery_floor", c.battery_floor);
  c.interval_fraction = r.number_or("interval_fraction", c.interval_fraction);
  return c;
}

json to_json(const Calibration& c) {
  json curves = json::array();
  for (const auto& lc : c.load_curves) {
    json anchors = json::array();
    for (const auto& a : lc.anchors) anchors.push_back(json::array({a.users, a.response_ms}));
    curves.push_back({{"device", lc.device_id},
                      {"anchors", anchors},
                      {"battery_hours_at_100_users", lc.battery_hours_at_100_users}});
  }
  json links = json::array();
  for (const auto& l : c.links) {
    links.push_back({{"regime", to_string(l.regime)},
                     {"role", to_string(l.role)},
                     {"success_p", l.per_job_success_p},
                     {"latency_multiplier", l.latency_multiplier}});
  }
  return {{"load_curves", curves},
          {"links", links},
          {"idle_cap_hours", c.idle_cap_hours},
          {"unballasted_factor", c.unballasted_factor},
          {"battery_floor", c.battery_floor},
          {"interval_fraction", c.interval_fraction}};
}

Catalog catalog_from_json(const json& doc, std::string_view source) {
  LineIndex index;
  if (!source.empty()) index = LineIndex(source);
  const LineIndex* idx = source.empty() ? nullptr : &index;

  // An empty document carries nothing to parse; report what is missing
  // as invariant failures instead of the first absent field.
  if (doc.is_null() || (doc.is_object() && doc.empty())) {
    throw ValidationError({"schema_version is missing", "no devices defined", "no cloudlets defined",
                           "no UAVs defined"});
  }

  FieldReader r(doc, "", idx);
  Catalog cat;
  cat.schema_version = static_cast<int>(r.integer("schema_version"));
  if (cat.schema_version != kCatalogSchemaVersion) {
    r.fail("schema_version", "unsupported schema_version " + std::to_string(cat.schema_version) + " (expected " +
                                 std::to_string(kCatalogSchemaVersion) + ")");
  }

  auto read_list = [&](std::string_view key, auto&& convert, auto& out) {
    if (!r.has(key)) return;
    const auto& arr = r.array(key);
    for (std::size_t i = 0; i < arr.size(); ++i) out.push_back(convert(r.element(key, i)));
  };
  read_list("devices", device_from_json, cat.devices);
  read_list("cloudlets", cloudlet_from_json, cat.cloudlets);
  read_list("uavs", uav_from_json, cat.uavs);

  for (const auto& u : cat.uavs) cat.fleet_bound[u.id] = kDefaultFleetBound;
  if (r.has("fleet_bound")) {
    FieldReader fb = r.object("fleet_bound");
    for (const auto& [key, value] : fb.node().items()) {
      cat.fleet_bound[key] = static_cast<int>(fb.integer(key));
    }
  }

  if (r.has("calibration")) {
    cat.calibration = calibration_from_json_at(doc.at("calibration"), Calibration{}, "/calibration", idx);
  }

  if (auto failures = validate_catalog(cat); !failures.empty()) throw ValidationError(std::move(failures));
  return cat;
}

Catalog load_catalog(std::string_view document) {
  bool blank = std::all_of(document.begin(), document.end(),
                           [](char ch) { return std::isspace(static_cast<unsigned char>(ch)) != 0; });
  if (blank) return catalog_from_json(json(), {});
  return catalog_from_json(json_util::parse(document, "catalog"), document);
}

Catalog load_catalog_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open catalog file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_catalog(ss.str());
}

json to_json(const Catalog& cat) {
  json devices = json::array();
  for (const auto& d : cat.devices) {
    devices.push_back({{"id", d.id},
                       {"name", d.name},
                       {"cpu_desc", d.cpu_desc},
                       {"gpu_desc", d.gpu_desc},
                       {"ram_gb", d.ram_gb},
                       {"unit_weight_gm", d.unit_weight_gm}});
  }
  json cloudlets = json::array();
  for (const auto& c : cat.cloudlets) {
    json devs = json::array();
    for (const auto& dc : c.devices) devs.push_back({{"device", dc.device_id}, {"count", dc.count}});
    cloudlets.push_back({{"id", c.id},
                         {"category", c.category},
                         {"type_index", c.type_index},
                         {"label", c.label},
                         {"devices", devs},
                         {"payload_weight_gm", c.payload_weight_gm},
                         {"component_weight_gm", c.component_weight_gm},
                         {"batch_latency_s", c.batch_latency_s},
                         {"capacity_users", json::array({c.capacity_users.low, c.capacity_users.high})},
                         {"cost_beta", c.cost_beta}});
  }
  json uavs = json::array();
  for (const auto& u : cat.uavs) {
    uavs.push_back({{"id", u.id},
                    {"modality", to_string(u.modality)},
                    {"model_name", u.model_name},
                    {"max_payload_gm", u.max_payload_gm},
                    {"endurance_points", endurance_to_json(u.endurance_points)},
                    {"speed_m_per_s", u.speed_m_per_s},
                    {"cost_alpha", u.cost_alpha},
                    {"container_tare_gm", u.container_tare_gm},
                    {"ballast_gm", u.ballast_gm}});
  }
  json fleet = json::object();
  for (const auto& [id, n] : cat.fleet_bound) fleet[id] = n;
  return {{"schema_version", cat.schema_version},
          {"devices", devices},
          {"cloudlets", cloudlets},
          {"uavs", uavs},
          {"fleet_bound", fleet},
          {"calibration", to_json(cat.calibration)}};
}

std::string serialize_catalog(const Catalog& catalog) { return to_json(catalog).dump(2) + "\n"; }

std::vector<std::string> validate_catalog(const Catalog& cat) {
  std::vector<std::string> f;
  auto fail = [&](std::string msg) { f.push_back(std::move(msg)); };
  auto num = [](double v) {
    std::ostringstream s;
    s << v;
    return s.str();
  };

  if (cat.devices.empty()) fail("no devices defined");
  if (cat.cloudlets.empty()) fail("no cloudlets defined");
  if (cat.uavs.empty()) fail("no UAVs defined");

  std::set<std::string> ids;
  for (const auto& d : cat.devices) {
    if (!ids.insert(d.id).second) fail("device id '" + d.id + "' is not unique");
    if (!(d.unit_weight_gm > 0)) fail("device '" + d.id + "': unit_weight_gm must be > 0");
  }

  ids.clear();
  for (const auto& c : cat.cloudlets) {
    const std::string who = "cloudlet '" + c.id + "'";
    if (!ids.insert(c.id).second) fail("cloudlet id '" + c.id + "' is not unique");
    if (c.category < 1 || c.category > 4) fail(who + ": category must be 1..4");
    if (c.payload_weight_gm > c.class_weight_gm()) {
      fail(who + ": payload_weight_gm " + num(c.payload_weight_gm) + " exceeds class bound " +
           num(c.class_weight_gm()));
    }
    if (c.devices.empty()) fail(who + ": no devices");
    bool resolved = true;
    for (const auto& dc : c.devices) {
      if (!cat.find_device(dc.device_id)) {
        fail(who + ": unknown device '" + dc.device_id + "'");
        resolved = false;
      }
      if (dc.count <= 0) fail(who + ": device count for '" + dc.device_id + "' must be > 0");
    }
    if (resolved) {
      double sum = cat.device_weight_gm(c);
      if (sum > c.payload_weight_gm) {
        fail(who + ": device weight " + num(sum) + " exceeds payload_weight_gm " + num(c.payload_weight_gm));
      }
      if (c.component_weight_gm != 0.0 && std::abs(sum - c.component_weight_gm) > 1e-9) {
        fail(who + ": component_weight_gm " + num(c.component_weight_gm) + " does not match device sum " +
             num(sum));
      }
    }
    if (c.capacity_users.low <= 0 || c.capacity_users.high <= 0) fail(who + ": capacity bounds must be > 0");
    if (c.capacity_users.low > c.capacity_users.high) fail(who + ": capacity low exceeds high");
    if (!(c.batch_latency_s > 0)) fail(who + ": batch_latency_s must be > 0");
    if (!(c.cost_beta >= 0)) fail(who + ": cost_beta must be >= 0");
  }

  ids.clear();
  for (const auto& u : cat.uavs) {
    const std::string who = "uav '" + u.id + "'";
    if (!ids.insert(u.id).second) fail("uav id '" + u.id + "' is not unique");
    if (!(u.max_payload_gm > 0)) fail(who + ": max_payload_gm must be > 0");
    if (u.endurance_points.empty()) fail(who + ": endurance_points is empty");
    for (std::size_t i = 0; i < u.endurance_points.size(); ++i) {
      const auto& p = u.endurance_points[i];
      if (!(p.seconds > 0)) fail(who + ": endurance seconds must be > 0");
      if (i > 0) {
        const auto& prev = u.endurance_points[i - 1];
        if (!(p.payload_gm > prev.payload_gm)) fail(who + ": endurance payloads must be strictly increasing");
        if (p.seconds > prev.seconds) fail(who + ": endurance must be non-increasing in payload");
      }
    }
    if (!(u.speed_m_per_s > 0)) fail(who + ": speed_m_per_s must be > 0");
    if (!(u.cost_alpha >= 0)) fail(who + ": cost_alpha must be >= 0");
    if (u.container_tare_gm < 0) fail(who + ": container_tare_gm must be >= 0");
    if (u.ballast_gm < 0) fail(who + ": ballast_gm must be >= 0");
    if (u.modality != Modality::underwater && u.ballast_gm != 0) fail(who + ": ballast is only valid underwater");
  }

  for (const auto& [id, n] : cat.fleet_bound) {
    if (!cat.find_uav(id)) fail("fleet_bound references unknown uav '" + id + "'");
    if (n <= 0) fail("fleet_bound for '" + id + "' must be a positive integer");
  }

  for (const auto& c : cat.cloudlets) {
    bool fits = std::any_of(cat.uavs.begin(), cat.uavs.end(),
                            [&](const UavSpec& u) { return c.payload_weight_gm <= u.max_payload_gm; });
    if (!fits && !cat.uavs.empty()) fail("cloudlet '" + c.id + "' fits no UAV");
  }

  for (const auto& lc : cat.calibration.load_curves) {
    const std::string who = "load curve '" + lc.device_id + "'";
    if (!cat.find_device(lc.device_id)) fail(who + ": unknown device");
    if (lc.anchors.size() < 2) fail(who + ": needs at least two anchors");
    for (std::size_t i = 1; i < lc.anchors.size(); ++i) {
      if (lc.anchors[i].users <= lc.anchors[i - 1].users) fail(who + ": anchor users must be strictly increasing");
      if (lc.anchors[i].response_ms < lc.anchors[i - 1].response_ms) {
        fail(who + ": response_ms must be non-decreasing in users");
      }
    }
    if (!(lc.battery_hours_at_100_users > 0)) fail(who + ": battery_hours_at_100_users must be > 0");
  }

  const auto& cal = cat.calibration;
  for (const auto& l : cal.links) {
    if (l.per_job_success_p < 0 || l.per_job_success_p > 1) fail("link success_p must lie in [0,1]");
    if (l.latency_multiplier < 1) fail("link latency_multiplier must be >= 1");
    if (depth_rank(l.regime) == 0 && l.per_job_success_p != 1.0) {
      fail(std::string("link ") + std::string(to_string(l.regime)) + " must have success_p 1.0");
    }
  }
  for (Role role : {Role::master, Role::workers}) {
    const LinkModel* prev = nullptr;
    for (Regime reg : {Regime::surface, Regime::depth1, Regime::depth2}) {
      const LinkModel* cur = cal.link(reg, role);
      if (prev && cur) {
        if (cur->per_job_success_p > prev->per_job_success_p || cur->latency_multiplier < prev->latency_multiplier) {
          fail(std::string("link quality must degrade with depth for role ") + std::string(to_string(role)));
        }
      }
      if (cur) prev = cur;
    }
  }
  if (!(cal.idle_cap_hours > 0)) fail("idle_cap_hours must be > 0");
  if (!(cal.unballasted_factor > 0 && cal.unballasted_factor <= 1)) fail("unballasted_factor must lie in (0,1]");
  if (!(cal.battery_floor >= 0 && cal.battery_floor < 1)) fail("battery_floor must lie in [0,1)");
  if (!(cal.interval_fraction > 0 && cal.interval_fraction <= 1)) fail("interval_fraction must lie in (0,1]");
  return f;
}

const Catalog& default_catalog() {
  static const Catalog catalog = load_catalog(default_catalog_document());
  return catalog;
}

}  // namespace geese
