#include "geese/perf_models.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "geese/errors.hpp"
#include "geese/rng.hpp"

namespace geese::perf {

namespace {

double lerp(double x0, double y0, double x1, double y1, double x) {
  if (x == x0) return y0;
  if (x == x1) return y1;
  return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
}

const LoadCurve& require_curve(const Catalog& catalog, std::string_view device_id) {
  const LoadCurve* curve = catalog.calibration.load_curve(device_id);
  if (!curve) throw DomainError("no load curve calibrated for device '" + std::string(device_id) + "'");
  return *curve;
}

void require_users(int users, std::string_view what) {
  if (users < kMinBenchmarkUsers || users > kMaxBenchmarkUsers) {
    throw DomainError(std::string(what) + ": " + std::to_string(users) +
                      " users is outside the benchmarked range [1, 100]");
  }
}

}  // namespace

double EnduranceCurve::at(double payload_gm) const {
  if (points.empty()) throw DomainError("endurance curve for '" + owner + "' has no points");
  if (!(payload_gm >= min_payload() && payload_gm <= max_payload())) {
    std::ostringstream msg;
    msg << "payload " << payload_gm << " gm is outside the measured range [" << min_payload() << ", "
        << max_payload() << "] of '" << owner << "'";
    throw DomainError(msg.str());
  }
  auto hi = std::lower_bound(points.begin(), points.end(), payload_gm,
                             [](const EndurancePoint& p, double x) { return p.payload_gm < x; });
  if (hi->payload_gm == payload_gm) return hi->seconds;
  auto lo = std::prev(hi);
  return lerp(lo->payload_gm, lo->seconds, hi->payload_gm, hi->seconds, payload_gm);
}

EnduranceCurve endurance_curve(const UavSpec& uav) { return {uav.id, uav.endurance_points}; }

double operational_time(const UavSpec& uav, double payload_gm) { return endurance_curve(uav).at(payload_gm); }

double response_time_at_load(const LoadCurve& curve, int users) {
  require_users(users, "response_time_at_load");
  const auto& a = curve.anchors;
  if (a.size() < 2) throw DomainError("load curve for '" + curve.device_id + "' needs two anchors");
  // Segment containing `users`, or the nearest end segment.
  std::size_t seg = 0;
  while (seg + 2 < a.size() && users > a[seg + 1].users) ++seg;
  double ms = lerp(a[seg].users, a[seg].response_ms, a[seg + 1].users, a[seg + 1].response_ms, users);
  return std::max(ms, 0.0);
}

double response_time_at_load(const Catalog& catalog, std::string_view device_id, int users) {
  return response_time_at_load(require_curve(catalog, device_id), users);
}

double battery_duration(const LoadCurve& curve, int users, double idle_cap_hours) {
  require_users(users, "battery_duration");
  double hours = curve.battery_hours_at_100_users * 100.0 / users;
  return std::min(hours, idle_cap_hours);
}

double battery_duration(const Catalog& catalog, std::string_view device_id, int users) {
  return battery_duration(require_curve(catalog, device_id), users, catalog.calibration.idle_cap_hours);
}

LinkModel link_model(const Calibration& calibration, Regime regime, Role role) {
  if (const LinkModel* l = calibration.link(regime, role)) return *l;
  if (depth_rank(regime) == 0) return {regime, role, 1.0, 1.0};
  throw DomainError("no link calibration for " + std::string(to_string(regime)) + "/" +
                    std::string(to_string(role)));
}

LinkModel link_model(Regime regime, Role role) { return link_model(default_catalog().calibration, regime, role); }

std::string_view to_string(Quadrant q) {
  switch (q) {
    case Quadrant::I: return "I";
    case Quadrant::II: return "II";
    case Quadrant::III: return "III";
    case Quadrant::IV: return "IV";
  }
  return "I";
}

Quadrant classify_app(const AppProfile& p) {
  const bool tight = p.fragmentation_tolerance == Fragmentation::tight;
  const bool high = p.quality_need == Quality::high;
  if (high) return tight ? Quadrant::II : Quadrant::I;
  return tight ? Quadrant::III : Quadrant::IV;
}

std::span<const AppProfile> app_presets() {
  static const std::array<AppProfile, 5> presets{{
      {"YOLO", Fragmentation::tight, Quality::high},
      {"PocketSphinx", Fragmentation::loose, Quality::high},
      {"Aeneas", Fragmentation::loose, Quality::low},
      {"prime-detection", Fragmentation::tight, Quality::low},
      {"cache", Fragmentation::loose, Quality::low},
  }};
  return presets;
}

const AppProfile* find_app_preset(std::string_view name) {
  for (const auto& p : app_presets()) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

std::vector<PrimeRequest> generate_prime_task(std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<PrimeRequest> out(count);
  for (auto& req : out) {
    for (auto& n : req) n = rng.uniform_int(kPrimeTaskLow, kPrimeTaskHigh);
  }
  return out;
}

bool is_prime(std::int64_t n) {
  if (n < 2) return false;
  if (n % 2 == 0) return n == 2;
  if (n % 3 == 0) return n == 3;
  for (std::int64_t d = 5; d * d <= n; d += 6) {
    if (n % d == 0 || n % (d + 2) == 0) return false;
  }
  return true;
}

std::vector<std::int64_t> detect_primes(std::span<const std::int64_t> numbers) {
  std::vector<std::int64_t> primes;
  std::copy_if(numbers.begin(), numbers.end(), std::back_inserter(primes), is_prime);
  return primes;
}

}  // namespace geese::perf
