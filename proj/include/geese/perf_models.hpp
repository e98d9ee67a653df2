#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "geese/catalog.hpp"

// Calibrated performance models. All functions are pure over immutable
// calibration data.
namespace geese::perf {

struct EnduranceCurve {
  std::string owner;
  std::vector<EndurancePoint> points;

  double min_payload() const { return points.front().payload_gm; }
  double max_payload() const { return points.back().payload_gm; }

  // Piecewise-linear through the points; DomainError outside them.
  double at(double payload_gm) const;
};

EnduranceCurve endurance_curve(const UavSpec& uav);

// Operational seconds per battery interval (10% by default) at the payload.
double operational_time(const UavSpec& uav, double payload_gm);

inline constexpr int kMinBenchmarkUsers = 1;
inline constexpr int kMaxBenchmarkUsers = 100;

// Milliseconds per request with `users` concurrent clients. Affine through
// the anchors, extended along the end segments to the benchmarked [1, 100].
double response_time_at_load(const LoadCurve& curve, int users);
double response_time_at_load(const Catalog& catalog, std::string_view device_id, int users);

// Hours of service at a constant load: energy-proportional to the
// 100-user measurement, capped at `idle_cap_hours`.
double battery_duration(const LoadCurve& curve, int users, double idle_cap_hours);
double battery_duration(const Catalog& catalog, std::string_view device_id, int users);

LinkModel link_model(const Calibration& calibration, Regime regime, Role role);
LinkModel link_model(Regime regime, Role role);  // shipped calibration

enum class Fragmentation { tight, loose };
enum class Quality { high, low };
enum class Quadrant { I, II, III, IV };

std::string_view to_string(Quadrant q);

struct AppProfile {
  std::string name;
  Fragmentation fragmentation_tolerance = Fragmentation::tight;
  Quality quality_need = Quality::high;
};

// Quadrants follow the usual orientation with tight fragmentation on the
// left and high service quality on top.
Quadrant classify_app(const AppProfile& profile);
std::span<const AppProfile> app_presets();
const AppProfile* find_app_preset(std::string_view name);

// Benchmark workload: each request is a list of 20 integers drawn
// uniformly from [100000, 105000].
inline constexpr std::size_t kPrimeTaskLength = 20;
inline constexpr std::int64_t kPrimeTaskLow = 100000;
inline constexpr std::int64_t kPrimeTaskHigh = 105000;
using PrimeRequest = std::array<std::int64_t, kPrimeTaskLength>;

std::vector<PrimeRequest> generate_prime_task(std::size_t count, std::uint64_t seed);
bool is_prime(std::int64_t n);
// The cloudlet-side work for one request: the primes it contains, in order.
std::vector<std::int64_t> detect_primes(std::span<const std::int64_t> numbers);

}  // namespace geese::perf
