#include <doctest.h>

#include <set>

#include "../support/oracles.hpp"
#include "geese/errors.hpp"
#include "geese/perf_models.hpp"

using namespace geese;
using namespace geese::perf;

namespace {
const UavSpec& uav(const char* id) { return *default_catalog().find_uav(id); }
const LoadCurve& curve(const char* id) { return *default_catalog().calibration.load_curve(id); }
}  // namespace

TEST_CASE("endurance anchors are exact") {
  CHECK(operational_time(uav("powereye"), 100) == 146.0);
  CHECK(operational_time(uav("powereye"), 400) == 109.0);
  CHECK(operational_time(uav("phantom3"), 100) == 91.0);
  CHECK(operational_time(uav("phantom3"), 400) == 64.0);
  CHECK(operational_time(uav("powerray"), 100) == 1064.0);
  CHECK(operational_time(uav("powerray"), 400) == 473.0);
}

TEST_CASE("endurance interpolates linearly between anchors") {
  CHECK(operational_time(uav("powereye"), 250) == doctest::Approx(oracle::interpolate(100, 146, 400, 109, 250)));
  CHECK(operational_time(uav("powereye"), 250) == doctest::Approx(127.5));
  CHECK(operational_time(uav("powerray"), 175) == doctest::Approx(oracle::interpolate(100, 1064, 400, 473, 175)));
}

TEST_CASE("endurance is non-increasing across the domain") {
  for (const auto& u : default_catalog().uavs) {
    CAPTURE(u.id);
    double prev = operational_time(u, 100);
    for (int p = 101; p <= 400; ++p) {
      const double t = operational_time(u, p);
      CHECK(t <= prev);
      prev = t;
    }
  }
}

TEST_CASE("endurance refuses to extrapolate") {
  CHECK_THROWS_AS(operational_time(uav("powereye"), 99.9), DomainError);
  CHECK_THROWS_AS(operational_time(uav("powereye"), 401), DomainError);
}

TEST_CASE("load curve anchors and midpoint") {
  CHECK(response_time_at_load(curve("galaxy-s5"), 20) == 371.0);
  CHECK(response_time_at_load(curve("galaxy-s5"), 90) == 1149.0);
  CHECK(response_time_at_load(curve("galaxy-s5"), 55) == doctest::Approx(oracle::interpolate(20, 371, 90, 1149, 55)));
  CHECK(response_time_at_load(curve("galaxy-s5"), 55) == doctest::Approx(760.0));
  const double ratio = response_time_at_load(curve("rpi4b"), 90) / response_time_at_load(curve("rpi4b"), 20);
  CHECK(ratio == doctest::Approx(2.5).epsilon(0.02));
  CHECK(response_time_at_load(curve("rpi4b"), 90) < response_time_at_load(curve("galaxy-s5"), 90));
}

TEST_CASE("load curve is non-decreasing over the benchmark range") {
  for (const auto& lc : default_catalog().calibration.load_curves) {
    double prev = 0.0;
    for (int n = 1; n <= 100; ++n) {
      const double ms = response_time_at_load(lc, n);
      CHECK(ms >= prev);
      prev = ms;
    }
  }
}

TEST_CASE("load curve domain is [1, 100]") {
  CHECK_THROWS_AS(response_time_at_load(curve("galaxy-s5"), 0), DomainError);
  CHECK_THROWS_AS(response_time_at_load(curve("galaxy-s5"), 101), DomainError);
  CHECK_THROWS_AS(response_time_at_load(default_catalog(), "nexus5", 10), DomainError);
}

TEST_CASE("battery duration") {
  const Catalog& c = default_catalog();
  CHECK(battery_duration(c, "galaxy-s5", 100) == 11.0);
  CHECK(battery_duration(c, "rpi4b", 100) == 4.0);
  CHECK(battery_duration(c, "galaxy-s5", 50) == doctest::Approx(11.0 * 100 / 50));
  CHECK(battery_duration(c, "galaxy-s5", 1) == c.calibration.idle_cap_hours);
  CHECK_THROWS_AS(battery_duration(c, "galaxy-s5", 0), DomainError);
  for (int a = 1; a < 100; ++a) CHECK(battery_duration(c, "rpi4b", a) >= battery_duration(c, "rpi4b", a + 1));
}

TEST_CASE("link models") {
  CHECK(link_model(Regime::encased_dry, Role::workers).per_job_success_p == 1.0);
  CHECK(link_model(Regime::surface, Role::master).per_job_success_p == 1.0);
  const LinkModel m2 = link_model(Regime::depth2, Role::master);
  CHECK(m2.per_job_success_p == 0.62);
  CHECK(m2.latency_multiplier == 3.0);
  CHECK(link_model(Regime::depth2, Role::workers).per_job_success_p == 0.70);
  CHECK(link_model(Regime::depth1, Role::master).per_job_success_p == 0.90);
  CHECK(link_model(Regime::depth1, Role::workers).per_job_success_p == 1.0);
}

TEST_CASE("links degrade monotonically and the master suffers more") {
  const Regime order[] = {Regime::surface, Regime::encased_dry, Regime::depth1, Regime::depth2};
  for (Role role : {Role::master, Role::workers}) {
    for (std::size_t i = 0; i + 1 < std::size(order); ++i) {
      const LinkModel a = link_model(order[i], role);
      const LinkModel b = link_model(order[i + 1], role);
      CHECK(b.per_job_success_p <= a.per_job_success_p);
      CHECK(b.latency_multiplier >= a.latency_multiplier);
    }
  }
  for (Regime r : order) {
    CHECK(link_model(r, Role::master).per_job_success_p <= link_model(r, Role::workers).per_job_success_p);
  }
}

TEST_CASE("classify_app is total and injective") {
  CHECK(classify_app(*find_app_preset("YOLO")) == Quadrant::II);
  CHECK(classify_app(*find_app_preset("cache")) == Quadrant::IV);
  CHECK(classify_app(*find_app_preset("prime-detection")) == Quadrant::III);
  CHECK(classify_app(*find_app_preset("PocketSphinx")) == Quadrant::I);
  std::set<Quadrant> seen;
  for (auto f : {Fragmentation::tight, Fragmentation::loose}) {
    for (auto q : {Quality::high, Quality::low}) seen.insert(classify_app({"x", f, q}));
  }
  CHECK(seen.size() == 4);
}

TEST_CASE("prime task generator") {
  CHECK(generate_prime_task(0, 1).empty());
  const auto one = generate_prime_task(1, 1);
  REQUIRE(one.size() == 1);
  for (auto n : one[0]) {
    CHECK(n >= 100000);
    CHECK(n <= 105000);
  }
  CHECK(generate_prime_task(5, 42) == generate_prime_task(5, 42));
  CHECK(generate_prime_task(5, 42) != generate_prime_task(5, 43));
}

TEST_CASE("primality agrees with trial division") {
  CHECK(is_prime(100003));
  CHECK_FALSE(is_prime(100000));
  for (std::int64_t n = -5; n <= 105000; ++n) {
    if (n > 2000 && n < 100000) continue;
    REQUIRE(is_prime(n) == oracle::is_prime_by_trial(n));
  }
  const auto task = generate_prime_task(3, 9);
  for (const auto& req : task) {
    const auto primes = detect_primes(req);
    std::size_t expected = 0;
    for (auto n : req) expected += oracle::is_prime_by_trial(n) ? 1 : 0;
    CHECK(primes.size() == expected);
  }
}
