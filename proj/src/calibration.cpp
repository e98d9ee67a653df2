#include "geese/calibration.hpp"

#include <algorithm>

namespace geese {

std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::surface: return "surface";
    case Regime::encased_dry: return "encased_dry";
    case Regime::depth1: return "depth1";
    case Regime::depth2: return "depth2";
  }
  return "surface";
}

std::string_view to_string(Role r) { return r == Role::master ? "master" : "workers"; }

std::optional<Regime> parse_regime(std::string_view s) {
  if (s == "surface") return Regime::surface;
  if (s == "encased_dry" || s == "encased" || s == "dry") return Regime::encased_dry;
  if (s == "depth1") return Regime::depth1;
  if (s == "depth2") return Regime::depth2;
  return std::nullopt;
}

std::optional<Role> parse_role(std::string_view s) {
  if (s == "master") return Role::master;
  if (s == "workers" || s == "worker") return Role::workers;
  return std::nullopt;
}

const LoadCurve* Calibration::load_curve(std::string_view device_id) const {
  auto it = std::find_if(load_curves.begin(), load_curves.end(),
                         [&](const LoadCurve& c) { return c.device_id == device_id; });
  return it == load_curves.end() ? nullptr : &*it;
}

const LinkModel* Calibration::link(Regime regime, Role role) const {
  auto it = std::find_if(links.begin(), links.end(),
                         [&](const LinkModel& l) { return l.regime == regime && l.role == role; });
  return it == links.end() ? nullptr : &*it;
}

}  // namespace geese
