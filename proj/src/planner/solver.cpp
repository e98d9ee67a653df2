#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "geese/errors.hpp"
#include "geese/planner.hpp"

namespace geese::planner {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double cost_tolerance(double c) { return 1e-9 * std::max(1.0, std::abs(c)); }

// Depth-first branch and bound over the active variables. Each level fixes
// one variable, largest count first. A node is cut when the fractional
// knapsack bound on the remaining capacity cannot beat the incumbent, when
// the remaining capacity or the most favourable response mix cannot reach
// feasibility, or as soon as the partial selection (remaining variables at
// zero) is feasible, since every extension costs at least as much and
// weighs more.
class BranchAndBound {
 public:
  explicit BranchAndBound(const AllocationModel& m) : m_(m) {
    for (std::size_t i = 0; i < m.variables.size(); ++i) {
      if (m.variables[i].upper_bound > 0) active_.push_back(i);
    }
    need_ = m.max_workload();
    tau_ = m.request.response_bound_ms;
    x_.assign(m.variables.size(), 0);
    used_.assign(m.fleet_bound.size(), 0);

    const std::size_t n = active_.size();
    by_ratio_.resize(n + 1);
    best_excess_.assign(n + 1, std::vector<double>(m.fleet_bound.size(), 0.0));
    for (std::size_t k = n; k-- > 0;) {
      std::vector<std::size_t> order(active_.begin() + static_cast<std::ptrdiff_t>(k), active_.end());
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return ratio(m.variables[a]) < ratio(m.variables[b]);
      });
      by_ratio_[k] = std::move(order);
      best_excess_[k] = best_excess_[k + 1];
      const Variable& v = m.variables[active_[k]];
      best_excess_[k][v.uav] = std::min(best_excess_[k][v.uav], v.min_response_ms - tau_);
    }
  }

  Outcome run() {
    if (!m_.structural.empty()) return diagnose(m_);
    dfs(0, true);
    if (!best_) return diagnose(m_);
    Plan p = make_plan(m_, *best_);
    p.certificate = Certificate::optimal;
    return p;
  }

 private:
  static double ratio(const Variable& v) {
    return v.capacity > 0 ? v.unit_cost / v.capacity : kInf;
  }

  bool better_than_incumbent_possible(double lb) const {
    return !best_ || cost_ + lb <= best_eval_.total_cost + cost_tolerance(best_eval_.total_cost);
  }

  // Cheapest fractional completion covering the remaining capacity; +inf
  // when the remaining variables cannot cover it at all.
  double capacity_bound(std::size_t k) const {
    int remaining = need_ - capacity_;
    if (remaining <= 0) return 0.0;
    double lb = 0.0;
    for (std::size_t idx : by_ratio_[k]) {
      const Variable& v = m_.variables[idx];
      const int avail = std::min(v.upper_bound, m_.fleet_bound[v.uav] - used_[v.uav]);
      if (avail <= 0 || v.capacity <= 0) continue;
      const int take = std::min(remaining, avail * v.capacity);
      lb += take * ratio(v);
      remaining -= take;
      if (remaining <= 0) return lb;
    }
    return kInf;
  }

  bool response_reachable(std::size_t k) const {
    if (need_ == 0) return true;
    double best = excess_;
    for (std::size_t u = 0; u < used_.size(); ++u) {
      const double d = best_excess_[k][u];
      if (d < 0) best += d * (m_.fleet_bound[u] - used_[u]);
    }
    return best <= cost_tolerance(tau_) * std::max(1, units_);
  }

  bool quick_feasible() const {
    if (capacity_ < need_) return false;
    if (units_ == 0) return need_ == 0;
    return excess_ <= cost_tolerance(tau_) * units_;
  }

  void consider_partial() {
    Evaluation e = evaluate(m_, x_);
    if (!e.feasible()) return;
    found_ = true;
    if (!best_ || preferred(e, x_, best_eval_, *best_)) {
      best_ = x_;
      best_eval_ = std::move(e);
    }
  }

  void dfs(std::size_t k, bool changed) {
    if (changed && quick_feasible()) {
      found_ = false;
      consider_partial();
      if (found_) return;
    }
    if (k == active_.size()) return;

    double lb = capacity_bound(k);
    if (lb == kInf) return;
    if (!better_than_incumbent_possible(lb)) return;
    if (!response_reachable(k)) return;

    const std::size_t idx = active_[k];
    const Variable& v = m_.variables[idx];
    const int maxv = std::min(v.upper_bound, m_.fleet_bound[v.uav] - used_[v.uav]);
    for (int n = maxv; n >= 0; --n) {
      apply(idx, n);
      dfs(k + 1, n > 0);
      apply(idx, -n);
    }
  }

  void apply(std::size_t idx, int delta) {
    if (delta == 0) return;
    const Variable& v = m_.variables[idx];
    x_[idx] += delta;
    used_[v.uav] += delta;
    capacity_ += delta * v.capacity;
    cost_ += delta * v.unit_cost;
    excess_ += delta * (v.min_response_ms - tau_);
    units_ += delta;
  }

  const AllocationModel& m_;
  std::vector<std::size_t> active_;
  std::vector<std::vector<std::size_t>> by_ratio_;
  std::vector<std::vector<double>> best_excess_;  // [level][uav], min over later variables, capped at 0
  Selection x_;
  std::vector<int> used_;
  int need_ = 0;
  double tau_ = 0.0;
  int capacity_ = 0;
  int units_ = 0;
  double cost_ = 0.0;
  double excess_ = 0.0;
  bool found_ = false;
  std::optional<Selection> best_;
  Evaluation best_eval_;
};

// Number of count vectors for one UAV with per-variable bounds and a shared
// fleet bound.
double uav_space(const std::vector<int>& bounds, int fleet) {
  std::vector<double> ways(static_cast<std::size_t>(fleet) + 1, 0.0);
  ways[0] = 1.0;
  for (int ub : bounds) {
    std::vector<double> next(ways.size(), 0.0);
    for (std::size_t s = 0; s < ways.size(); ++s) {
      if (ways[s] == 0.0) continue;
      for (int v = 0; v <= ub && s + static_cast<std::size_t>(v) < ways.size(); ++v) next[s + v] += ways[s];
    }
    ways = std::move(next);
  }
  return std::accumulate(ways.begin(), ways.end(), 0.0);
}

}  // namespace

Outcome solve(const AllocationModel& model) { return BranchAndBound(model).run(); }

double oracle_search_space(const AllocationModel& model) {
  double total = 1.0;
  for (std::size_t u = 0; u < model.fleet_bound.size(); ++u) {
    std::vector<int> bounds;
    for (const auto& v : model.variables) {
      if (v.uav == u && v.upper_bound > 0) bounds.push_back(v.upper_bound);
    }
    total *= uav_space(bounds, model.fleet_bound[u]);
  }
  return total;
}

Outcome oracle_enumerate(const AllocationModel& model, double limit) {
  const double space = oracle_search_space(model);
  if (space > limit) throw SearchSpaceTooLarge(space, limit);

  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < model.variables.size(); ++i) {
    if (model.variables[i].upper_bound > 0) active.push_back(i);
  }
  const int need = model.max_workload();
  const double tau = model.request.response_bound_ms;
  bool all_fixed = std::none_of(active.begin(), active.end(),
                                [&](std::size_t i) { return model.variables[i].load_dependent; });

  Selection x(model.variables.size(), 0);
  std::vector<int> used(model.fleet_bound.size(), 0);
  std::optional<Selection> best;
  Evaluation best_eval;
  int capacity = 0;
  int units = 0;
  double cost = 0.0;
  double response_sum = 0.0;

  // Running sums only filter out candidates that are certainly infeasible
  // or certainly worse; every survivor goes through the full evaluation.
  auto leaf = [&] {
    if (capacity < need) return;
    if (units == 0 && need > 0) return;
    if (all_fixed && units > 0 && response_sum > units * (tau + cost_tolerance(tau))) return;
    if (best && cost > best_eval.total_cost + 1e-6 * std::max(1.0, best_eval.total_cost)) return;
    Evaluation e = evaluate(model, x);
    if (!e.feasible()) return;
    if (!best || preferred(e, x, best_eval, *best)) {
      best = x;
      best_eval = std::move(e);
    }
  };

  auto rec = [&](auto&& self, std::size_t k) -> void {
    if (k == active.size()) {
      leaf();
      return;
    }
    const std::size_t idx = active[k];
    const Variable& v = model.variables[idx];
    const int maxv = std::min(v.upper_bound, model.fleet_bound[v.uav] - used[v.uav]);
    for (int n = 0; n <= maxv; ++n) {
      x[idx] = n;
      used[v.uav] += n;
      capacity += n * v.capacity;
      units += n;
      cost += n * v.unit_cost;
      response_sum += n * v.min_response_ms;
      self(self, k + 1);
      used[v.uav] -= n;
      capacity -= n * v.capacity;
      units -= n;
      cost -= n * v.unit_cost;
      response_sum -= n * v.min_response_ms;
    }
    x[idx] = 0;
  };
  rec(rec, 0);

  if (!best) return diagnose(model);
  Plan p = make_plan(model, *best);
  p.certificate = Certificate::optimal;
  return p;
}

Outcome plan_multi_leg(const DeploymentRequest& request, const Catalog& catalog) {
  return solve(build_model(request, catalog));
}

}  // namespace geese::planner
