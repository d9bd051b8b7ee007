#include <algorithm>
#include <chrono>

#include "ridemp/mpc.hpp"

namespace ridemp {
namespace {

// Chronological depth-first search. Cells (i, t) are visited epoch by epoch;
// at each cell the search picks a multiplier, then pickups for every open
// request group (earliest deadline first), then relocations when the cell
// has no backlog. Arrivals only come from earlier epochs, so the supply at a
// cell is known when the cell is reached.
class ExactSearch {
 public:
  ExactSearch(const MpcInstance& instance, const MpcLimits& limits)
      : in_(instance),
        limits_(limits),
        z_(instance.zones()),
        horizon_(instance.horizon()),
        patience_(instance.patience()),
        cur_(instance),
        remaining_(static_cast<std::size_t>(z_) * z_ * horizon_, 0),
        arrivals_(static_cast<std::size_t>(horizon_) * z_, 0),
        carry_(z_, 0),
        start_(std::chrono::steady_clock::now()) {}

  void set_incumbent(const MpcSolution& s) {
    best_ = s;
    best_obj_ = s.objective;
    have_best_ = true;
  }

  MpcSolution run() {
    visit(0);
    MpcSolution out = best_;
    out.status = aborted_ ? SolveStatus::kBudgetFeasible : SolveStatus::kOptimal;
    out.nodes = nodes_;
    return out;
  }

 private:
  int& remaining(int i, int j, int t0) { return remaining_[(static_cast<std::size_t>(i) * z_ + j) * horizon_ + t0]; }
  int& arrivals(int t, int i) { return arrivals_[static_cast<std::size_t>(t) * z_ + i]; }

  bool tick() {
    if (aborted_) return false;
    ++nodes_;
    if (limits_.max_nodes > 0 && nodes_ > limits_.max_nodes) aborted_ = true;
    if (!aborted_ && limits_.max_seconds > 0 && (nodes_ & 1023) == 0) {
      const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start_;
      if (dt.count() > limits_.max_seconds) aborted_ = true;
    }
    return !aborted_;
  }

  // Upper bound on the objective still obtainable below a node at `cell`:
  // all remaining demand kept at the largest multiplier and served at the
  // earliest admissible epoch, relocations free.
  double upper_bound(int cell) {
    const int t = cell / z_, zone = cell % z_;
    double bound = cur_obj_;
    for (int i = 0; i < z_; ++i) {
      const int first = i < zone ? t + 1 : t;
      for (int t0 = 0; t0 < horizon_; ++t0) {
        const bool chosen = t0 < t || (t0 == t && i < zone);
        for (int j = 0; j < z_; ++j) {
          if (chosen) {
            const int r = remaining(i, j, t0);
            if (r == 0) continue;
            const int rho = std::max(t0, first);
            if (rho <= in_.last_pickup(t0)) bound += in_.service_weight(t0, rho) * r;
          } else {
            const int d = in_.demand(0, i, j, t0);
            if (d > 0) bound += in_.service_weight(t0, t0) * d;
          }
        }
      }
    }
    return bound;
  }

  void visit(int cell) {
    if (!tick()) return;
    if (cell == z_ * horizon_) {
      if (!have_best_ || cur_obj_ > best_obj_ + 1e-12) {
        best_ = cur_;
        best_obj_ = cur_obj_;
        best_.objective = cur_obj_;
        have_best_ = true;
      }
      return;
    }
    if (have_best_ && upper_bound(cell) <= best_obj_ + 1e-12) return;

    const int t = cell / z_, i = cell % z_;
    const int available = in_.idle(i, t) + arrivals(t, i) + carry_[i];

    std::vector<std::pair<int, int>> items;  // (t0, j), earliest deadline first
    for (int t0 = std::max(0, t - patience_ + 1); t0 <= t; ++t0)
      for (int j = 0; j < z_; ++j) items.emplace_back(t0, j);

    for (int k = 0; k < in_.multiplier_count(); ++k) {
      bool duplicate = false;
      // Multipliers that round to the same demand row are interchangeable.
      if (k > 0) {
        duplicate = true;
        for (int j = 0; j < z_ && duplicate; ++j) duplicate = in_.demand(k, i, j, t) == in_.demand(k - 1, i, j, t);
      }
      if (duplicate) continue;
      cur_.k(i, t) = k;
      for (int j = 0; j < z_; ++j) {
        cur_.v(i, j, t) = in_.demand(k, i, j, t);
        remaining(i, j, t) = cur_.v(i, j, t);
      }
      pick(cell, items, 0, available);
      if (aborted_) break;
    }
    for (int j = 0; j < z_; ++j) {
      remaining(i, j, t) = 0;
      cur_.v(i, j, t) = 0;
    }
    cur_.k(i, t) = 0;
  }

  void pick(int cell, const std::vector<std::pair<int, int>>& items, std::size_t idx, int left) {
    if (!tick()) return;
    const int t = cell / z_, i = cell % z_;
    if (idx == items.size()) {
      int back = 0;
      for (const auto& [t0, j] : items) back += remaining(i, j, t0);
      relocate(cell, 0, left, back > 0);
      return;
    }
    const auto [t0, j] = items[idx];
    int& r = remaining(i, j, t0);
    const bool deadline = in_.mandatory(t0) && in_.last_pickup(t0) == t;
    const int hi = std::min(r, left);
    const int lo = deadline ? r : 0;
    if (hi < lo) return;
    const double w = in_.service_weight(t0, t);
    const int arrive = t + in_.lambda(i, j);
    for (int x = hi; x >= lo; --x) {
      r -= x;
      cur_.xp(i, j, t0, t) = x;
      cur_obj_ += w * x;
      if (arrive < horizon_) arrivals(arrive, j) += x;
      pick(cell, items, idx + 1, left - x);
      if (arrive < horizon_) arrivals(arrive, j) -= x;
      cur_obj_ -= w * x;
      cur_.xp(i, j, t0, t) = 0;
      r += x;
      if (aborted_) return;
    }
  }

  void relocate(int cell, int j, int left, bool blocked) {
    if (!tick()) return;
    const int t = cell / z_, i = cell % z_;
    if (j == z_ || blocked || left == 0) {
      const int saved = carry_[i];
      carry_[i] = left;
      visit(cell + 1);
      carry_[i] = saved;
      return;
    }
    if (j == i) {
      relocate(cell, j + 1, left, blocked);
      return;
    }
    const double cost = in_.relocation_weight(i, j, t);
    const int arrive = t + in_.lambda(i, j);
    // Relocations that land after the horizon only cost.
    const int hi = arrive < horizon_ ? left : 0;
    for (int x = 0; x <= hi; ++x) {
      cur_.xr(i, j, t) = x;
      cur_obj_ -= cost * x;
      if (arrive < horizon_) arrivals(arrive, j) += x;
      relocate(cell, j + 1, left - x, blocked);
      if (arrive < horizon_) arrivals(arrive, j) -= x;
      cur_obj_ += cost * x;
      cur_.xr(i, j, t) = 0;
      if (aborted_) return;
    }
  }

  const MpcInstance& in_;
  MpcLimits limits_;
  int z_, horizon_, patience_;
  MpcSolution cur_;
  double cur_obj_ = 0.0;
  MpcSolution best_;
  double best_obj_ = 0.0;
  bool have_best_ = false;
  std::vector<int> remaining_;
  std::vector<int> arrivals_;
  std::vector<int> carry_;
  std::int64_t nodes_ = 0;
  bool aborted_ = false;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

MpcSolution solve_exact(const MpcInstance& instance, const MpcLimits& limits) {
  ExactSearch search(instance, limits);
  MpcSolution incumbent = priced_out_solution(instance);
  if (limits.seed_with_heuristic) {
    HeuristicLimits h;
    h.max_evaluations = limits.heuristic_evaluations;
    auto heuristic = solve_heuristic(instance, h);
    if (heuristic.objective > incumbent.objective) incumbent = std::move(heuristic);
  }
  search.set_incumbent(incumbent);
  auto out = search.run();
  out.objective = compute_objective(instance, out);
  return out;
}

}  // namespace ridemp
