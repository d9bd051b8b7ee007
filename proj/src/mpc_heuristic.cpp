#include <algorithm>
#include <chrono>

#include "ridemp/mpc.hpp"

namespace ridemp {

ServeResult serve_greedy(const MpcInstance& in, const std::vector<int>& choice, const std::vector<int>& relocate) {
  const int z = in.zones(), horizon = in.horizon(), patience = in.patience();
  ServeResult out;
  out.solution = MpcSolution(in);
  MpcSolution& s = out.solution;
  s.choice = choice;
  s.relocate = relocate;
  out.shortfall.assign(static_cast<std::size_t>(z) * horizon, 0);
  out.feasible = true;

  std::vector<int> remaining(static_cast<std::size_t>(z) * z * horizon, 0);
  auto rem = [&](int i, int j, int t0) -> int& {
    return remaining[(static_cast<std::size_t>(i) * z + j) * horizon + t0];
  };
  std::vector<int> arrivals(static_cast<std::size_t>(horizon) * z, 0);
  std::vector<int> carry(z, 0);
  double obj = 0.0;

  for (int t = 0; t < horizon; ++t) {
    for (int i = 0; i < z; ++i)
      for (int j = 0; j < z; ++j) {
        s.v(i, j, t) = in.demand(s.k(i, t), i, j, t);
        rem(i, j, t) = s.v(i, j, t);
      }
    for (int i = 0; i < z; ++i) {
      int left = in.idle(i, t) + arrivals[static_cast<std::size_t>(t) * z + i] + carry[i];
      // Guaranteed requests by deadline first, then the optional tail.
      for (int pass = 0; pass < 2; ++pass) {
        for (int t0 = std::max(0, t - patience + 1); t0 <= t; ++t0) {
          if (in.mandatory(t0) != (pass == 0)) continue;
          for (int j = 0; j < z && left > 0; ++j) {
            const int x = std::min(rem(i, j, t0), left);
            if (x == 0) continue;
            rem(i, j, t0) -= x;
            left -= x;
            s.xp(i, j, t0, t) = x;
            obj += in.service_weight(t0, t) * x;
            const int arrive = t + in.lambda(i, j);
            if (arrive < horizon) arrivals[static_cast<std::size_t>(arrive) * z + j] += x;
          }
        }
      }
      int back = 0;
      for (int t0 = std::max(0, t - patience + 1); t0 <= t; ++t0) {
        for (int j = 0; j < z; ++j) {
          back += rem(i, j, t0);
          if (in.mandatory(t0) && in.last_pickup(t0) == t && rem(i, j, t0) > 0) {
            out.feasible = false;
            out.shortfall[static_cast<std::size_t>(i) * horizon + t0] += rem(i, j, t0);
          }
        }
      }
      int reloc = 0;
      for (int j = 0; j < z; ++j) {
        if (j == i) continue;
        const int x = s.xr(i, j, t);
        if (x == 0) continue;
        reloc += x;
        obj -= in.relocation_weight(i, j, t) * x;
        const int arrive = t + in.lambda(i, j);
        if (arrive < horizon) arrivals[static_cast<std::size_t>(arrive) * z + j] += x;
      }
      if (s.xr(i, i, t) != 0 || reloc > left || (reloc > 0 && back > 0)) out.feasible = false;
      carry[i] = std::max(0, left - reloc);
    }
  }
  s.objective = obj;
  return out;
}

namespace {

class LocalSearch {
 public:
  LocalSearch(const MpcInstance& in, const HeuristicLimits& limits)
      : in_(in), limits_(limits), start_(std::chrono::steady_clock::now()) {}

  bool exhausted() {
    if (limits_.max_evaluations > 0 && evaluations_ >= limits_.max_evaluations) return true;
    if (limits_.max_seconds > 0) {
      const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start_;
      if (dt.count() > limits_.max_seconds) return true;
    }
    return false;
  }

  ServeResult evaluate(const std::vector<int>& choice, const std::vector<int>& relocate) {
    ++evaluations_;
    return serve_greedy(in_, choice, relocate);
  }

  // Lower the multiplier of the most oversubscribed (i, t) until feasible.
  ServeResult construct() {
    const int z = in_.zones(), horizon = in_.horizon(), last = in_.multiplier_count() - 1;
    std::vector<int> choice(static_cast<std::size_t>(z) * horizon, 0);
    std::vector<int> relocate(static_cast<std::size_t>(z) * z * horizon, 0);
    for (;;) {
      auto r = evaluate(choice, relocate);
      if (r.feasible) return r;
      std::size_t worst = 0;
      int worst_short = -1;
      for (std::size_t c = 0; c < r.shortfall.size(); ++c) {
        if (choice[c] < last && r.shortfall[c] > worst_short) {
          worst_short = r.shortfall[c];
          worst = c;
        }
      }
      if (worst_short <= 0) {
        // Shortfall attributed to cells already at the zero multiplier;
        // fall back to pricing everything out.
        auto po = priced_out_solution(in_);
        return evaluate(po.choice, po.relocate);
      }
      ++choice[worst];
    }
  }

  bool try_accept(ServeResult& best, std::vector<int>& choice, std::vector<int>& relocate) {
    auto r = evaluate(choice, relocate);
    if (r.feasible && r.solution.objective > best.solution.objective + 1e-12) {
      best = std::move(r);
      return true;
    }
    return false;
  }

  ServeResult improve(ServeResult best) {
    const int z = in_.zones(), horizon = in_.horizon();
    bool improved = true;
    while (improved && !exhausted()) {
      improved = false;
      std::vector<int> choice = best.solution.choice;
      std::vector<int> relocate = best.solution.relocate;
      auto xr = [&](int i, int j, int t) -> int& {
        return relocate[(static_cast<std::size_t>(i) * z + j) * horizon + t];
      };

      // Raise one multiplier, alone or paired with one unit relocated in.
      for (int i = 0; i < z && !improved && !exhausted(); ++i)
        for (int t = 0; t < horizon && !improved; ++t) {
          int& k = choice[static_cast<std::size_t>(i) * horizon + t];
          if (k == 0) continue;
          --k;
          if (try_accept(best, choice, relocate)) {
            improved = true;
            break;
          }
          for (int j = 0; j < z && !improved; ++j) {
            if (j == i) continue;
            for (int t1 = 0; t1 + in_.lambda(j, i) <= t && !improved; ++t1) {
              ++xr(j, i, t1);
              if (try_accept(best, choice, relocate)) improved = true;
              else --xr(j, i, t1);
            }
          }
          if (!improved) ++k;
        }
      if (improved) continue;

      // Add one relocation unit.
      for (int i = 0; i < z && !improved && !exhausted(); ++i)
        for (int j = 0; j < z && !improved; ++j) {
          if (i == j) continue;
          for (int t = 0; t + in_.lambda(i, j) < horizon && !improved; ++t) {
            ++xr(i, j, t);
            if (try_accept(best, choice, relocate)) improved = true;
            else --xr(i, j, t);
          }
        }
      if (improved) continue;

      // Remove or shift one relocation unit.
      for (int i = 0; i < z && !improved && !exhausted(); ++i)
        for (int j = 0; j < z && !improved; ++j)
          for (int t = 0; t < horizon && !improved; ++t) {
            if (i == j || xr(i, j, t) == 0) continue;
            --xr(i, j, t);
            if (try_accept(best, choice, relocate)) {
              improved = true;
              break;
            }
            for (int j2 = 0; j2 < z && !improved; ++j2) {
              if (j2 == i || j2 == j) continue;
              ++xr(i, j2, t);
              if (try_accept(best, choice, relocate)) improved = true;
              else --xr(i, j2, t);
            }
            for (int dt : {-1, 1}) {
              const int t2 = t + dt;
              if (improved || t2 < 0 || t2 >= horizon) continue;
              ++xr(i, j, t2);
              if (try_accept(best, choice, relocate)) improved = true;
              else --xr(i, j, t2);
            }
            if (!improved) ++xr(i, j, t);
          }
    }
    return best;
  }

  std::int64_t evaluations() const { return evaluations_; }

 private:
  const MpcInstance& in_;
  HeuristicLimits limits_;
  std::int64_t evaluations_ = 0;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

MpcSolution solve_heuristic(const MpcInstance& instance, const HeuristicLimits& limits) {
  LocalSearch search(instance, limits);
  auto best = search.improve(search.construct());
  MpcSolution out = std::move(best.solution);
  out.objective = compute_objective(instance, out);
  out.status = SolveStatus::kBudgetFeasible;
  out.nodes = search.evaluations();
  return out;
}

}  // namespace ridemp
