#include "ridemp/mpc.hpp"

#include <algorithm>
#include <sstream>

namespace ridemp {

std::string to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::kShape: return "shape";
    case ViolationKind::kMultiplierChoice: return "multiplier-choice";
    case ViolationKind::kDemandLink: return "demand-link";
    case ViolationKind::kServiceGuarantee: return "service-guarantee";
    case ViolationKind::kServiceExcess: return "service-excess";
    case ViolationKind::kFlowBalance: return "flow-balance";
    case ViolationKind::kRelocationBacklog: return "relocation-backlog";
    case ViolationKind::kSelfRelocation: return "self-relocation";
    case ViolationKind::kPickupWindow: return "pickup-window";
    case ViolationKind::kNegative: return "negative";
  }
  return "unknown";
}

std::vector<ViolationKind> ViolationReport::kinds() const {
  std::vector<ViolationKind> out;
  for (const auto& v : violations)
    if (std::find(out.begin(), out.end(), v.kind) == out.end()) out.push_back(v.kind);
  return out;
}

int backlog(const MpcInstance& instance, const MpcSolution& s, int i, int t) {
  int total = 0;
  for (int j = 0; j < instance.zones(); ++j) {
    for (int t0 = std::max(0, t - instance.patience() + 1); t0 <= t; ++t0) {
      int left = s.v(i, j, t0);
      for (int rho = t0; rho <= t; ++rho) left -= s.xp(i, j, t0, rho);
      total += left;
    }
  }
  return total;
}

double compute_objective(const MpcInstance& instance, const MpcSolution& s) {
  double obj = 0.0;
  for (int i = 0; i < instance.zones(); ++i)
    for (int j = 0; j < instance.zones(); ++j)
      for (int t = 0; t < instance.horizon(); ++t) {
        for (int rho = t; rho <= instance.last_pickup(t); ++rho) {
          if (s.xp(i, j, t, rho) != 0) obj += instance.service_weight(t, rho) * s.xp(i, j, t, rho);
        }
        if (i != j && s.xr(i, j, t) != 0) obj -= instance.relocation_weight(i, j, t) * s.xr(i, j, t);
      }
  return obj;
}

ViolationReport validate_solution(const MpcInstance& instance, const MpcSolution& s) {
  ViolationReport report;
  auto add = [&](ViolationKind kind, int i, int j, int t, std::string detail) {
    report.violations.push_back({kind, i, j, t, std::move(detail)});
  };
  const int z = instance.zones(), horizon = instance.horizon(), patience = instance.patience();
  const auto zz = static_cast<std::size_t>(z), tt = static_cast<std::size_t>(horizon);
  if (s.zones != z || s.horizon != horizon || s.patience != patience || s.choice.size() != zz * tt ||
      s.relocate.size() != zz * zz * tt || s.served.size() != zz * zz * tt ||
      s.pickup.size() != zz * zz * tt * static_cast<std::size_t>(patience)) {
    add(ViolationKind::kShape, -1, -1, -1, "solution shape does not match instance");
    return report;
  }

  for (int i = 0; i < z; ++i)
    for (int t = 0; t < horizon; ++t) {
      const int k = s.k(i, t);
      if (k < 0 || k >= instance.multiplier_count()) {
        add(ViolationKind::kMultiplierChoice, i, -1, t, "multiplier index out of range");
        continue;
      }
      for (int j = 0; j < z; ++j)
        if (s.v(i, j, t) != instance.demand(k, i, j, t)) {
          add(ViolationKind::kDemandLink, i, j, t, "v differs from the selected demand option");
        }
    }

  bool negative = false;
  for (int x : s.relocate) negative = negative || x < 0;
  for (int x : s.pickup) negative = negative || x < 0;
  for (int x : s.served) negative = negative || x < 0;
  if (negative) add(ViolationKind::kNegative, -1, -1, -1, "negative decision value");

  for (int i = 0; i < z; ++i)
    for (int t = 0; t < horizon; ++t)
      if (s.xr(i, i, t) != 0) add(ViolationKind::kSelfRelocation, i, i, t, "self relocation");

  for (int i = 0; i < z; ++i)
    for (int j = 0; j < z; ++j)
      for (int t0 = 0; t0 < horizon; ++t0) {
        int total = 0;
        for (int rho = t0; rho < t0 + patience; ++rho) {
          if (rho > instance.last_pickup(t0)) {
            if (s.xp(i, j, t0, rho) != 0) add(ViolationKind::kPickupWindow, i, j, t0, "pickup beyond horizon");
            continue;
          }
          total += s.xp(i, j, t0, rho);
        }
        if (instance.mandatory(t0) && total != s.v(i, j, t0)) {
          std::ostringstream msg;
          msg << "served " << total << " of " << s.v(i, j, t0) << " guaranteed";
          add(total < s.v(i, j, t0) ? ViolationKind::kServiceGuarantee : ViolationKind::kServiceExcess, i, j, t0,
              msg.str());
        } else if (!instance.mandatory(t0) && total > s.v(i, j, t0)) {
          add(ViolationKind::kServiceExcess, i, j, t0, "served more than demand");
        }
      }

  // Flow balance with carry-forward of unused idle vehicles.
  std::vector<long> arrivals(zz * tt, 0);
  for (int i = 0; i < z; ++i)
    for (int j = 0; j < z; ++j)
      for (int t = 0; t < horizon; ++t) {
        const int arrive = t + instance.lambda(i, j);
        if (arrive >= horizon) continue;
        long in = i != j ? s.xr(i, j, t) : 0;
        for (int t0 = std::max(0, t - patience + 1); t0 <= t; ++t0) in += s.xp(i, j, t0, t);
        arrivals[static_cast<std::size_t>(j) * tt + arrive] += in;
      }
  for (int i = 0; i < z; ++i) {
    long carry = 0;
    for (int t = 0; t < horizon; ++t) {
      const long available = instance.idle(i, t) + arrivals[static_cast<std::size_t>(i) * tt + t] + carry;
      long used = 0;
      int reloc = 0;
      for (int j = 0; j < z; ++j) {
        for (int t0 = std::max(0, t - patience + 1); t0 <= t; ++t0) used += s.xp(i, j, t0, t);
        if (j != i) reloc += s.xr(i, j, t);
      }
      used += reloc;
      if (used > available) {
        std::ostringstream msg;
        msg << "uses " << used << " vehicles, " << available << " available";
        add(ViolationKind::kFlowBalance, i, -1, t, msg.str());
      }
      carry = std::max(0L, available - used);
      if (reloc > 0 && backlog(instance, s, i, t) > 0) {
        add(ViolationKind::kRelocationBacklog, i, -1, t, "relocating out of a zone with unserved demand");
      }
    }
  }
  return report;
}

}  // namespace ridemp
