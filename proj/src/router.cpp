#include "ridemp/router.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace ridemp {
namespace {

constexpr double kInfeasible = 1e12;

struct Leg {
  double pickup_a, pickup_b, drop_a, drop_b;
};

bool within_deadline(const RouterRequest& r, double pickup, const RouterOptions& o) {
  return pickup <= r.time_s + o.pickup_deadline_seconds + 1e-9;
}

bool within_radius(double leg, const RouterOptions& o) {
  return o.pickup_radius_seconds <= 0.0 || leg <= o.pickup_radius_seconds + 1e-9;
}

}  // namespace

double zone_travel_seconds(const TravelMatrix& travel, int from, int to, double intra_zone_seconds) {
  return from == to ? intra_zone_seconds : travel.eta(from, to);
}

std::vector<Route> enumerate_routes(const RouterFleet& fleet, const std::vector<RouterRequest>& requests,
                                    const TravelMatrix& travel, const RouterOptions& o) {
  if (static_cast<int>(fleet.idle.size()) != travel.zones) throw std::invalid_argument("enumerate_routes: fleet size");
  auto tt = [&](int a, int b) { return zone_travel_seconds(travel, a, b, o.intra_zone_seconds); };
  std::vector<Route> routes;
  const int n = static_cast<int>(requests.size());
  for (int z = 0; z < travel.zones; ++z) {
    if (fleet.idle[z] <= 0) continue;
    for (int a = 0; a < n; ++a) {
      const auto& ra = requests[a];
      if (ra.riders > o.capacity || o.max_pickups < 1) continue;
      const double pa = o.now + tt(z, ra.origin);
      if (!within_deadline(ra, pa, o) || !within_radius(tt(z, ra.origin), o)) continue;
      Route r;
      r.zone = z;
      r.requests = {a};
      r.pickup_at = {pa};
      r.dropoff_at = {pa + tt(ra.origin, ra.dest)};
      r.cost = pa - ra.time_s;
      r.finish_at = r.dropoff_at[0];
      r.end_zone = ra.dest;
      r.riders = ra.riders;
      routes.push_back(std::move(r));
    }
    if (o.max_pickups < 2) continue;
    for (int x = 0; x < n; ++x)
      for (int y = x + 1; y < n; ++y) {
        if (requests[x].riders + requests[y].riders > o.capacity) continue;
        bool found = false;
        Route best;
        for (const auto& [a, b] : {std::pair{x, y}, std::pair{y, x}}) {
          const auto& ra = requests[a];
          const auto& rb = requests[b];
          const double pa = o.now + tt(z, ra.origin);
          const double pb = pa + tt(ra.origin, rb.origin);
          if (!within_deadline(ra, pa, o) || !within_deadline(rb, pb, o)) continue;
          if (!within_radius(tt(z, ra.origin), o) || !within_radius(tt(ra.origin, rb.origin), o)) continue;
          const double direct_a = tt(ra.origin, ra.dest), direct_b = tt(rb.origin, rb.dest);
          for (bool a_first : {true, false}) {
            Leg leg{pa, pb, 0.0, 0.0};
            if (a_first) {
              leg.drop_a = pb + tt(rb.origin, ra.dest);
              leg.drop_b = leg.drop_a + tt(ra.dest, rb.dest);
            } else {
              leg.drop_b = pb + tt(rb.origin, rb.dest);
              leg.drop_a = leg.drop_b + tt(rb.dest, ra.dest);
            }
            if (leg.drop_a - pa > o.detour_factor * direct_a + 1e-9) continue;
            if (leg.drop_b - pb > o.detour_factor * direct_b + 1e-9) continue;
            const double cost = (pa - ra.time_s) + (pb - rb.time_s);
            const double finish = std::max(leg.drop_a, leg.drop_b);
            if (found && (cost > best.cost + 1e-9 || (cost > best.cost - 1e-9 && finish >= best.finish_at))) continue;
            found = true;
            best.zone = z;
            best.requests = {a, b};
            best.pickup_at = {pa, pb};
            best.dropoff_at = {leg.drop_a, leg.drop_b};
            best.cost = cost;
            best.finish_at = finish;
            best.end_zone = a_first ? rb.dest : ra.dest;
            best.riders = ra.riders + rb.riders;
          }
        }
        if (found) routes.push_back(std::move(best));
      }
  }
  return routes;
}

std::vector<int> hungarian(const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  if (n == 0) return {};
  for (const auto& row : cost)
    if (static_cast<int>(row.size()) != n) throw std::invalid_argument("hungarian: matrix must be square");
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> col(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] > 0) col[p[j] - 1] = j - 1;
  return col;
}

RouterResult solve_single_pickup_assignment(const RouterFleet& fleet, const std::vector<RouterRequest>& requests,
                                            const TravelMatrix& travel, const RouterOptions& options) {
  RouterOptions single = options;
  single.max_pickups = 1;
  const auto routes = enumerate_routes(fleet, requests, travel, single);
  const int r = static_cast<int>(requests.size());
  std::vector<int> vehicle_zone;
  for (int z = 0; z < travel.zones; ++z)
    for (int k = 0; k < fleet.idle[z]; ++k) vehicle_zone.push_back(z);
  const int v = static_cast<int>(vehicle_zone.size());

  // route_of[request][zone] -> index of the single-pickup route, if feasible.
  std::vector<std::vector<int>> route_of(r, std::vector<int>(travel.zones, -1));
  for (std::size_t k = 0; k < routes.size(); ++k) route_of[routes[k].requests[0]][routes[k].zone] = static_cast<int>(k);

  const int n = r + v;
  std::vector<std::vector<double>> cost(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < r; ++i) {
    for (int c = 0; c < v; ++c) {
      const int k = route_of[i][vehicle_zone[c]];
      cost[i][c] = k >= 0 ? routes[k].cost : kInfeasible;
    }
    for (int c = 0; c < r; ++c) cost[i][v + c] = c == i ? requests[i].penalty : kInfeasible;
  }
  const auto col = hungarian(cost);

  RouterResult res;
  for (int i = 0; i < r; ++i) {
    const int c = col[i];
    if (c < v && route_of[i][vehicle_zone[c]] >= 0) {
      res.selected.push_back(routes[route_of[i][vehicle_zone[c]]]);
      res.objective += res.selected.back().cost;
    } else {
      res.unserved.push_back(i);
      res.objective += requests[i].penalty;
    }
  }
  return res;
}

namespace {

class RoutingSearch {
 public:
  RoutingSearch(const RouterFleet& fleet, const std::vector<RouterRequest>& requests, std::vector<Route> routes,
                std::int64_t budget)
      : requests_(requests), routes_(std::move(routes)), idle_(fleet.idle), budget_(budget) {
    const int n = static_cast<int>(requests_.size());
    order_.resize(n);
    std::iota(order_.begin(), order_.end(), 0);
    std::stable_sort(order_.begin(), order_.end(),
                     [&](int a, int b) { return requests_[a].penalty > requests_[b].penalty; });
    routes_of_.assign(n, {});
    lower_.assign(n, 0.0);
    for (int i = 0; i < n; ++i) lower_[i] = requests_[i].penalty;
    for (std::size_t k = 0; k < routes_.size(); ++k) {
      const auto& rt = routes_[k];
      for (std::size_t q = 0; q < rt.requests.size(); ++q) {
        const int i = rt.requests[q];
        routes_of_[i].push_back(static_cast<int>(k));
        lower_[i] = std::min(lower_[i], rt.pickup_at[q] - requests_[i].time_s);
      }
    }
    // Try routes with the best value (penalties saved minus cost) first.
    for (auto& list : routes_of_) {
      std::stable_sort(list.begin(), list.end(), [&](int a, int b) { return value(a) > value(b); });
    }
    state_.assign(n, 0);
  }

  void seed(const RouterResult& incumbent) {
    best_ = incumbent.objective;
    best_routes_.clear();
    for (const auto& sel : incumbent.selected)
      for (std::size_t k = 0; k < routes_.size(); ++k)
        if (routes_[k].zone == sel.zone && routes_[k].requests == sel.requests) {
          best_routes_.push_back(static_cast<int>(k));
          break;
        }
  }

  void run() { dfs(0, 0.0); }

  RouterResult result() const {
    RouterResult res;
    std::vector<char> served(requests_.size(), 0);
    for (int k : best_routes_) {
      res.selected.push_back(routes_[k]);
      res.objective += routes_[k].cost;
      for (int i : routes_[k].requests) served[i] = 1;
    }
    for (std::size_t i = 0; i < requests_.size(); ++i)
      if (!served[i]) {
        res.unserved.push_back(static_cast<int>(i));
        res.objective += requests_[i].penalty;
      }
    res.optimal = !stopped_;
    res.nodes = nodes_;
    return res;
  }

 private:
  double value(int k) const {
    double v = -routes_[k].cost;
    for (int i : routes_[k].requests) v += requests_[i].penalty;
    return v;
  }

  // state_: 0 undecided, 1 covered, 2 left unserved.
  void dfs(std::size_t pos, double cost) {
    if (stopped_) return;
    if (++nodes_ > budget_) {
      stopped_ = true;
      return;
    }
    while (pos < order_.size() && state_[order_[pos]] != 0) ++pos;
    if (cost + bound_from(pos) >= best_ - 1e-9) return;
    if (pos == order_.size()) {
      best_ = cost;
      best_routes_ = taken_;
      return;
    }
    const int i = order_[pos];
    for (int k : routes_of_[i]) {
      const auto& rt = routes_[k];
      if (idle_[rt.zone] == 0) continue;
      bool free = true;
      for (int q : rt.requests) free = free && state_[q] == 0;
      if (!free) continue;
      --idle_[rt.zone];
      for (int q : rt.requests) state_[q] = 1;
      taken_.push_back(k);
      dfs(pos + 1, cost + rt.cost);
      taken_.pop_back();
      for (int q : rt.requests) state_[q] = 0;
      ++idle_[rt.zone];
      if (stopped_) return;
    }
    state_[i] = 2;
    dfs(pos + 1, cost + requests_[i].penalty);
    state_[i] = 0;
  }

  double bound_from(std::size_t pos) const {
    double b = 0.0;
    for (std::size_t p = pos; p < order_.size(); ++p)
      if (state_[order_[p]] == 0) b += lower_[order_[p]];
    return b;
  }

  const std::vector<RouterRequest>& requests_;
  std::vector<Route> routes_;
  std::vector<int> idle_;
  std::int64_t budget_;
  std::vector<int> order_;
  std::vector<std::vector<int>> routes_of_;
  std::vector<double> lower_;
  std::vector<char> state_;
  std::vector<int> taken_;
  std::vector<int> best_routes_;
  double best_ = std::numeric_limits<double>::infinity();
  std::int64_t nodes_ = 0;
  bool stopped_ = false;
};

}  // namespace

RouterResult solve_routing(const RouterFleet& fleet, const std::vector<RouterRequest>& requests,
                           const TravelMatrix& travel, const RouterOptions& options) {
  RoutingSearch search(fleet, requests, enumerate_routes(fleet, requests, travel, options), options.node_budget);
  search.seed(solve_single_pickup_assignment(fleet, requests, travel, options));
  search.run();
  return search.result();
}

}  // namespace ridemp
