#include "ridemp/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace ridemp {

int RelocationMatrix::row_sum(int i) const {
  int s = 0;
  for (int j = 0; j < zones; ++j) s += at(i, j);
  return s;
}

int RelocationMatrix::col_sum(int j) const {
  int s = 0;
  for (int i = 0; i < zones; ++i) s += at(i, j);
  return s;
}

int RelocationMatrix::off_diagonal_total() const {
  int s = 0;
  for (int i = 0; i < zones; ++i)
    for (int j = 0; j < zones; ++j)
      if (i != j) s += at(i, j);
  return s;
}

void TransportProblem::validate() const {
  const auto n = static_cast<std::size_t>(zones);
  if (zones < 1 || supply.size() != n || demand.size() != n || cost.size() != n * n) {
    throw std::invalid_argument("TransportProblem: shape mismatch");
  }
  for (auto v : supply)
    if (v < 0) throw std::invalid_argument("TransportProblem: negative supply");
  for (auto v : demand)
    if (v < 0) throw std::invalid_argument("TransportProblem: negative demand");
  for (auto v : cost)
    if (v < 0) throw std::invalid_argument("TransportProblem: negative cost");
  const auto out = std::accumulate(supply.begin(), supply.end(), std::int64_t{0});
  const auto in = std::accumulate(demand.begin(), demand.end(), std::int64_t{0});
  if (out != in) {
    throw std::invalid_argument("TransportProblem: unbalanced totals (" + std::to_string(out) + " out, " +
                                std::to_string(in) + " in)");
  }
}

TransportProblem make_disaggregation_problem(const std::vector<int>& out_totals, const std::vector<int>& in_totals,
                                             const TravelMatrix& travel) {
  TransportProblem p;
  p.zones = travel.zones;
  p.supply.assign(out_totals.begin(), out_totals.end());
  p.demand.assign(in_totals.begin(), in_totals.end());
  const auto n = static_cast<std::size_t>(p.zones);
  p.cost.assign(n * n, 0);
  std::int64_t max_cost = 0;
  for (int i = 0; i < p.zones; ++i)
    for (int j = 0; j < p.zones; ++j)
      if (i != j) {
        const auto c = static_cast<std::int64_t>(std::llround(travel.eta(i, j)));
        p.cost[i * n + j] = c;
        max_cost = std::max(max_cost, c);
      }
  const std::int64_t big = 1 + static_cast<std::int64_t>(p.zones) * max_cost;
  for (std::size_t i = 0; i < n; ++i) p.cost[i * n + i] = big;
  return p;
}

namespace {

struct Arc {
  int to;
  std::int64_t cap;
  std::int64_t cost;
};

}  // namespace

RelocationMatrix solve_transport(const TransportProblem& problem) {
  problem.validate();
  const int z = problem.zones;
  // Nodes: 0 = source, 1..z = origins, z+1..2z = destinations, 2z+1 = sink.
  const int source = 0, sink = 2 * z + 1, nodes = 2 * z + 2;
  std::vector<Arc> arcs;
  std::vector<std::vector<int>> adj(nodes);
  auto add = [&](int u, int v, std::int64_t cap, std::int64_t cost) {
    adj[u].push_back(static_cast<int>(arcs.size()));
    arcs.push_back({v, cap, cost});
    adj[v].push_back(static_cast<int>(arcs.size()));
    arcs.push_back({u, 0, -cost});
  };
  std::int64_t total = 0;
  for (int i = 0; i < z; ++i) {
    total += problem.supply[i];
    add(source, 1 + i, problem.supply[i], 0);
    add(1 + z + i, sink, problem.demand[i], 0);
  }
  std::vector<int> cell_arc(static_cast<std::size_t>(z) * z);
  for (int i = 0; i < z; ++i)
    for (int j = 0; j < z; ++j) {
      cell_arc[static_cast<std::size_t>(i) * z + j] = static_cast<int>(arcs.size());
      add(1 + i, 1 + z + j, total, problem.c(i, j));
    }

  constexpr auto kInf = std::numeric_limits<std::int64_t>::max() / 4;
  std::vector<std::int64_t> potential(nodes, 0), dist(nodes);
  std::vector<int> parent_arc(nodes);
  std::vector<char> done(nodes);
  std::int64_t shipped = 0;
  while (shipped < total) {
    // Dense Dijkstra on reduced costs; the graph has O(z) nodes.
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(done.begin(), done.end(), 0);
    std::fill(parent_arc.begin(), parent_arc.end(), -1);
    dist[source] = 0;
    for (int iter = 0; iter < nodes; ++iter) {
      int u = -1;
      for (int v = 0; v < nodes; ++v)
        if (!done[v] && dist[v] < kInf && (u < 0 || dist[v] < dist[u])) u = v;
      if (u < 0) break;
      done[u] = 1;
      for (int a : adj[u]) {
        const Arc& arc = arcs[a];
        if (arc.cap <= 0) continue;
        const auto nd = dist[u] + arc.cost + potential[u] - potential[arc.to];
        if (nd < dist[arc.to]) {
          dist[arc.to] = nd;
          parent_arc[arc.to] = a;
        }
      }
    }
    if (dist[sink] >= kInf) throw std::logic_error("solve_transport: no augmenting path in a balanced problem");
    for (int v = 0; v < nodes; ++v)
      if (dist[v] < kInf) potential[v] += dist[v];
    std::int64_t push = total - shipped;
    for (int v = sink; v != source; v = arcs[parent_arc[v] ^ 1].to) push = std::min(push, arcs[parent_arc[v]].cap);
    for (int v = sink; v != source; v = arcs[parent_arc[v] ^ 1].to) {
      arcs[parent_arc[v]].cap -= push;
      arcs[parent_arc[v] ^ 1].cap += push;
    }
    shipped += push;
  }

  RelocationMatrix plan(z);
  for (int i = 0; i < z; ++i)
    for (int j = 0; j < z; ++j) plan.at(i, j) = static_cast<int>(arcs[cell_arc[static_cast<std::size_t>(i) * z + j] ^ 1].cap);
  return plan;
}

std::int64_t transport_cost(const TransportProblem& problem, const RelocationMatrix& plan) {
  std::int64_t total = 0;
  for (int i = 0; i < problem.zones; ++i)
    for (int j = 0; j < problem.zones; ++j) total += problem.c(i, j) * plan.at(i, j);
  return total;
}

bool certify_optimality(const TransportProblem& problem, const RelocationMatrix& plan) {
  const int z = problem.zones;
  if (plan.zones != z) return false;
  for (int i = 0; i < z; ++i) {
    if (plan.row_sum(i) != problem.supply[i] || plan.col_sum(i) != problem.demand[i]) return false;
    for (int j = 0; j < z; ++j)
      if (plan.at(i, j) < 0) return false;
  }
  // Bellman-Ford on the residual graph from a virtual root at distance 0.
  // Origins are nodes 0..z-1, destinations z..2z-1.
  struct Edge {
    int from, to;
    double cost;
  };
  std::vector<Edge> edges;
  for (int i = 0; i < z; ++i)
    for (int j = 0; j < z; ++j) {
      const auto c = static_cast<double>(problem.c(i, j));
      edges.push_back({i, z + j, c});
      if (plan.at(i, j) > 0) edges.push_back({z + j, i, -c});
    }
  const int nodes = 2 * z;
  std::vector<double> d(nodes, 0.0);
  for (int pass = 0; pass < nodes; ++pass) {
    bool changed = false;
    for (const auto& e : edges) {
      if (d[e.from] + e.cost < d[e.to] - 1e-12) {
        d[e.to] = d[e.from] + e.cost;
        changed = true;
      }
    }
    if (!changed) break;
    if (pass == nodes - 1) return false;  // negative cycle: a cheaper plan exists
  }
  // Duals u_i = -d_i, v_j = d_j: reduced cost c_ij - v_j - u_i = c_ij + d_i - d_j.
  constexpr double tol = 1e-9;
  for (int i = 0; i < z; ++i)
    for (int j = 0; j < z; ++j) {
      const double reduced = static_cast<double>(problem.c(i, j)) + d[i] - d[z + j];
      if (reduced < -tol) return false;
      if (plan.at(i, j) > 0 && std::abs(reduced) > tol) return false;
    }
  return true;
}

RelocationMatrix drop_self_loops(const RelocationMatrix& plan) {
  RelocationMatrix out = plan;
  for (int i = 0; i < out.zones; ++i) out.at(i, i) = 0;
  return out;
}

void write_transport_debug(std::ostream& out, const TransportProblem& problem, const RelocationMatrix& plan) {
  out << "# transport zones=" << problem.zones << " cost=" << transport_cost(problem, plan) << '\n';
  out << "supply =";
  for (auto v : problem.supply) out << ' ' << v;
  out << "\ndemand =";
  for (auto v : problem.demand) out << ' ' << v;
  out << '\n';
  for (int i = 0; i < problem.zones; ++i) {
    out << "plan[" << i << "] =";
    for (int j = 0; j < problem.zones; ++j) out << ' ' << plan.at(i, j);
    out << '\n';
  }
}

}  // namespace ridemp
