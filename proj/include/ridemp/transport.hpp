#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "ridemp/core.hpp"

namespace ridemp {

// Balanced transportation problem: ship supply[i] out of zone i and demand[j]
// into zone j at cost[i*zones + j] per unit. Diagonal cells act as penalized
// slack ("stay put").
struct TransportProblem {
  int zones = 0;
  std::vector<std::int64_t> supply;
  std::vector<std::int64_t> demand;
  std::vector<std::int64_t> cost;

  std::int64_t c(int i, int j) const { return cost[static_cast<std::size_t>(i) * zones + j]; }
  void validate() const;  // throws std::invalid_argument on shape, sign or balance errors
};

struct RelocationMatrix {
  int zones = 0;
  std::vector<int> counts;  // z_ij, row-major

  RelocationMatrix() = default;
  explicit RelocationMatrix(int z) : zones(z), counts(static_cast<std::size_t>(z) * z, 0) {}
  int& at(int i, int j) { return counts[static_cast<std::size_t>(i) * zones + j]; }
  int at(int i, int j) const { return counts[static_cast<std::size_t>(i) * zones + j]; }
  int row_sum(int i) const;
  int col_sum(int j) const;
  int off_diagonal_total() const;
  bool empty() const { return off_diagonal_total() == 0; }
};

// Off-diagonal cost rounded from travel seconds; diagonal BIG = 1 + zones * max off-diagonal cost.
TransportProblem make_disaggregation_problem(const std::vector<int>& out_totals, const std::vector<int>& in_totals,
                                             const TravelMatrix& travel);

// Successive shortest paths with Johnson potentials; exact and integral.
RelocationMatrix solve_transport(const TransportProblem& problem);

std::int64_t transport_cost(const TransportProblem& problem, const RelocationMatrix& plan);

// True iff the plan meets the margins and admits duals with nonnegative reduced
// costs that vanish on every used cell (checked within 1e-9).
bool certify_optimality(const TransportProblem& problem, const RelocationMatrix& plan);

// Copy of the plan with the diagonal (self-loop slack) cleared.
RelocationMatrix drop_self_loops(const RelocationMatrix& plan);

void write_transport_debug(std::ostream& out, const TransportProblem& problem, const RelocationMatrix& plan);

}  // namespace ridemp
