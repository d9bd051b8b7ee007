#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <stdexcept>

#include "ridemp/experiment.hpp"

namespace py = pybind11;
using namespace ridemp;

namespace {

using Grid = std::vector<std::vector<int>>;

Grid matrix_rows(const RelocationMatrix& m) {
  Grid rows(m.zones, std::vector<int>(m.zones));
  for (int i = 0; i < m.zones; ++i)
    for (int j = 0; j < m.zones; ++j) rows[i][j] = m.at(i, j);
  return rows;
}

// idle[i][t] and demand[i][j][t] as nested lists.
MpcInstance make_instance(const ScenarioConfig& config, const Grid& idle,
                          const std::vector<std::vector<std::vector<int>>>& demand) {
  const int z = config.zone_count, h = config.horizon;
  if (static_cast<int>(idle.size()) != z || static_cast<int>(demand.size()) != z) {
    throw std::invalid_argument("idle and demand need one entry per zone");
  }
  std::vector<int> flat;
  DemandTensor d(z, h);
  for (int i = 0; i < z; ++i) {
    if (static_cast<int>(idle[i].size()) != h || static_cast<int>(demand[i].size()) != z) {
      throw std::invalid_argument("idle rows need horizon entries; demand rows need one entry per zone");
    }
    flat.insert(flat.end(), idle[i].begin(), idle[i].end());
    for (int j = 0; j < z; ++j) {
      if (static_cast<int>(demand[i][j].size()) != h) throw std::invalid_argument("demand cells need horizon entries");
      for (int t = 0; t < h; ++t) d.at(i, j, t) = demand[i][j][t];
    }
  }
  return MpcInstance(config, build_travel_matrix(config), flat, d);
}

py::dict solution_summary(const MpcInstance& in, const MpcSolution& s) {
  const auto a = first_epoch_actions(in, s);
  py::dict out;
  out["objective"] = s.objective;
  out["status"] = to_string(s.status);
  out["nodes"] = s.nodes;
  out["gamma"] = a.gamma;
  out["relocation"] = matrix_rows(a.relocation);
  std::vector<std::string> problems;
  for (const auto& v : validate_solution(in, s).violations) problems.push_back(to_string(v.kind) + ": " + v.detail);
  out["violations"] = problems;
  return out;
}

py::dict metrics_dict(const Metrics& m) {
  py::dict d;
  d["policy"] = m.policy;
  d["seed"] = m.seed;
  d["arrivals"] = m.arrivals;
  d["served"] = m.served;
  d["riders_served"] = m.riders_served;
  d["dropped"] = m.dropped;
  d["discarded"] = m.discarded;
  d["open"] = m.open;
  d["relocations"] = m.relocations;
  d["dropout_pct"] = m.dropout_pct;
  d["mean_wait_s"] = m.mean_wait_s;
  d["policy_calls"] = m.policy_calls;
  d["conservation_violations"] = m.conservation_violations;
  d["aborted"] = m.aborted;
  d["diagnostic"] = m.diagnostic;
  d["row"] = metrics_row(m);
  return d;
}

}  // namespace

PYBIND11_MODULE(_ridemp, m) {
  m.doc() = "MPC pricing and relocation for ride-hailing with a learned optimization proxy";

  py::class_<ScenarioConfig>(m, "ScenarioConfig")
      .def(py::init<>())
      .def_readwrite("zone_count", &ScenarioConfig::zone_count)
      .def_readwrite("grid_columns", &ScenarioConfig::grid_columns)
      .def_readwrite("zone_spacing_seconds", &ScenarioConfig::zone_spacing_seconds)
      .def_readwrite("pickup_radius_seconds", &ScenarioConfig::pickup_radius_seconds)
      .def_readwrite("epoch_seconds", &ScenarioConfig::epoch_seconds)
      .def_readwrite("horizon", &ScenarioConfig::horizon)
      .def_readwrite("patience", &ScenarioConfig::patience)
      .def_readwrite("multipliers", &ScenarioConfig::multipliers)
      .def_readwrite("rideshare", &ScenarioConfig::rideshare)
      .def_readwrite("relocation_weight_scale", &ScenarioConfig::relocation_weight_scale)
      .def_readwrite("fleet_size", &ScenarioConfig::fleet_size)
      .def_readwrite("episode_epochs", &ScenarioConfig::episode_epochs)
      .def_readwrite("rng_seed", &ScenarioConfig::rng_seed)
      .def("validate", &ScenarioConfig::validate)
      .def("to_kv", [](const ScenarioConfig& c) { return c.to_kv().to_string(); })
      .def_static("from_kv", [](const std::string& text) { return ScenarioConfig::from_kv(KvDocument::parse_string(text)); });

  m.def("solve_exact", [](const ScenarioConfig& c, const Grid& idle, const std::vector<std::vector<std::vector<int>>>& demand,
                          std::int64_t max_nodes) {
    const auto in = make_instance(c, idle, demand);
    MpcLimits limits;
    limits.max_nodes = max_nodes;
    return solution_summary(in, solve_exact(in, limits));
  }, py::arg("config"), py::arg("idle"), py::arg("demand"), py::arg("max_nodes") = 5'000'000,
        "Exact branch and bound; returns objective, status, first-epoch gamma and relocation.");

  m.def("solve_heuristic", [](const ScenarioConfig& c, const Grid& idle,
                              const std::vector<std::vector<std::vector<int>>>& demand) {
    const auto in = make_instance(c, idle, demand);
    return solution_summary(in, solve_heuristic(in));
  }, py::arg("config"), py::arg("idle"), py::arg("demand"));

  m.def("solve_transport", [](const std::vector<std::int64_t>& supply, const std::vector<std::int64_t>& demand,
                              const std::vector<std::vector<std::int64_t>>& cost) {
    TransportProblem p;
    p.zones = static_cast<int>(supply.size());
    p.supply = supply;
    p.demand = demand;
    for (const auto& row : cost) p.cost.insert(p.cost.end(), row.begin(), row.end());
    const auto plan = solve_transport(p);
    return py::make_tuple(matrix_rows(plan), transport_cost(p, plan));
  }, py::arg("supply"), py::arg("demand"), py::arg("cost"), "Minimum-cost plan and its cost.");

  m.def("round_to_multiplier", [](double raw, const std::vector<double>& multipliers) {
    return multipliers[round_to_multiplier(raw, multipliers)];
  }, py::arg("raw"), py::arg("multipliers"));

  m.def("restore_feasibility", [](const std::vector<double>& out, const std::vector<double>& in,
                                  const std::vector<int>& idle, std::uint64_t seed) {
    Rng rng(seed);
    const auto r = restore_feasibility(out, in, idle, rng);
    return py::make_tuple(r.out, r.in);
  }, py::arg("raw_out"), py::arg("raw_in"), py::arg("idle"), py::arg("seed") = 0,
        "Integral, nonnegative, balanced and capped margins from raw predictions.");

  m.def("run_episode", [](const ScenarioConfig& c, const std::string& pattern, double base_rate,
                          const std::string& policy, std::uint64_t seed, const std::vector<int>& merge_map,
                          const std::string& proxy_path) {
    ScenarioSpec spec;
    spec.name = pattern;
    spec.pattern = pattern;
    spec.params.base_rate = base_rate;
    const auto profile = scenario_profile(c, spec);
    const auto stream = scenario_stream(c, profile, seed);
    EpisodeOptions o;
    o.policy = policy_from_string(policy);
    o.merge_map = merge_map;
    if (!proxy_path.empty()) o.proxy = std::make_shared<const ProxyPolicy>(ProxyPolicy::load(proxy_path));
    py::gil_scoped_release release;
    const auto result = run_episode(c, profile, stream, o, seed);
    py::gil_scoped_acquire acquire;
    return metrics_dict(result);
  }, py::arg("config"), py::arg("pattern") = "uniform", py::arg("base_rate") = 4.0, py::arg("policy") = "none",
        py::arg("seed") = 1, py::arg("merge_map") = std::vector<int>{}, py::arg("proxy_path") = "");

  m.def("version", &version_stamp);
  m.attr("__version__") = RIDEMP_VERSION;
}
