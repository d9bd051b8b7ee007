#include <algorithm>
#include <numeric>
#include <ostream>
#include <unordered_map>

#include "ridemp/mpc.hpp"

namespace ridemp {
namespace {

std::string name_of(const char* prefix, std::initializer_list<int> idx) {
  std::string s = prefix;
  for (int v : idx) s += "_" + std::to_string(v);
  return s;
}

}  // namespace

int MipModel::find(const std::string& name) const {
  for (std::size_t v = 0; v < variables.size(); ++v)
    if (variables[v].name == name) return static_cast<int>(v);
  return -1;
}

MipModel build_mip(const MpcInstance& in) {
  const int z = in.zones(), horizon = in.horizon(), patience = in.patience(), kcount = in.multiplier_count();
  const DemandTensor& d0 = in.baseline();
  const int total_idle = in.total_idle();
  const int total_demand = std::accumulate(d0.values.begin(), d0.values.end(), 0);

  MipModel m;
  // A backlog can exceed the fleet when demand does, so M must cover both.
  m.big_m = std::max({static_cast<double>(in.config().effective_big_m()), static_cast<double>(total_idle),
                      static_cast<double>(total_demand)});

  std::unordered_map<std::string, int> index;
  auto add_var = [&](std::string name, double upper, bool binary, double obj) {
    index[name] = static_cast<int>(m.variables.size());
    m.variables.push_back({std::move(name), 0.0, upper, binary, obj});
  };
  auto var = [&](const std::string& name) { return index.at(name); };

  // Variables in chronological order so an enumerator can close rows early.
  for (int t = 0; t < horizon; ++t) {
    for (int i = 0; i < z; ++i) {
      for (int k = 0; k < kcount; ++k) add_var(name_of("p", {i, t, k}), 1.0, true, 0.0);
      for (int j = 0; j < z; ++j) add_var(name_of("v", {i, j, t}), d0.at(i, j, t), false, 0.0);
      for (int j = 0; j < z; ++j)
        for (int t0 = std::max(0, t - patience + 1); t0 <= t; ++t0) {
          add_var(name_of("xp", {i, j, t0, t}), d0.at(i, j, t0), false, in.service_weight(t0, t));
        }
      add_var(name_of("l", {i, t}), 1.0, true, 0.0);
      for (int j = 0; j < z; ++j)
        if (j != i) add_var(name_of("xr", {i, j, t}), total_idle, false, -in.relocation_weight(i, j, t));
      add_var(name_of("c", {i, t}), total_idle, false, 0.0);
    }
  }

  for (int i = 0; i < z; ++i)
    for (int t = 0; t < horizon; ++t) {
      MipRow one{name_of("choose", {i, t}), {}, '=', 1.0};
      for (int k = 0; k < kcount; ++k) one.terms.push_back({var(name_of("p", {i, t, k})), 1.0});
      m.rows.push_back(std::move(one));
      for (int j = 0; j < z; ++j) {
        MipRow link{name_of("link", {i, j, t}), {{var(name_of("v", {i, j, t})), 1.0}}, '=', 0.0};
        for (int k = 0; k < kcount; ++k) {
          const int dk = in.demand(k, i, j, t);
          if (dk != 0) link.terms.push_back({var(name_of("p", {i, t, k})), -static_cast<double>(dk)});
        }
        m.rows.push_back(std::move(link));
        MipRow serve{name_of("serve", {i, j, t}), {}, in.mandatory(t) ? '=' : '<', 0.0};
        for (int rho = t; rho <= in.last_pickup(t); ++rho) serve.terms.push_back({var(name_of("xp", {i, j, t, rho})), 1.0});
        serve.terms.push_back({var(name_of("v", {i, j, t})), -1.0});
        m.rows.push_back(std::move(serve));
      }
    }

  // Flow balance: pickups + relocations out + carry = idle + arrivals + carry in.
  for (int i = 0; i < z; ++i)
    for (int t = 0; t < horizon; ++t) {
      MipRow flow{name_of("flow", {i, t}), {}, '=', static_cast<double>(in.idle(i, t))};
      for (int j = 0; j < z; ++j) {
        for (int t0 = std::max(0, t - patience + 1); t0 <= t; ++t0) flow.terms.push_back({var(name_of("xp", {i, j, t0, t})), 1.0});
        if (j != i) flow.terms.push_back({var(name_of("xr", {i, j, t})), 1.0});
      }
      flow.terms.push_back({var(name_of("c", {i, t})), 1.0});
      if (t > 0) flow.terms.push_back({var(name_of("c", {i, t - 1})), -1.0});
      for (int j = 0; j < z; ++j) {
        for (int t1 = 0; t1 < t; ++t1) {
          if (t1 + in.lambda(j, i) != t) continue;
          for (int t0 = std::max(0, t1 - patience + 1); t0 <= t1; ++t0)
            flow.terms.push_back({var(name_of("xp", {j, i, t0, t1})), -1.0});
          if (j != i) flow.terms.push_back({var(name_of("xr", {j, i, t1})), -1.0});
        }
      }
      m.rows.push_back(std::move(flow));

      // backlog <= M l, relocations out <= M (1 - l)
      MipRow gate_backlog{name_of("backlog", {i, t}), {}, '<', 0.0};
      for (int j = 0; j < z; ++j)
        for (int t0 = std::max(0, t - patience + 1); t0 <= t; ++t0) {
          gate_backlog.terms.push_back({var(name_of("v", {i, j, t0})), 1.0});
          for (int rho = t0; rho <= t; ++rho) gate_backlog.terms.push_back({var(name_of("xp", {i, j, t0, rho})), -1.0});
        }
      gate_backlog.terms.push_back({var(name_of("l", {i, t})), -m.big_m});
      m.rows.push_back(std::move(gate_backlog));
      MipRow gate_reloc{name_of("relocgate", {i, t}), {}, '<', m.big_m};
      for (int j = 0; j < z; ++j)
        if (j != i) gate_reloc.terms.push_back({var(name_of("xr", {i, j, t})), 1.0});
      gate_reloc.terms.push_back({var(name_of("l", {i, t})), m.big_m});
      m.rows.push_back(std::move(gate_reloc));
    }
  return m;
}

namespace {

void write_terms(std::ostream& out, const MipModel& model, const std::vector<std::pair<int, double>>& terms) {
  bool first = true;
  for (const auto& [v, coef] : terms) {
    if (coef == 0.0) continue;
    if (coef < 0) out << " - ";
    else if (!first) out << " + ";
    else out << " ";
    const double a = coef < 0 ? -coef : coef;
    if (a != 1.0) out << a << " ";
    out << model.variables[v].name;
    first = false;
  }
  if (first) out << " 0 " << (model.variables.empty() ? "x" : model.variables.front().name);
}

}  // namespace

void write_lp(std::ostream& out, const MipModel& model) {
  const auto old = out.precision(17);
  out << "\\ pricing and relocation program\nMaximize\n obj:";
  std::vector<std::pair<int, double>> obj;
  for (std::size_t v = 0; v < model.variables.size(); ++v)
    if (model.variables[v].objective != 0.0) obj.push_back({static_cast<int>(v), model.variables[v].objective});
  write_terms(out, model, obj);
  out << "\nSubject To\n";
  for (const auto& row : model.rows) {
    out << " " << row.name << ":";
    write_terms(out, model, row.terms);
    out << (row.sense == '<' ? " <= " : row.sense == '>' ? " >= " : " = ") << row.rhs << "\n";
  }
  out << "Bounds\n";
  for (const auto& v : model.variables)
    if (!v.binary) out << " " << v.lower << " <= " << v.name << " <= " << v.upper << "\n";
  out << "Generals\n";
  for (const auto& v : model.variables)
    if (!v.binary) out << " " << v.name << "\n";
  out << "Binaries\n";
  for (const auto& v : model.variables)
    if (v.binary) out << " " << v.name << "\n";
  out << "End\n";
  out.precision(old);
}

}  // namespace ridemp
