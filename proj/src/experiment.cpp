#include "ridemp/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

namespace ridemp {
namespace fs = std::filesystem;

namespace {

std::vector<std::string> split_words(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

bool starts_with(const std::string& s, const std::string& prefix) { return s.rfind(prefix, 0) == 0; }

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

fs::path stage_marker(const ExperimentPlan& plan, const std::string& stage) {
  return fs::path(plan.output_dir) / "stages" / (stage + ".done");
}

// True if the stage should be skipped.
bool already_done(const ExperimentPlan& plan, const std::string& stage, const StageFlags& flags, std::ostream& log) {
  if (!flags.force && fs::exists(stage_marker(plan, stage))) {
    log << stage << ": already complete (use --force to rerun)\n";
    return true;
  }
  return false;
}

void mark_done(const ExperimentPlan& plan, const std::string& stage) {
  write_text(stage_marker(plan, stage), version_stamp() + "\n");
}

void require(const fs::path& path, const std::string& stage) {
  if (!fs::exists(path)) {
    throw MissingArtifact("missing artifact " + path.string() + " (run the " + stage + " stage first)");
  }
}

void write_run_record(const ExperimentPlan& plan) {
  const fs::path dir(plan.output_dir);
  fs::create_directories(dir);
  plan.to_kv().save((dir / "plan.kv").string());
  plan.config.to_kv().save((dir / "config.kv").string());
  write_text(dir / "version.txt", version_stamp() + "\n");
}

std::string stream_file(const std::string& scenario, std::uint64_t seed, int variant) {
  std::string name = "s" + std::to_string(seed);
  if (variant > 0) name += "-v" + std::to_string(variant);
  return scenario + "/" + name + ".csv";
}

struct ManifestEntry {
  std::string scenario;
  std::uint64_t seed = 0;
  int variant = 0;
  double percentage = 0.0;
  std::size_t requests = 0;
  std::string file;
};

std::vector<ManifestEntry> read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingArtifact("cannot read " + path.string());
  std::vector<ManifestEntry> out;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::vector<std::string> f;
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 6) throw FormatError("bad manifest row: " + line);
    out.push_back({f[0], std::stoull(f[1]), std::stoi(f[2]), std::stod(f[3]), std::stoul(f[4]), f[5]});
  }
  return out;
}

const ScenarioSpec& find_scenario(const ExperimentPlan& plan, const std::string& name) {
  for (const auto& s : plan.scenarios)
    if (s.name == name) return s;
  throw PlanError("scenario '" + name + "' is not in the plan");
}

EpisodeOptions episode_options(const ExperimentPlan& plan, const StageFlags& flags) {
  EpisodeOptions o = plan.episode;
  if (!flags.wall_clock) o.exact.max_seconds = 0.0;
  o.trace = nullptr;
  o.record = nullptr;
  return o;
}

}  // namespace

// ------------------------------------------------------------ plan

std::vector<std::uint64_t> SeedRange::seeds() const {
  std::vector<std::uint64_t> out;
  for (std::uint64_t s = first; s <= last; ++s) out.push_back(s);
  return out;
}

SeedRange parse_seed_range(const std::string& text) {
  std::string t = text;
  std::replace(t.begin(), t.end(), '-', ' ');
  std::replace(t.begin(), t.end(), ':', ' ');
  const auto words = split_words(t);
  try {
    if (words.size() == 1) return {std::stoull(words[0]), std::stoull(words[0])};
    if (words.size() == 2) {
      SeedRange r{std::stoull(words[0]), std::stoull(words[1])};
      if (r.last < r.first) throw PlanError("seed range '" + text + "' is empty");
      return r;
    }
  } catch (const std::logic_error&) {
  }
  throw PlanError("bad seed range '" + text + "'");
}

ExperimentPlan ExperimentPlan::from_kv(const KvDocument& doc) {
  try {
    if (doc.get_int_or("schema_version", -1) != kPlanSchemaVersion) throw PlanError("plan: unsupported schema_version");
    if (doc.get_string_or("kind", "experiment-plan") != "experiment-plan") throw PlanError("plan: wrong kind");
    ExperimentPlan p;
    KvDocument cfg;
    cfg.set("schema_version", kConfigSchemaVersion);
    std::set<std::string> used{"schema_version", "kind"};
    for (const auto& key : doc.keys())
      if (starts_with(key, "config.")) {
        cfg.set(key.substr(7), doc.get_string(key));
        used.insert(key);
      }
    p.config = ScenarioConfig::from_kv(cfg);
    p.config.validate();

    auto take = [&](const std::string& key) {
      used.insert(key);
      return doc.contains(key);
    };
    if (take("output_dir")) p.output_dir = doc.get_string("output_dir");
    if (take("train_seeds")) p.train_seeds = parse_seed_range(doc.get_string("train_seeds"));
    if (take("eval_seeds")) p.eval_seeds = parse_seed_range(doc.get_string("eval_seeds"));
    if (take("perturbations")) p.perturbations = static_cast<int>(doc.get_int("perturbations"));
    if (p.perturbations < 0) throw PlanError("plan: perturbations must be >= 0");
    if (take("harvest_policy")) p.harvest_policy = policy_from_string(doc.get_string("harvest_policy"));
    if (take("policies")) {
      p.policies.clear();
      for (const auto& w : split_words(doc.get_string("policies"))) p.policies.push_back(policy_from_string(w));
    }
    if (take("merge_map")) p.merge_map = doc.get_ints("merge_map");
    if (take("solver")) {
      const auto s = doc.get_string("solver");
      if (s == "exact") p.label.solver = SolverKind::kExact;
      else if (s == "heuristic") p.label.solver = SolverKind::kHeuristic;
      else throw PlanError("plan: solver must be exact or heuristic");
    }
    if (take("solver.max_nodes")) p.label.exact.max_nodes = doc.get_int("solver.max_nodes");
    if (take("solver.heuristic_evaluations")) {
      p.label.heuristic.max_evaluations = doc.get_int("solver.heuristic_evaluations");
      p.label.exact.heuristic_evaluations = p.label.heuristic.max_evaluations;
    }
    if (take("learner.model")) p.train.model = doc.get_string("learner.model");
    if (p.train.model != "mlp" && p.train.model != "forest") throw PlanError("plan: learner.model must be mlp or forest");
    if (take("learner.layout")) {
      const auto l = doc.get_string("learner.layout");
      if (l == "flat") p.train.layout = LearnerLayout::kFlat;
      else if (l == "zone-shared") p.train.layout = LearnerLayout::kZoneShared;
      else throw PlanError("plan: learner.layout must be flat or zone-shared");
    }
    if (take("learner.epochs")) {
      p.train.pricing_network.epochs = p.train.relocation_network.epochs = static_cast<int>(doc.get_int("learner.epochs"));
    }
    if (take("learner.hidden")) p.train.pricing_network.hidden = p.train.relocation_network.hidden = doc.get_ints("learner.hidden");
    if (take("learner.l1")) p.train.pricing_network.l1 = p.train.relocation_network.l1 = doc.get_double("learner.l1");
    if (take("learner.seed")) {
      const auto s = doc.get_uint("learner.seed");
      p.train.pricing_network.seed = s;
      p.train.relocation_network.seed = s + 1;
      p.train.forest.seed = s;
    }
    if (take("holdout_fraction")) p.holdout_fraction = doc.get_double("holdout_fraction");
    if (!(p.holdout_fraction > 0.0 && p.holdout_fraction < 1.0)) throw PlanError("plan: holdout_fraction outside (0, 1)");
    if (take("split_seed")) p.split_seed = doc.get_uint("split_seed");
    if (take("router.node_budget")) p.episode.router_node_budget = doc.get_int("router.node_budget");
    if (take("router.max_pickups")) p.episode.router_max_pickups = static_cast<int>(doc.get_int("router.max_pickups"));
    if (take("exact.max_nodes")) p.episode.exact.max_nodes = doc.get_int("exact.max_nodes");
    if (take("exact.max_seconds")) p.episode.exact.max_seconds = doc.get_double("exact.max_seconds");
    if (take("heuristic.max_evaluations")) p.episode.heuristic.max_evaluations = doc.get_int("heuristic.max_evaluations");
    if (take("write_traces")) p.write_traces = doc.get_int("write_traces") != 0;

    if (take("scenarios")) {
      for (const auto& name : split_words(doc.get_string("scenarios"))) {
        ScenarioSpec s;
        s.name = name;
        const std::string pre = "scenario." + name + ".";
        if (take(pre + "pattern")) s.pattern = doc.get_string(pre + "pattern");
        if (take(pre + "base_rate")) s.params.base_rate = doc.get_double(pre + "base_rate");
        if (take(pre + "hub")) s.params.hub = static_cast<int>(doc.get_int(pre + "hub"));
        if (take(pre + "residential")) s.params.residential = doc.get_ints(pre + "residential");
        if (take(pre + "custom_rates")) s.params.custom_rates = doc.get_doubles(pre + "custom_rates");
        if (take(pre + "two_rider_probability")) s.params.two_rider_probability = doc.get_double(pre + "two_rider_probability");
        scenario_profile(p.config, s);  // validates the pattern early
        p.scenarios.push_back(std::move(s));
      }
    }
    if (p.scenarios.empty()) throw PlanError("plan: no scenarios");
    for (const auto& key : doc.keys())
      if (!used.count(key)) throw PlanError("plan: unknown key '" + key + "'");
    const bool clustered = std::find(p.policies.begin(), p.policies.end(), PolicyKind::kMpcClustered) != p.policies.end();
    if (clustered && static_cast<int>(p.merge_map.size()) != p.config.zone_count) {
      throw PlanError("plan: mpc-clustered needs merge_map with one cluster id per zone");
    }
    return p;
  } catch (const PlanError&) {
    throw;
  } catch (const std::exception& ex) {
    throw PlanError(std::string("plan: ") + ex.what());
  }
}

ExperimentPlan ExperimentPlan::load(const std::string& path) {
  KvDocument doc;
  try {
    doc = KvDocument::load(path);
  } catch (const std::exception& ex) {
    throw PlanError(std::string("cannot read plan: ") + ex.what());
  }
  return from_kv(doc);
}

KvDocument ExperimentPlan::to_kv() const {
  KvDocument doc;
  doc.set("schema_version", kPlanSchemaVersion);
  doc.set("kind", "experiment-plan");
  doc.set("output_dir", output_dir);
  const auto cfg = config.to_kv();
  for (const auto& key : cfg.keys())
    if (key != "schema_version") doc.set("config." + key, cfg.get_string(key));
  doc.set("train_seeds", std::to_string(train_seeds.first) + "-" + std::to_string(train_seeds.last));
  doc.set("eval_seeds", std::to_string(eval_seeds.first) + "-" + std::to_string(eval_seeds.last));
  doc.set("perturbations", perturbations);
  doc.set("harvest_policy", to_string(harvest_policy));
  std::string pol;
  for (auto p : policies) pol += (pol.empty() ? "" : " ") + to_string(p);
  doc.set("policies", pol);
  if (!merge_map.empty()) doc.set("merge_map", merge_map);
  doc.set("solver", label.solver == SolverKind::kExact ? "exact" : "heuristic");
  doc.set("solver.max_nodes", label.exact.max_nodes);
  doc.set("solver.heuristic_evaluations", label.heuristic.max_evaluations);
  doc.set("learner.model", train.model);
  doc.set("learner.layout", to_string(train.layout));
  doc.set("learner.epochs", train.pricing_network.epochs);
  doc.set("learner.hidden", train.pricing_network.hidden);
  doc.set("learner.l1", train.pricing_network.l1);
  doc.set("learner.seed", train.pricing_network.seed);
  doc.set("holdout_fraction", holdout_fraction);
  doc.set("split_seed", split_seed);
  doc.set("router.node_budget", episode.router_node_budget);
  doc.set("router.max_pickups", episode.router_max_pickups);
  doc.set("exact.max_nodes", episode.exact.max_nodes);
  doc.set("exact.max_seconds", episode.exact.max_seconds);
  doc.set("heuristic.max_evaluations", episode.heuristic.max_evaluations);
  doc.set("write_traces", write_traces ? 1 : 0);
  std::string names;
  for (const auto& s : scenarios) names += (names.empty() ? "" : " ") + s.name;
  doc.set("scenarios", names);
  for (const auto& s : scenarios) {
    const std::string pre = "scenario." + s.name + ".";
    doc.set(pre + "pattern", s.pattern);
    doc.set(pre + "base_rate", s.params.base_rate);
    doc.set(pre + "hub", s.params.hub);
    if (!s.params.residential.empty()) doc.set(pre + "residential", s.params.residential);
    if (!s.params.custom_rates.empty()) doc.set(pre + "custom_rates", s.params.custom_rates);
    doc.set(pre + "two_rider_probability", s.params.two_rider_probability);
  }
  return doc;
}

// ------------------------------------------------------------ building blocks

std::string version_stamp() {
  return std::string("ridemp ") + RIDEMP_VERSION + " config-schema " + std::to_string(kConfigSchemaVersion) +
         " metrics-schema " + std::to_string(kMetricsSchemaVersion) + " plan-schema " +
         std::to_string(kPlanSchemaVersion);
}

DemandProfile scenario_profile(const ScenarioConfig& config, const ScenarioSpec& spec) {
  return make_profile(spec.pattern, config, spec.params);
}

RequestStream scenario_stream(const ScenarioConfig& config, const DemandProfile& profile, std::uint64_t seed) {
  Rng rng = Rng(seed).substream("demand");
  return generate_scenario_demand(config, profile, rng);
}

double perturbation_percentage(std::uint64_t seed, int variant) {
  return Rng(seed).substream("perturb/" + std::to_string(variant)).uniform(-5.0, 5.0);
}

std::vector<MpcInstance> harvest_instances(const ScenarioConfig& config, const DemandProfile& profile,
                                           const RequestStream& stream, PolicyKind policy, std::uint64_t seed,
                                           const EpisodeOptions& base) {
  std::vector<MpcInstance> out;
  EpisodeOptions o = base;
  o.policy = policy;
  o.record = &out;
  o.trace = nullptr;
  const auto m = run_episode(config, profile, stream, o, seed);
  if (m.aborted) throw std::runtime_error("harvest episode aborted: " + m.diagnostic);
  return out;
}

TrainHoldout split_training_set(const TrainingSet& set, double holdout_fraction, std::uint64_t seed) {
  std::vector<std::size_t> idx(set.examples.size());
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng = Rng(seed).substream("split");
  for (std::size_t k = idx.size(); k > 1; --k) {
    std::swap(idx[k - 1], idx[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(k) - 1))]);
  }
  const auto hold = static_cast<std::size_t>(std::llround(holdout_fraction * static_cast<double>(idx.size())));
  TrainHoldout out;
  out.train.zones = out.holdout.zones = set.zones;
  out.train.multipliers = out.holdout.multipliers = set.multipliers;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    (k < hold ? out.holdout : out.train).examples.push_back(set.examples[idx[k]]);
  }
  return out;
}

double student_t_975(int dof) {
  static const double table[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
                                 2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086,
                                 2.080,  2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042};
  if (dof < 1) return 0.0;
  if (dof <= 30) return table[dof - 1];
  if (dof <= 60) return 2.000;
  if (dof <= 120) return 1.980;
  return 1.960;
}

std::vector<SummaryRow> summarize(const std::vector<EvaluationRow>& rows) {
  std::map<std::pair<std::string, std::string>, std::vector<const Metrics*>> groups;
  std::vector<std::pair<std::string, std::string>> order;
  for (const auto& r : rows) {
    const auto key = std::make_pair(r.scenario, r.metrics.policy);
    if (!groups.count(key)) order.push_back(key);
    groups[key].push_back(&r.metrics);
  }
  const std::vector<std::pair<std::string, std::function<double(const Metrics&)>>> panels{
      {"dropout_pct", [](const Metrics& m) { return m.dropout_pct; }},
      {"riders_served", [](const Metrics& m) { return static_cast<double>(m.riders_served); }},
      {"mean_wait_s", [](const Metrics& m) { return m.mean_wait_s; }},
      {"relocations", [](const Metrics& m) { return static_cast<double>(m.relocations); }},
      {"discarded", [](const Metrics& m) { return static_cast<double>(m.discarded); }},
  };
  std::vector<SummaryRow> out;
  for (const auto& key : order) {
    const auto& ms = groups[key];
    for (const auto& [name, get] : panels) {
      SummaryRow s{key.first, key.second, name, static_cast<int>(ms.size())};
      double sum = 0.0;
      for (const auto* m : ms) sum += get(*m);
      s.mean = sum / s.n;
      double var = 0.0;
      for (const auto* m : ms) var += (get(*m) - s.mean) * (get(*m) - s.mean);
      const double half = s.n > 1 ? student_t_975(s.n - 1) * std::sqrt(var / (s.n - 1)) / std::sqrt(s.n) : 0.0;
      s.ci_low = s.mean - half;
      s.ci_high = s.mean + half;
      out.push_back(s);
    }
  }
  return out;
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(n)));
  if (workers <= 1) {
    for (std::size_t k = 0; k < n; ++k) fn(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t k = next.fetch_add(1);
        if (k >= n) return;
        try {
          fn(k);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::vector<EvaluationRow> read_evaluation(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingArtifact("missing artifact " + path + " (run the evaluate stage first)");
  std::vector<EvaluationRow> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || starts_with(line, "scenario,")) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw FormatError("bad evaluation row: " + line);
    rows.push_back({line.substr(0, comma), parse_metrics_row(line.substr(comma + 1))});
  }
  return rows;
}

// ------------------------------------------------------------ stages

void cmd_generate(const ExperimentPlan& plan, const StageFlags& flags, std::ostream& log) {
  if (already_done(plan, "generate", flags, log)) return;
  write_run_record(plan);
  const SeedRange seeds = flags.seed_override.value_or(plan.train_seeds);
  const fs::path dir = fs::path(plan.output_dir) / "streams";
  std::ostringstream manifest;
  manifest << "scenario,seed,variant,percentage,requests,file\n";
  std::size_t files = 0;
  for (const auto& spec : plan.scenarios) {
    const auto profile = scenario_profile(plan.config, spec);
    for (auto seed : seeds.seeds()) {
      const auto base = scenario_stream(plan.config, profile, seed);
      for (int v = 0; v <= plan.perturbations; ++v) {
        double pct = 0.0;
        RequestStream stream = base;
        if (v > 0) {
          pct = perturbation_percentage(seed, v);
          Rng rng = Rng(seed).substream("perturb-apply/" + std::to_string(v));
          stream = perturb_stream(base, pct, plan.config.epoch_seconds, rng);
        }
        const auto file = stream_file(spec.name, seed, v);
        fs::create_directories((dir / file).parent_path());
        save_request_stream((dir / file).string(), stream);
        manifest << spec.name << ',' << seed << ',' << v << ',' << format_double(pct) << ',' << stream.size() << ','
                 << file << '\n';
        ++files;
      }
    }
  }
  write_text(dir / "manifest.csv", manifest.str());
  log << "generate: wrote " << files << " streams under " << dir.string() << "\n";
  mark_done(plan, "generate");
}

void cmd_solve(const ExperimentPlan& plan, const StageFlags& flags, std::ostream& log) {
  const fs::path root(plan.output_dir);
  require(root / "streams" / "manifest.csv", "generate");
  if (already_done(plan, "solve", flags, log)) return;
  const auto manifest = read_manifest(root / "streams" / "manifest.csv");
  const EpisodeOptions base = episode_options(plan, flags);
  LabelOptions label = plan.label;
  if (!flags.wall_clock) label.exact.max_seconds = 0.0;
  std::vector<TrainingSet> parts(manifest.size());
  std::vector<std::size_t> budget_hits(manifest.size(), 0);
  parallel_for(manifest.size(), flags.jobs, [&](std::size_t k) {
    const auto& entry = manifest[k];
    const auto& spec = find_scenario(plan, entry.scenario);
    const auto profile = scenario_profile(plan.config, spec);
    const auto stream = load_request_stream((root / "streams" / entry.file).string());
    const auto instances = harvest_instances(plan.config, profile, stream, plan.harvest_policy, entry.seed, base);
    if (flags.export_mip && !instances.empty()) {
      std::ostringstream lp;
      write_lp(lp, build_mip(instances.front()));
      auto name = entry.file;
      std::replace(name.begin(), name.end(), '/', '-');
      write_text(root / "mip" / (name.substr(0, name.size() - 4) + "-e0.lp"), lp.str());
    }
    parts[k] = build_training_set(instances, label);
    for (const auto& ex : parts[k].examples) budget_hits[k] += ex.status != SolveStatus::kOptimal ? 1 : 0;
  });
  TrainingSet all;
  std::size_t budget = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    if (all.zones == 0) {
      all.zones = parts[k].zones;
      all.multipliers = parts[k].multipliers;
    }
    for (auto& ex : parts[k].examples) all.examples.push_back(std::move(ex));
    budget += budget_hits[k];
  }
  fs::create_directories(root / "training");
  all.to_kv().save((root / "training" / "training_set.kv").string());
  log << "solve: labeled " << all.size() << " instances from " << manifest.size() << " streams (" << budget
      << " not proven optimal)\n";
  mark_done(plan, "solve");
}

void cmd_train(const ExperimentPlan& plan, const StageFlags& flags, std::ostream& log) {
  const fs::path root(plan.output_dir);
  require(root / "training" / "training_set.kv", "solve");
  if (already_done(plan, "train", flags, log)) return;
  const auto set = TrainingSet::from_kv(KvDocument::load((root / "training" / "training_set.kv").string()));
  if (set.size() < 2) throw MissingArtifact("training set has fewer than two examples");
  const auto split = split_training_set(set, plan.holdout_fraction, plan.split_seed);
  const auto pricing = train_pricing(split.train, plan.train);
  const auto relocation = train_relocation(split.train, plan.train);
  const ProxyPolicy policy(pricing, relocation, set.multipliers);
  fs::create_directories(root / "models");
  policy.save((root / "models" / "proxy.kv").string());

  const auto majority = majority_pricing_baseline(split.train, plan.train.layout);
  const auto zero = zero_relocation_baseline(split.train, plan.train.layout);
  std::ostringstream table;
  table << "learner,task,mse,zero_one,samples\n";
  auto row = [&](const std::string& name, const ProxyLearner& l) {
    const auto m = evaluate_learner(l, split.holdout);
    table << name << ',' << to_string(l.task()) << ',' << format_double(m.mse) << ','
          << (m.zero_one >= 0 ? format_double(m.zero_one) : std::string("")) << ',' << m.samples << '\n';
  };
  row(plan.train.model, pricing);
  row("majority", majority);
  row(plan.train.model, relocation);
  row("zero", zero);
  write_text(root / "models" / "validation.csv", table.str());
  log << "train: " << split.train.size() << " train / " << split.holdout.size() << " holdout\n" << table.str();
  mark_done(plan, "train");
}

void cmd_evaluate(const ExperimentPlan& plan, const StageFlags& flags, std::ostream& log) {
  const fs::path root(plan.output_dir);
  std::shared_ptr<const ProxyPolicy> proxy;
  if (std::find(plan.policies.begin(), plan.policies.end(), PolicyKind::kProxy) != plan.policies.end()) {
    require(root / "models" / "proxy.kv", "train");
    proxy = std::make_shared<const ProxyPolicy>(ProxyPolicy::load((root / "models" / "proxy.kv").string()));
  }
  if (already_done(plan, "evaluate", flags, log)) return;
  write_run_record(plan);
  const SeedRange seeds = flags.seed_override.value_or(plan.eval_seeds);
  struct Item {
    const ScenarioSpec* spec;
    std::uint64_t seed;
    PolicyKind policy;
  };
  std::vector<Item> items;
  for (const auto& spec : plan.scenarios)
    for (auto seed : seeds.seeds())
      for (auto p : plan.policies) items.push_back({&spec, seed, p});
  std::vector<std::string> rows(items.size());
  std::vector<std::string> traces(items.size());
  parallel_for(items.size(), flags.jobs, [&](std::size_t k) {
    const auto& it = items[k];
    const auto profile = scenario_profile(plan.config, *it.spec);
    const auto stream = scenario_stream(plan.config, profile, it.seed);
    EpisodeOptions o = episode_options(plan, flags);
    o.policy = it.policy;
    o.proxy = proxy;
    o.merge_map = plan.merge_map;
    std::ostringstream trace;
    if (plan.write_traces) o.trace = &trace;
    const auto m = run_episode(plan.config, profile, stream, o, it.seed);
    rows[k] = it.spec->name + "," + metrics_row(m);
    traces[k] = trace.str();
  });
  std::ostringstream out;
  out << "# ridemp metrics v" << kMetricsSchemaVersion << "\nscenario," << metrics_header() << "\n";
  std::size_t aborted = 0;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out << rows[k] << "\n";
    aborted += parse_metrics_row(rows[k].substr(rows[k].find(',') + 1)).aborted ? 1 : 0;
    if (plan.write_traces) {
      write_text(root / "traces" /
                     (items[k].spec->name + "-" + to_string(items[k].policy) + "-s" + std::to_string(items[k].seed) +
                      ".csv"),
                 traces[k]);
    }
  }
  write_text(root / "results" / "metrics.csv", out.str());
  log << "evaluate: " << rows.size() << " episodes (" << aborted << " aborted)\n";
  mark_done(plan, "evaluate");
}

void cmd_report(const ExperimentPlan& plan, const StageFlags& flags, std::ostream& log) {
  (void)flags;
  const fs::path root(plan.output_dir);
  const auto rows = read_evaluation((root / "results" / "metrics.csv").string());
  if (rows.empty()) throw MissingArtifact("evaluation output " + (root / "results" / "metrics.csv").string() + " has no rows");
  const auto summary = summarize(rows);
  std::ostringstream table;
  table << "scenario,policy,metric,n,mean,ci95_low,ci95_high\n";
  for (const auto& s : summary) {
    table << s.scenario << ',' << s.policy << ',' << s.metric << ',' << s.n << ',' << format_double(s.mean) << ','
          << format_double(s.ci_low) << ',' << format_double(s.ci_high) << '\n';
  }
  // Per-seed deltas against the first policy listed for each scenario.
  std::ostringstream paired;
  paired << "scenario,policy,reference,metric,n,mean_delta,ci95_low,ci95_high\n";
  std::map<std::string, std::string> reference;
  std::map<std::tuple<std::string, std::string, std::uint64_t>, const Metrics*> index;
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const auto& r : rows) {
    if (!reference.count(r.scenario)) reference[r.scenario] = r.metrics.policy;
    index[{r.scenario, r.metrics.policy, r.metrics.seed}] = &r.metrics;
    const auto key = std::make_pair(r.scenario, r.metrics.policy);
    if (std::find(pairs.begin(), pairs.end(), key) == pairs.end()) pairs.push_back(key);
  }
  for (const auto& [scenario, policy] : pairs) {
    const auto& ref = reference[scenario];
    if (policy == ref) continue;
    for (const std::string metric : {"riders_served", "dropout_pct"}) {
      std::vector<double> deltas;
      for (const auto& [key, m] : index) {
        if (std::get<0>(key) != scenario || std::get<1>(key) != policy) continue;
        const auto other = index.find({scenario, ref, std::get<2>(key)});
        if (other == index.end()) continue;
        deltas.push_back(metric == "riders_served"
                             ? static_cast<double>(m->riders_served - other->second->riders_served)
                             : m->dropout_pct - other->second->dropout_pct);
      }
      if (deltas.empty()) continue;
      const double n = static_cast<double>(deltas.size());
      const double mean = std::accumulate(deltas.begin(), deltas.end(), 0.0) / n;
      double var = 0.0;
      for (double d : deltas) var += (d - mean) * (d - mean);
      const double half = deltas.size() > 1 ? student_t_975(static_cast<int>(deltas.size()) - 1) *
                                                  std::sqrt(var / (n - 1)) / std::sqrt(n)
                                            : 0.0;
      paired << scenario << ',' << policy << ',' << ref << ',' << metric << ',' << deltas.size() << ','
             << format_double(mean) << ',' << format_double(mean - half) << ',' << format_double(mean + half) << '\n';
    }
  }
  write_text(root / "report" / "summary.csv", table.str());
  write_text(root / "report" / "paired.csv", paired.str());
  log << std::fixed << std::setprecision(2);
  log << "report: " << rows.size() << " episodes\n";
  log << std::left << std::setw(14) << "scenario" << std::setw(18) << "policy" << std::setw(16) << "metric"
      << std::right << std::setw(12) << "mean" << std::setw(24) << "95% CI" << "\n";
  for (const auto& s : summary) {
    std::ostringstream ci;
    ci << std::fixed << std::setprecision(2) << "[" << s.ci_low << ", " << s.ci_high << "]";
    log << std::left << std::setw(14) << s.scenario << std::setw(18) << s.policy << std::setw(16) << s.metric
        << std::right << std::setw(12) << s.mean << std::setw(24) << ci.str() << "\n";
  }
}

}  // namespace ridemp
