// ridectl: scenario generation, MPC labeling, proxy training, policy
// evaluation and reporting for one experiment plan.
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "ridemp/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPlan = 2;
constexpr int kExitMissing = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ride-hailing pricing and relocation experiments"};
  app.set_version_flag("--version", ridemp::version_stamp());
  app.require_subcommand(1, 1);

  std::string plan_path;
  std::string seed_range;
  ridemp::StageFlags flags;

  auto add_stage = [&](const std::string& name, const std::string& help) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--plan", plan_path, "experiment plan (key = value file)")->required();
    sub->add_option("--seed-range", seed_range, "override the stage's seed range, e.g. 1-20");
    sub->add_flag("--force", flags.force, "rerun a completed stage");
    sub->add_option("--jobs", flags.jobs, "worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--wall-clock", flags.wall_clock, "honour wall-clock solver limits from the plan");
    return sub;
  };
  add_stage("generate", "write base and perturbed request streams");
  auto* solve = add_stage("solve", "harvest MPC instances and label them");
  solve->add_flag("--export-mip", flags.export_mip, "also write the first instance of each stream as an LP file");
  add_stage("train", "train the pricing and relocation learners");
  add_stage("evaluate", "run every policy on the evaluation seeds");
  add_stage("report", "summarize evaluation metrics");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitPlan;
  }

  const std::string stage = app.get_subcommands().front()->get_name();
  try {
    if (!seed_range.empty()) flags.seed_override = ridemp::parse_seed_range(seed_range);
    const auto plan = ridemp::ExperimentPlan::load(plan_path);
    if (stage == "generate") ridemp::cmd_generate(plan, flags, std::cout);
    else if (stage == "solve") ridemp::cmd_solve(plan, flags, std::cout);
    else if (stage == "train") ridemp::cmd_train(plan, flags, std::cout);
    else if (stage == "evaluate") ridemp::cmd_evaluate(plan, flags, std::cout);
    else ridemp::cmd_report(plan, flags, std::cout);
  } catch (const ridemp::PlanError& e) {
    std::cerr << "ridectl " << stage << ": " << e.what() << "\n";
    return kExitPlan;
  } catch (const ridemp::MissingArtifact& e) {
    std::cerr << "ridectl " << stage << ": " << e.what() << "\n";
    return kExitMissing;
  } catch (const std::exception& e) {
    std::cerr << "ridectl " << stage << ": error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
