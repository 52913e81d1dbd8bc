// splitlift command line: pipeline, sweeps, strategy comparison, and the
// standalone attack and evaluation steps.

#include <iostream>

#include "CLI11.hpp"

#include "splitlift/pipeline.hpp"

using namespace splitlift;

namespace {

void add_run_flags(CLI::App* cmd, RunConfig& c, std::string& config_file) {
  cmd->add_option("-i,--input", c.input, "Input .bench netlist");
  cmd->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  cmd->add_option("--utilization", c.utilization, "Placement utilization")->capture_default_str();
  cmd->add_option("--stack", c.stack, "Layer stack: default or extended")->capture_default_str();
  cmd->add_option("--target-layer", c.target_layer, "Lift target layer")->capture_default_str();
  cmd->add_option("--split", c.split_layers, "Split layer(s)")->capture_default_str();
  cmd->add_option("--ratio", c.lift_ratio, "Share of nets to lift")->capture_default_str();
  cmd->add_option("--budget-area", c.budgets.area_pct, "Area budget in percent")->capture_default_str();
  cmd->add_option("--budget-power", c.budgets.power_pct, "Power budget in percent")->capture_default_str();
  cmd->add_option("--budget-delay", c.budgets.delay_pct, "Delay budget in percent")->capture_default_str();
  cmd->add_option("--strategy", c.strategies, "S12, S3, NAIVE or NONE")->capture_default_str();
  cmd->add_option("--attack", c.attack, "flow or proximity")->capture_default_str();
  cmd->add_option("--vectors", c.vectors, "Random simulation vectors")->capture_default_str();
  cmd->add_option("--ratios", c.sweep_ratios, "Lift ratios for sweep-ratio")->capture_default_str();
  cmd->add_option("--compare-ratio", c.compare_ratio, "Lift ratio for compare-strategies")->capture_default_str();
  cmd->add_option("-o,--out", c.output_dir, "Output directory")->capture_default_str();
  cmd->add_option("--config", config_file, "JSON config; its keys override flags");
}

RunConfig finish(RunConfig c, const std::string& config_file) {
  if (!config_file.empty()) apply_config_json(c, read_json_file(config_file));
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Split-manufacturing protection by wire lifting, with attacks and metrics"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string config_file;
  std::vector<int> sweep_layers;

  auto* pipeline = app.add_subcommand("pipeline", "Protect, split, attack and score one design");
  add_run_flags(pipeline, cfg, config_file);

  auto* sweep_split = app.add_subcommand("sweep-split", "OPPs and PNR per split layer");
  add_run_flags(sweep_split, cfg, config_file);
  sweep_split->add_option("--layers", sweep_layers, "Split layers to sweep (default: all)");

  auto* sweep_ratio = app.add_subcommand("sweep-ratio", "OPPs and PNR per share of randomly lifted nets");
  add_run_flags(sweep_ratio, cfg, config_file);

  auto* compare = app.add_subcommand("compare-strategies", "ORIGINAL, NAIVE, S12 and S3 at one lift ratio");
  add_run_flags(compare, cfg, config_file);

  std::string feol_path, attack_out, attack_name = "flow";
  AttackConfig ac;
  std::optional<Nm> max_dist;
  auto* attack = app.add_subcommand("attack", "Attack a FEOL document");
  attack->add_option("--feol", feol_path, "FEOL document")->required();
  attack->add_option("--attack", attack_name, "flow or proximity")->capture_default_str();
  attack->add_option("--lambda-dir", ac.lambda_dir, "Cost factor for wires pointing away")->capture_default_str();
  attack->add_option("--fanout-unit", ac.fanout_unit, "Sinks per drive class unit")->capture_default_str();
  attack->add_option("--relax-rounds", ac.relax_rounds, "Capacity relaxation rounds")->capture_default_str();
  attack->add_option("--loop-cap", ac.loop_repair_cap, "Loop repairs before giving up")->capture_default_str();
  attack->add_option("--max-distance", max_dist, "Longest plausible pair in nm");
  attack->add_option("-o,--out", attack_out, "Output document")->required();

  std::string layout_path, attack_path, eval_out;
  int eval_split = 5;
  std::size_t eval_vectors = 10000;
  std::uint64_t eval_seed = 42;
  auto* eval = app.add_subcommand("eval", "Score an attack document against its layout");
  eval->add_option("--layout", layout_path, "Layout document")->required();
  eval->add_option("--split", eval_split, "Split layer the attack saw")->capture_default_str();
  eval->add_option("--attack-result", attack_path, "Attack document")->required();
  eval->add_option("--vectors", eval_vectors, "Random simulation vectors")->capture_default_str();
  eval->add_option("--seed", eval_seed, "Simulation seed")->capture_default_str();
  eval->add_option("-o,--out", eval_out, "Output document")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (pipeline->parsed()) {
      cmd_pipeline(finish(cfg, config_file), std::cout);
    } else if (sweep_split->parsed()) {
      RunConfig c = finish(cfg, config_file);
      cmd_sweep_split(c, sweep_layers, std::cout);
    } else if (sweep_ratio->parsed()) {
      cmd_sweep_ratio(finish(cfg, config_file), std::cout);
    } else if (compare->parsed()) {
      cmd_compare_strategies(finish(cfg, config_file), std::cout);
    } else if (attack->parsed()) {
      ac.max_pair_distance = max_dist;
      auto inf = cmd_attack(feol_path, attack_name, attack_out, ac);
      std::cout << inf.method << ": " << inf.assigned() << " sink pins assigned, cost " << inf.total_cost << '\n';
    } else if (eval->parsed()) {
      auto r = cmd_eval(layout_path, eval_split, attack_path, eval_vectors, eval_seed, eval_out);
      std::cout << r.design << " M" << r.split_layer << ": PNR " << fmt_pct(r.pnr) << "%, HD " << fmt_pct(r.hd)
                << "%, OER " << fmt_pct(r.oer) << "%\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
