#include <CLI11.hpp>

#include <iostream>

#include "tpflow/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"tpflow: two-phase Darcy flow simulator (DDFV / CVFE)"};
  app.require_subcommand(1);

  std::string config_path;
  tpf::CliOptions opts;
  std::string sweep_param;
  std::vector<double> sweep_values;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "case configuration file")->required();
    cmd->add_option("--out", opts.out_dir, "output directory (overrides config)");
    cmd->add_option("--seed", opts.seed, "sampling seed (overrides config)");
    cmd->add_option("--backend", opts.backend, "ddfv or cvfe (overrides config)")
        ->check(CLI::IsMember({"ddfv", "cvfe"}));
    cmd->add_flag("--quiet", opts.quiet, "suppress progress output");
  };

  CLI::App* run = app.add_subcommand("run", "advance the implicit time loop and write fields");
  add_common(run);
  run->add_flag("--dump-system", opts.dump_system,
                "also write the first-rung residual and Jacobian");
  CLI::App* verify = app.add_subcommand("verify", "run the structural property checks");
  add_common(verify);
  CLI::App* sweep = app.add_subcommand("sweep", "solve once per parameter value");
  add_common(sweep);
  sweep->add_option("--param", sweep_param, "eps, eta or dt")
      ->required()
      ->check(CLI::IsMember({"eps", "eta", "dt"}));
  sweep->add_option("--values", sweep_values, "parameter values")->required()->delimiter(',');
  CLI::App* mesh_gen = app.add_subcommand("mesh-gen", "write the configured mesh as a text file");
  add_common(mesh_gen);
  CLI::App* mesh_stats = app.add_subcommand("mesh-stats", "write mesh statistics");
  add_common(mesh_stats);

  CLI11_PARSE(app, argc, argv);

  try {
    tpf::CaseConfig cfg = tpf::load_config(config_path);
    if (run->parsed()) return tpf::cmd_run(cfg, opts);
    if (verify->parsed()) return tpf::cmd_verify(cfg, opts);
    if (sweep->parsed()) return tpf::cmd_sweep(cfg, sweep_param, sweep_values, opts);
    if (mesh_gen->parsed()) return tpf::cmd_mesh_gen(cfg, opts);
    if (mesh_stats->parsed()) return tpf::cmd_mesh_stats(cfg, opts);
  } catch (const tpf::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const tpf::InvalidParams& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const tpf::InvalidMesh& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
