#include <string>

#include <CLI11.hpp>

#include "cli_commands.hpp"
#include "tergmix/common.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Model-based community detection in time-evolving binary networks"};
  app.set_version_flag("--version", std::string("tergmix ") + tergmix::kVersion);
  app.require_subcommand(1);

  int exit_code = 0;

  // simulate
  tergmix::cli::SimulateOpts sim;
  {
    CLI::App* cmd = app.add_subcommand("simulate", "Generate a synthetic network series");
    cmd->add_option("--preset", sim.preset, "Built-in setting model1..model6");
    cmd->add_option("--config", sim.config_path, "JSON simulation config")
        ->check(CLI::ExistingFile);
    cmd->add_option("--model", sim.model, "tergm or stergm (checked against the preset)");
    cmd->add_option("--seed", sim.seed, "PRNG seed")->required();
    cmd->add_option("--out", sim.out_dir, "Output directory")->required();
    cmd->callback([&] { exit_code = tergmix::cli::cmd_simulate(sim); });
  }

  // fit
  tergmix::cli::FitOpts fit;
  {
    CLI::App* cmd = app.add_subcommand("fit", "Fit the mixture at a fixed number of communities");
    cmd->add_option("--in", fit.in.path, "Series file (long TSV) or snapshot directory")
        ->required();
    cmd->add_option("--nodes", fit.in.nodes, "Override the inferred node count");
    cmd->add_option("--horizon", fit.in.horizon, "Override the inferred horizon T");
    cmd->add_option("--model", fit.model, "tergm or stergm")->default_val("tergm");
    cmd->add_option("--k", fit.k, "Number of communities")->required();
    cmd->add_option("--seed", fit.config.seed, "PRNG seed")->required();
    cmd->add_option("--restarts", fit.config.restarts, "Random restarts");
    cmd->add_option("--tol", fit.config.rel_tol, "Relative lower-bound tolerance");
    cmd->add_option("--max-iter", fit.config.max_iter, "Maximum EM iterations");
    cmd->add_option("--out", fit.out_dir, "Output directory")->required();
    cmd->callback([&] { exit_code = tergmix::cli::cmd_fit(fit); });
  }

  // select
  tergmix::cli::SelectOpts sel;
  {
    CLI::App* cmd = app.add_subcommand("select", "Scan K and score CL-BIC / ICL");
    cmd->add_option("--in", sel.in.path, "Series file (long TSV) or snapshot directory")
        ->required();
    cmd->add_option("--nodes", sel.in.nodes, "Override the inferred node count");
    cmd->add_option("--horizon", sel.in.horizon, "Override the inferred horizon T");
    cmd->add_option("--model", sel.model, "tergm or stergm")->default_val("tergm");
    cmd->add_option("--k-min", sel.k_min, "Smallest K")->default_val(1);
    cmd->add_option("--k-max", sel.k_max, "Largest K")->default_val(6);
    cmd->add_option("--seed", sel.config.seed, "PRNG seed")->required();
    cmd->add_option("--restarts", sel.config.restarts, "Random restarts per K");
    cmd->add_option("--tol", sel.config.rel_tol, "Relative lower-bound tolerance");
    cmd->add_option("--max-iter", sel.config.max_iter, "Maximum EM iterations");
    cmd->add_option("--jobs", sel.jobs, "Concurrent per-K fits (0 = all cores)");
    cmd->add_option("--out", sel.out_dir, "Output directory")->required();
    cmd->callback([&] { exit_code = tergmix::cli::cmd_select(sel); });
  }

  // metrics
  tergmix::cli::MetricsOpts met;
  {
    CLI::App* cmd = app.add_subcommand("metrics", "Compare labels (and estimates) to the truth");
    cmd->add_option("--labels", met.labels_path, "Estimated labels file")->required();
    cmd->add_option("--truth-labels", met.truth_labels_path, "True labels file")->required();
    cmd->add_option("--fit", met.fit_path, "FitResult JSON (enables RSE)");
    cmd->add_option("--truth-params", met.truth_params_path,
                    "JSON with true pi/theta (a simulate provenance file works)");
    cmd->add_option("--out", met.out_dir, "Output directory")->required();
    cmd->callback([&] { exit_code = tergmix::cli::cmd_metrics(met); });
  }

  // instability
  tergmix::cli::InstabilityOpts ins;
  {
    CLI::App* cmd = app.add_subcommand("instability", "Within/between-group instability table");
    cmd->add_option("--in", ins.in.path, "Series file (long TSV) or snapshot directory")
        ->required();
    cmd->add_option("--nodes", ins.in.nodes, "Override the inferred node count");
    cmd->add_option("--horizon", ins.in.horizon, "Override the inferred horizon T");
    cmd->add_option("--labels", ins.labels_path, "Labels file")->required();
    cmd->add_option("--out", ins.out_dir, "Output directory")->required();
    cmd->callback([&] { exit_code = tergmix::cli::cmd_instability(ins); });
  }

  CLI11_PARSE(app, argc, argv);
  return exit_code;
}
