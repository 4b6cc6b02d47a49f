#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

int main(int argc, char** argv) {
  // One BLAS thread keeps solver arithmetic identical across --threads.
  setenv("OPENBLAS_NUM_THREADS", "1", 0);

  using namespace dropf::cli;
  CLI::App app{"Risk-based distributionally robust dispatch with dynamic line ratings"};
  app.set_version_flag("--version", std::string(DROPF_VERSION));
  app.require_subcommand(1);

  Globals g;
  app.add_option("--seed", g.seed, "Master seed for every random draw")->capture_default_str();
  app.add_option("--tol", g.tol, "Solver feasibility tolerance")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--threads", g.threads, "Worker threads for tuning and experiments")
      ->capture_default_str()
      ->check(CLI::Range(1u, 1024u));

  ScreenArgs screen;
  auto* sc = app.add_subcommand("screen", "Identify lines whose limits can never bind");
  sc->add_option("--case", screen.case_path, "Case JSON (default: bundled 5-bus)");
  sc->add_option("--out", screen.out, "Output JSON (default: stdout)");

  SampleArgs sample;
  auto* sa = app.add_subcommand("sample", "Draw wind and line-rating samples");
  sa->add_option("--case", sample.case_path, "Case JSON (default: bundled 5-bus)");
  sa->add_option("--n", sample.n, "Number of samples")->capture_default_str()->check(CLI::PositiveNumber);
  sa->add_option("--rho", sample.rho, "Correlation parameter")->capture_default_str()->check(CLI::Range(0.0, 0.999999));
  sa->add_option("--std-seed", sample.std_seed, "Seed of the std-factor draw (default: from --seed)");
  sa->add_flag("--slr", sample.slr, "Pin line ratings at their static values");
  sa->add_option("--out", sample.out, "Output CSV; a .json sidecar is written next to it")->required();

  SolveArgs solve;
  auto* so = app.add_subcommand("solve", "Build and solve one dispatch model");
  so->add_option("--case", solve.case_path, "Case JSON (default: bundled 5-bus)");
  so->add_option("--samples", solve.samples, "Sample CSV from `sample`");
  so->add_option("--model", solve.model, "det|saa|w|m|wm")->capture_default_str();
  so->add_option("--approx", solve.approx, "exact|grouped|separable")->capture_default_str();
  so->add_option("--theta", solve.theta, "Wasserstein radius")->capture_default_str()->check(CLI::NonNegativeNumber);
  so->add_option("--tau", solve.tau, "Covariance multiple")->capture_default_str()->check(CLI::Range(1.0, 1e9));
  so->add_option("--norm", solve.norm, "Ground norm l1|l2|linf")->capture_default_str();
  so->add_flag("--slr", solve.slr, "Operate every line at its static rating");
  so->add_flag("--count-only", solve.count_only, "Report model sizes without building or solving");
  so->add_option("--dump-program", solve.dump_program, "Write the conic program as triplets");
  so->add_option("--out", solve.out, "Decision JSON (default: stdout)");

  TuneArgs tune;
  auto* tu = app.add_subcommand("tune", "Hold-out selection of theta and tau");
  tu->add_option("--case", tune.case_path, "Case JSON (default: bundled 5-bus)");
  tu->add_option("--samples", tune.samples, "Sample CSV from `sample`")->required();
  tu->add_option("--model", tune.model, "w|m|wm")->capture_default_str();
  tu->add_option("--approx", tune.approx, "exact|grouped|separable")->capture_default_str();
  tu->add_option("--norm", tune.norm, "Ground norm l1|l2|linf")->capture_default_str();
  auto* coarse = tu->add_flag("--grid-coarse", tune.grid_coarse, "theta step 0.05, tau step 1 (default)");
  auto* fine = tu->add_flag("--grid-fine", tune.grid_fine, "theta step 0.01, tau step 1");
  coarse->excludes(fine);
  auto* tv = tu->add_option("--theta-values", tune.theta_values, "Explicit theta grid");
  auto* tav = tu->add_option("--tau-values", tune.tau_values, "Explicit tau grid");
  tv->excludes(fine)->excludes(coarse);
  tav->excludes(fine)->excludes(coarse);
  tu->add_option("--split", tune.split, "Training fraction")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  tu->add_option("--score", tune.score, "validation-cost|train-objective")->capture_default_str();
  tu->add_flag("--slr", tune.slr, "Operate every line at its static rating");
  tu->add_option("--out", tune.out, "Selection JSON (default: stdout)");
  tu->add_option("--report", tune.report, "Per-point CSV");

  ExperimentArgs exp;
  auto* ex = app.add_subcommand("experiment", "Repeated train/test comparison of the models");
  ex->add_option("--config", exp.config, "Experiment JSON")->required();
  ex->add_option("--out-dir", exp.out_dir, "Directory for report.csv and report.txt")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : input_error;
  }

  if (sc->parsed()) return cmd_screen(g, screen);
  if (sa->parsed()) return cmd_sample(g, sample);
  if (so->parsed()) return cmd_solve(g, solve);
  if (tu->parsed()) return cmd_tune(g, tune);
  if (ex->parsed()) return cmd_experiment(g, exp);
  return input_error;
}
