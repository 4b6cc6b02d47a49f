#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dropf::cli {

enum ExitCode : int { ok = 0, input_error = 2, solver_error = 3 };

struct Globals {
  std::uint64_t seed = 1;
  double tol = 1e-7;
  unsigned threads = 1;
};

struct ScreenArgs {
  std::string case_path;
  std::string out;
};

struct SampleArgs {
  std::string case_path;
  std::size_t n = 20;
  double rho = 0.4;
  std::uint64_t std_seed = 0;  // 0: derived from --seed
  bool slr = false;
  std::string out;
};

struct SolveArgs {
  std::string case_path;
  std::string samples;
  std::string model = "wm";
  std::string approx = "separable";
  double theta = 0.0;
  double tau = 1.0;
  std::string norm = "l2";
  bool slr = false;
  bool count_only = false;
  std::string dump_program;
  std::string out;
};

struct TuneArgs {
  std::string case_path;
  std::string samples;
  std::string model = "wm";
  std::string approx = "separable";
  std::string norm = "l2";
  bool grid_coarse = false;
  bool grid_fine = false;
  std::vector<double> theta_values;
  std::vector<double> tau_values;
  double split = 0.7;
  std::string score = "validation-cost";
  bool slr = false;
  std::string out;
  std::string report;
};

struct ExperimentArgs {
  std::string config;
  std::string out_dir;
};

int cmd_screen(const Globals& g, const ScreenArgs& a);
int cmd_sample(const Globals& g, const SampleArgs& a);
int cmd_solve(const Globals& g, const SolveArgs& a);
int cmd_tune(const Globals& g, const TuneArgs& a);
int cmd_experiment(const Globals& g, const ExperimentArgs& a);

}  // namespace dropf::cli
