#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dropf/formulations.hpp"

namespace dropf {

struct TuneGrid {
  std::vector<double> theta_values;
  std::vector<double> tau_values;
  double split_fraction = 0.7;
  std::uint64_t seed = 0;

  /// theta 0..1 step 0.05, tau 1..10 step 1.
  static TuneGrid coarse();
  /// theta 0..1 step 0.01, tau 1..10 step 1.
  static TuneGrid fine();

  /// Values sorted ascending, theta in [0, 1], tau >= 1, fraction in (0, 1).
  void validate() const;
};

enum class TuneScore {
  validation_cost,  // dispatch cost + mean risk on the held-out rows
  train_objective,  // optimal value on the training rows
};

const char* to_string(TuneScore s);
TuneScore parse_score(const std::string& s);

struct TuneOptions {
  TuneScore score = TuneScore::validation_cost;
  GroundNorm norm = GroundNorm::l2;
  SolverSettings solver;
  unsigned threads = 1;
};

struct TunePoint {
  double theta = 0.0;
  double tau = 1.0;
  double train_objective = 0.0;
  double validation_score = 0.0;
  std::string status;  // solver status, or the failure message
  bool ok = false;
};

struct TuneResult {
  double theta = 0.0;
  double tau = 1.0;
  std::vector<TunePoint> points;  // grid order: theta major, tau minor
  std::size_t failures = 0;
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> validation_rows;
};

class TuningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Random partition of 0..n-1 with round(fraction * n) training rows,
/// clamped to [1, n-1]. Both parts are returned sorted.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> holdout_split(std::size_t n, double fraction,
                                                                            std::uint64_t seed);

/// Solves `kind` on the training rows at every grid point and keeps the best
/// score; ties go to the smallest theta, then the smallest tau. The theta
/// axis is ignored for the moment-only model and the tau axis for the
/// Wasserstein-only model. Failed points are recorded and skipped.
TuneResult holdout_tune(const RiskModel& risk, const std::vector<std::size_t>& kept_lines,
                        const Eigen::MatrixXd& samples, const TuneGrid& grid, ModelKind kind,
                        ApproxMode approx, const TuneOptions& options = {});

/// Index of the selected point under the tie rule, or -1 if none is ok.
long select_best(const std::vector<TunePoint>& points);

/// CSV: theta, tau, train_objective, validation_score, status.
void write_tune_report(const std::filesystem::path& path, const TuneResult& result,
                       const std::string& header_comment = {});

}  // namespace dropf
