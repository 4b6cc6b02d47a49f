#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "dropf/formulations.hpp"
#include "dropf/tuning.hpp"

namespace dropf {

/// DC(x) + mean risk over the rows of `test`.
double out_of_sample_performance(const RiskModel& risk, const DispatchDecision& x,
                                 const Eigen::MatrixXd& test);

enum class DlrMode { dlr, slr };
const char* to_string(DlrMode m);
DlrMode parse_dlr_mode(const std::string& s);

/// Names the offending field.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

struct ExperimentConfig {
  std::filesystem::path case_path;  // empty: bundled 5-bus case
  std::vector<ModelKind> models{ModelKind::wm_dropf, ModelKind::w_dropf, ModelKind::m_dropf, ModelKind::saa};
  ApproxMode approx = ApproxMode::separable;
  std::size_t n_train = 20;
  std::size_t n_test = 10000;
  std::size_t repetitions = 50;
  std::vector<double> rho{0.4};
  PenaltyWeights penalties;
  std::uint64_t seed = 1;
  std::vector<DlrMode> dlr_modes{DlrMode::dlr};
  GroundNorm norm = GroundNorm::l2;
  /// When false the fixed theta/tau below are used for every model.
  bool tune = true;
  TuneGrid grid = TuneGrid::coarse();
  TuneScore score = TuneScore::validation_cost;
  double theta = 0.0;
  double tau = 1.0;
  unsigned threads = 1;
  SolverSettings solver;

  void validate() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::ordered_json to_json() const;
};

struct ReportRow {
  std::size_t repetition = 0;
  ModelKind model = ModelKind::saa;
  DlrMode dlr_mode = DlrMode::dlr;
  double rho = 0.0;
  std::size_t n = 0;
  double theta = 0.0;
  double tau = 1.0;
  double dispatch_cost = 0.0;
  double op = 0.0;
  double solve_time_s = 0.0;
  std::string status;
  bool ok = false;
};

struct Stats {
  double avg = 0.0;
  double max = 0.0;
  double min = 0.0;
};

struct Aggregate {
  double rho = 0.0;
  DlrMode dlr_mode = DlrMode::dlr;
  ModelKind model = ModelKind::saa;
  std::size_t count = 0;
  Stats dispatch_cost;
  Stats op;
  Stats solve_time_s;
  double theta_avg = 0.0;
  double tau_avg = 0.0;
};

struct Report {
  std::vector<ReportRow> rows;
  std::vector<Aggregate> aggregates;
  /// (rho, repetition) pairs with at least one failed row; their rows are
  /// kept in `rows` but left out of every aggregate.
  std::size_t failed_repetitions = 0;
};

/// Aggregates over (rho, dlr_mode, model) from the rows alone.
Report summarize(std::vector<ReportRow> rows);

/// Seed of stream `stream` for (rho index, repetition), from the master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t rho_index, std::uint64_t repetition,
                          std::uint64_t stream);

Report run_experiment(const ExperimentConfig& config);

/// Columns: repetition, model, dlr_mode, rho, N, theta, tau, dispatch_cost,
/// op, solve_time_s, status.
void write_report_csv(const std::filesystem::path& path, const Report& report,
                      const std::string& header_comment = {});
/// Aligned text: one block per (rho, dlr_mode) with avg/max/min of DC, OP and
/// solve time per model.
void write_report_table(const std::filesystem::path& path, const Report& report,
                        const std::string& header_comment = {});

}  // namespace dropf
