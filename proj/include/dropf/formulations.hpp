#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dropf/conic.hpp"
#include "dropf/risk.hpp"
#include "dropf/uncertainty.hpp"

namespace dropf {

enum class ModelKind { deterministic, saa, w_dropf, m_dropf, wm_dropf };
enum class GroundNorm { l1, l2, linf };

const char* to_string(ModelKind k);
const char* to_string(GroundNorm n);
/// Accepts det|saa|w|m|wm and the long names.
ModelKind parse_model(const std::string& s);
GroundNorm parse_norm(const std::string& s);

struct AmbiguitySpec {
  double theta = 0.0;  // Wasserstein radius, MW
  double tau = 1.0;    // covariance multiple
  GroundNorm norm = GroundNorm::l2;
};

struct ModelSpec {
  ModelKind kind = ModelKind::wm_dropf;
  ApproxMode approx = ApproxMode::separable;
  AmbiguitySpec ambiguity;

  void validate() const;
};

/// Auxiliary sizes. The decision block is
/// excluded, a dual-norm bound counts as one linear constraint however it is
/// expressed, and the matrix multiplier counts as one variable in the
/// combined model but as d^2 variables in the moment-only model.
struct ModelCounts {
  std::uint64_t variables = 0;
  std::uint64_t psd = 0;
  std::uint64_t linear = 0;

  bool operator==(const ModelCounts&) const = default;
};

/// Closed-form counts for (kind, approx, N, G, L, W).
ModelCounts expected_counts(ModelKind kind, ApproxMode approx, std::uint64_t n, std::uint64_t g,
                            std::uint64_t l, std::uint64_t w);

/// Raised when a model would exceed the piece-times-sample cap.
class ModelTooLarge : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BuildOptions {
  bool materialize = true;              // false: counts only
  std::uint64_t piece_cap = 1'000'000;  // pieces x samples per model
  /// Scale hint for every auxiliary variable. Multipliers and epigraph
  /// variables grow with the penalty weights, so the solver sees them in
  /// units of aux_scale.
  double aux_scale = 100.0;
};

struct BuiltModel {
  ModelSpec spec;
  ProgramClass program_class = ProgramClass::linear_quadratic;
  ModelCounts counts;
  ConicProgram program;
  bool materialized = false;
  std::size_t decision_size = 0;  // leading program variables
  /// Risk part of the objective as a function of the auxiliaries: the
  /// dual bound on the worst-case expected risk.
  AffineExpr risk_bound;
  std::size_t samples = 0;
};

/// Second-stage-free problem on p only: generation cost, balance, box and
/// forecast-rating limits on the kept lines.
BuiltModel build_deterministic(const RiskModel& risk, const std::vector<std::size_t>& kept_lines,
                               BuildOptions opt = {});

BuiltModel build_saa(const RiskModel& risk, const std::vector<std::size_t>& kept_lines,
                     const Eigen::MatrixXd& samples, BuildOptions opt = {});

BuiltModel build_w_dropf(const RiskModel& risk, const std::vector<std::size_t>& kept_lines,
                         const Eigen::MatrixXd& samples, const AmbiguitySpec& amb, ApproxMode approx,
                         BuildOptions opt = {});

BuiltModel build_m_dropf(const RiskModel& risk, const std::vector<std::size_t>& kept_lines,
                         const EmpiricalMoments& moments, double tau, ApproxMode approx,
                         BuildOptions opt = {});

BuiltModel build_wm_dropf(const RiskModel& risk, const std::vector<std::size_t>& kept_lines,
                          const Eigen::MatrixXd& samples, const AmbiguitySpec& amb, ApproxMode approx,
                          BuildOptions opt = {});

/// Dispatches on spec.kind.
BuiltModel build_model(const RiskModel& risk, const std::vector<std::size_t>& kept_lines,
                       const Eigen::MatrixXd& samples, const ModelSpec& spec, BuildOptions opt = {});

class ExtractionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reads the decision block. Refuses non-optimal solutions (reduced_accuracy
/// only passes with `accept_reduced`) and relative residuals above `tol`; alpha is
/// clipped/renormalized only within 1e-7.
DispatchDecision extract_decision(const BuiltModel& model, const RiskModel& risk,
                                  const Solution& solution, double tol = 1e-5,
                                  bool accept_reduced = false);

struct SolvedModel {
  BuiltModel model;
  Solution solution;
  DispatchDecision decision;
  double risk_bound = 0.0;
};

/// Build, solve with the default solver and extract. Throws ExtractionError
/// when the solve does not end optimal.
SolvedModel solve_model(const RiskModel& risk, const std::vector<std::size_t>& kept_lines,
                        const Eigen::MatrixXd& samples, const ModelSpec& spec,
                        const SolverSettings& settings = {}, BuildOptions opt = {});

nlohmann::ordered_json decision_json(const SolvedModel& solved, const Case& c);

}  // namespace dropf
