#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dropf/case.hpp"
#include "dropf/ptdf.hpp"
#include "dropf/uncertainty.hpp"

namespace dropf {

/// $/MWh. Defaults are the benchmark setting of the 5-bus studies.
struct PenaltyWeights {
  double beta_d = 1e4;  // load shedding
  double beta_w = 1e3;  // wind curtailment
  double beta_l = 5e3;  // line overload
};

/// Column layout of the decision vector: p for every generator, then
/// (r_up, r_dn, alpha) for AGC generators only. Non-AGC units have fixed
/// alpha = 0 and no reserves.
class DecisionLayout {
 public:
  DecisionLayout() = default;
  explicit DecisionLayout(const Case& c);

  std::size_t size() const { return n_gen_ + 3 * agc_.size(); }
  std::size_t generator_count() const { return n_gen_; }
  std::size_t agc_count() const { return agc_.size(); }
  /// Generator index of the a-th AGC unit.
  std::size_t agc_generator(std::size_t a) const { return agc_[a]; }
  const std::vector<std::size_t>& agc() const { return agc_; }

  std::size_t p(std::size_t g) const { return g; }
  std::size_t r_up(std::size_t a) const { return n_gen_ + a; }
  std::size_t r_dn(std::size_t a) const { return n_gen_ + agc_.size() + a; }
  std::size_t alpha(std::size_t a) const { return n_gen_ + 2 * agc_.size() + a; }

 private:
  std::size_t n_gen_ = 0;
  std::vector<std::size_t> agc_;
};

/// Per-generator dispatch (case order). Reserves and alpha are zero for
/// non-AGC units.
struct DispatchDecision {
  std::vector<double> p;
  std::vector<double> r_up;
  std::vector<double> r_dn;
  std::vector<double> alpha;
  std::string model;

  Eigen::VectorXd to_vector(const DecisionLayout& layout) const;
  static DispatchDecision from_vector(const DecisionLayout& layout, const Eigen::VectorXd& x);
};

/// Sum of generation and reserve costs, $/h.
double dispatch_cost(const Case& c, const DispatchDecision& x);

/// Largest violation of the decision invariants (MW or dimensionless).
double decision_violation(const Case& c, const DispatchDecision& x);

/// coef . x + constant over the decision vector, sparse.
struct LinearForm {
  std::vector<std::pair<std::size_t, double>> terms;
  double constant = 0.0;

  double operator()(const Eigen::VectorXd& x) const;
  LinearForm& operator+=(const LinearForm& o);
  LinearForm& operator*=(double s);
  /// Merges duplicate variables and removes exact zeros.
  void compact();
  bool is_zero() const;
};

/// a(x)' xi + b(x) with a, b affine in the decision.
struct SymbolicPiece {
  std::vector<LinearForm> a;  // one per uncertainty component
  LinearForm b;
};

/// a' xi + b at a fixed decision.
struct AffinePiece {
  Eigen::VectorXd a;
  double b = 0.0;

  double operator()(const Eigen::VectorXd& xi) const { return a.dot(xi) + b; }
};

enum class ApproxMode { exact, grouped, separable };

const char* to_string(ApproxMode m);
ApproxMode parse_approx(const std::string& s);

/// Pieces whose pointwise max is one risk term (or a sum of terms).
struct PieceFamily {
  std::string name;
  std::vector<SymbolicPiece> pieces;
};

/// 4^G * 3^L; throws std::overflow_error above 2^63.
std::uint64_t piece_count(std::uint64_t g, std::uint64_t l);

/// Saturating product helpers used for size guards.
std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b);
std::uint64_t checked_pow(std::uint64_t base, std::uint64_t exp);

/// Risk function of a case with a fixed uncertainty layout.
class RiskModel {
 public:
  RiskModel(Case c, PtdfMatrix ptdf, UncertaintyIndex index, PenaltyWeights weights);

  const Case& grid() const { return case_; }
  const PtdfMatrix& ptdf() const { return ptdf_; }
  const UncertaintyIndex& index() const { return index_; }
  const PenaltyWeights& weights() const { return weights_; }
  const DecisionLayout& layout() const { return layout_; }
  std::size_t dim() const { return index_.size(); }

  /// Load-shed family {shed piece, zero} of the a-th AGC unit.
  PieceFamily shed_family(std::size_t a) const;
  /// Curtailment family {curtail piece, zero} of the a-th AGC unit.
  PieceFamily curtail_family(std::size_t a) const;
  /// Overload family {+flow - rating, -flow - rating, zero} of the i-th uncertain line.
  PieceFamily line_family(std::size_t i) const;

  /// exact: one family of 4^G 3^L pieces; grouped: shed (2^G), curtail (2^G),
  /// line (3^L); separable: 2G + L families in the order shed, curtail, line.
  std::vector<PieceFamily> families(ApproxMode mode) const;

  /// Family sizes without materializing pieces.
  std::vector<std::uint64_t> family_sizes(ApproxMode mode) const;

  /// Penalized shed, curtailment and overload at xi, computed from flows, $/h.
  double evaluate(const DispatchDecision& x, const Eigen::VectorXd& xi) const;

  /// Mean of evaluate() over the rows of `samples`.
  double mean_risk(const DispatchDecision& x, const Eigen::MatrixXd& samples) const;

 private:
  Case case_;
  PtdfMatrix ptdf_;
  UncertaintyIndex index_;
  PenaltyWeights weights_;
  DecisionLayout layout_;
  double wind_forecast_ = 0.0;
};

/// Cartesian sum: one piece per choice of one piece from each family.
PieceFamily sum_families(const std::vector<PieceFamily>& parts, std::string name);

AffinePiece instantiate(const SymbolicPiece& piece, const Eigen::VectorXd& x);

/// max over pieces of a' xi + b.
double max_piece(const std::vector<AffinePiece>& pieces, const Eigen::VectorXd& xi);

}  // namespace dropf
