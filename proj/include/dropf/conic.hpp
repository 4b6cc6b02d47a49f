#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace dropf {

/// sum(coef * x_var) + constant.
struct AffineExpr {
  std::vector<std::pair<std::size_t, double>> terms;
  double constant = 0.0;

  AffineExpr() = default;
  explicit AffineExpr(double c) : constant(c) {}
  static AffineExpr var(std::size_t v, double coef = 1.0) {
    AffineExpr e;
    e.terms.emplace_back(v, coef);
    return e;
  }

  AffineExpr& add(std::size_t v, double coef) {
    if (coef != 0.0) terms.emplace_back(v, coef);
    return *this;
  }
  AffineExpr& operator+=(const AffineExpr& o);
  AffineExpr& operator-=(const AffineExpr& o);
  AffineExpr& operator*=(double s);

  double value(const Eigen::VectorXd& x) const;
};

AffineExpr operator+(AffineExpr a, const AffineExpr& b);
AffineExpr operator-(AffineExpr a, const AffineExpr& b);
AffineExpr operator*(double s, AffineExpr a);

/// Symmetric matrix variable stored as its lower triangle, column-major.
struct SymmetricBlock {
  std::size_t dim = 0;
  std::size_t start = 0;

  std::size_t at(std::size_t i, std::size_t j) const {
    if (i < j) std::swap(i, j);
    // Column j starts after columns 0..j-1 of lengths dim, dim-1, ...
    return start + j * dim - j * (j - 1) / 2 + (i - j);
  }
  std::size_t entries() const { return dim * (dim + 1) / 2; }
};

/// M(x) >= 0 for a symmetric matrix of affine expressions (lower triangle
/// stored column-major, same ordering as SymmetricBlock).
struct PsdConstraint {
  std::size_t dim = 0;
  std::vector<AffineExpr> lower;

  explicit PsdConstraint(std::size_t n = 0) : dim(n), lower(n * (n + 1) / 2) {}
  AffineExpr& at(std::size_t i, std::size_t j) {
    if (i < j) std::swap(i, j);
    return lower[j * dim - j * (j - 1) / 2 + (i - j)];
  }
  const AffineExpr& at(std::size_t i, std::size_t j) const {
    if (i < j) std::swap(i, j);
    return lower[j * dim - j * (j - 1) / 2 + (i - j)];
  }
};

/// ||u||_2 <= t.
struct SocConstraint {
  AffineExpr t;
  std::vector<AffineExpr> u;
};

enum class ProgramClass { linear_quadratic, second_order, semidefinite };

const char* to_string(ProgramClass c);

/// Convex program: minimize sum q_ij x_i x_j + c'x + c0 subject to
/// equalities (e = 0), inequalities (e >= 0), second-order cones and PSD blocks.
class ConicProgram {
 public:
  std::size_t add_variable();
  /// Returns the index of the first of `n` consecutive variables.
  std::size_t add_variables(std::size_t n);
  SymmetricBlock add_symmetric(std::size_t dim);

  void add_equality(AffineExpr e) { equalities_.push_back(std::move(e)); }
  void add_inequality(AffineExpr e) { inequalities_.push_back(std::move(e)); }
  void add_soc(SocConstraint c) { socs_.push_back(std::move(c)); }
  void add_psd(PsdConstraint c) { psds_.push_back(std::move(c)); }

  void add_linear_cost(std::size_t v, double c);
  /// Adds coef * x_i * x_j to the objective.
  void add_quadratic_cost(std::size_t i, std::size_t j, double coef);
  void add_constant_cost(double c) { objective_constant_ += c; }

  std::size_t variable_count() const { return n_vars_; }
  /// Typical magnitude of variables [first, first + count). Solvers may work
  /// in x / scale; the program and its solutions stay unscaled.
  void set_scale(std::size_t first, std::size_t count, double scale);
  const std::vector<double>& scales() const { return scales_; }
  const std::vector<AffineExpr>& equalities() const { return equalities_; }
  const std::vector<AffineExpr>& inequalities() const { return inequalities_; }
  const std::vector<SocConstraint>& socs() const { return socs_; }
  const std::vector<PsdConstraint>& psds() const { return psds_; }
  const std::vector<double>& linear_cost() const { return linear_; }
  /// (i, j, coef), i <= j.
  const std::vector<std::tuple<std::size_t, std::size_t, double>>& quadratic_cost() const {
    return quadratic_;
  }
  double constant_cost() const { return objective_constant_; }

  double objective(const Eigen::VectorXd& x) const;

  /// Depends only on which cone types appear.
  ProgramClass classify() const;

  /// Throws std::logic_error if an expression references an undeclared variable.
  void check_references() const;

  /// Sparse triplet listing of objective and constraints.
  void dump(const std::filesystem::path& path) const;

 private:
  std::size_t n_vars_ = 0;
  std::vector<double> linear_;
  std::vector<double> scales_;
  std::vector<std::tuple<std::size_t, std::size_t, double>> quadratic_;
  double objective_constant_ = 0.0;
  std::vector<AffineExpr> equalities_;
  std::vector<AffineExpr> inequalities_;
  std::vector<SocConstraint> socs_;
  std::vector<PsdConstraint> psds_;
};

struct Residuals {
  double equality = 0.0;    // max |e|
  double inequality = 0.0;  // max(-e, 0)
  double soc = 0.0;         // max(||u|| - t, 0)
  double psd = 0.0;         // max(-lambda_min, 0)
  double min_psd_eigenvalue = 0.0;
  /// Largest violation divided by 1 + the magnitude of the row's terms.
  double relative = 0.0;

  double worst() const;
};

/// Recomputes residuals at x without consulting any solver state.
Residuals check_solution(const ConicProgram& program, const Eigen::VectorXd& x);

/// reduced_accuracy: the solver stopped at its relaxed tolerances.
enum class SolveStatus { optimal, reduced_accuracy, infeasible, unbounded, numerical_failure };

const char* to_string(SolveStatus s);

struct Solution {
  SolveStatus status = SolveStatus::numerical_failure;
  Eigen::VectorXd x;
  double objective = 0.0;
  Residuals residuals;
  double solve_time_s = 0.0;
  long iterations = 0;
  std::string message;
};

struct SolverSettings {
  double feasibility_tol = 1e-7;
  double gap_tol = 1e-8;
  long max_iterations = 200000;
  double time_limit_s = 0.0;  // 0 = none
  bool verbose = false;
  /// Ruiz scaling of the KKT system; off by default because the risk
  /// models have badly split row scales that it makes worse.
  bool equilibrate = false;
  /// Whether callers may use a reduced_accuracy point as a decision.
  bool accept_reduced_accuracy = true;
};

/// Narrow adapter contract: a solver consumes a ConicProgram and reports a
/// Solution whose residuals were recomputed with check_solution.
class ConicSolver {
 public:
  virtual ~ConicSolver() = default;
  virtual std::string name() const = 0;
  virtual Solution solve(const ConicProgram& program, const SolverSettings& settings) const = 0;
};

/// The solver wired at build time.
const ConicSolver& default_solver();

}  // namespace dropf
