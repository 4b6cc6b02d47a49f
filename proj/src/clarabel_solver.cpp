// Adapter from ConicProgram to the Clarabel interior-point solver.
#include <chrono>
#include <cmath>
#include <sstream>

#include <Eigen/SparseCore>

#include "clarabel_ffi.h"
#include "dropf/conic.hpp"

namespace dropf {

namespace {

using SparseCsc = Eigen::SparseMatrix<double, Eigen::ColMajor, std::ptrdiff_t>;

class ClarabelSolver final : public ConicSolver {
 public:
  std::string name() const override { return clarabel_ffi_version(); }
  Solution solve(const ConicProgram& program, const SolverSettings& settings) const override;
};

// Row staging of A with s = b - A x', where x = D x' and D = diag(col).
struct RowBuilder {
  const std::vector<double>& col;
  std::vector<Eigen::Triplet<double, std::ptrdiff_t>> a;
  std::vector<double> b;

  void push(const AffineExpr& e, double scale = 1.0) {
    const auto row = static_cast<std::ptrdiff_t>(b.size());
    for (const auto& [v, c] : e.terms) a.emplace_back(row, static_cast<std::ptrdiff_t>(v), -c * scale * col[v]);
    b.push_back(e.constant * scale);
  }
};

struct CscArrays {
  std::vector<std::size_t> colptr, rowval;
  std::vector<double> nzval;
};

CscArrays to_arrays(SparseCsc& m) {
  m.makeCompressed();
  CscArrays out;
  out.colptr.assign(m.outerIndexPtr(), m.outerIndexPtr() + m.cols() + 1);
  out.rowval.assign(m.innerIndexPtr(), m.innerIndexPtr() + m.nonZeros());
  out.nzval.assign(m.valuePtr(), m.valuePtr() + m.nonZeros());
  return out;
}

const char* status_text(int s) {
  switch (s) {
    case CLARABEL_FFI_SETUP_ERROR: return "setup error";
    case CLARABEL_FFI_SOLVED: return "solved";
    case CLARABEL_FFI_PRIMAL_INFEASIBLE: return "primal infeasible";
    case CLARABEL_FFI_DUAL_INFEASIBLE: return "dual infeasible";
    case CLARABEL_FFI_ALMOST_SOLVED: return "almost solved";
    case CLARABEL_FFI_ALMOST_PRIMAL_INFEASIBLE: return "almost primal infeasible";
    case CLARABEL_FFI_ALMOST_DUAL_INFEASIBLE: return "almost dual infeasible";
    case CLARABEL_FFI_MAX_ITERATIONS: return "max iterations";
    case CLARABEL_FFI_MAX_TIME: return "max time";
    case CLARABEL_FFI_NUMERICAL_ERROR: return "numerical error";
    case CLARABEL_FFI_INSUFFICIENT_PROGRESS: return "insufficient progress";
    default: return "unsolved";
  }
}

Solution ClarabelSolver::solve(const ConicProgram& program, const SolverSettings& settings) const {
  program.check_references();
  const auto start = std::chrono::steady_clock::now();
  const auto n = static_cast<std::ptrdiff_t>(program.variable_count());

  const std::vector<double>& col = program.scales();
  RowBuilder rows{col, {}, {}};
  for (const auto& e : program.equalities()) rows.push(e);
  for (const auto& e : program.inequalities()) rows.push(e);
  std::vector<std::size_t> soc_sizes;
  for (const auto& s : program.socs()) {
    rows.push(s.t);
    for (const auto& u : s.u) rows.push(u);
    soc_sizes.push_back(1 + s.u.size());
  }
  std::vector<std::size_t> psd_sizes;
  const double root2 = std::sqrt(2.0);
  for (const auto& p : program.psds()) {
    // Upper triangle column-major, off-diagonals scaled by sqrt(2).
    for (std::size_t j = 0; j < p.dim; ++j) {
      for (std::size_t i = 0; i <= j; ++i) rows.push(p.at(i, j), i == j ? 1.0 : root2);
    }
    psd_sizes.push_back(p.dim);
  }
  const auto m = static_cast<std::ptrdiff_t>(rows.b.size());

  SparseCsc a(m, n);
  a.setFromTriplets(rows.a.begin(), rows.a.end());
  rows.a.clear();
  rows.a.shrink_to_fit();
  const CscArrays ac = to_arrays(a);

  std::vector<Eigen::Triplet<double, std::ptrdiff_t>> ptrip;
  for (const auto& [i, j, c] : program.quadratic_cost()) {
    // 0.5 x'Px convention, upper triangle only.
    const auto ii = static_cast<std::ptrdiff_t>(i), jj = static_cast<std::ptrdiff_t>(j);
    ptrip.emplace_back(ii, jj, (i == j ? 2.0 * c : c) * col[i] * col[j]);
  }
  SparseCsc p(n, n);
  p.setFromTriplets(ptrip.begin(), ptrip.end());
  const CscArrays pc = to_arrays(p);

  std::vector<double> q = program.linear_cost();
  for (std::size_t i = 0; i < q.size(); ++i) q[i] *= col[i];

  clarabel_ffi_problem prob{};
  prob.m = static_cast<std::size_t>(m);
  prob.n = static_cast<std::size_t>(n);
  prob.p_colptr = pc.colptr.data();
  prob.p_rowval = pc.rowval.data();
  prob.p_nzval = pc.nzval.data();
  prob.a_colptr = ac.colptr.data();
  prob.a_rowval = ac.rowval.data();
  prob.a_nzval = ac.nzval.data();
  prob.q = q.data();
  prob.b = rows.b.data();
  prob.zero = program.equalities().size();
  prob.nonneg = program.inequalities().size();
  prob.soc = soc_sizes.data();
  prob.n_soc = soc_sizes.size();
  prob.psd = psd_sizes.data();
  prob.n_psd = psd_sizes.size();

  clarabel_ffi_settings stgs{};
  stgs.tol_feas = settings.feasibility_tol;
  stgs.tol_gap_abs = settings.gap_tol;
  stgs.tol_gap_rel = settings.gap_tol;
  stgs.max_iter = static_cast<unsigned>(std::min<long>(settings.max_iterations, 100000));
  stgs.time_limit = settings.time_limit_s;
  stgs.verbose = settings.verbose ? 1 : 0;
  stgs.equilibrate = settings.equilibrate ? 1 : 0;

  Solution out;
  std::vector<double> x(static_cast<std::size_t>(n), 0.0);
  clarabel_ffi_info info{};
  const int flag = clarabel_ffi_solve(&prob, &stgs, x.data(), &info);

  for (std::size_t i = 0; i < x.size(); ++i) x[i] *= col[i];
  out.x = Eigen::Map<Eigen::VectorXd>(x.data(), n);
  out.iterations = static_cast<long>(info.iterations);
  out.residuals = check_solution(program, out.x);
  out.objective = program.objective(out.x);

  std::ostringstream msg;
  msg << "clarabel " << status_text(flag) << ", iterations " << info.iterations << ", r_prim "
      << info.r_prim << ", r_dual " << info.r_dual;
  out.message = msg.str();

  switch (flag) {
    case CLARABEL_FFI_SOLVED: out.status = SolveStatus::optimal; break;
    case CLARABEL_FFI_ALMOST_SOLVED: out.status = SolveStatus::reduced_accuracy; break;
    case CLARABEL_FFI_PRIMAL_INFEASIBLE: out.status = SolveStatus::infeasible; break;
    case CLARABEL_FFI_DUAL_INFEASIBLE: out.status = SolveStatus::unbounded; break;
    default: out.status = SolveStatus::numerical_failure; break;
  }
  out.solve_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace

const ConicSolver& default_solver() {
  static const ClarabelSolver solver;
  return solver;
}

}  // namespace dropf
