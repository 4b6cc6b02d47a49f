#include <doctest.h>

#include <cmath>

#include "dropf/conic.hpp"

using namespace dropf;

namespace {

Solution solve(const ConicProgram& p) { return default_solver().solve(p, SolverSettings{}); }

}  // namespace

TEST_CASE("LP vertex optimum") {
  // min -x - 2y, x + y <= 4, 0 <= x <= 3, 0 <= y <= 2  ->  (2, 2), -6
  ConicProgram p;
  const auto x = p.add_variable();
  const auto y = p.add_variable();
  p.add_linear_cost(x, -1.0);
  p.add_linear_cost(y, -2.0);
  p.add_inequality(AffineExpr(4.0).add(x, -1.0).add(y, -1.0));
  p.add_inequality(AffineExpr(3.0).add(x, -1.0));
  p.add_inequality(AffineExpr(2.0).add(y, -1.0));
  p.add_inequality(AffineExpr::var(x));
  p.add_inequality(AffineExpr::var(y));
  CHECK(p.classify() == ProgramClass::linear_quadratic);
  const Solution s = solve(p);
  REQUIRE(s.status == SolveStatus::optimal);
  CHECK(s.objective == doctest::Approx(-6.0).epsilon(1e-7));
  CHECK(s.x(x) == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(s.x(y) == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(s.residuals.worst() < 1e-7);
  CHECK(p.scales() == std::vector<double>{1.0, 1.0});
}

TEST_CASE("QP projection onto a half-plane") {
  // min (x-1)^2 + (y-2)^2 with x + y <= 2  ->  (0.5, 1.5), 0.5
  ConicProgram p;
  const auto x = p.add_variable();
  const auto y = p.add_variable();
  p.add_quadratic_cost(x, x, 1.0);
  p.add_quadratic_cost(y, y, 1.0);
  p.add_linear_cost(x, -2.0);
  p.add_linear_cost(y, -4.0);
  p.add_constant_cost(5.0);
  p.add_inequality(AffineExpr(2.0).add(x, -1.0).add(y, -1.0));
  const Solution s = solve(p);
  REQUIRE(s.status == SolveStatus::optimal);
  CHECK(s.objective == doctest::Approx(0.5).epsilon(1e-7));
  CHECK(s.x(x) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(p.objective(s.x) == doctest::Approx(s.objective).epsilon(1e-9));
}

TEST_CASE("SOCP over the unit disc") {
  // min x + y with ||(x, y)|| <= 1  ->  -sqrt(2)
  ConicProgram p;
  const auto x = p.add_variable();
  const auto y = p.add_variable();
  p.add_linear_cost(x, 1.0);
  p.add_linear_cost(y, 1.0);
  p.add_soc({AffineExpr(1.0), {AffineExpr::var(x), AffineExpr::var(y)}});
  CHECK(p.classify() == ProgramClass::second_order);
  const Solution s = solve(p);
  REQUIRE(s.status == SolveStatus::optimal);
  CHECK(s.objective == doctest::Approx(-std::sqrt(2.0)).epsilon(1e-7));
  CHECK(s.x(x) == doctest::Approx(-std::sqrt(0.5)).epsilon(1e-6));
}

TEST_CASE("SDP recovers the smallest eigenvalue") {
  // min <C, X> with tr X = 1, X psd  ->  lambda_min(C)
  Eigen::Matrix3d c;
  c << 4, 1, 0, 1, 3, -1, 0, -1, 5;
  ConicProgram p;
  const SymmetricBlock xb = p.add_symmetric(3);
  PsdConstraint psd(3);
  AffineExpr trace;
  for (std::size_t j = 0; j < 3; ++j) {
    for (std::size_t i = j; i < 3; ++i) {
      psd.at(i, j) = AffineExpr::var(xb.at(i, j));
      p.add_linear_cost(xb.at(i, j), (i == j ? 1.0 : 2.0) * c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    }
    trace.add(xb.at(j, j), 1.0);
  }
  trace.constant = -1.0;
  p.add_equality(trace);
  p.add_psd(psd);
  CHECK(p.classify() == ProgramClass::semidefinite);
  const Solution s = solve(p);
  REQUIRE(s.status == SolveStatus::optimal);
  const double lmin = Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(c).eigenvalues()(0);
  CHECK(s.objective == doctest::Approx(lmin).epsilon(1e-6));
  CHECK(s.residuals.psd < 1e-7);
}

TEST_CASE("infeasible and unbounded programs are reported") {
  SUBCASE("infeasible") {
    ConicProgram p;
    const auto x = p.add_variable();
    p.add_linear_cost(x, 1.0);
    p.add_inequality(AffineExpr(-1.0).add(x, 1.0));  // x >= 1
    p.add_inequality(AffineExpr(0.0).add(x, -1.0));  // x <= 0
    CHECK(solve(p).status == SolveStatus::infeasible);
  }
  SUBCASE("unbounded") {
    ConicProgram p;
    const auto x = p.add_variable();
    p.add_linear_cost(x, 1.0);
    p.add_inequality(AffineExpr(0.0).add(x, -1.0));  // x <= 0
    CHECK(solve(p).status == SolveStatus::unbounded);
  }
}

TEST_CASE("residual checker measures each cone independently") {
  ConicProgram p;
  const auto x = p.add_variable();
  const auto y = p.add_variable();
  p.add_equality(AffineExpr(-1.0).add(x, 1.0));
  p.add_inequality(AffineExpr::var(y));
  p.add_soc({AffineExpr::var(x), {AffineExpr::var(y)}});
  PsdConstraint m(2);
  m.at(0, 0) = AffineExpr::var(x);
  m.at(1, 0) = AffineExpr(2.0);
  m.at(1, 1) = AffineExpr::var(x);
  p.add_psd(m);

  Eigen::VectorXd v(2);
  v << 1.5, -2.0;
  const Residuals r = check_solution(p, v);
  CHECK(r.equality == doctest::Approx(0.5));
  CHECK(r.inequality == doctest::Approx(2.0));
  CHECK(r.soc == doctest::Approx(0.5));
  // eigenvalues of [[1.5, 2], [2, 1.5]] are -0.5 and 3.5
  CHECK(r.min_psd_eigenvalue == doctest::Approx(-0.5));
  CHECK(r.psd == doctest::Approx(0.5));
  CHECK(r.worst() == doctest::Approx(2.0));
  // Each violation over 1 + the row's term sizes; the y >= 0 row dominates.
  CHECK(r.relative == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("variable scale hints leave the solution unscaled") {
  // min (x - 300)^2 + y, y >= 5000 - 10 x, x in [0, 1000]: x = 305, y = 1950
  auto build = [] {
    ConicProgram p;
    const auto x = p.add_variable();
    const auto y = p.add_variable();
    p.add_quadratic_cost(x, x, 1.0);
    p.add_linear_cost(x, -600.0);
    p.add_constant_cost(90000.0);
    p.add_linear_cost(y, 1.0);
    p.add_inequality(AffineExpr(-5000.0).add(y, 1.0).add(x, 10.0));
    p.add_inequality(AffineExpr::var(x));
    p.add_inequality(AffineExpr(1000.0).add(x, -1.0));
    return p;
  };
  ConicProgram plain = build();
  ConicProgram scaled = build();
  scaled.set_scale(1, 1, 1000.0);
  const Solution a = solve(plain);
  const Solution b = solve(scaled);
  REQUIRE(a.status == SolveStatus::optimal);
  REQUIRE(b.status == SolveStatus::optimal);
  CHECK(b.x(0) == doctest::Approx(305.0).epsilon(1e-6));
  CHECK(b.x(1) == doctest::Approx(1950.0).epsilon(1e-6));
  CHECK(b.objective == doctest::Approx(a.objective).epsilon(1e-8));
  CHECK_THROWS(scaled.set_scale(1, 2, 10.0));
  CHECK_THROWS(scaled.set_scale(0, 1, 0.0));
}

TEST_CASE("undeclared variables are caught") {
  ConicProgram p;
  p.add_variable();
  p.add_inequality(AffineExpr::var(3));
  CHECK_THROWS_AS(p.check_references(), std::logic_error);
}

TEST_CASE("symmetric block indexing is symmetric and dense") {
  ConicProgram p;
  p.add_variables(2);
  const SymmetricBlock b = p.add_symmetric(4);
  CHECK(b.entries() == 10);
  CHECK(p.variable_count() == 12);
  std::vector<int> seen(10, 0);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      CHECK(b.at(i, j) == b.at(j, i));
      if (i >= j) ++seen[b.at(i, j) - 2];
    }
  for (int s : seen) CHECK(s == 1);
}
