#include "dropf/conic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace dropf {

AffineExpr& AffineExpr::operator+=(const AffineExpr& o) {
  terms.insert(terms.end(), o.terms.begin(), o.terms.end());
  constant += o.constant;
  return *this;
}

AffineExpr& AffineExpr::operator-=(const AffineExpr& o) {
  terms.reserve(terms.size() + o.terms.size());
  for (const auto& [v, c] : o.terms) terms.emplace_back(v, -c);
  constant -= o.constant;
  return *this;
}

AffineExpr& AffineExpr::operator*=(double s) {
  for (auto& t : terms) t.second *= s;
  constant *= s;
  return *this;
}

double AffineExpr::value(const Eigen::VectorXd& x) const {
  double v = constant;
  for (const auto& [i, c] : terms) v += c * x(static_cast<Eigen::Index>(i));
  return v;
}

AffineExpr operator+(AffineExpr a, const AffineExpr& b) { return a += b; }
AffineExpr operator-(AffineExpr a, const AffineExpr& b) { return a -= b; }
AffineExpr operator*(double s, AffineExpr a) { return a *= s; }

const char* to_string(ProgramClass c) {
  switch (c) {
    case ProgramClass::linear_quadratic: return "QP";
    case ProgramClass::second_order: return "SOCP";
    case ProgramClass::semidefinite: return "SDP";
  }
  return "?";
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::reduced_accuracy: return "reduced-accuracy";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unbounded: return "unbounded";
    case SolveStatus::numerical_failure: return "numerical-failure";
  }
  return "?";
}

std::size_t ConicProgram::add_variable() {
  linear_.push_back(0.0);
  scales_.push_back(1.0);
  return n_vars_++;
}

std::size_t ConicProgram::add_variables(std::size_t n) {
  const std::size_t first = n_vars_;
  n_vars_ += n;
  linear_.resize(n_vars_, 0.0);
  scales_.resize(n_vars_, 1.0);
  return first;
}

SymmetricBlock ConicProgram::add_symmetric(std::size_t dim) {
  SymmetricBlock b;
  b.dim = dim;
  b.start = add_variables(dim * (dim + 1) / 2);
  return b;
}

void ConicProgram::set_scale(std::size_t first, std::size_t count, double scale) {
  if (first + count > n_vars_) throw std::logic_error("scale references an undeclared variable");
  if (!(scale > 0.0)) throw std::invalid_argument("variable scale must be positive");
  std::fill(scales_.begin() + static_cast<long>(first), scales_.begin() + static_cast<long>(first + count), scale);
}

void ConicProgram::add_linear_cost(std::size_t v, double c) {
  if (v >= n_vars_) throw std::logic_error("objective references an undeclared variable");
  linear_[v] += c;
}

void ConicProgram::add_quadratic_cost(std::size_t i, std::size_t j, double coef) {
  if (i >= n_vars_ || j >= n_vars_) throw std::logic_error("objective references an undeclared variable");
  if (coef == 0.0) return;
  quadratic_.emplace_back(std::min(i, j), std::max(i, j), coef);
}

double ConicProgram::objective(const Eigen::VectorXd& x) const {
  double v = objective_constant_;
  for (std::size_t i = 0; i < n_vars_; ++i) v += linear_[i] * x(static_cast<Eigen::Index>(i));
  for (const auto& [i, j, c] : quadratic_) {
    v += c * x(static_cast<Eigen::Index>(i)) * x(static_cast<Eigen::Index>(j));
  }
  return v;
}

ProgramClass ConicProgram::classify() const {
  if (!psds_.empty()) return ProgramClass::semidefinite;
  if (!socs_.empty()) return ProgramClass::second_order;
  return ProgramClass::linear_quadratic;
}

void ConicProgram::check_references() const {
  auto check = [this](const AffineExpr& e) {
    for (const auto& t : e.terms) {
      if (t.first >= n_vars_) throw std::logic_error("constraint references an undeclared variable");
    }
  };
  for (const auto& e : equalities_) check(e);
  for (const auto& e : inequalities_) check(e);
  for (const auto& s : socs_) {
    check(s.t);
    for (const auto& u : s.u) check(u);
  }
  for (const auto& p : psds_) {
    if (p.lower.size() != p.dim * (p.dim + 1) / 2) throw std::logic_error("malformed PSD block");
    for (const auto& e : p.lower) check(e);
  }
}

void ConicProgram::dump(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << std::setprecision(17);
  out << "# variables " << n_vars_ << "\n";
  out << "objective_constant " << objective_constant_ << "\n";
  for (std::size_t i = 0; i < n_vars_; ++i) {
    if (linear_[i] != 0.0) out << "c " << i << " " << linear_[i] << "\n";
  }
  for (const auto& [i, j, c] : quadratic_) out << "q " << i << " " << j << " " << c << "\n";

  // Each row: "<kind> <block> <row> const" followed by "a <block> <row> <var> <coef>" lines.
  auto row = [&out](const char* kind, std::size_t block, std::size_t r, const AffineExpr& e) {
    out << kind << " " << block << " " << r << " " << e.constant << "\n";
    for (const auto& [v, c] : e.terms) out << "a " << block << " " << r << " " << v << " " << c << "\n";
  };
  out << "# equalities " << equalities_.size() << " (expr = 0)\n";
  for (std::size_t k = 0; k < equalities_.size(); ++k) row("eq", k, 0, equalities_[k]);
  out << "# inequalities " << inequalities_.size() << " (expr >= 0)\n";
  for (std::size_t k = 0; k < inequalities_.size(); ++k) row("ineq", k, 0, inequalities_[k]);
  out << "# soc " << socs_.size() << " (row 0 is t, rows 1.. are u)\n";
  for (std::size_t k = 0; k < socs_.size(); ++k) {
    row("soc", k, 0, socs_[k].t);
    for (std::size_t r = 0; r < socs_[k].u.size(); ++r) row("soc", k, r + 1, socs_[k].u[r]);
  }
  out << "# psd " << psds_.size() << " (lower triangle, column-major, unscaled)\n";
  for (std::size_t k = 0; k < psds_.size(); ++k) {
    out << "psd_dim " << k << " " << psds_[k].dim << "\n";
    for (std::size_t r = 0; r < psds_[k].lower.size(); ++r) row("psd", k, r, psds_[k].lower[r]);
  }
}

double Residuals::worst() const { return std::max({equality, inequality, soc, psd}); }

namespace {

// |constant| + sum |coef * x|: the size of the terms that cancel in e(x).
double magnitude(const AffineExpr& e, const Eigen::VectorXd& x) {
  double m = std::abs(e.constant);
  for (const auto& [v, c] : e.terms) m += std::abs(c * x(static_cast<Eigen::Index>(v)));
  return m;
}

}  // namespace

Residuals check_solution(const ConicProgram& program, const Eigen::VectorXd& x) {
  Residuals r;
  if (static_cast<std::size_t>(x.size()) != program.variable_count()) {
    throw std::invalid_argument("solution vector size does not match the program");
  }
  auto relative = [&r](double violation, double size) {
    r.relative = std::max(r.relative, violation / (1.0 + size));
  };
  for (const auto& e : program.equalities()) {
    const double v = std::abs(e.value(x));
    r.equality = std::max(r.equality, v);
    relative(v, magnitude(e, x));
  }
  for (const auto& e : program.inequalities()) {
    const double v = -e.value(x);
    r.inequality = std::max(r.inequality, v);
    relative(v, magnitude(e, x));
  }
  for (const auto& s : program.socs()) {
    double norm2 = 0.0;
    double size = magnitude(s.t, x);
    for (const auto& u : s.u) {
      const double v = u.value(x);
      norm2 += v * v;
      size = std::max(size, magnitude(u, x));
    }
    const double v = std::sqrt(norm2) - s.t.value(x);
    r.soc = std::max(r.soc, v);
    relative(v, size);
  }
  bool any_psd = false;
  double min_eig = 0.0;
  for (const auto& p : program.psds()) {
    const auto n = static_cast<Eigen::Index>(p.dim);
    Eigen::MatrixXd m(n, n);
    double size = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = j; i < n; ++i) {
        const auto& e = p.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
        const double v = e.value(x);
        m(i, j) = v;
        m(j, i) = v;
        size = std::max(size, magnitude(e, x));
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    relative(-lo, size);
    min_eig = any_psd ? std::min(min_eig, lo) : lo;
    any_psd = true;
  }
  r.min_psd_eigenvalue = min_eig;
  r.psd = std::max(0.0, -min_eig);
  return r;
}

}  // namespace dropf
