#include "dropf/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace dropf {

UncertaintyIndex::UncertaintyIndex(const Case& c, const std::vector<std::size_t>& kept_lines) {
  for (std::size_t w = 0; w < c.wind_farms.size(); ++w) {
    entries_.push_back({UncertainKind::wind, w, c.wind_farms[w].id});
  }
  wind_count_ = entries_.size();
  std::vector<std::size_t> sorted = kept_lines;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  for (std::size_t l : sorted) {
    if (l >= c.lines.size()) throw CaseError("lines", "kept line index out of range");
    if (c.lines[l].dlr) entries_.push_back({UncertainKind::line, l, c.lines[l].id});
  }
}

std::vector<std::size_t> UncertaintyIndex::lines() const {
  std::vector<std::size_t> out;
  for (std::size_t i = wind_count_; i < entries_.size(); ++i) out.push_back(entries_[i].element);
  return out;
}

long UncertaintyIndex::position_of_line(std::size_t line) const {
  for (std::size_t i = wind_count_; i < entries_.size(); ++i) {
    if (entries_[i].element == line) return static_cast<long>(i);
  }
  return -1;
}

std::vector<std::string> UncertaintyIndex::labels() const {
  std::vector<std::string> out;
  for (const auto& e : entries_) out.push_back((e.kind == UncertainKind::wind ? "w:" : "l:") + e.id);
  return out;
}

SampleSpec make_sample_spec(const Case& c, const UncertaintyIndex& index, double rho,
                            std::uint64_t seed, std::uint64_t std_seed) {
  if (!(rho >= 0.0 && rho < 1.0)) throw std::invalid_argument("rho must lie in [0, 1)");
  SampleSpec spec;
  const auto d = static_cast<Eigen::Index>(index.size());
  spec.mean.resize(d);
  spec.std_factor.resize(d);
  std::mt19937_64 gen(std_seed);
  std::uniform_real_distribution<double> factor(0.5, 1.0);
  for (Eigen::Index i = 0; i < d; ++i) {
    const auto& e = index[static_cast<std::size_t>(i)];
    spec.mean(i) = e.kind == UncertainKind::wind ? c.wind_farms[e.element].forecast
                                                 : c.lines[e.element].forecast_rating;
    spec.std_factor(i) = factor(gen);
  }
  spec.rho = rho;
  spec.seed = seed;
  return spec;
}

Eigen::MatrixXd correlation_matrix(std::size_t dim, double rho) {
  const auto d = static_cast<Eigen::Index>(dim);
  Eigen::MatrixXd r(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      r(i, j) = std::pow(rho, static_cast<double>(std::abs(i - j)));
    }
  }
  return r;
}

bool validate_sample(const Case& c, const UncertaintyIndex& index, const Eigen::VectorXd& xi) {
  for (std::size_t i = 0; i < index.size(); ++i) {
    const auto& e = index[i];
    const double v = xi(static_cast<Eigen::Index>(i));
    if (e.kind == UncertainKind::wind) {
      if (!(v >= 0.0 && v <= c.wind_farms[e.element].capacity)) return false;
    } else if (!(v >= c.lines[e.element].static_rating)) {
      return false;
    }
  }
  return true;
}

SampleSet generate_samples(const Case& c, const UncertaintyIndex& index, const SampleSpec& spec,
                           std::size_t n, std::size_t max_draws) {
  const auto d = static_cast<Eigen::Index>(index.size());
  if (n == 0) throw std::invalid_argument("sample count must be at least 1");
  if (spec.mean.size() != d || spec.std_factor.size() != d) {
    throw std::invalid_argument("sample spec dimension does not match the uncertainty index");
  }
  for (Eigen::Index i = 0; i < d; ++i) {
    if (spec.std_factor(i) < 0.5 || spec.std_factor(i) > 1.0) {
      throw std::invalid_argument("std_factor components must lie in [0.5, 1]");
    }
  }

  // Factor R once; scaling by D afterwards keeps degenerate components exact.
  Eigen::LLT<Eigen::MatrixXd> llt(correlation_matrix(index.size(), spec.rho));
  if (llt.info() != Eigen::Success) throw SamplingError("correlation matrix is not positive definite");
  const Eigen::MatrixXd lower = llt.matrixL();
  const Eigen::VectorXd scale = spec.mean.cwiseProduct(spec.std_factor);

  std::mt19937_64 gen(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  SampleSet out;
  out.index = index;
  out.spec = spec;
  out.samples.resize(static_cast<Eigen::Index>(n), d);

  // Rejection tallies: wind below zero, wind above capacity, rating below static.
  std::size_t below_zero = 0, above_cap = 0, below_static = 0;
  Eigen::VectorXd z(d), xi(d);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t draws = 0;
    for (;;) {
      if (draws == max_draws) {
        std::ostringstream msg;
        msg << "rejection cap of " << max_draws << " draws exceeded for sample " << k
            << "; most frequent violation: ";
        if (below_zero >= above_cap && below_zero >= below_static) {
          msg << "wind output below 0";
        } else if (above_cap >= below_static) {
          msg << "wind output above installed capacity";
        } else {
          msg << "line rating below static rating";
        }
        throw SamplingError(msg.str());
      }
      ++draws;
      for (Eigen::Index i = 0; i < d; ++i) z(i) = normal(gen);
      xi = spec.mean + scale.cwiseProduct(lower * z);
      bool ok = true;
      for (std::size_t i = 0; i < index.size(); ++i) {
        const auto& e = index[i];
        const double v = xi(static_cast<Eigen::Index>(i));
        if (e.kind == UncertainKind::wind) {
          if (v < 0.0) { ++below_zero; ok = false; }
          else if (v > c.wind_farms[e.element].capacity) { ++above_cap; ok = false; }
        } else if (v < c.lines[e.element].static_rating) {
          ++below_static;
          ok = false;
        }
      }
      if (ok) break;
    }
    out.samples.row(static_cast<Eigen::Index>(k)) = xi.transpose();
  }
  return out;
}

void freeze_line_ratings(const Case& c, SampleSet& set) {
  for (std::size_t i = set.index.wind_count(); i < set.index.size(); ++i) {
    set.samples.col(static_cast<Eigen::Index>(i))
        .setConstant(c.lines[set.index[i].element].static_rating);
  }
}

SampleSet subset(const SampleSet& set, const std::vector<std::size_t>& rows) {
  SampleSet out;
  out.index = set.index;
  out.spec = set.spec;
  out.samples.resize(static_cast<Eigen::Index>(rows.size()), set.samples.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out.samples.row(static_cast<Eigen::Index>(k)) =
        set.samples.row(static_cast<Eigen::Index>(rows[k]));
  }
  return out;
}

EmpiricalMoments empirical_moments(const Eigen::MatrixXd& samples) {
  EmpiricalMoments m;
  m.n = static_cast<std::size_t>(samples.rows());
  if (m.n == 0) throw std::invalid_argument("empirical moments need at least one sample");
  m.mean = samples.colwise().mean().transpose();
  const Eigen::MatrixXd centered = samples.rowwise() - m.mean.transpose();
  m.covariance = (centered.transpose() * centered) / static_cast<double>(m.n);
  m.covariance = 0.5 * (m.covariance + m.covariance.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m.covariance);
  if (eig.eigenvalues().size() > 0 && eig.eigenvalues().minCoeff() < 0.0) {
    const double floor = -1e-9 * std::max(m.covariance.trace(), 1e-300);
    if (eig.eigenvalues().minCoeff() < floor) {
      throw std::runtime_error("empirical covariance is not positive semidefinite");
    }
    const Eigen::VectorXd clipped = eig.eigenvalues().cwiseMax(0.0);
    m.covariance = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
  }
  return m;
}

}  // namespace dropf
