#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dropf/case.hpp"

namespace dropf {

enum class UncertainKind { wind, line };

struct UncertainEntry {
  UncertainKind kind;
  std::size_t element;  // index into Case::wind_farms or Case::lines
  std::string id;
};

/// Layout of the uncertainty vector: wind farms first, then kept DLR lines.
class UncertaintyIndex {
 public:
  UncertaintyIndex() = default;
  UncertaintyIndex(const Case& c, const std::vector<std::size_t>& kept_lines);

  std::size_t size() const { return entries_.size(); }
  std::size_t wind_count() const { return wind_count_; }
  std::size_t line_count() const { return entries_.size() - wind_count_; }
  const std::vector<UncertainEntry>& entries() const { return entries_; }
  const UncertainEntry& operator[](std::size_t i) const { return entries_[i]; }

  /// Case line indices in vector order (positions wind_count()..size()-1).
  std::vector<std::size_t> lines() const;

  /// Position of a line in the vector, or -1 if the line is not uncertain.
  long position_of_line(std::size_t line) const;

  /// Column labels "w:<id>" / "l:<id>".
  std::vector<std::string> labels() const;

 private:
  std::vector<UncertainEntry> entries_;
  std::size_t wind_count_ = 0;
};

struct SampleSpec {
  Eigen::VectorXd mean;
  Eigen::VectorXd std_factor;
  double rho = 0.0;
  std::uint64_t seed = 0;
};

/// Mean at the case forecasts; std_factor drawn from U[0.5, 1] with its own
/// generator seeded by `std_seed`.
SampleSpec make_sample_spec(const Case& c, const UncertaintyIndex& index, double rho,
                            std::uint64_t seed, std::uint64_t std_seed);

struct SampleSet {
  Eigen::MatrixXd samples;  // N x (W+L), MW
  UncertaintyIndex index;
  SampleSpec spec;

  std::size_t count() const { return static_cast<std::size_t>(samples.rows()); }
  Eigen::VectorXd row(std::size_t n) const {
    return samples.row(static_cast<Eigen::Index>(n)).transpose();
  }
};

class SamplingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// R_ij = rho^|i-j|.
Eigen::MatrixXd correlation_matrix(std::size_t dim, double rho);

/// Draws from N(mean, D R D), D = diag(mean .* std_factor), redrawing the whole
/// vector until it passes validate_sample. At most `max_draws` draws per
/// accepted sample; exceeding it throws SamplingError naming the rule that
/// rejected most draws.
SampleSet generate_samples(const Case& c, const UncertaintyIndex& index,
                           const SampleSpec& spec, std::size_t n,
                           std::size_t max_draws = 10000);

/// Wind in [0, capacity], line rating >= static rating (closed bounds).
bool validate_sample(const Case& c, const UncertaintyIndex& index, const Eigen::VectorXd& xi);

/// Replaces every line-rating component with the static rating.
void freeze_line_ratings(const Case& c, SampleSet& set);

/// Rows selected by position, index and spec carried over.
SampleSet subset(const SampleSet& set, const std::vector<std::size_t>& rows);

struct EmpiricalMoments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;  // population form, 1/N
  std::size_t n = 0;
};

EmpiricalMoments empirical_moments(const Eigen::MatrixXd& samples);
inline EmpiricalMoments empirical_moments(const SampleSet& set) {
  return empirical_moments(set.samples);
}

}  // namespace dropf
