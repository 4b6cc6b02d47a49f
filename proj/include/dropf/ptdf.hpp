#pragma once

#include <cstddef>

#include <Eigen/Dense>

#include "dropf/case.hpp"

namespace dropf {

/// Shift factors of every line with respect to nodal injections, referenced
/// to the slack bus. Line orientation is from -> to.
class PtdfMatrix {
 public:
  PtdfMatrix() = default;
  PtdfMatrix(Eigen::MatrixXd by_bus, std::vector<std::size_t> gen_bus,
             std::vector<std::size_t> wind_bus, std::vector<std::size_t> load_bus)
      : by_bus_(std::move(by_bus)),
        gen_bus_(std::move(gen_bus)),
        wind_bus_(std::move(wind_bus)),
        load_bus_(std::move(load_bus)) {}

  /// lines x buses, columns in Case::buses order.
  const Eigen::MatrixXd& by_bus() const { return by_bus_; }

  std::size_t line_count() const { return static_cast<std::size_t>(by_bus_.rows()); }

  double at_bus(std::size_t line, std::size_t bus_pos) const {
    return by_bus_(static_cast<Eigen::Index>(line), static_cast<Eigen::Index>(bus_pos));
  }
  double generator(std::size_t line, std::size_t g) const { return at_bus(line, gen_bus_[g]); }
  double wind(std::size_t line, std::size_t w) const { return at_bus(line, wind_bus_[w]); }
  double load(std::size_t line, std::size_t d) const { return at_bus(line, load_bus_[d]); }

  /// Flows for a vector of net injections indexed by bus position.
  Eigen::VectorXd flows(const Eigen::VectorXd& injections) const { return by_bus_ * injections; }

 private:
  Eigen::MatrixXd by_bus_;
  std::vector<std::size_t> gen_bus_;
  std::vector<std::size_t> wind_bus_;
  std::vector<std::size_t> load_bus_;
};

/// DC shift factors from the reduced susceptance system. Throws CaseError if
/// the network is disconnected or the reduced system is singular.
PtdfMatrix compute_ptdf(const Case& c);

/// Net bus injections (generation + wind - load) by bus position.
Eigen::VectorXd bus_injections(const Case& c, const Eigen::VectorXd& p_gen,
                               const Eigen::VectorXd& p_wind);

}  // namespace dropf
