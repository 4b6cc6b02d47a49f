#include "dropf/ptdf.hpp"

#include <cmath>
#include <iostream>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

namespace dropf {

PtdfMatrix compute_ptdf(const Case& c) {
  c.validate();
  const auto n_bus = static_cast<Eigen::Index>(c.buses.size());
  const auto n_line = static_cast<Eigen::Index>(c.lines.size());
  const auto slack = static_cast<Eigen::Index>(c.bus_position(c.slack_bus));

  // Reduced position: slack removed.
  auto reduced = [slack](Eigen::Index pos) { return pos < slack ? pos : pos - 1; };

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(4 * c.lines.size());
  for (const auto& l : c.lines) {
    const auto i = static_cast<Eigen::Index>(c.bus_position(l.from));
    const auto j = static_cast<Eigen::Index>(c.bus_position(l.to));
    const double b = l.susceptance;
    if (i != slack) trip.emplace_back(reduced(i), reduced(i), b);
    if (j != slack) trip.emplace_back(reduced(j), reduced(j), b);
    if (i != slack && j != slack) {
      trip.emplace_back(reduced(i), reduced(j), -b);
      trip.emplace_back(reduced(j), reduced(i), -b);
    }
  }

  Eigen::MatrixXd by_bus = Eigen::MatrixXd::Zero(n_line, n_bus);
  if (n_bus > 1) {
    Eigen::SparseMatrix<double> b_red(n_bus - 1, n_bus - 1);
    b_red.setFromTriplets(trip.begin(), trip.end());
    b_red.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(b_red);
    if (lu.info() != Eigen::Success) {
      throw CaseError("network", "reduced susceptance matrix is singular "
                                 "(disconnected network?)");
    }

    // Branch-bus incidence scaled by susceptance, reduced columns.
    Eigen::MatrixXd bf = Eigen::MatrixXd::Zero(n_line, n_bus - 1);
    for (Eigen::Index k = 0; k < n_line; ++k) {
      const auto& l = c.lines[static_cast<std::size_t>(k)];
      const auto i = static_cast<Eigen::Index>(c.bus_position(l.from));
      const auto j = static_cast<Eigen::Index>(c.bus_position(l.to));
      if (i != slack) bf(k, reduced(i)) += l.susceptance;
      if (j != slack) bf(k, reduced(j)) -= l.susceptance;
    }
    // PTDF_red = Bf * B_red^{-1}; B_red is symmetric so solve B_red X = Bf^T.
    Eigen::MatrixXd x = lu.solve(Eigen::MatrixXd(bf.transpose()));
    if (lu.info() != Eigen::Success || !x.allFinite()) {
      throw CaseError("network", "reduced susceptance solve failed");
    }
    for (Eigen::Index pos = 0; pos < n_bus; ++pos) {
      if (pos == slack) continue;
      by_bus.col(pos) = x.row(reduced(pos)).transpose();
    }
  }

  if ((by_bus.array().abs() > 1.5).any()) {
    std::cerr << "warning: shift factor magnitude exceeds 1.5\n";
  }

  std::vector<std::size_t> gen_bus, wind_bus, load_bus;
  for (const auto& g : c.generators) gen_bus.push_back(c.bus_position(g.bus));
  for (const auto& w : c.wind_farms) wind_bus.push_back(c.bus_position(w.bus));
  for (const auto& d : c.loads) load_bus.push_back(c.bus_position(d.bus));
  return PtdfMatrix(std::move(by_bus), std::move(gen_bus), std::move(wind_bus),
                    std::move(load_bus));
}

Eigen::VectorXd bus_injections(const Case& c, const Eigen::VectorXd& p_gen,
                               const Eigen::VectorXd& p_wind) {
  Eigen::VectorXd inj = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(c.buses.size()));
  for (std::size_t g = 0; g < c.generators.size(); ++g) {
    inj(static_cast<Eigen::Index>(c.bus_position(c.generators[g].bus))) +=
        p_gen(static_cast<Eigen::Index>(g));
  }
  for (std::size_t w = 0; w < c.wind_farms.size(); ++w) {
    inj(static_cast<Eigen::Index>(c.bus_position(c.wind_farms[w].bus))) +=
        p_wind(static_cast<Eigen::Index>(w));
  }
  for (const auto& d : c.loads) {
    inj(static_cast<Eigen::Index>(c.bus_position(d.bus))) -= d.demand;
  }
  return inj;
}

}  // namespace dropf
