#include <doctest.h>

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "dropf/ptdf.hpp"
#include "dropf/screening.hpp"
#include "fixtures.hpp"

using namespace dropf;

namespace {

// Angles from a dense solve of B theta = injections with the slack pinned.
Eigen::VectorXd dense_flows(const Case& c, const Eigen::VectorXd& inj) {
  const auto n = static_cast<Eigen::Index>(c.buses.size());
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
  for (const auto& l : c.lines) {
    const auto i = static_cast<Eigen::Index>(c.bus_position(l.from));
    const auto j = static_cast<Eigen::Index>(c.bus_position(l.to));
    b(i, i) += l.susceptance;
    b(j, j) += l.susceptance;
    b(i, j) -= l.susceptance;
    b(j, i) -= l.susceptance;
  }
  const auto s = static_cast<Eigen::Index>(c.bus_position(c.slack_bus));
  b.row(s).setZero();
  b.col(s).setZero();
  b(s, s) = 1.0;
  Eigen::VectorXd rhs = inj;
  rhs(s) = 0.0;
  const Eigen::VectorXd theta = b.fullPivLu().solve(rhs);
  Eigen::VectorXd f(static_cast<Eigen::Index>(c.lines.size()));
  for (std::size_t k = 0; k < c.lines.size(); ++k) {
    const auto& l = c.lines[k];
    f(static_cast<Eigen::Index>(k)) = l.susceptance * (theta(static_cast<Eigen::Index>(c.bus_position(l.from))) -
                                                       theta(static_cast<Eigen::Index>(c.bus_position(l.to))));
  }
  return f;
}

}  // namespace

TEST_CASE("PTDF flows match a dense angle solve") {
  const Case c = load_case(bundled_case5_path());
  const PtdfMatrix p = compute_ptdf(c);
  const auto slack = c.bus_position(c.slack_bus);
  for (std::size_t l = 0; l < c.lines.size(); ++l) CHECK(p.at_bus(l, slack) == 0.0);

  Eigen::VectorXd inj(5);
  inj << 3.0, -1.5, 2.0, -4.0, 0.5;
  inj(0) -= inj.sum();  // balanced
  const Eigen::VectorXd f = p.flows(inj);
  const Eigen::VectorXd oracle = dense_flows(c, inj);
  CHECK((f - oracle).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("flows conserve power at every bus") {
  const Case c = load_case(bundled_case5_path());
  const PtdfMatrix p = compute_ptdf(c);
  Eigen::VectorXd pg(3), pw(1);
  pg << 4.0, 3.0, 5.0;
  pw << c.wind_farms[0].forecast;
  const Eigen::VectorXd inj = bus_injections(c, pg, pw);
  const Eigen::VectorXd f = p.flows(inj);
  Eigen::VectorXd net = Eigen::VectorXd::Zero(5);
  for (std::size_t k = 0; k < c.lines.size(); ++k) {
    net(static_cast<Eigen::Index>(c.bus_position(c.lines[k].from))) += f(static_cast<Eigen::Index>(k));
    net(static_cast<Eigen::Index>(c.bus_position(c.lines[k].to))) -= f(static_cast<Eigen::Index>(k));
  }
  // Non-slack buses: outflow equals injection.
  for (Eigen::Index b = 1; b < 5; ++b) CHECK(net(b) == doctest::Approx(inj(b)).epsilon(1e-10));
}

TEST_CASE("screening keeps the lines that can bind") {
  const Case c = load_case(bundled_case5_path());
  const auto s = screen_inactive_lines(c, compute_ptdf(c));
  const auto kept = s.kept_ids(c);
  CHECK_FALSE(kept.empty());
  for (std::size_t l : s.kept) {
    const bool can_bind = s.ranges[l].max > c.lines[l].static_rating || s.ranges[l].min < -c.lines[l].static_rating;
    CHECK(can_bind);
  }
  CHECK(s.kept.size() + s.dropped.size() == c.lines.size());
  for (std::size_t l : s.dropped) {
    CHECK(s.ranges[l].max <= c.lines[l].static_rating);
    CHECK(s.ranges[l].min >= -c.lines[l].static_rating);
  }
}

TEST_CASE("flow ranges match vertex enumeration") {
  // Box plus one balance row: every vertex has at most one variable off its
  // bounds, so enumerating those points gives the exact extremes.
  const Case c = load_case(bundled_case5_path());
  const PtdfMatrix p = compute_ptdf(c);
  const auto ranges = flow_ranges(c, p);

  std::vector<double> lo, hi;
  for (const auto& g : c.generators) {
    lo.push_back(g.p_min);
    hi.push_back(g.p_max);
  }
  for (const auto& w : c.wind_farms) {
    lo.push_back(0.0);
    hi.push_back(w.capacity);
  }
  const std::size_t n = lo.size();
  const std::size_t ng = c.generators.size();
  std::vector<double> fmin(c.lines.size(), 1e300), fmax(c.lines.size(), -1e300);
  for (std::size_t free = 0; free < n; ++free) {
    for (std::size_t mask = 0; mask < (std::size_t{1} << (n - 1)); ++mask) {
      std::vector<double> v(n);
      double sum = 0.0;
      std::size_t bit = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (i == free) continue;
        v[i] = (mask >> bit++) & 1 ? hi[i] : lo[i];
        sum += v[i];
      }
      v[free] = c.total_demand() - sum;
      if (v[free] < lo[free] - 1e-12 || v[free] > hi[free] + 1e-12) continue;
      const Eigen::VectorXd all = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(n));
      const Eigen::VectorXd pg = all.head(static_cast<Eigen::Index>(ng));
      const Eigen::VectorXd pw = all.tail(static_cast<Eigen::Index>(n - ng));
      const Eigen::VectorXd f = p.flows(bus_injections(c, pg, pw));
      for (std::size_t l = 0; l < c.lines.size(); ++l) {
        fmin[l] = std::min(fmin[l], f(static_cast<Eigen::Index>(l)));
        fmax[l] = std::max(fmax[l], f(static_cast<Eigen::Index>(l)));
      }
    }
  }
  for (std::size_t l = 0; l < c.lines.size(); ++l) {
    CHECK(ranges[l].min == doctest::Approx(fmin[l]).epsilon(1e-9));
    CHECK(ranges[l].max == doctest::Approx(fmax[l]).epsilon(1e-9));
  }
}

TEST_CASE("tiny fixture keeps exactly the two radial lines") {
  const auto p = fixtures::tiny();
  CHECK(p.screen.kept_ids(p.grid) == std::vector<std::string>{"L2", "L3"});
  CHECK(p.index.wind_count() == 1);
  CHECK(p.index.line_count() == 2);
}
