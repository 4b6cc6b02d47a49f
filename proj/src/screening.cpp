#include "dropf/screening.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace dropf {

namespace {

struct Injector {
  double lower;
  double upper;
  std::size_t bus_pos;
};

// max / min of sum(coef_i v_i) over a box with sum(v_i) = total. The LP has a
// single coupling row, so filling by coefficient order is optimal.
double fill_extreme(const std::vector<Injector>& inj, const std::vector<double>& coef,
                    double total, bool maximize) {
  std::vector<std::size_t> order(inj.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return maximize ? coef[a] > coef[b] : coef[a] < coef[b];
  });
  double value = 0.0;
  double remaining = total;
  for (std::size_t i = 0; i < inj.size(); ++i) {
    value += coef[i] * inj[i].lower;
    remaining -= inj[i].lower;
  }
  for (std::size_t i : order) {
    if (remaining <= 0.0) break;
    const double step = std::min(remaining, inj[i].upper - inj[i].lower);
    value += coef[i] * step;
    remaining -= step;
  }
  return value;
}

}  // namespace

std::vector<std::string> ScreeningResult::kept_ids(const Case& c) const {
  std::vector<std::string> ids;
  for (std::size_t l : kept) ids.push_back(c.lines[l].id);
  return ids;
}

std::vector<FlowRange> flow_ranges(const Case& c, const PtdfMatrix& ptdf) {
  std::vector<Injector> inj;
  for (const auto& g : c.generators) inj.push_back({g.p_min, g.p_max, c.bus_position(g.bus)});
  for (const auto& w : c.wind_farms) inj.push_back({0.0, w.capacity, c.bus_position(w.bus)});

  const double demand = c.total_demand();
  double lo = 0.0, hi = 0.0;
  for (const auto& v : inj) {
    lo += v.lower;
    hi += v.upper;
  }
  const double slack = 1e-9 * std::max(1.0, demand);
  if (demand < lo - slack || demand > hi + slack) {
    std::ostringstream msg;
    msg << "screening LP infeasible: demand " << demand << " MW outside injection range ["
        << lo << ", " << hi << "] MW";
    throw CaseError("screening", msg.str());
  }

  std::vector<FlowRange> out(c.lines.size());
  std::vector<double> coef(inj.size());
  for (std::size_t l = 0; l < c.lines.size(); ++l) {
    double load_part = 0.0;
    for (std::size_t d = 0; d < c.loads.size(); ++d) load_part -= ptdf.load(l, d) * c.loads[d].demand;
    for (std::size_t i = 0; i < inj.size(); ++i) coef[i] = ptdf.at_bus(l, inj[i].bus_pos);
    out[l].max = load_part + fill_extreme(inj, coef, demand, true);
    out[l].min = load_part + fill_extreme(inj, coef, demand, false);
  }
  return out;
}

ScreeningResult screen_inactive_lines(const Case& c, const PtdfMatrix& ptdf) {
  ScreeningResult res;
  res.ranges = flow_ranges(c, ptdf);
  for (std::size_t l = 0; l < c.lines.size(); ++l) {
    const double rating = c.lines[l].static_rating;
    const auto& r = res.ranges[l];
    if (r.max <= rating && r.min >= -rating) {
      res.dropped.push_back(l);
    } else {
      res.kept.push_back(l);
    }
  }
  return res;
}

}  // namespace dropf
