#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "dropf/case.hpp"
#include "dropf/risk.hpp"
#include "dropf/screening.hpp"
#include "dropf/uncertainty.hpp"

namespace fixtures {

/// Case, PTDF, screening and uncertainty layout in one place.
struct Pipeline {
  dropf::Case grid;
  dropf::PtdfMatrix ptdf;
  dropf::ScreeningResult screen;
  dropf::UncertaintyIndex index;

  explicit Pipeline(dropf::Case c) : grid(std::move(c)) {
    ptdf = dropf::compute_ptdf(grid);
    screen = dropf::screen_inactive_lines(grid, ptdf);
    index = dropf::UncertaintyIndex(grid, screen.kept);
  }
  dropf::RiskModel risk(dropf::PenaltyWeights w = {}) const { return dropf::RiskModel(grid, ptdf, index, w); }
  dropf::SampleSet samples(std::size_t n, double rho, std::uint64_t seed, std::uint64_t std_seed = 7) const {
    const auto spec = dropf::make_sample_spec(grid, index, rho, seed, std_seed);
    return dropf::generate_samples(grid, index, spec, n);
  }
};

inline Pipeline case5() { return Pipeline(dropf::load_case(dropf::bundled_case5_path())); }

/// Three buses, two AGC units, one wind farm. L1 never binds, so the
/// uncertain lines are L2 and L3.
inline nlohmann::json tiny_case_json() {
  return nlohmann::json::parse(R"({
    "buses": [1, 2, 3],
    "slack_bus": 1,
    "generators": [
      {"id": "G1", "bus": 1, "p_min": 0, "p_max": 6, "cost": [10, 300, 0],
       "cost_up": [8, 900, 0], "cost_down": [4, 120, 0], "agc": true},
      {"id": "G2", "bus": 2, "p_min": 0, "p_max": 5, "cost": [15, 450, 0],
       "cost_up": [10, 1000, 0], "cost_down": [5, 150, 0], "agc": true}
    ],
    "lines": [
      {"id": "L1", "from": 1, "to": 2, "susceptance": 20, "static_rating": 10, "forecast_rating": 12, "dlr": true},
      {"id": "L2", "from": 1, "to": 3, "susceptance": 20, "static_rating": 3, "forecast_rating": 3.6, "dlr": true},
      {"id": "L3", "from": 2, "to": 3, "susceptance": 20, "static_rating": 3, "forecast_rating": 3.6, "dlr": true}
    ],
    "wind_farms": [{"id": "W1", "bus": 3, "forecast": 1.5, "capacity": 3}],
    "loads": [{"id": "D1", "bus": 3, "demand": 5}]
  })");
}

inline Pipeline tiny() { return Pipeline(dropf::parse_case(tiny_case_json())); }

/// Static-rated ring over all buses plus `l` DLR chords, with `g` AGC
/// units. Used for size checks where the electrical data do not matter.
inline dropf::Case synthetic_case(int buses, int g, int l, int w) {
  nlohmann::json j;
  std::vector<int> ids;
  for (int b = 1; b <= buses; ++b) ids.push_back(b);
  j["buses"] = ids;
  j["slack_bus"] = 1;
  j["generators"] = nlohmann::json::array();
  for (int i = 0; i < g; ++i) {
    j["generators"].push_back({{"id", "G" + std::to_string(i + 1)},
                               {"bus", 1 + (i * 7) % buses},
                               {"p_min", 0.0},
                               {"p_max", 5.0},
                               {"cost", {10.0, 300.0, 0.0}},
                               {"cost_up", {8.0, 900.0, 0.0}},
                               {"cost_down", {4.0, 120.0, 0.0}},
                               {"agc", true}});
  }
  j["lines"] = nlohmann::json::array();
  for (int b = 1; b <= buses; ++b) {
    j["lines"].push_back({{"id", "R" + std::to_string(b)},
                          {"from", b},
                          {"to", 1 + b % buses},
                          {"susceptance", 20.0},
                          {"static_rating", 50.0},
                          {"forecast_rating", 50.0},
                          {"dlr", false}});
  }
  for (int i = 0; i < l; ++i) {
    const int from = 1 + (i * 2) % buses;
    int to = 1 + (from - 1 + buses / 2 + i % 5) % buses;
    if (to == from) to = 1 + from % buses;
    j["lines"].push_back({{"id", "L" + std::to_string(i + 1)},
                          {"from", from},
                          {"to", to},
                          {"susceptance", 10.0 + i},
                          {"static_rating", 1.0},
                          {"forecast_rating", 1.2},
                          {"dlr", true}});
  }
  j["wind_farms"] = nlohmann::json::array();
  for (int i = 0; i < w; ++i) {
    j["wind_farms"].push_back(
        {{"id", "W" + std::to_string(i + 1)}, {"bus", 1 + (i * 11 + 2) % buses}, {"forecast", 2.0}, {"capacity", 4.0}});
  }
  j["loads"] = {{{"id", "D1"}, {"bus", buses}, {"demand", 10.0}}};
  return dropf::parse_case(j);
}

/// All line indices of `c`.
inline std::vector<std::size_t> all_lines(const dropf::Case& c) {
  std::vector<std::size_t> v(c.lines.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = i;
  return v;
}

}  // namespace fixtures
