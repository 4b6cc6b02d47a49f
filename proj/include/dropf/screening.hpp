#pragma once

#include <string>
#include <vector>

#include "dropf/case.hpp"
#include "dropf/ptdf.hpp"

namespace dropf {

struct FlowRange {
  double min = 0.0;
  double max = 0.0;
};

struct ScreeningResult {
  std::vector<std::size_t> kept;     // line indices, case order
  std::vector<std::size_t> dropped;
  std::vector<FlowRange> ranges;     // per line, case order

  std::vector<std::string> kept_ids(const Case& c) const;
};

/// Extreme flows of every line over {p_min <= p_g <= p_max, 0 <= p_w <= capacity,
/// sum of injections = total demand}, with no line limits imposed.
/// Throws CaseError if the polytope is empty.
std::vector<FlowRange> flow_ranges(const Case& c, const PtdfMatrix& ptdf);

/// Drops a line only when both extremes stay within its static rating.
ScreeningResult screen_inactive_lines(const Case& c, const PtdfMatrix& ptdf);

}  // namespace dropf
