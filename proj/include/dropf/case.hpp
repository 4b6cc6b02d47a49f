#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace dropf {

/// Thrown when a case file cannot be parsed or violates a data invariant.
/// `where()` names the offending element or JSON location.
class CaseError : public std::runtime_error {
 public:
  CaseError(std::string where, const std::string& what)
      : std::runtime_error(where.empty() ? what : where + ": " + what),
        where_(std::move(where)) {}

  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

/// c2 * p^2 + c1 * p + c0, with c2 > 0.
struct ConvexQuadratic {
  double c2 = 0.0;
  double c1 = 0.0;
  double c0 = 0.0;

  double operator()(double p) const { return (c2 * p + c1) * p + c0; }
};

struct Generator {
  std::string id;
  int bus = 0;
  double p_min = 0.0;
  double p_max = 0.0;
  ConvexQuadratic cost;
  ConvexQuadratic cost_up;
  ConvexQuadratic cost_down;
  bool agc = true;
};

struct Line {
  std::string id;
  int from = 0;
  int to = 0;
  double susceptance = 0.0;
  double static_rating = 0.0;
  double forecast_rating = 0.0;
  bool dlr = true;
};

struct WindFarm {
  std::string id;
  int bus = 0;
  double forecast = 0.0;
  double capacity = 0.0;
};

struct Load {
  std::string id;
  int bus = 0;
  double demand = 0.0;
};

/// Static grid description. Powers are MW, costs $.
struct Case {
  std::vector<int> buses;
  std::vector<Generator> generators;
  std::vector<Line> lines;
  std::vector<WindFarm> wind_farms;
  std::vector<Load> loads;
  int slack_bus = 0;

  /// Position of a bus id in `buses`; throws CaseError for unknown ids.
  std::size_t bus_position(int bus) const;

  std::optional<std::size_t> find_line(const std::string& id) const;

  double total_demand() const;
  double total_wind_forecast() const;

  /// Indices of generators that take part in AGC, in case order.
  std::vector<std::size_t> agc_generators() const;

  /// Checks every type invariant; throws CaseError naming the element.
  void validate() const;
};

Case parse_case(const nlohmann::json& doc);
Case load_case(const std::filesystem::path& path);

nlohmann::json to_json(const Case& c);

/// Stable 64-bit fingerprint of the case contents (hex string), used in
/// provenance records.
std::string case_hash(const Case& c);

/// Copy of `c` operated with static ratings: forecast_rating := static_rating.
Case with_static_ratings(Case c);

/// Path of the bundled 5-bus case.
std::filesystem::path bundled_case5_path();

}  // namespace dropf
