#include "dropf/case.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace dropf {

namespace {

using nlohmann::json;

std::string at(const std::string& parent, std::size_t index) {
  return parent + "[" + std::to_string(index) + "]";
}

const json& require(const json& obj, const std::string& where,
                    const char* key) {
  if (!obj.is_object()) throw CaseError(where, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw CaseError(where + "." + key, "missing required field");
  }
  return *it;
}

double number(const json& obj, const std::string& where, const char* key) {
  const json& v = require(obj, where, key);
  if (!v.is_number()) throw CaseError(where + "." + key, "expected a number");
  return v.get<double>();
}

int integer(const json& obj, const std::string& where, const char* key) {
  const json& v = require(obj, where, key);
  if (!v.is_number_integer()) {
    throw CaseError(where + "." + key, "expected an integer bus id");
  }
  return v.get<int>();
}

std::string text(const json& obj, const std::string& where, const char* key) {
  const json& v = require(obj, where, key);
  if (!v.is_string()) throw CaseError(where + "." + key, "expected a string");
  return v.get<std::string>();
}

bool flag(const json& obj, const std::string& where, const char* key,
          bool fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_boolean()) {
    throw CaseError(where + "." + key, "expected a boolean");
  }
  return it->get<bool>();
}

ConvexQuadratic quadratic(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 3 ||
      !std::all_of(v.begin(), v.end(),
                   [](const json& e) { return e.is_number(); })) {
    throw CaseError(where, "expected [c2, c1, c0]");
  }
  return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

const json& array_field(const json& doc, const char* key) {
  auto it = doc.find(key);
  if (it == doc.end()) throw CaseError(key, "missing required field");
  if (!it->is_array()) throw CaseError(key, "expected an array");
  return *it;
}

// Byte offset -> 1-based line number for parse diagnostics.
std::size_t line_of(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(
                 std::count(text.begin(), text.begin() + offset, '\n'));
}

}  // namespace

std::size_t Case::bus_position(int bus) const {
  auto it = std::find(buses.begin(), buses.end(), bus);
  if (it == buses.end()) {
    throw CaseError("bus " + std::to_string(bus), "unknown bus id");
  }
  return static_cast<std::size_t>(it - buses.begin());
}

std::optional<std::size_t> Case::find_line(const std::string& id) const {
  for (std::size_t l = 0; l < lines.size(); ++l) {
    if (lines[l].id == id) return l;
  }
  return std::nullopt;
}

double Case::total_demand() const {
  double total = 0.0;
  for (const auto& d : loads) total += d.demand;
  return total;
}

double Case::total_wind_forecast() const {
  double total = 0.0;
  for (const auto& w : wind_farms) total += w.forecast;
  return total;
}

std::vector<std::size_t> Case::agc_generators() const {
  std::vector<std::size_t> out;
  for (std::size_t g = 0; g < generators.size(); ++g) {
    if (generators[g].agc) out.push_back(g);
  }
  return out;
}

void Case::validate() const {
  if (buses.empty()) throw CaseError("buses", "case has no buses");
  std::set<int> bus_set(buses.begin(), buses.end());
  if (bus_set.size() != buses.size()) {
    throw CaseError("buses", "duplicate bus id");
  }
  auto check_bus = [&](const std::string& who, int bus) {
    if (!bus_set.count(bus)) {
      throw CaseError(who, "references unknown bus " + std::to_string(bus));
    }
  };
  check_bus("slack_bus", slack_bus);

  std::set<std::string> ids;
  auto check_id = [&](const std::string& id) {
    if (!ids.insert(id).second) throw CaseError(id, "duplicate element id");
  };

  for (const auto& g : generators) {
    check_id(g.id);
    check_bus(g.id, g.bus);
    if (!(g.p_min >= 0.0)) throw CaseError(g.id, "p_min must be >= 0");
    if (!(g.p_min <= g.p_max)) throw CaseError(g.id, "p_min exceeds p_max");
    for (const auto* q : {&g.cost, &g.cost_up, &g.cost_down}) {
      if (!(q->c2 > 0.0) || !std::isfinite(q->c1) || !std::isfinite(q->c0)) {
        throw CaseError(g.id, "cost curves must be strictly convex (c2 > 0)");
      }
    }
  }
  for (const auto& l : lines) {
    check_id(l.id);
    check_bus(l.id, l.from);
    check_bus(l.id, l.to);
    if (l.from == l.to) throw CaseError(l.id, "line endpoints coincide");
    if (!std::isfinite(l.susceptance) || l.susceptance == 0.0) {
      throw CaseError(l.id, "susceptance must be finite and nonzero");
    }
    if (!(l.static_rating > 0.0)) {
      throw CaseError(l.id, "static_rating must be positive");
    }
    if (!(l.forecast_rating >= l.static_rating)) {
      throw CaseError(l.id, "forecast_rating below static_rating");
    }
  }
  for (const auto& w : wind_farms) {
    check_id(w.id);
    check_bus(w.id, w.bus);
    if (!(w.forecast >= 0.0 && w.forecast <= w.capacity)) {
      throw CaseError(w.id, "forecast must lie in [0, capacity]");
    }
  }
  for (const auto& d : loads) {
    check_id(d.id);
    check_bus(d.id, d.bus);
    if (!(d.demand >= 0.0)) throw CaseError(d.id, "demand must be >= 0");
  }

  // Connectivity by union-find over bus positions.
  std::vector<std::size_t> parent(buses.size());
  for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = i;
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (const auto& l : lines) {
    parent[find(bus_position(l.from))] = find(bus_position(l.to));
  }
  std::size_t root = find(0);
  for (std::size_t i = 1; i < buses.size(); ++i) {
    if (find(i) != root) {
      throw CaseError("bus " + std::to_string(buses[i]),
                      "network is disconnected");
    }
  }
}

Case parse_case(const json& doc) {
  if (!doc.is_object()) throw CaseError("", "case document must be an object");
  Case c;

  const json& buses = array_field(doc, "buses");
  for (std::size_t i = 0; i < buses.size(); ++i) {
    if (!buses[i].is_number_integer()) {
      throw CaseError(at("buses", i), "expected an integer bus id");
    }
    c.buses.push_back(buses[i].get<int>());
  }

  const json& gens = array_field(doc, "generators");
  for (std::size_t i = 0; i < gens.size(); ++i) {
    const std::string where = at("generators", i);
    Generator g;
    g.id = text(gens[i], where, "id");
    g.bus = integer(gens[i], where, "bus");
    g.p_min = number(gens[i], where, "p_min");
    g.p_max = number(gens[i], where, "p_max");
    g.cost = quadratic(require(gens[i], where, "cost"), where + ".cost");
    // Reserve costs default to 0.1 x the energy cost curve when omitted.
    ConvexQuadratic scaled{0.1 * g.cost.c2, 0.1 * g.cost.c1, 0.1 * g.cost.c0};
    g.cost_up = gens[i].contains("cost_up")
                    ? quadratic(gens[i]["cost_up"], where + ".cost_up")
                    : scaled;
    g.cost_down = gens[i].contains("cost_down")
                      ? quadratic(gens[i]["cost_down"], where + ".cost_down")
                      : scaled;
    g.agc = flag(gens[i], where, "agc", true);
    c.generators.push_back(std::move(g));
  }

  const json& lines = array_field(doc, "lines");
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string where = at("lines", i);
    Line l;
    l.id = text(lines[i], where, "id");
    l.from = integer(lines[i], where, "from");
    l.to = integer(lines[i], where, "to");
    l.susceptance = number(lines[i], where, "susceptance");
    l.static_rating = number(lines[i], where, "static_rating");
    l.forecast_rating = number(lines[i], where, "forecast_rating");
    l.dlr = flag(lines[i], where, "dlr", true);
    c.lines.push_back(std::move(l));
  }

  if (doc.contains("wind_farms")) {
    const json& farms = array_field(doc, "wind_farms");
    for (std::size_t i = 0; i < farms.size(); ++i) {
      const std::string where = at("wind_farms", i);
      WindFarm w;
      w.id = text(farms[i], where, "id");
      w.bus = integer(farms[i], where, "bus");
      w.forecast = number(farms[i], where, "forecast");
      w.capacity = number(farms[i], where, "capacity");
      c.wind_farms.push_back(std::move(w));
    }
  }

  if (doc.contains("loads")) {
    const json& loads = array_field(doc, "loads");
    for (std::size_t i = 0; i < loads.size(); ++i) {
      const std::string where = at("loads", i);
      Load d;
      d.id = text(loads[i], where, "id");
      d.bus = integer(loads[i], where, "bus");
      d.demand = number(loads[i], where, "demand");
      c.loads.push_back(std::move(d));
    }
  }

  if (doc.contains("slack_bus")) {
    c.slack_bus = integer(doc, "case", "slack_bus");
  } else {
    // Lowest-numbered generator bus.
    if (c.generators.empty()) {
      throw CaseError("slack_bus", "absent and no generator bus to default to");
    }
    c.slack_bus = c.generators.front().bus;
    for (const auto& g : c.generators) c.slack_bus = std::min(c.slack_bus, g.bus);
  }

  c.validate();
  return c;
}

Case load_case(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CaseError(path.string(), "cannot open case file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string content = buffer.str();
  json doc;
  try {
    doc = json::parse(content);
  } catch (const json::parse_error& e) {
    throw CaseError(path.string() + ":" +
                        std::to_string(line_of(content, e.byte)),
                    std::string("parse error: ") + e.what());
  }
  return parse_case(doc);
}

json to_json(const Case& c) {
  auto q = [](const ConvexQuadratic& f) { return json::array({f.c2, f.c1, f.c0}); };
  json doc;
  doc["buses"] = c.buses;
  doc["slack_bus"] = c.slack_bus;
  doc["generators"] = json::array();
  for (const auto& g : c.generators) {
    doc["generators"].push_back({{"id", g.id},
                                 {"bus", g.bus},
                                 {"p_min", g.p_min},
                                 {"p_max", g.p_max},
                                 {"cost", q(g.cost)},
                                 {"cost_up", q(g.cost_up)},
                                 {"cost_down", q(g.cost_down)},
                                 {"agc", g.agc}});
  }
  doc["lines"] = json::array();
  for (const auto& l : c.lines) {
    doc["lines"].push_back({{"id", l.id},
                            {"from", l.from},
                            {"to", l.to},
                            {"susceptance", l.susceptance},
                            {"static_rating", l.static_rating},
                            {"forecast_rating", l.forecast_rating},
                            {"dlr", l.dlr}});
  }
  doc["wind_farms"] = json::array();
  for (const auto& w : c.wind_farms) {
    doc["wind_farms"].push_back({{"id", w.id},
                                 {"bus", w.bus},
                                 {"forecast", w.forecast},
                                 {"capacity", w.capacity}});
  }
  doc["loads"] = json::array();
  for (const auto& d : c.loads) {
    doc["loads"].push_back({{"id", d.id}, {"bus", d.bus}, {"demand", d.demand}});
  }
  return doc;
}

std::string case_hash(const Case& c) {
  // FNV-1a over the canonical JSON dump.
  const std::string dump = to_json(c).dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : dump) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Case with_static_ratings(Case c) {
  for (auto& l : c.lines) l.forecast_rating = l.static_rating;
  return c;
}

std::filesystem::path bundled_case5_path() {
  return std::filesystem::path(DROPF_DATA_DIR) / "case5.json";
}

}  // namespace dropf
