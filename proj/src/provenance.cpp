#include "dropf/provenance.hpp"

#include <sstream>

namespace dropf {

Provenance make_provenance(const Case& c, std::uint64_t seed, std::string command) {
  Provenance p;
  p.seed = seed;
  p.case_hash = case_hash(c);
  p.command = std::move(command);
  return p;
}

nlohmann::ordered_json to_json(const Provenance& p) {
  nlohmann::ordered_json j;
  j["version"] = p.version;
  j["command"] = p.command;
  j["seed"] = p.seed;
  j["case_hash"] = p.case_hash;
  return j;
}

std::string summary_line(const Provenance& p) {
  std::ostringstream s;
  s << "dropf " << p.version << " command=" << p.command << " seed=" << p.seed << " case=" << p.case_hash;
  return s.str();
}

}  // namespace dropf
