#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "dropf/case.hpp"

namespace dropf {

/// Stamp carried by every output file.
struct Provenance {
  std::string version = DROPF_VERSION;
  std::uint64_t seed = 0;
  std::string case_hash;
  std::string command;
};

Provenance make_provenance(const Case& c, std::uint64_t seed, std::string command);

nlohmann::ordered_json to_json(const Provenance& p);

/// "dropf <version> command=<cmd> seed=<seed> case=<hash>", for comment lines.
std::string summary_line(const Provenance& p);

}  // namespace dropf
