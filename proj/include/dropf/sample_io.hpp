#pragma once

#include <filesystem>

#include "dropf/uncertainty.hpp"

namespace dropf {

/// Writes `<path>` (CSV, header w:<id>,...,l:<id>) and `<path>.json` with the
/// seed, rho, std_factor and case hash.
void write_samples(const std::filesystem::path& path, const SampleSet& set, const Case& c);

/// Reads a sample CSV whose header must match `index` column for column.
/// The sidecar is read when present to restore the spec.
SampleSet read_samples(const std::filesystem::path& path, const UncertaintyIndex& index);

std::filesystem::path sidecar_path(const std::filesystem::path& csv);

}  // namespace dropf
