#include "dropf/sample_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace dropf {

namespace {

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::vector<std::string> split_csv(const std::string& line) {
  // Labels and numbers never need quoting, but accept quoted fields anyway.
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

std::filesystem::path sidecar_path(const std::filesystem::path& csv) {
  return std::filesystem::path(csv.string() + ".json");
}

void write_samples(const std::filesystem::path& path, const SampleSet& set, const Case& c) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  const auto labels = set.index.labels();
  for (std::size_t i = 0; i < labels.size(); ++i) out << (i ? "," : "") << labels[i];
  out << "\r\n";
  for (Eigen::Index n = 0; n < set.samples.rows(); ++n) {
    for (Eigen::Index i = 0; i < set.samples.cols(); ++i) {
      out << (i ? "," : "") << format_double(set.samples(n, i));
    }
    out << "\r\n";
  }

  nlohmann::ordered_json meta;
  meta["seed"] = set.spec.seed;
  meta["rho"] = set.spec.rho;
  meta["std_factor"] = std::vector<double>(set.spec.std_factor.data(),
                                           set.spec.std_factor.data() + set.spec.std_factor.size());
  meta["mean"] = std::vector<double>(set.spec.mean.data(), set.spec.mean.data() + set.spec.mean.size());
  meta["n"] = set.samples.rows();
  meta["columns"] = labels;
  meta["case_hash"] = case_hash(c);
  meta["version"] = DROPF_VERSION;
  std::ofstream side(sidecar_path(path), std::ios::binary);
  if (!side) throw std::runtime_error("cannot write " + sidecar_path(path).string());
  side << meta.dump(2) << "\n";
}

SampleSet read_samples(const std::filesystem::path& path, const UncertaintyIndex& index) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path.string() + ": cannot open sample file");
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": empty sample file");
  const auto header = split_csv(line);
  const auto labels = index.labels();
  if (header != labels) {
    std::ostringstream msg;
    msg << path.string() << ": header does not match the uncertainty layout (expected ";
    for (std::size_t i = 0; i < labels.size(); ++i) msg << (i ? "," : "") << labels[i];
    msg << ")";
    throw std::runtime_error(msg.str());
  }

  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv(line);
    if (fields.size() != labels.size()) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": expected " + std::to_string(labels.size()) + " fields");
    }
    std::vector<double> row;
    for (const auto& f : fields) {
      double v = 0.0;
      auto res = std::from_chars(f.data(), f.data() + f.size(), v);
      if (res.ec != std::errc() || res.ptr != f.data() + f.size()) {
        throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                 ": not a number: '" + f + "'");
      }
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error(path.string() + ": no samples");

  SampleSet set;
  set.index = index;
  set.samples.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(labels.size()));
  for (std::size_t n = 0; n < rows.size(); ++n) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
      set.samples(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(i)) = rows[n][i];
    }
  }

  std::ifstream side(sidecar_path(path));
  if (side) {
    auto meta = nlohmann::json::parse(side, nullptr, false);
    if (!meta.is_discarded()) {
      set.spec.seed = meta.value("seed", std::uint64_t{0});
      set.spec.rho = meta.value("rho", 0.0);
      auto sf = meta.value("std_factor", std::vector<double>{});
      auto mean = meta.value("mean", std::vector<double>{});
      if (sf.size() == labels.size()) set.spec.std_factor = Eigen::Map<Eigen::VectorXd>(sf.data(), static_cast<Eigen::Index>(sf.size()));
      if (mean.size() == labels.size()) set.spec.mean = Eigen::Map<Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
    }
  }
  return set;
}

}  // namespace dropf
