#include "dropf/tuning.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

namespace dropf {

namespace {

std::vector<double> steps(int count, int per_unit, int offset) {
  std::vector<double> v;
  for (int i = 0; i < count; ++i) v.push_back(static_cast<double>(offset + i) / per_unit);
  return v;
}

Eigen::MatrixXd rows_of(const Eigen::MatrixXd& m, const std::vector<std::size_t>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

}  // namespace

TuneGrid TuneGrid::coarse() {
  TuneGrid g;
  g.theta_values = steps(21, 20, 0);
  g.tau_values = steps(10, 1, 1);
  return g;
}

TuneGrid TuneGrid::fine() {
  TuneGrid g;
  g.theta_values = steps(101, 100, 0);
  g.tau_values = steps(10, 1, 1);
  return g;
}

void TuneGrid::validate() const {
  if (theta_values.empty() || tau_values.empty()) throw std::invalid_argument("tuning grid is empty");
  if (!std::is_sorted(theta_values.begin(), theta_values.end()) ||
      !std::is_sorted(tau_values.begin(), tau_values.end())) {
    throw std::invalid_argument("tuning grid values must be sorted ascending");
  }
  if (theta_values.front() < 0.0 || theta_values.back() > 1.0) {
    throw std::invalid_argument("theta values must lie in [0, 1]");
  }
  if (tau_values.front() < 1.0 || tau_values.back() > 10.0) {
    throw std::invalid_argument("tau values must lie in [1, 10]");
  }
  if (!(split_fraction > 0.0 && split_fraction < 1.0)) {
    throw std::invalid_argument("split fraction must lie in (0, 1)");
  }
}

const char* to_string(TuneScore s) {
  return s == TuneScore::validation_cost ? "validation-cost" : "train-objective";
}

TuneScore parse_score(const std::string& s) {
  if (s == "validation-cost" || s == "validation") return TuneScore::validation_cost;
  if (s == "train-objective" || s == "train") return TuneScore::train_objective;
  throw std::invalid_argument("unknown tuning score '" + s + "' (expected validation-cost|train-objective)");
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> holdout_split(std::size_t n, double fraction,
                                                                            std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("a hold-out split needs at least two samples");
  auto n_train = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  n_train = std::clamp<std::size_t>(n_train, 1, n - 1);

  // Fisher-Yates on mt19937_64 output so the split does not depend on the
  // standard library's distribution implementations.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
    std::swap(order[i], order[j]);
  }
  std::vector<std::size_t> train(order.begin(), order.begin() + static_cast<long>(n_train));
  std::vector<std::size_t> valid(order.begin() + static_cast<long>(n_train), order.end());
  std::sort(train.begin(), train.end());
  std::sort(valid.begin(), valid.end());
  return {train, valid};
}

long select_best(const std::vector<TunePoint>& points) {
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (points[a].theta != points[b].theta) return points[a].theta < points[b].theta;
    return points[a].tau < points[b].tau;
  });
  long best = -1;
  for (std::size_t i : order) {
    if (!points[i].ok) continue;
    if (best < 0 || points[i].validation_score < points[static_cast<std::size_t>(best)].validation_score) {
      best = static_cast<long>(i);
    }
  }
  return best;
}

TuneResult holdout_tune(const RiskModel& risk, const std::vector<std::size_t>& kept_lines,
                        const Eigen::MatrixXd& samples, const TuneGrid& grid, ModelKind kind,
                        ApproxMode approx, const TuneOptions& options) {
  grid.validate();
  if (kind == ModelKind::deterministic || kind == ModelKind::saa) {
    throw std::invalid_argument(std::string("model '") + to_string(kind) + "' has no ambiguity parameters to tune");
  }
  const auto n = static_cast<std::size_t>(samples.rows());
  if (n < 4) throw std::invalid_argument("tuning needs at least 4 samples");

  TuneResult result;
  std::tie(result.train_rows, result.validation_rows) = holdout_split(n, grid.split_fraction, grid.seed);
  const Eigen::MatrixXd train = rows_of(samples, result.train_rows);
  const Eigen::MatrixXd valid = rows_of(samples, result.validation_rows);

  const std::vector<double> thetas =
      kind == ModelKind::m_dropf ? std::vector<double>{0.0} : grid.theta_values;
  const std::vector<double> taus =
      kind == ModelKind::w_dropf ? std::vector<double>{1.0} : grid.tau_values;
  for (double th : thetas) {
    for (double ta : taus) {
      TunePoint p;
      p.theta = th;
      p.tau = ta;
      result.points.push_back(p);
    }
  }

  auto evaluate = [&](TunePoint& p) {
    ModelSpec spec;
    spec.kind = kind;
    spec.approx = approx;
    spec.ambiguity = AmbiguitySpec{p.theta, p.tau, options.norm};
    try {
      const SolvedModel s = solve_model(risk, kept_lines, train, spec, options.solver);
      p.train_objective = s.solution.objective;
      p.validation_score = options.score == TuneScore::train_objective
                               ? s.solution.objective
                               : dispatch_cost(risk.grid(), s.decision) + risk.mean_risk(s.decision, valid);
      p.status = to_string(s.solution.status);
      p.ok = true;
    } catch (const std::exception& e) {
      p.status = std::string("failed: ") + e.what();
      p.ok = false;
    }
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(result.points.size())));
  if (workers == 1) {
    for (auto& p : result.points) evaluate(p);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < result.points.size(); i = next++) evaluate(result.points[i]);
      });
    }
    for (auto& t : pool) t.join();
  }

  for (const auto& p : result.points) result.failures += p.ok ? 0 : 1;
  const long best = select_best(result.points);
  if (best < 0) {
    std::string first = result.points.empty() ? "empty grid" : result.points.front().status;
    throw TuningError("every tuning grid point failed (first: " + first + ")");
  }
  result.theta = result.points[static_cast<std::size_t>(best)].theta;
  result.tau = result.points[static_cast<std::size_t>(best)].tau;
  return result;
}

void write_tune_report(const std::filesystem::path& path, const TuneResult& result,
                       const std::string& header_comment) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.precision(12);
  if (!header_comment.empty()) out << "# " << header_comment << "\n";
  out << "theta,tau,train_objective,validation_score,status\n";
  for (const auto& p : result.points) {
    std::string status = p.status;
    std::replace(status.begin(), status.end(), ',', ';');
    std::replace(status.begin(), status.end(), '\n', ' ');
    out << p.theta << "," << p.tau << ",";
    if (p.ok) {
      out << p.train_objective << "," << p.validation_score;
    } else {
      out << ",";
    }
    out << "," << status << "\n";
  }
}

}  // namespace dropf
