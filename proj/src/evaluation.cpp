#include "dropf/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "dropf/screening.hpp"

namespace dropf {

double out_of_sample_performance(const RiskModel& risk, const DispatchDecision& x,
                                 const Eigen::MatrixXd& test) {
  if (test.rows() < 1) throw std::invalid_argument("the test set is empty");
  return dispatch_cost(risk.grid(), x) + risk.mean_risk(x, test);
}

const char* to_string(DlrMode m) { return m == DlrMode::dlr ? "dlr" : "slr"; }

DlrMode parse_dlr_mode(const std::string& s) {
  if (s == "dlr") return DlrMode::dlr;
  if (s == "slr") return DlrMode::slr;
  throw std::invalid_argument("unknown rating mode '" + s + "' (expected dlr|slr)");
}

void ExperimentConfig::validate() const {
  if (models.empty()) throw ConfigError("models", "at least one model is required");
  if (repetitions < 1) throw ConfigError("repetitions", "must be at least 1");
  if (n_test < 1) throw ConfigError("n_test", "must be at least 1");
  if (n_train < 1) throw ConfigError("n_train", "must be at least 1");
  if (rho.empty()) throw ConfigError("rho", "at least one value is required");
  for (double r : rho) {
    if (!(r >= 0.0 && r < 1.0)) throw ConfigError("rho", "values must lie in [0, 1)");
  }
  if (dlr_modes.empty()) throw ConfigError("dlr_mode", "at least one mode is required");
  if (!(penalties.beta_d > 0.0 && penalties.beta_w > 0.0 && penalties.beta_l > 0.0)) {
    throw ConfigError("penalties", "weights must be positive");
  }
  if (threads < 1) throw ConfigError("threads", "must be at least 1");
  const bool tunable = std::any_of(models.begin(), models.end(), [](ModelKind k) {
    return k == ModelKind::w_dropf || k == ModelKind::m_dropf || k == ModelKind::wm_dropf;
  });
  if (tune && tunable) {
    if (n_train < 4) throw ConfigError("n_train", "tuning needs at least 4 training samples");
    try {
      grid.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError("tuning", e.what());
    }
  }
  if (!tune) {
    if (theta < 0.0) throw ConfigError("theta", "must be nonnegative");
    if (tau < 1.0) throw ConfigError("tau", "must be at least 1");
  }
}

namespace {

template <class T, class F>
T field(const nlohmann::json& j, const char* name, T fallback, F convert) {
  if (!j.contains(name)) return fallback;
  try {
    return convert(j.at(name));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(name, e.what());
  }
}

std::vector<double> number_list(const nlohmann::json& v) {
  if (v.is_number()) return {v.get<double>()};
  return v.get<std::vector<double>>();
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config", "expected a JSON object");
  static const std::set<std::string> known = {
      "case", "models", "approx", "n_train", "n_test", "repetitions", "rho", "penalties", "seed",
      "dlr_mode", "norm", "tune", "tuning", "theta", "tau", "threads", "solver"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError(key, "unknown field");
  }

  ExperimentConfig c;
  c.case_path = field<std::filesystem::path>(j, "case", c.case_path,
                                             [](const auto& v) { return std::filesystem::path(v.template get<std::string>()); });
  c.models = field<std::vector<ModelKind>>(j, "models", c.models, [](const auto& v) {
    std::vector<ModelKind> out;
    for (const auto& m : v) out.push_back(parse_model(m.template get<std::string>()));
    return out;
  });
  c.approx = field<ApproxMode>(j, "approx", c.approx, [](const auto& v) { return parse_approx(v.template get<std::string>()); });
  c.n_train = field<std::size_t>(j, "n_train", c.n_train, [](const auto& v) { return v.template get<std::size_t>(); });
  c.n_test = field<std::size_t>(j, "n_test", c.n_test, [](const auto& v) { return v.template get<std::size_t>(); });
  c.repetitions = field<std::size_t>(j, "repetitions", c.repetitions, [](const auto& v) { return v.template get<std::size_t>(); });
  c.rho = field<std::vector<double>>(j, "rho", c.rho, number_list);
  c.seed = field<std::uint64_t>(j, "seed", c.seed, [](const auto& v) { return v.template get<std::uint64_t>(); });
  c.dlr_modes = field<std::vector<DlrMode>>(j, "dlr_mode", c.dlr_modes, [](const auto& v) {
    std::vector<std::string> names;
    if (v.is_string()) {
      const auto s = v.template get<std::string>();
      names = s == "both" ? std::vector<std::string>{"dlr", "slr"} : std::vector<std::string>{s};
    } else {
      names = v.template get<std::vector<std::string>>();
    }
    std::vector<DlrMode> out;
    for (const auto& s : names) out.push_back(parse_dlr_mode(s));
    return out;
  });
  c.norm = field<GroundNorm>(j, "norm", c.norm, [](const auto& v) { return parse_norm(v.template get<std::string>()); });
  c.tune = field<bool>(j, "tune", c.tune, [](const auto& v) { return v.template get<bool>(); });
  c.theta = field<double>(j, "theta", c.theta, [](const auto& v) { return v.template get<double>(); });
  c.tau = field<double>(j, "tau", c.tau, [](const auto& v) { return v.template get<double>(); });
  c.threads = field<unsigned>(j, "threads", c.threads, [](const auto& v) { return v.template get<unsigned>(); });

  if (j.contains("penalties")) {
    const auto& p = j.at("penalties");
    if (!p.is_object()) throw ConfigError("penalties", "expected an object with beta_d, beta_w, beta_l");
    for (const auto& [key, value] : p.items()) {
      if (key != "beta_d" && key != "beta_w" && key != "beta_l") throw ConfigError("penalties." + key, "unknown field");
    }
    auto num = [&](const char* k, double fallback) {
      return field<double>(p, k, fallback, [](const auto& v) { return v.template get<double>(); });
    };
    c.penalties.beta_d = num("beta_d", c.penalties.beta_d);
    c.penalties.beta_w = num("beta_w", c.penalties.beta_w);
    c.penalties.beta_l = num("beta_l", c.penalties.beta_l);
  }

  if (j.contains("tuning")) {
    const auto& t = j.at("tuning");
    if (!t.is_object()) throw ConfigError("tuning", "expected an object");
    static const std::set<std::string> tk = {"grid", "theta_values", "tau_values", "split_fraction", "score"};
    for (const auto& [key, value] : t.items()) {
      if (!tk.count(key)) throw ConfigError("tuning." + key, "unknown field");
    }
    try {
      if (t.contains("grid")) {
        const auto g = t.at("grid").get<std::string>();
        if (g == "coarse") {
          c.grid = TuneGrid::coarse();
        } else if (g == "fine") {
          c.grid = TuneGrid::fine();
        } else {
          throw std::invalid_argument("unknown grid '" + g + "' (expected coarse|fine)");
        }
      }
      if (t.contains("theta_values")) c.grid.theta_values = number_list(t.at("theta_values"));
      if (t.contains("tau_values")) c.grid.tau_values = number_list(t.at("tau_values"));
      if (t.contains("split_fraction")) c.grid.split_fraction = t.at("split_fraction").get<double>();
      if (t.contains("score")) c.score = parse_score(t.at("score").get<std::string>());
    } catch (const std::exception& e) {
      throw ConfigError("tuning", e.what());
    }
  }

  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    if (!s.is_object()) throw ConfigError("solver", "expected an object");
    try {
      if (s.contains("time_limit_s")) c.solver.time_limit_s = s.at("time_limit_s").get<double>();
      if (s.contains("feasibility_tol")) c.solver.feasibility_tol = s.at("feasibility_tol").get<double>();
      if (s.contains("gap_tol")) c.solver.gap_tol = s.at("gap_tol").get<double>();
    } catch (const std::exception& e) {
      throw ConfigError("solver", e.what());
    }
  }
  c.validate();
  return c;
}

nlohmann::ordered_json ExperimentConfig::to_json() const {
  nlohmann::ordered_json j;
  j["case"] = case_path.string();
  std::vector<std::string> names;
  for (auto m : models) names.emplace_back(dropf::to_string(m));
  j["models"] = names;
  j["approx"] = dropf::to_string(approx);
  j["n_train"] = n_train;
  j["n_test"] = n_test;
  j["repetitions"] = repetitions;
  j["rho"] = rho;
  j["penalties"] = {{"beta_d", penalties.beta_d}, {"beta_w", penalties.beta_w}, {"beta_l", penalties.beta_l}};
  j["seed"] = seed;
  std::vector<std::string> modes;
  for (auto m : dlr_modes) modes.emplace_back(dropf::to_string(m));
  j["dlr_mode"] = modes;
  j["norm"] = dropf::to_string(norm);
  j["tune"] = tune;
  j["tuning"] = {{"theta_values", grid.theta_values},
                 {"tau_values", grid.tau_values},
                 {"split_fraction", grid.split_fraction},
                 {"score", dropf::to_string(score)}};
  j["theta"] = theta;
  j["tau"] = tau;
  j["threads"] = threads;
  j["solver"] = {{"time_limit_s", solver.time_limit_s},
                 {"feasibility_tol", solver.feasibility_tol},
                 {"gap_tol", solver.gap_tol}};
  return j;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t rho_index, std::uint64_t repetition,
                          std::uint64_t stream) {
  // SplitMix64 steps over a fixed counter sequence.
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  std::uint64_t s = mix(master);
  s = mix(s ^ rho_index);
  s = mix(s ^ repetition);
  return mix(s ^ stream);
}

namespace {

enum Stream : std::uint64_t { std_stream = 0, train_stream = 1, test_stream = 2, tune_stream = 3 };

Stats stats_of(const std::vector<double>& v) {
  Stats s;
  if (v.empty()) return s;
  double sum = 0.0;
  for (double x : v) sum += x;
  s.avg = sum / static_cast<double>(v.size());
  s.max = *std::max_element(v.begin(), v.end());
  s.min = *std::min_element(v.begin(), v.end());
  return s;
}

struct Shared {
  const ExperimentConfig& config;
  Case grid;
  PtdfMatrix ptdf;
  ScreeningResult screen;
  UncertaintyIndex index;
};

std::vector<ReportRow> run_repetition(const Shared& sh, std::size_t rho_index, std::size_t rep) {
  const ExperimentConfig& cfg = sh.config;
  const double rho = cfg.rho[rho_index];
  std::vector<ReportRow> rows;

  auto fail_all = [&](const std::string& why) {
    for (DlrMode mode : cfg.dlr_modes) {
      for (ModelKind kind : cfg.models) {
        ReportRow r;
        r.repetition = rep;
        r.model = kind;
        r.dlr_mode = mode;
        r.rho = rho;
        r.n = cfg.n_train;
        r.status = "failed: " + why;
        rows.push_back(r);
      }
    }
  };

  SampleSet train, test;
  try {
    const SampleSpec spec = make_sample_spec(sh.grid, sh.index, rho, derive_seed(cfg.seed, rho_index, rep, train_stream),
                                             derive_seed(cfg.seed, rho_index, rep, std_stream));
    train = generate_samples(sh.grid, sh.index, spec, cfg.n_train);
    SampleSpec test_spec = spec;
    test_spec.seed = derive_seed(cfg.seed, rho_index, rep, test_stream);
    test = generate_samples(sh.grid, sh.index, test_spec, cfg.n_test);
  } catch (const std::exception& e) {
    fail_all(e.what());
    return rows;
  }

  for (DlrMode mode : cfg.dlr_modes) {
    // The static-rating control keeps everything else identical: same draws,
    // line components pinned at the static rating.
    Case grid = mode == DlrMode::slr ? with_static_ratings(sh.grid) : sh.grid;
    SampleSet tr = train, te = test;
    if (mode == DlrMode::slr) {
      freeze_line_ratings(sh.grid, tr);
      freeze_line_ratings(sh.grid, te);
    }
    const RiskModel risk(grid, sh.ptdf, sh.index, cfg.penalties);

    for (ModelKind kind : cfg.models) {
      ReportRow r;
      r.repetition = rep;
      r.model = kind;
      r.dlr_mode = mode;
      r.rho = rho;
      r.n = cfg.n_train;
      try {
        ModelSpec spec;
        spec.kind = kind;
        spec.approx = cfg.approx;
        spec.ambiguity = AmbiguitySpec{cfg.theta, cfg.tau, cfg.norm};
        const bool tunable = kind == ModelKind::w_dropf || kind == ModelKind::m_dropf || kind == ModelKind::wm_dropf;
        if (tunable && cfg.tune) {
          TuneGrid g = cfg.grid;
          g.seed = derive_seed(cfg.seed, rho_index, rep, tune_stream);
          TuneOptions opt;
          opt.score = cfg.score;
          opt.norm = cfg.norm;
          opt.solver = cfg.solver;
          const TuneResult t = holdout_tune(risk, sh.screen.kept, tr.samples, g, kind, cfg.approx, opt);
          spec.ambiguity.theta = t.theta;
          spec.ambiguity.tau = t.tau;
        }
        if (kind == ModelKind::m_dropf) spec.ambiguity.theta = 0.0;
        if (kind == ModelKind::w_dropf) spec.ambiguity.tau = 1.0;
        if (!tunable) spec.ambiguity = AmbiguitySpec{0.0, 1.0, cfg.norm};
        const SolvedModel s = solve_model(risk, sh.screen.kept, tr.samples, spec, cfg.solver);
        r.theta = spec.ambiguity.theta;
        r.tau = spec.ambiguity.tau;
        r.dispatch_cost = dispatch_cost(grid, s.decision);
        r.op = out_of_sample_performance(risk, s.decision, te.samples);
        r.solve_time_s = s.solution.solve_time_s;
        r.status = to_string(s.solution.status);
        r.ok = true;
      } catch (const std::exception& e) {
        r.status = std::string("failed: ") + e.what();
      }
      rows.push_back(r);
    }
  }
  return rows;
}

}  // namespace

Report summarize(std::vector<ReportRow> rows) {
  Report report;
  std::set<std::pair<double, std::size_t>> failed;
  for (const auto& r : rows) {
    if (!r.ok) failed.emplace(r.rho, r.repetition);
  }
  report.failed_repetitions = failed.size();

  using Key = std::tuple<double, int, int>;
  std::map<Key, std::vector<const ReportRow*>> groups;
  std::vector<Key> order;
  for (const auto& r : rows) {
    const Key k{r.rho, static_cast<int>(r.dlr_mode), static_cast<int>(r.model)};
    if (!groups.count(k)) order.push_back(k);
    auto& g = groups[k];
    if (!failed.count({r.rho, r.repetition})) g.push_back(&r);
  }
  for (const auto& k : order) {
    const auto& g = groups[k];
    Aggregate a;
    a.rho = std::get<0>(k);
    a.dlr_mode = static_cast<DlrMode>(std::get<1>(k));
    a.model = static_cast<ModelKind>(std::get<2>(k));
    a.count = g.size();
    std::vector<double> dc, op, t;
    double th = 0.0, ta = 0.0;
    for (const ReportRow* r : g) {
      dc.push_back(r->dispatch_cost);
      op.push_back(r->op);
      t.push_back(r->solve_time_s);
      th += r->theta;
      ta += r->tau;
    }
    a.dispatch_cost = stats_of(dc);
    a.op = stats_of(op);
    a.solve_time_s = stats_of(t);
    if (!g.empty()) {
      a.theta_avg = th / static_cast<double>(g.size());
      a.tau_avg = ta / static_cast<double>(g.size());
    }
    report.aggregates.push_back(a);
  }
  report.rows = std::move(rows);
  return report;
}

Report run_experiment(const ExperimentConfig& config) {
  config.validate();
  Case grid = load_case(config.case_path.empty() ? bundled_case5_path() : config.case_path);
  PtdfMatrix ptdf = compute_ptdf(grid);
  ScreeningResult screen = screen_inactive_lines(grid, ptdf);
  UncertaintyIndex index(grid, screen.kept);
  const Shared shared{config, std::move(grid), std::move(ptdf), std::move(screen), std::move(index)};

  const std::size_t jobs = config.rho.size() * config.repetitions;
  std::vector<std::vector<ReportRow>> results(jobs);
  auto job = [&](std::size_t i) {
    results[i] = run_repetition(shared, i / config.repetitions, i % config.repetitions);
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(config.threads, static_cast<unsigned>(jobs)));
  if (workers == 1) {
    for (std::size_t i = 0; i < jobs; ++i) job(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < jobs; i = next++) job(i);
      });
    }
    for (auto& t : pool) t.join();
  }

  std::vector<ReportRow> rows;
  for (auto& r : results) rows.insert(rows.end(), r.begin(), r.end());
  return summarize(std::move(rows));
}

void write_report_csv(const std::filesystem::path& path, const Report& report, const std::string& header_comment) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << std::setprecision(12);
  if (!header_comment.empty()) out << "# " << header_comment << "\n";
  out << "repetition,model,dlr_mode,rho,N,theta,tau,dispatch_cost,op,solve_time_s,status\n";
  for (const auto& r : report.rows) {
    std::string status = r.status;
    std::replace(status.begin(), status.end(), ',', ';');
    std::replace(status.begin(), status.end(), '\n', ' ');
    out << r.repetition << "," << to_string(r.model) << "," << to_string(r.dlr_mode) << "," << r.rho << ","
        << r.n << "," << r.theta << "," << r.tau << ",";
    if (r.ok) {
      out << r.dispatch_cost << "," << r.op << "," << r.solve_time_s;
    } else {
      out << ",,";
    }
    out << "," << status << "\n";
  }
}

void write_report_table(const std::filesystem::path& path, const Report& report,
                        const std::string& header_comment) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  if (!header_comment.empty()) out << "# " << header_comment << "\n";
  out << std::fixed;
  const double* last_rho = nullptr;
  int last_mode = -1;
  for (const auto& a : report.aggregates) {
    if (!last_rho || *last_rho != a.rho || last_mode != static_cast<int>(a.dlr_mode)) {
      out << "\nrho = " << std::setprecision(2) << a.rho << ", " << to_string(a.dlr_mode) << "\n";
      out << std::left << std::setw(6) << "model" << std::right << std::setw(6) << "runs" << std::setw(12)
          << "DC avg" << std::setw(12) << "DC max" << std::setw(12) << "DC min" << std::setw(12) << "OP avg"
          << std::setw(12) << "OP max" << std::setw(12) << "OP min" << std::setw(10) << "time avg"
          << std::setw(9) << "theta" << std::setw(7) << "tau" << "\n";
      last_rho = &a.rho;
      last_mode = static_cast<int>(a.dlr_mode);
    }
    out << std::left << std::setw(6) << to_string(a.model) << std::right << std::setw(6) << a.count
        << std::setprecision(1) << std::setw(12) << a.dispatch_cost.avg << std::setw(12) << a.dispatch_cost.max
        << std::setw(12) << a.dispatch_cost.min << std::setw(12) << a.op.avg << std::setw(12) << a.op.max
        << std::setw(12) << a.op.min << std::setprecision(3) << std::setw(10) << a.solve_time_s.avg
        << std::setprecision(4) << std::setw(9) << a.theta_avg << std::setprecision(2) << std::setw(7) << a.tau_avg
        << "\n";
  }
  out << "\nfailed repetitions: " << report.failed_repetitions << "\n";
}

}  // namespace dropf
