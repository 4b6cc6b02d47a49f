#include "commands.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "dropf/evaluation.hpp"
#include "dropf/provenance.hpp"
#include "dropf/sample_io.hpp"
#include "dropf/screening.hpp"
#include "dropf/tuning.hpp"

namespace dropf::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

Case load(const std::string& path) { return load_case(path.empty() ? bundled_case5_path() : fs::path(path)); }

void emit(const ordered_json& j, const std::string& out) {
  if (out.empty()) {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream f(out);
  if (!f) throw std::runtime_error("cannot write " + out);
  f << j.dump(2) << "\n";
}

SolverSettings solver_settings(const Globals& g) {
  SolverSettings s;
  s.feasibility_tol = g.tol;
  return s;
}

// Maps the library's exception types onto exit codes.
template <class F>
int guarded(const char* command, F&& body) {
  try {
    return body();
  } catch (const ExtractionError& e) {
    std::cerr << command << ": solver failure: " << e.what() << "\n";
    return solver_error;
  } catch (const TuningError& e) {
    std::cerr << command << ": solver failure: " << e.what() << "\n";
    return solver_error;
  } catch (const ModelTooLarge& e) {
    std::cerr << command << ": " << e.what() << "\n";
    return input_error;
  } catch (const CaseError& e) {
    std::cerr << command << ": data error: " << e.what() << "\n";
    return input_error;
  } catch (const ConfigError& e) {
    std::cerr << command << ": config error: " << e.what() << "\n";
    return input_error;
  } catch (const std::exception& e) {
    std::cerr << command << ": " << e.what() << "\n";
    return input_error;
  }
}

struct Grid {
  Case grid;
  PtdfMatrix ptdf;
  ScreeningResult screen;
  UncertaintyIndex index;
};

Grid prepare(const std::string& case_path) {
  Grid g{load(case_path), {}, {}, {}};
  g.ptdf = compute_ptdf(g.grid);
  g.screen = screen_inactive_lines(g.grid, g.ptdf);
  g.index = UncertaintyIndex(g.grid, g.screen.kept);
  return g;
}

}  // namespace

int cmd_screen(const Globals& g, const ScreenArgs& a) {
  return guarded("screen", [&] {
    const Grid p = prepare(a.case_path);
    ordered_json j;
    j["provenance"] = to_json(make_provenance(p.grid, g.seed, "screen"));
    j["kept"] = p.screen.kept_ids(p.grid);
    std::vector<std::string> dropped;
    for (std::size_t l : p.screen.dropped) dropped.push_back(p.grid.lines[l].id);
    j["dropped"] = dropped;
    ordered_json ranges = ordered_json::array();
    for (std::size_t l = 0; l < p.grid.lines.size(); ++l) {
      ranges.push_back({{"line", p.grid.lines[l].id},
                        {"min_flow", p.screen.ranges[l].min},
                        {"max_flow", p.screen.ranges[l].max},
                        {"static_rating", p.grid.lines[l].static_rating}});
    }
    j["flow_ranges"] = ranges;
    emit(j, a.out);
    return static_cast<int>(ok);
  });
}

int cmd_sample(const Globals& g, const SampleArgs& a) {
  return guarded("sample", [&] {
    const Grid p = prepare(a.case_path);
    const std::uint64_t std_seed = a.std_seed != 0 ? a.std_seed : derive_seed(g.seed, 0, 0, 0);
    const SampleSpec spec = make_sample_spec(p.grid, p.index, a.rho, g.seed, std_seed);
    SampleSet set = generate_samples(p.grid, p.index, spec, a.n);
    if (a.slr) freeze_line_ratings(p.grid, set);
    write_samples(a.out, set, p.grid);
    std::cerr << "wrote " << set.count() << " samples to " << a.out << "\n";
    return static_cast<int>(ok);
  });
}

int cmd_solve(const Globals& g, const SolveArgs& a) {
  return guarded("solve", [&] {
    const Grid p = prepare(a.case_path);
    ModelSpec spec;
    spec.kind = parse_model(a.model);
    spec.approx = parse_approx(a.approx);
    spec.ambiguity = AmbiguitySpec{a.theta, a.tau, parse_norm(a.norm)};
    spec.validate();

    Eigen::MatrixXd samples;
    if (spec.kind != ModelKind::deterministic) {
      if (a.samples.empty()) throw std::invalid_argument("--samples is required for model " + a.model);
      samples = read_samples(a.samples, p.index).samples;
    }
    const Case grid = a.slr ? with_static_ratings(p.grid) : p.grid;
    const RiskModel risk(grid, p.ptdf, p.index, PenaltyWeights{});

    ordered_json j;
    j["provenance"] = to_json(make_provenance(p.grid, g.seed, "solve"));
    if (a.count_only) {
      BuildOptions opt;
      opt.materialize = false;
      const BuiltModel m = build_model(risk, p.screen.kept, samples, spec, opt);
      j["model"] = to_string(spec.kind);
      j["approx"] = to_string(spec.approx);
      j["samples"] = m.samples;
      j["counts"] = {{"variables", m.counts.variables}, {"psd", m.counts.psd}, {"linear", m.counts.linear}};
      emit(j, a.out);
      return static_cast<int>(ok);
    }

    const BuiltModel model = build_model(risk, p.screen.kept, samples, spec);
    if (!a.dump_program.empty()) model.program.dump(a.dump_program);
    SolvedModel solved;
    solved.model = model;
    solved.solution = default_solver().solve(model.program, solver_settings(g));
    solved.decision = extract_decision(solved.model, risk, solved.solution, 1e-5, true);
    solved.risk_bound = model.risk_bound.value(solved.solution.x);
    j.update(decision_json(solved, grid));
    if (spec.kind != ModelKind::deterministic) j["in_sample_risk"] = risk.mean_risk(solved.decision, samples);
    j["solver"] = default_solver().name();
    j["iterations"] = solved.solution.iterations;
    emit(j, a.out);
    return static_cast<int>(ok);
  });
}

int cmd_tune(const Globals& g, const TuneArgs& a) {
  return guarded("tune", [&] {
    const Grid p = prepare(a.case_path);
    TuneGrid grid = a.grid_fine ? TuneGrid::fine() : TuneGrid::coarse();
    if (!a.theta_values.empty()) grid.theta_values = a.theta_values;
    if (!a.tau_values.empty()) grid.tau_values = a.tau_values;
    grid.split_fraction = a.split;
    grid.seed = g.seed;

    const Eigen::MatrixXd samples = read_samples(a.samples, p.index).samples;
    const Case case_used = a.slr ? with_static_ratings(p.grid) : p.grid;
    const RiskModel risk(case_used, p.ptdf, p.index, PenaltyWeights{});
    TuneOptions opt;
    opt.score = parse_score(a.score);
    opt.norm = parse_norm(a.norm);
    opt.solver = solver_settings(g);
    opt.threads = g.threads;
    const ModelKind kind = parse_model(a.model);
    const TuneResult r = holdout_tune(risk, p.screen.kept, samples, grid, kind, parse_approx(a.approx), opt);

    const Provenance prov = make_provenance(p.grid, g.seed, "tune");
    if (!a.report.empty()) write_tune_report(a.report, r, summary_line(prov));
    ordered_json j;
    j["provenance"] = to_json(prov);
    j["model"] = to_string(kind);
    j["approx"] = a.approx;
    j["score"] = to_string(opt.score);
    j["theta"] = r.theta;
    j["tau"] = r.tau;
    j["grid_points"] = r.points.size();
    j["failed_points"] = r.failures;
    j["train_rows"] = r.train_rows;
    j["validation_rows"] = r.validation_rows;
    emit(j, a.out);
    return static_cast<int>(ok);
  });
}

int cmd_experiment(const Globals& g, const ExperimentArgs& a) {
  return guarded("experiment", [&] {
    std::ifstream in(a.config);
    if (!in) throw std::invalid_argument("cannot open config file " + a.config);
    nlohmann::json doc;
    try {
      in >> doc;
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(a.config, e.what());
    }
    ExperimentConfig cfg = ExperimentConfig::from_json(doc);
    if (!doc.contains("seed")) cfg.seed = g.seed;
    if (!doc.contains("threads")) cfg.threads = g.threads;
    if (!doc.contains("solver")) cfg.solver.feasibility_tol = g.tol;

    const Case grid = load_case(cfg.case_path.empty() ? bundled_case5_path() : cfg.case_path);
    const Report report = run_experiment(cfg);

    fs::create_directories(a.out_dir);
    const Provenance prov = make_provenance(grid, cfg.seed, "experiment");
    const std::string line = summary_line(prov);
    write_report_csv(fs::path(a.out_dir) / "report.csv", report, line);
    write_report_table(fs::path(a.out_dir) / "report.txt", report, line);
    ordered_json meta;
    meta["provenance"] = to_json(prov);
    meta["config"] = cfg.to_json();
    meta["rows"] = report.rows.size();
    meta["failed_repetitions"] = report.failed_repetitions;
    emit(meta, (fs::path(a.out_dir) / "run.json").string());
    std::cerr << "wrote " << report.rows.size() << " rows to " << a.out_dir << " (" << report.failed_repetitions
              << " failed repetitions)\n";
    return static_cast<int>(ok);
  });
}

}  // namespace dropf::cli
