#include "dropf/formulations.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace dropf {

const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::deterministic: return "det";
    case ModelKind::saa: return "saa";
    case ModelKind::w_dropf: return "w";
    case ModelKind::m_dropf: return "m";
    case ModelKind::wm_dropf: return "wm";
  }
  return "?";
}

const char* to_string(GroundNorm n) {
  switch (n) {
    case GroundNorm::l1: return "l1";
    case GroundNorm::l2: return "l2";
    case GroundNorm::linf: return "linf";
  }
  return "?";
}

ModelKind parse_model(const std::string& s) {
  if (s == "det" || s == "deterministic") return ModelKind::deterministic;
  if (s == "saa") return ModelKind::saa;
  if (s == "w" || s == "w_dropf") return ModelKind::w_dropf;
  if (s == "m" || s == "m_dropf") return ModelKind::m_dropf;
  if (s == "wm" || s == "wm_dropf") return ModelKind::wm_dropf;
  throw std::invalid_argument("unknown model '" + s + "' (det|saa|w|m|wm)");
}

GroundNorm parse_norm(const std::string& s) {
  if (s == "l1") return GroundNorm::l1;
  if (s == "l2") return GroundNorm::l2;
  if (s == "linf") return GroundNorm::linf;
  throw std::invalid_argument("unknown norm '" + s + "' (l1|l2|linf)");
}

void ModelSpec::validate() const {
  if (!(ambiguity.theta >= 0.0)) throw std::invalid_argument("theta must be >= 0");
  if (!(ambiguity.tau >= 1.0)) throw std::invalid_argument("tau must be >= 1");
}

ModelCounts expected_counts(ModelKind kind, ApproxMode approx, std::uint64_t n, std::uint64_t g,
                            std::uint64_t l, std::uint64_t w) {
  const std::uint64_t d = l + w;
  // Only evaluated by the modes that use them; both overflow on large cases.
  const auto k = [&] { return piece_count(g, l); };
  const auto grouped = [&] { return checked_pow(2, g + 1) + checked_pow(3, l); };
  const std::uint64_t sep_pieces = 4 * g + 3 * l;
  const std::uint64_t sep_families = 2 * g + l;
  ModelCounts c;
  switch (kind) {
    case ModelKind::deterministic:
      break;
    case ModelKind::saa:
      c.variables = 2 * n * g + n * l;
      c.linear = 4 * n * g + 3 * n * l;
      break;
    case ModelKind::w_dropf:
      switch (approx) {
        case ApproxMode::exact:
          c.variables = n + 1;
          c.linear = checked_mul(n, k()) + 2 * g + 2 * l + 1;
          break;
        case ApproxMode::grouped:
          c.variables = 3 * n + 3;
          c.linear = checked_mul(grouped(), n) + 6 * g + 6 * l;
          break;
        case ApproxMode::separable:
          c.variables = sep_families * (n + 1);
          c.linear = sep_pieces * n + 2 * g + 2 * l;
          break;
      }
      break;
    case ModelKind::m_dropf: {
      const std::uint64_t block = d * d + d + 1;
      switch (approx) {
        case ApproxMode::exact:
          c.variables = block;
          c.psd = k() + 1;
          break;
        case ApproxMode::grouped:
          c.variables = 3 * block;
          c.psd = grouped() + 3;
          break;
        case ApproxMode::separable:
          c.variables = block * sep_families;
          c.psd = 6 * g + 4 * l;
          break;
      }
      break;
    }
    case ModelKind::wm_dropf:
      switch (approx) {
        case ApproxMode::exact:
          c.variables = checked_mul(checked_mul(d, n), k()) + n + 2;
          c.psd = checked_mul(n, k()) + 1;
          c.linear = c.psd;
          break;
        case ApproxMode::grouped:
          c.variables = checked_mul(checked_mul(d, grouped()), n) + 3 * n + 6;
          c.psd = checked_mul(grouped(), n) + 3;
          c.linear = c.psd;
          break;
        case ApproxMode::separable:
          c.variables = (n + 2) * sep_families + d * sep_pieces * n;
          c.psd = sep_pieces * n + sep_families;
          c.linear = c.psd;
          break;
      }
      break;
  }
  return c;
}

namespace {

AffineExpr to_expr(const LinearForm& f) {
  AffineExpr e(f.constant);
  e.terms = f.terms;
  return e;
}

// a(x)' xi + b(x) at a fixed xi.
AffineExpr piece_at(const SymbolicPiece& piece, const Eigen::VectorXd& xi) {
  AffineExpr e = to_expr(piece.b);
  for (std::size_t i = 0; i < piece.a.size(); ++i) {
    const double v = xi(static_cast<Eigen::Index>(i));
    if (v == 0.0) continue;
    for (const auto& [var, c] : piece.a[i].terms) e.add(var, c * v);
    e.constant += piece.a[i].constant * v;
  }
  return e;
}

class Builder {
 public:
  Builder(const RiskModel& risk, BuildOptions opt) : risk_(risk), opt_(opt) {
    out_.materialized = opt.materialize;
  }

  ConicProgram& prog() { return out_.program; }
  bool live() const { return opt_.materialize; }
  ModelCounts& counts() { return out_.counts; }

  // Shared decision block: p, and (r_up, r_dn, alpha) when with_recourse.
  void decision_block(const std::vector<std::size_t>& kept_lines, bool with_recourse) {
    const Case& c = risk_.grid();
    const DecisionLayout& lay = risk_.layout();
    const std::size_t n = with_recourse ? lay.size() : lay.generator_count();
    out_.decision_size = n;
    if (!live()) return;
    prog().add_variables(n);

    AffineExpr balance(c.total_wind_forecast() - c.total_demand());
    for (std::size_t g = 0; g < c.generators.size(); ++g) {
      const auto& gen = c.generators[g];
      const std::size_t p = lay.p(g);
      prog().add_quadratic_cost(p, p, gen.cost.c2);
      prog().add_linear_cost(p, gen.cost.c1);
      prog().add_constant_cost(gen.cost.c0);
      balance.add(p, 1.0);
      prog().add_inequality(AffineExpr::var(p) - AffineExpr(gen.p_min));
      prog().add_inequality(AffineExpr(gen.p_max) - AffineExpr::var(p));
    }
    prog().add_equality(balance);

    const PtdfMatrix& ptdf = risk_.ptdf();
    for (std::size_t l : kept_lines) {
      AffineExpr flow;
      for (std::size_t g = 0; g < c.generators.size(); ++g) flow.add(lay.p(g), ptdf.generator(l, g));
      for (std::size_t w = 0; w < c.wind_farms.size(); ++w) flow.constant += ptdf.wind(l, w) * c.wind_farms[w].forecast;
      for (std::size_t d = 0; d < c.loads.size(); ++d) flow.constant -= ptdf.load(l, d) * c.loads[d].demand;
      const double rating = c.lines[l].forecast_rating;
      prog().add_inequality(AffineExpr(rating) - flow);
      prog().add_inequality(AffineExpr(rating) + flow);
    }

    if (!with_recourse) return;
    AffineExpr alpha_sum(-1.0);
    for (std::size_t a = 0; a < lay.agc_count(); ++a) {
      const auto& gen = c.generators[lay.agc_generator(a)];
      const std::size_t p = lay.p(lay.agc_generator(a));
      const std::size_t up = lay.r_up(a), dn = lay.r_dn(a), al = lay.alpha(a);
      prog().add_quadratic_cost(up, up, gen.cost_up.c2);
      prog().add_linear_cost(up, gen.cost_up.c1);
      prog().add_constant_cost(gen.cost_up.c0);
      prog().add_quadratic_cost(dn, dn, gen.cost_down.c2);
      prog().add_linear_cost(dn, gen.cost_down.c1);
      prog().add_constant_cost(gen.cost_down.c0);
      prog().add_inequality(AffineExpr::var(up));
      prog().add_inequality(AffineExpr(gen.p_max) - AffineExpr::var(p) - AffineExpr::var(up));
      prog().add_inequality(AffineExpr::var(dn));
      prog().add_inequality(AffineExpr::var(p) - AffineExpr(gen.p_min) - AffineExpr::var(dn));
      prog().add_inequality(AffineExpr::var(al));
      prog().add_inequality(AffineExpr(1.0) - AffineExpr::var(al));
      alpha_sum.add(al, 1.0);
    }
    if (lay.agc_count() > 0) prog().add_equality(alpha_sum);
  }

  // Refuses models whose pieces x replicas exceed the cap.
  std::vector<std::uint64_t> sizes_within_cap(ApproxMode mode, std::uint64_t replicas) {
    std::vector<std::uint64_t> sizes;
    std::uint64_t total = 0;
    try {
      sizes = risk_.family_sizes(mode);
      for (auto s : sizes) total += checked_mul(s, std::max<std::uint64_t>(replicas, 1));
    } catch (const std::overflow_error&) {
      total = std::numeric_limits<std::uint64_t>::max();
    }
    if (total > opt_.piece_cap) {
      std::ostringstream msg;
      msg << to_string(mode) << " mode needs ";
      if (total == std::numeric_limits<std::uint64_t>::max()) {
        msg << "more than 2^63";
      } else {
        msg << total;
      }
      msg << " piece constraints (pieces x samples), above the cap of " << opt_.piece_cap
          << "; use --approx grouped or --approx separable";
      throw ModelTooLarge(msg.str());
    }
    return sizes;
  }

  std::vector<PieceFamily> families(ApproxMode mode) {
    return live() ? risk_.families(mode) : std::vector<PieceFamily>{};
  }

  // Nonzero component pieces, one list per separable family.
  std::vector<std::vector<SymbolicPiece>> components() {
    std::vector<std::vector<SymbolicPiece>> out;
    for (auto& f : risk_.families(ApproxMode::separable)) {
      f.pieces.pop_back();  // trailing zero piece
      out.push_back(std::move(f.pieces));
    }
    return out;
  }

  // lambda >= ||v||_* for the dual of `ground`.
  void dual_norm_bound(const AffineExpr& lambda, const std::vector<AffineExpr>& v, GroundNorm ground) {
    ++counts().linear;
    if (!live()) return;
    switch (ground) {
      case GroundNorm::l2: {
        SocConstraint soc;
        soc.t = lambda;
        soc.u = v;
        prog().add_soc(std::move(soc));
        break;
      }
      case GroundNorm::l1:  // dual is the max-norm
        for (const auto& e : v) {
          prog().add_inequality(lambda - e);
          prog().add_inequality(lambda + e);
        }
        break;
      case GroundNorm::linf: {  // dual is the 1-norm, split by sign
        AffineExpr bound = lambda;
        const std::size_t u = prog().add_variables(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
          prog().add_inequality(AffineExpr::var(u + i) - v[i]);
          prog().add_inequality(AffineExpr::var(u + i) + v[i]);
          bound.add(u + i, -1.0);
        }
        prog().add_inequality(bound);
        break;
      }
    }
  }

  AffineExpr trace_with(const SymmetricBlock& gamma, const Eigen::MatrixXd& sigma) {
    AffineExpr e;
    for (std::size_t j = 0; j < gamma.dim; ++j) {
      for (std::size_t i = j; i < gamma.dim; ++i) {
        const double s = sigma(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        e.add(gamma.at(i, j), i == j ? s : 2.0 * s);
      }
    }
    return e;
  }

  void psd_block(const SymmetricBlock& gamma) {
    ++counts().psd;
    if (!live()) return;
    PsdConstraint c(gamma.dim);
    for (std::size_t j = 0; j < gamma.dim; ++j) {
      for (std::size_t i = j; i < gamma.dim; ++i) c.at(i, j) = AffineExpr::var(gamma.at(i, j));
    }
    prog().add_psd(std::move(c));
  }

  void add_objective(const AffineExpr& e, bool risk_part) {
    if (!live()) return;
    for (const auto& [v, c] : e.terms) prog().add_linear_cost(v, c);
    prog().add_constant_cost(e.constant);
    if (risk_part) out_.risk_bound += e;
  }

  BuiltModel finish(const ModelSpec& spec, std::size_t samples) {
    out_.spec = spec;
    out_.samples = samples;
    if (live()) {
      out_.program_class = out_.program.classify();
      const std::size_t aux = out_.program.variable_count() - out_.decision_size;
      if (aux > 0) out_.program.set_scale(out_.decision_size, aux, opt_.aux_scale);
    }
    return std::move(out_);
  }

  const RiskModel& risk_;
  BuildOptions opt_;
  BuiltModel out_;
};

void require_samples(const RiskModel& risk, const Eigen::MatrixXd& samples) {
  if (samples.rows() < 1) throw std::invalid_argument("at least one sample is required");
  if (static_cast<std::size_t>(samples.cols()) != risk.dim()) {
    throw std::invalid_argument("sample dimension does not match the uncertainty layout");
  }
}

}  // namespace

BuiltModel build_deterministic(const RiskModel& risk, const std::vector<std::size_t>& kept_lines,
                               BuildOptions opt) {
  Builder b(risk, opt);
  b.decision_block(kept_lines, false);
  ModelSpec spec;
  spec.kind = ModelKind::deterministic;
  return b.finish(spec, 0);
}

BuiltModel build_saa(const RiskModel& risk, const std::vector<std::size_t>& kept_lines,
                     const Eigen::MatrixXd& samples, BuildOptions opt) {
  require_samples(risk, samples);
  const auto n = static_cast<std::size_t>(samples.rows());
  Builder b(risk, opt);
  b.decision_block(kept_lines, true);
  const auto sizes = b.sizes_within_cap(ApproxMode::separable, n);
  const auto fams = b.families(ApproxMode::separable);
  const double inv_n = 1.0 / static_cast<double>(n);

  // One epigraph variable per hinge and sample; the zero piece gives s >= 0.
  for (std::size_t f = 0; f < sizes.size(); ++f) {
    for (std::size_t s = 0; s < n; ++s) {
      ++b.counts().variables;
      b.counts().linear += sizes[f];
      if (!b.live()) continue;
      const std::size_t t = b.prog().add_variable();
      const Eigen::VectorXd xi = samples.row(static_cast<Eigen::Index>(s)).transpose();
      for (const auto& piece : fams[f].pieces) {
        b.prog().add_inequality(AffineExpr::var(t) - piece_at(piece, xi));
      }
      b.add_objective(AffineExpr::var(t, inv_n), true);
    }
  }
  ModelSpec spec;
  spec.kind = ModelKind::saa;
  spec.approx = ApproxMode::separable;
  return b.finish(spec, n);
}

BuiltModel build_w_dropf(const RiskModel& risk, const std::vector<std::size_t>& kept_lines,
                         const Eigen::MatrixXd& samples, const AmbiguitySpec& amb, ApproxMode approx,
                         BuildOptions opt) {
  require_samples(risk, samples);
  ModelSpec spec{ModelKind::w_dropf, approx, amb};
  spec.validate();
  const auto n = static_cast<std::size_t>(samples.rows());
  Builder b(risk, opt);
  b.decision_block(kept_lines, true);
  const auto sizes = b.sizes_within_cap(approx, n);
  const auto fams = b.families(approx);
  const auto comps = b.components();
  const double inv_n = 1.0 / static_cast<double>(n);

  for (std::size_t f = 0; f < sizes.size(); ++f) {
    b.counts().variables += 1 + n;
    std::size_t lambda = 0, y = 0;
    if (b.live()) {
      lambda = b.prog().add_variable();
      y = b.prog().add_variables(n);
      AffineExpr obj = AffineExpr::var(lambda, amb.theta);
      for (std::size_t s = 0; s < n; ++s) obj.add(y + s, inv_n);
      b.add_objective(obj, true);
    }
    if (approx == ApproxMode::exact) {
      ++b.counts().linear;
      if (b.live()) b.prog().add_inequality(AffineExpr::var(lambda));
    }

    b.counts().linear += sizes[f] * n;
    if (b.live()) {
      for (std::size_t s = 0; s < n; ++s) {
        const Eigen::VectorXd xi = samples.row(static_cast<Eigen::Index>(s)).transpose();
        for (const auto& piece : fams[f].pieces) {
          b.prog().add_inequality(AffineExpr::var(y + s) - piece_at(piece, xi));
        }
      }
    }

    // Dual-norm bounds on component gradients: every component for the
    // exact and grouped forms, the family's own pieces when separable.
    auto bound = [&](const SymbolicPiece& piece) {
      std::vector<AffineExpr> grad;
      for (const auto& form : piece.a) grad.push_back(to_expr(form));
      b.dual_norm_bound(AffineExpr::var(lambda), grad, amb.norm);
    };
    if (approx == ApproxMode::separable) {
      for (const auto& piece : comps[f]) bound(piece);
    } else {
      for (const auto& list : comps) {
        for (const auto& piece : list) bound(piece);
      }
    }
  }
  return b.finish(spec, n);
}

BuiltModel build_m_dropf(const RiskModel& risk, const std::vector<std::size_t>& kept_lines,
                         const EmpiricalMoments& moments, double tau, ApproxMode approx,
                         BuildOptions opt) {
  ModelSpec spec;
  spec.kind = ModelKind::m_dropf;
  spec.approx = approx;
  spec.ambiguity.tau = tau;
  spec.validate();
  const std::size_t d = risk.dim();
  if (static_cast<std::size_t>(moments.mean.size()) != d) {
    throw std::invalid_argument("moment dimension does not match the uncertainty layout");
  }
  Builder b(risk, opt);
  b.decision_block(kept_lines, true);
  const auto sizes = b.sizes_within_cap(approx, 1);
  const auto fams = b.families(approx);

  for (std::size_t f = 0; f < sizes.size(); ++f) {
    b.counts().variables += d * d + d + 1;
    SymmetricBlock gamma;
    std::size_t zeta = 0, lambda = 0;
    if (b.live()) {
      gamma = b.prog().add_symmetric(d);
      zeta = b.prog().add_variables(d);
      lambda = b.prog().add_variable();
      AffineExpr obj = tau * b.trace_with(gamma, moments.covariance);
      obj.add(lambda, 1.0);
      b.add_objective(obj, true);
    }
    b.psd_block(gamma);

    // Centered at the mean: [[Gamma, (zeta - a)/2], [., lambda - b - a'm]] >= 0
    // per piece. Shifting xi by m maps (zeta, lambda) one-to-one onto the
    // uncentered multipliers and keeps the mean out of the matrix entries.
    b.counts().psd += sizes[f];
    if (!b.live()) continue;
    for (const auto& piece : fams[f].pieces) {
      PsdConstraint c(d + 1);
      for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t i = j; i < d; ++i) c.at(i, j) = AffineExpr::var(gamma.at(i, j));
        c.at(d, j) = 0.5 * (AffineExpr::var(zeta + j) - to_expr(piece.a[j]));
      }
      c.at(d, d) = AffineExpr::var(lambda) - piece_at(piece, moments.mean);
      b.prog().add_psd(std::move(c));
    }
  }
  return b.finish(spec, moments.n);
}

BuiltModel build_wm_dropf(const RiskModel& risk, const std::vector<std::size_t>& kept_lines,
                          const Eigen::MatrixXd& samples, const AmbiguitySpec& amb, ApproxMode approx,
                          BuildOptions opt) {
  require_samples(risk, samples);
  ModelSpec spec{ModelKind::wm_dropf, approx, amb};
  spec.validate();
  const auto n = static_cast<std::size_t>(samples.rows());
  const std::size_t d = risk.dim();
  const EmpiricalMoments moments = empirical_moments(samples);
  const Eigen::VectorXd& m = moments.mean;
  Builder b(risk, opt);
  b.decision_block(kept_lines, true);
  const auto sizes = b.sizes_within_cap(approx, n);
  const auto fams = b.families(approx);
  const double inv_n = 1.0 / static_cast<double>(n);

  for (std::size_t f = 0; f < sizes.size(); ++f) {
    b.counts().variables += 2 + n;
    std::size_t lambda = 0, y = 0;
    SymmetricBlock gamma;
    if (b.live()) {
      lambda = b.prog().add_variable();
      gamma = b.prog().add_symmetric(d);
      y = b.prog().add_variables(n);
      AffineExpr obj = AffineExpr::var(lambda, amb.theta);
      obj += amb.tau * b.trace_with(gamma, moments.covariance);
      for (std::size_t s = 0; s < n; ++s) obj.add(y + s, inv_n);
      b.add_objective(obj, true);
      b.prog().add_inequality(AffineExpr::var(lambda));
    }
    ++b.counts().linear;  // lambda >= 0
    b.psd_block(gamma);

    for (std::size_t s = 0; s < n; ++s) {
      const Eigen::VectorXd xi = b.live() ? Eigen::VectorXd(samples.row(static_cast<Eigen::Index>(s)).transpose())
                                          : Eigen::VectorXd();
      for (std::uint64_t k = 0; k < sizes[f]; ++k) {
        b.counts().variables += d;
        ++b.counts().psd;
        std::size_t zeta = 0;
        if (b.live()) {
          const SymbolicPiece& piece = fams[f].pieces[k];
          zeta = b.prog().add_variables(d);
          // [[Gamma, (zeta - a)/2], [., y - b - a'm + zeta'(m - xi)]] >= 0, the
          // quadratic-in-xi condition written in xi - m.
          PsdConstraint c(d + 1);
          AffineExpr corner = AffineExpr::var(y + s) - piece_at(piece, m);
          for (std::size_t j = 0; j < d; ++j) {
            for (std::size_t i = j; i < d; ++i) c.at(i, j) = AffineExpr::var(gamma.at(i, j));
            c.at(d, j) = 0.5 * (AffineExpr::var(zeta + j) - to_expr(piece.a[j]));
            const auto jj = static_cast<Eigen::Index>(j);
            corner.add(zeta + j, m(jj) - xi(jj));
          }
          c.at(d, d) = std::move(corner);
          b.prog().add_psd(std::move(c));
        }
        std::vector<AffineExpr> zv;
        if (b.live()) {
          for (std::size_t i = 0; i < d; ++i) zv.push_back(AffineExpr::var(zeta + i));
        }
        b.dual_norm_bound(AffineExpr::var(lambda), zv, amb.norm);
      }
    }
  }
  return b.finish(spec, n);
}

BuiltModel build_model(const RiskModel& risk, const std::vector<std::size_t>& kept_lines,
                       const Eigen::MatrixXd& samples, const ModelSpec& spec, BuildOptions opt) {
  switch (spec.kind) {
    case ModelKind::deterministic: return build_deterministic(risk, kept_lines, opt);
    case ModelKind::saa: return build_saa(risk, kept_lines, samples, opt);
    case ModelKind::w_dropf:
      return build_w_dropf(risk, kept_lines, samples, spec.ambiguity, spec.approx, opt);
    case ModelKind::m_dropf: {
      require_samples(risk, samples);
      return build_m_dropf(risk, kept_lines, empirical_moments(samples), spec.ambiguity.tau,
                           spec.approx, opt);
    }
    case ModelKind::wm_dropf:
      return build_wm_dropf(risk, kept_lines, samples, spec.ambiguity, spec.approx, opt);
  }
  throw std::logic_error("unhandled model kind");
}

DispatchDecision extract_decision(const BuiltModel& model, const RiskModel& risk,
                                  const Solution& solution, double tol, bool accept_reduced) {
  if (!model.materialized) throw ExtractionError("model was built in count-only mode");
  const bool usable = solution.status == SolveStatus::optimal ||
                      (accept_reduced && solution.status == SolveStatus::reduced_accuracy);
  if (!usable) {
    throw ExtractionError(std::string("solve ended ") + to_string(solution.status) + ": " +
                          solution.message);
  }
  if (solution.residuals.relative > tol) {
    std::ostringstream msg;
    msg << "relative residual " << solution.residuals.relative << " exceeds tolerance " << tol;
    throw ExtractionError(msg.str());
  }
  const Case& c = risk.grid();
  const DecisionLayout& lay = risk.layout();
  DispatchDecision d;
  const std::size_t g_count = c.generators.size();
  d.p.assign(g_count, 0.0);
  d.r_up.assign(g_count, 0.0);
  d.r_dn.assign(g_count, 0.0);
  d.alpha.assign(g_count, 0.0);
  for (std::size_t g = 0; g < g_count; ++g) d.p[g] = solution.x(static_cast<Eigen::Index>(lay.p(g)));

  if (model.spec.kind == ModelKind::deterministic) {
    // No recourse in the base problem: equal participation, no reserves.
    for (std::size_t a = 0; a < lay.agc_count(); ++a) {
      d.alpha[lay.agc_generator(a)] = 1.0 / static_cast<double>(lay.agc_count());
    }
  } else {
    constexpr double snap = 1e-7;
    double sum = 0.0;
    for (std::size_t a = 0; a < lay.agc_count(); ++a) {
      const std::size_t g = lay.agc_generator(a);
      d.r_up[g] = solution.x(static_cast<Eigen::Index>(lay.r_up(a)));
      d.r_dn[g] = solution.x(static_cast<Eigen::Index>(lay.r_dn(a)));
      double al = solution.x(static_cast<Eigen::Index>(lay.alpha(a)));
      if (al < 0.0 && al > -snap) al = 0.0;
      if (al > 1.0 && al < 1.0 + snap) al = 1.0;
      d.alpha[g] = al;
      sum += al;
    }
    if (lay.agc_count() > 0 && std::abs(sum - 1.0) <= snap && sum > 0.0) {
      for (std::size_t g : lay.agc()) d.alpha[g] /= sum;
    }
  }
  d.model = to_string(model.spec.kind);
  const double violation = decision_violation(c, d);
  if (violation > tol) {
    std::ostringstream msg;
    msg << "extracted decision violates its constraints by " << violation;
    throw ExtractionError(msg.str());
  }
  return d;
}

SolvedModel solve_model(const RiskModel& risk, const std::vector<std::size_t>& kept_lines,
                        const Eigen::MatrixXd& samples, const ModelSpec& spec,
                        const SolverSettings& settings, BuildOptions opt) {
  SolvedModel out;
  opt.materialize = true;
  out.model = build_model(risk, kept_lines, samples, spec, opt);
  out.solution = default_solver().solve(out.model.program, settings);
  out.decision = extract_decision(out.model, risk, out.solution, 1e-5, settings.accept_reduced_accuracy);
  out.risk_bound = out.model.risk_bound.value(out.solution.x);
  return out;
}

nlohmann::ordered_json decision_json(const SolvedModel& solved, const Case& c) {
  nlohmann::ordered_json j;
  const auto& spec = solved.model.spec;
  j["model"] = to_string(spec.kind);
  j["approx"] = to_string(spec.approx);
  j["theta"] = spec.ambiguity.theta;
  j["tau"] = spec.ambiguity.tau;
  j["norm"] = to_string(spec.ambiguity.norm);
  auto per_gen = [&](const std::vector<double>& v) {
    nlohmann::ordered_json o = nlohmann::ordered_json::object();
    for (std::size_t g = 0; g < c.generators.size(); ++g) o[c.generators[g].id] = v[g];
    return o;
  };
  j["p"] = per_gen(solved.decision.p);
  j["r_up"] = per_gen(solved.decision.r_up);
  j["r_dn"] = per_gen(solved.decision.r_dn);
  j["alpha"] = per_gen(solved.decision.alpha);
  j["objective"] = solved.solution.objective;
  j["dispatch_cost"] = dispatch_cost(c, solved.decision);
  j["risk_bound"] = solved.risk_bound;
  j["status"] = to_string(solved.solution.status);
  j["solve_time_s"] = solved.solution.solve_time_s;
  j["program_class"] = to_string(solved.model.program_class);
  j["samples"] = solved.model.samples;
  j["counts"] = {{"variables", solved.model.counts.variables},
                 {"psd", solved.model.counts.psd},
                 {"linear", solved.model.counts.linear}};
  return j;
}

}  // namespace dropf
