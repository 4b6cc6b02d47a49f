#include "dropf/risk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace dropf {

DecisionLayout::DecisionLayout(const Case& c)
    : n_gen_(c.generators.size()), agc_(c.agc_generators()) {}

Eigen::VectorXd DispatchDecision::to_vector(const DecisionLayout& layout) const {
  Eigen::VectorXd x(static_cast<Eigen::Index>(layout.size()));
  for (std::size_t g = 0; g < layout.generator_count(); ++g) x(static_cast<Eigen::Index>(layout.p(g))) = p[g];
  for (std::size_t a = 0; a < layout.agc_count(); ++a) {
    const std::size_t g = layout.agc_generator(a);
    x(static_cast<Eigen::Index>(layout.r_up(a))) = r_up[g];
    x(static_cast<Eigen::Index>(layout.r_dn(a))) = r_dn[g];
    x(static_cast<Eigen::Index>(layout.alpha(a))) = alpha[g];
  }
  return x;
}

DispatchDecision DispatchDecision::from_vector(const DecisionLayout& layout, const Eigen::VectorXd& x) {
  const std::size_t n = layout.generator_count();
  DispatchDecision d;
  d.p.assign(n, 0.0);
  d.r_up.assign(n, 0.0);
  d.r_dn.assign(n, 0.0);
  d.alpha.assign(n, 0.0);
  for (std::size_t g = 0; g < n; ++g) d.p[g] = x(static_cast<Eigen::Index>(layout.p(g)));
  for (std::size_t a = 0; a < layout.agc_count(); ++a) {
    const std::size_t g = layout.agc_generator(a);
    d.r_up[g] = x(static_cast<Eigen::Index>(layout.r_up(a)));
    d.r_dn[g] = x(static_cast<Eigen::Index>(layout.r_dn(a)));
    d.alpha[g] = x(static_cast<Eigen::Index>(layout.alpha(a)));
  }
  return d;
}

double dispatch_cost(const Case& c, const DispatchDecision& x) {
  double total = 0.0;
  for (std::size_t g = 0; g < c.generators.size(); ++g) {
    const auto& gen = c.generators[g];
    total += gen.cost(x.p[g]) + gen.cost_up(x.r_up[g]) + gen.cost_down(x.r_dn[g]);
  }
  return total;
}

double decision_violation(const Case& c, const DispatchDecision& x) {
  double worst = 0.0;
  auto note = [&worst](double v) { worst = std::max(worst, v); };
  double balance = c.total_wind_forecast() - c.total_demand();
  double alpha_sum = 0.0;
  bool any_agc = false;
  for (std::size_t g = 0; g < c.generators.size(); ++g) {
    const auto& gen = c.generators[g];
    balance += x.p[g];
    note(gen.p_min - x.p[g]);
    note(x.p[g] - gen.p_max);
    note(-x.r_up[g]);
    note(-x.r_dn[g]);
    note(x.r_up[g] - (gen.p_max - x.p[g]));
    note(x.r_dn[g] - (x.p[g] - gen.p_min));
    note(-x.alpha[g]);
    note(x.alpha[g] - 1.0);
    if (gen.agc) {
      any_agc = true;
      alpha_sum += x.alpha[g];
    } else {
      note(std::abs(x.alpha[g]));
      note(std::abs(x.r_up[g]));
      note(std::abs(x.r_dn[g]));
    }
  }
  note(std::abs(balance));
  if (any_agc) note(std::abs(alpha_sum - 1.0));
  return worst;
}

double LinearForm::operator()(const Eigen::VectorXd& x) const {
  double v = constant;
  for (const auto& [i, c] : terms) v += c * x(static_cast<Eigen::Index>(i));
  return v;
}

LinearForm& LinearForm::operator+=(const LinearForm& o) {
  terms.insert(terms.end(), o.terms.begin(), o.terms.end());
  constant += o.constant;
  return *this;
}

LinearForm& LinearForm::operator*=(double s) {
  for (auto& t : terms) t.second *= s;
  constant *= s;
  return *this;
}

void LinearForm::compact() {
  if (terms.size() < 2) {
    std::erase_if(terms, [](const auto& t) { return t.second == 0.0; });
    return;
  }
  std::map<std::size_t, double> merged;
  for (const auto& [i, c] : terms) merged[i] += c;
  terms.clear();
  for (const auto& [i, c] : merged) {
    if (c != 0.0) terms.emplace_back(i, c);
  }
}

bool LinearForm::is_zero() const {
  return constant == 0.0 &&
         std::all_of(terms.begin(), terms.end(), [](const auto& t) { return t.second == 0.0; });
}

const char* to_string(ApproxMode m) {
  switch (m) {
    case ApproxMode::exact: return "exact";
    case ApproxMode::grouped: return "grouped";
    case ApproxMode::separable: return "separable";
  }
  return "?";
}

ApproxMode parse_approx(const std::string& s) {
  if (s == "exact") return ApproxMode::exact;
  if (s == "grouped") return ApproxMode::grouped;
  if (s == "separable") return ApproxMode::separable;
  throw std::invalid_argument("unknown approximation mode '" + s + "' (exact|grouped|separable)");
}

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  constexpr std::uint64_t limit = std::uint64_t{1} << 63;
  if (a != 0 && b > limit / a) throw std::overflow_error("count exceeds 2^63");
  const std::uint64_t r = a * b;
  if (r > limit) throw std::overflow_error("count exceeds 2^63");
  return r;
}

std::uint64_t checked_pow(std::uint64_t base, std::uint64_t exp) {
  std::uint64_t r = 1;
  for (std::uint64_t i = 0; i < exp; ++i) r = checked_mul(r, base);
  return r;
}

std::uint64_t piece_count(std::uint64_t g, std::uint64_t l) {
  return checked_mul(checked_pow(4, g), checked_pow(3, l));
}

RiskModel::RiskModel(Case c, PtdfMatrix ptdf, UncertaintyIndex index, PenaltyWeights weights)
    : case_(std::move(c)),
      ptdf_(std::move(ptdf)),
      index_(std::move(index)),
      weights_(weights),
      layout_(case_) {
  if (weights_.beta_d < 0 || weights_.beta_w < 0 || weights_.beta_l < 0) {
    throw std::invalid_argument("penalty weights must be nonnegative");
  }
  if (index_.wind_count() != case_.wind_farms.size()) {
    throw std::invalid_argument("uncertainty index must cover every wind farm");
  }
  wind_forecast_ = case_.total_wind_forecast();
}

namespace {

SymbolicPiece zero_piece(std::size_t dim) {
  SymbolicPiece p;
  p.a.resize(dim);
  return p;
}

}  // namespace

PieceFamily RiskModel::shed_family(std::size_t a) const {
  const double beta = weights_.beta_d;
  SymbolicPiece piece = zero_piece(dim());
  for (std::size_t w = 0; w < index_.wind_count(); ++w) {
    piece.a[w].terms = {{layout_.alpha(a), -beta}};
  }
  piece.b.terms = {{layout_.r_up(a), -beta}, {layout_.alpha(a), beta * wind_forecast_}};
  const auto& id = case_.generators[layout_.agc_generator(a)].id;
  return {"shed:" + id, {std::move(piece), zero_piece(dim())}};
}

PieceFamily RiskModel::curtail_family(std::size_t a) const {
  const double beta = weights_.beta_w;
  SymbolicPiece piece = zero_piece(dim());
  for (std::size_t w = 0; w < index_.wind_count(); ++w) {
    piece.a[w].terms = {{layout_.alpha(a), beta}};
  }
  piece.b.terms = {{layout_.r_dn(a), -beta}, {layout_.alpha(a), -beta * wind_forecast_}};
  const auto& id = case_.generators[layout_.agc_generator(a)].id;
  return {"curtail:" + id, {std::move(piece), zero_piece(dim())}};
}

PieceFamily RiskModel::line_family(std::size_t i) const {
  const double beta = weights_.beta_l;
  const std::size_t pos = index_.wind_count() + i;
  const std::size_t l = index_[pos].element;

  // Flow under recourse as an affine function of (x, xi), sign +1.
  SymbolicPiece up = zero_piece(dim());
  for (std::size_t w = 0; w < index_.wind_count(); ++w) {
    auto& form = up.a[w];
    form.constant = beta * ptdf_.wind(l, w);
    for (std::size_t a = 0; a < layout_.agc_count(); ++a) {
      form.terms.emplace_back(layout_.alpha(a), -beta * ptdf_.generator(l, layout_.agc_generator(a)));
    }
  }
  for (std::size_t g = 0; g < layout_.generator_count(); ++g) {
    up.b.terms.emplace_back(layout_.p(g), beta * ptdf_.generator(l, g));
  }
  for (std::size_t a = 0; a < layout_.agc_count(); ++a) {
    up.b.terms.emplace_back(layout_.alpha(a),
                            beta * ptdf_.generator(l, layout_.agc_generator(a)) * wind_forecast_);
  }
  for (std::size_t d = 0; d < case_.loads.size(); ++d) {
    up.b.constant -= beta * ptdf_.load(l, d) * case_.loads[d].demand;
  }

  SymbolicPiece down = up;
  for (std::size_t w = 0; w < index_.wind_count(); ++w) down.a[w] *= -1.0;
  down.b *= -1.0;

  up.a[pos].constant = -beta;
  down.a[pos].constant = -beta;
  return {"line:" + case_.lines[l].id, {std::move(up), std::move(down), zero_piece(dim())}};
}

PieceFamily sum_families(const std::vector<PieceFamily>& parts, std::string name) {
  PieceFamily out;
  out.name = std::move(name);
  if (parts.empty()) return out;
  const std::size_t dim = parts.front().pieces.front().a.size();
  std::uint64_t total = 1;
  for (const auto& p : parts) total = checked_mul(total, p.pieces.size());
  out.pieces.reserve(static_cast<std::size_t>(total));

  std::vector<std::size_t> digit(parts.size(), 0);
  for (std::uint64_t k = 0; k < total; ++k) {
    SymbolicPiece s = zero_piece(dim);
    for (std::size_t f = 0; f < parts.size(); ++f) {
      const auto& src = parts[f].pieces[digit[f]];
      for (std::size_t i = 0; i < dim; ++i) s.a[i] += src.a[i];
      s.b += src.b;
    }
    for (auto& form : s.a) form.compact();
    s.b.compact();
    out.pieces.push_back(std::move(s));
    // Mixed-radix increment, last family fastest.
    for (std::size_t f = parts.size(); f-- > 0;) {
      if (++digit[f] < parts[f].pieces.size()) break;
      digit[f] = 0;
    }
  }
  return out;
}

std::vector<PieceFamily> RiskModel::families(ApproxMode mode) const {
  std::vector<PieceFamily> shed, curtail, lines;
  for (std::size_t a = 0; a < layout_.agc_count(); ++a) {
    shed.push_back(shed_family(a));
    curtail.push_back(curtail_family(a));
  }
  for (std::size_t i = 0; i < index_.line_count(); ++i) lines.push_back(line_family(i));

  std::vector<PieceFamily> out;
  switch (mode) {
    case ApproxMode::exact: {
      // Order within the product: (shed_g, curtail_g) per generator, then lines.
      std::vector<PieceFamily> all;
      for (std::size_t a = 0; a < shed.size(); ++a) {
        all.push_back(shed[a]);
        all.push_back(curtail[a]);
      }
      all.insert(all.end(), lines.begin(), lines.end());
      out.push_back(sum_families(all, "risk"));
      break;
    }
    case ApproxMode::grouped:
      if (!shed.empty()) out.push_back(sum_families(shed, "shed"));
      if (!curtail.empty()) out.push_back(sum_families(curtail, "curtail"));
      if (!lines.empty()) out.push_back(sum_families(lines, "line"));
      break;
    case ApproxMode::separable:
      for (auto& f : shed) out.push_back(std::move(f));
      for (auto& f : curtail) out.push_back(std::move(f));
      for (auto& f : lines) out.push_back(std::move(f));
      break;
  }
  return out;
}

std::vector<std::uint64_t> RiskModel::family_sizes(ApproxMode mode) const {
  const std::uint64_t g = layout_.agc_count();
  const std::uint64_t l = index_.line_count();
  switch (mode) {
    case ApproxMode::exact:
      return {piece_count(g, l)};
    case ApproxMode::grouped: {
      std::vector<std::uint64_t> s;
      if (g > 0) {
        s.push_back(checked_pow(2, g));
        s.push_back(checked_pow(2, g));
      }
      if (l > 0) s.push_back(checked_pow(3, l));
      return s;
    }
    case ApproxMode::separable: {
      std::vector<std::uint64_t> s(static_cast<std::size_t>(2 * g), 2);
      s.insert(s.end(), static_cast<std::size_t>(l), 3);
      return s;
    }
  }
  return {};
}

double RiskModel::evaluate(const DispatchDecision& x, const Eigen::VectorXd& xi) const {
  const std::size_t nw = index_.wind_count();
  double deviation = 0.0;  // forecast minus realized wind
  Eigen::VectorXd wind(static_cast<Eigen::Index>(nw));
  for (std::size_t w = 0; w < nw; ++w) {
    wind(static_cast<Eigen::Index>(w)) = xi(static_cast<Eigen::Index>(w));
    deviation += case_.wind_farms[w].forecast - xi(static_cast<Eigen::Index>(w));
  }

  double risk = 0.0;
  Eigen::VectorXd gen(static_cast<Eigen::Index>(case_.generators.size()));
  for (std::size_t g = 0; g < case_.generators.size(); ++g) {
    const double response = x.alpha[g] * deviation;
    gen(static_cast<Eigen::Index>(g)) = x.p[g] + response;
    if (case_.generators[g].agc) {
      risk += weights_.beta_d * std::max(0.0, response - x.r_up[g]);
      risk += weights_.beta_w * std::max(0.0, -response - x.r_dn[g]);
    }
  }

  const Eigen::VectorXd flows = ptdf_.flows(bus_injections(case_, gen, wind));
  for (std::size_t i = nw; i < index_.size(); ++i) {
    const double flow = flows(static_cast<Eigen::Index>(index_[i].element));
    risk += weights_.beta_l * std::max(0.0, std::abs(flow) - xi(static_cast<Eigen::Index>(i)));
  }
  return risk;
}

double RiskModel::mean_risk(const DispatchDecision& x, const Eigen::MatrixXd& samples) const {
  double sum = 0.0;
  for (Eigen::Index n = 0; n < samples.rows(); ++n) sum += evaluate(x, samples.row(n).transpose());
  return samples.rows() > 0 ? sum / static_cast<double>(samples.rows()) : 0.0;
}

AffinePiece instantiate(const SymbolicPiece& piece, const Eigen::VectorXd& x) {
  AffinePiece out;
  out.a.resize(static_cast<Eigen::Index>(piece.a.size()));
  for (std::size_t i = 0; i < piece.a.size(); ++i) out.a(static_cast<Eigen::Index>(i)) = piece.a[i](x);
  out.b = piece.b(x);
  return out;
}

double max_piece(const std::vector<AffinePiece>& pieces, const Eigen::VectorXd& xi) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& p : pieces) best = std::max(best, p(xi));
  return best;
}

}  // namespace dropf
