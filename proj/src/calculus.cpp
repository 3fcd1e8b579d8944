#include "fuzzcalc/calculus.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <random>
#include <sstream>

namespace fuzzcalc {

using J = Jet2<double>;

struct LevelEvaluator::Instr {
  Op op = Op::Var;
  int a = -1;
  int b = -1;
  double value = 0.0;
  ConstantShape shape = Triangular<double>{0.0, 0.0, 0.0};
  SourceSpan span;
};

namespace {

int compile(const Expr& e, std::vector<LevelEvaluator::Instr>& tape) {
  LevelEvaluator::Instr ins;
  ins.op = e.op();
  ins.span = e.span();
  switch (e.op()) {
    case Op::Var: break;
    case Op::CrispConst: ins.value = e.value(); break;
    case Op::FuzzyConst: ins.shape = e.constant(); break;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
      ins.a = compile(e.lhs(), tape);
      ins.b = compile(e.rhs(), tape);
      break;
    case Op::ScalarMul:
      ins.value = e.value();
      ins.a = compile(e.operand(), tape);
      break;
    case Op::Exp:
    case Op::Neg: ins.a = compile(e.operand(), tape); break;
  }
  tape.push_back(ins);
  return static_cast<int>(tape.size()) - 1;
}

constexpr std::array<const char*, 4> kCandidateNames = {"lo*lo", "lo*hi", "hi*lo", "hi*hi"};

struct Choice {
  int index = 0;
  double value = 0.0;
  double d1_gap = 0.0;
  double d2_gap = 0.0;
  unsigned tied = 0;  // bitmask of candidates inside the tie band
};

double scale_of(double v) { return std::max(1.0, std::abs(v)); }

// Picks the candidate that stays extremal on the requested side of x.
Choice select(const std::array<J, 4>& c, bool minimum, Side side, double tie_eps, double kink_tol) {
  int best = 0;
  for (int i = 1; i < 4; ++i)
    if (minimum ? c[i].value < c[best].value : c[i].value > c[best].value) best = i;
  Choice out;
  out.value = c[best].value;
  const double band = tie_eps * scale_of(out.value);
  double d1_min = c[best].d1, d1_max = c[best].d1, d2_min = c[best].d2, d2_max = c[best].d2;
  for (int i = 0; i < 4; ++i) {
    if (std::abs(c[i].value - out.value) > band) continue;
    out.tied |= 1u << i;
    d1_min = std::min(d1_min, c[i].d1);
    d1_max = std::max(d1_max, c[i].d1);
    d2_min = std::min(d2_min, c[i].d2);
    d2_max = std::max(d2_max, c[i].d2);
  }
  out.d1_gap = d1_max - d1_min;
  out.d2_gap = d2_max - d2_min;
  // On the right a minimum follows the smallest slope, on the left the largest.
  const bool prefer_small_d1 = minimum == (side == Side::Right);
  const bool prefer_small_d2 = minimum;
  const double d1_band = kink_tol * std::max(std::abs(d1_min), std::abs(d1_max)) + kink_tol;
  int chosen = -1;
  for (int i = 0; i < 4; ++i) {
    if (!(out.tied & (1u << i))) continue;
    if (chosen < 0) {
      chosen = i;
      continue;
    }
    const double dd1 = c[i].d1 - c[chosen].d1;
    if (std::abs(dd1) > d1_band) {
      if (prefer_small_d1 ? dd1 < 0 : dd1 > 0) chosen = i;
    } else if (prefer_small_d2 ? c[i].d2 < c[chosen].d2 : c[i].d2 > c[chosen].d2) {
      chosen = i;
    }
  }
  out.index = chosen;
  return out;
}

bool kinked(double gap, double lo, double hi, double tol) {
  return gap > tol * std::max({1.0, std::abs(lo), std::abs(hi)});
}

std::string describe_tie(bool minimum, const Choice& ch, const std::array<J, 4>& c) {
  std::ostringstream os;
  os << (minimum ? "lower" : "upper") << " product candidates";
  const char* sep = " ";
  for (int i = 0; i < 4; ++i) {
    if (!(ch.tied & (1u << i))) continue;
    os << sep << kCandidateNames[static_cast<std::size_t>(i)] << " (d1=" << c[static_cast<std::size_t>(i)].d1 << ")";
    sep = ", ";
  }
  os << " tie at value " << ch.value;
  return os.str();
}

}  // namespace

LevelEvaluator::LevelEvaluator(const Expr& e, const Family& fam, double tie_eps, double kink_tol)
    : expr_(e), family_(fam), tie_eps_(tie_eps), kink_tol_(kink_tol) {
  compile(expr_, tape_);
}

LevelEvaluator::~LevelEvaluator() = default;
LevelEvaluator::LevelEvaluator(const LevelEvaluator&) = default;
LevelEvaluator& LevelEvaluator::operator=(const LevelEvaluator&) = default;

std::size_t LevelEvaluator::size() const { return tape_.size(); }

SourceSpan LevelEvaluator::span_of(std::size_t node) const { return tape_.at(node).span; }

std::vector<std::size_t> LevelEvaluator::product_nodes() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < tape_.size(); ++i)
    if (tape_[i].op == Op::Mul) out.push_back(i);
  return out;
}

IntervalJet LevelEvaluator::run(double x, double alpha, Side side, bool record,
                                std::vector<std::uint8_t>* sig) const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    std::ostringstream os;
    os << "alpha " << alpha << " outside [0,1]";
    throw RangeError(os.str());
  }
  struct Slot {
    J lo, hi;
  };
  std::vector<Slot> v(tape_.size());
  std::vector<BranchEvent> events;
  std::optional<Slot> var;
  for (std::size_t n = 0; n < tape_.size(); ++n) {
    const Instr& ins = tape_[n];
    Slot& out = v[n];
    switch (ins.op) {
      case Op::Var: {
        if (!var) {
          const auto c = family_.endpoints(x, alpha);
          const auto d1 = family_.endpoint_derivatives(x, alpha, 1);
          const auto d2 = family_.endpoint_derivatives(x, alpha, 2);
          var = Slot{J{c.lo, d1.first, d2.first}, J{c.hi, d1.second, d2.second}};
        }
        out = *var;
        break;
      }
      case Op::CrispConst: out = {J::constant(ins.value), J::constant(ins.value)}; break;
      case Op::FuzzyConst: {
        const auto c = constant_cut(ins.shape, alpha);
        out = {J::constant(c.lo), J::constant(c.hi)};
        break;
      }
      case Op::Add: out = {v[ins.a].lo + v[ins.b].lo, v[ins.a].hi + v[ins.b].hi}; break;
      case Op::Sub: out = {v[ins.a].lo - v[ins.b].hi, v[ins.a].hi - v[ins.b].lo}; break;
      case Op::ScalarMul: {
        const Slot& a = v[ins.a];
        if (ins.value >= 0.0) out = {ins.value * a.lo, ins.value * a.hi};
        else out = {ins.value * a.hi, ins.value * a.lo};
        break;
      }
      case Op::Neg: out = {-v[ins.a].hi, -v[ins.a].lo}; break;
      case Op::Exp: {
        out = {fuzzcalc::exp(v[ins.a].lo), fuzzcalc::exp(v[ins.a].hi)};
        if (!out.hi.finite()) {
          std::ostringstream os;
          os << "exp overflow at x=" << x << ", alpha=" << alpha << " (argument " << v[ins.a].hi.value << ")";
          throw EvaluationError(os.str(), ins.span);
        }
        break;
      }
      case Op::Mul: {
        const Slot& a = v[ins.a];
        const Slot& b = v[ins.b];
        const std::array<J, 4> c = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
        const Choice lo = select(c, true, side, tie_eps_, kink_tol_);
        const Choice hi = select(c, false, side, tie_eps_, kink_tol_);
        out.lo = {lo.value, c[lo.index].d1, c[lo.index].d2};
        out.hi = {hi.value, c[hi.index].d1, c[hi.index].d2};
        if (sig) {
          sig->push_back(static_cast<std::uint8_t>(lo.index));
          sig->push_back(static_cast<std::uint8_t>(hi.index));
        }
        if (record) {
          for (const auto& [ch, minimum] : {std::pair{lo, true}, std::pair{hi, false}}) {
            const bool d1_split = kinked(ch.d1_gap, c[ch.index].d1, c[ch.index].d1, kink_tol_);
            const bool d2_split = kinked(ch.d2_gap, c[ch.index].d2, c[ch.index].d2, kink_tol_);
            if (std::popcount(ch.tied) > 1 && (d1_split || d2_split)) {
              events.push_back({n, ins.span, alpha, d1_split ? ch.d1_gap : 0.0, d2_split ? ch.d2_gap : 0.0,
                                describe_tie(minimum, ch, c)});
            }
          }
        }
        break;
      }
    }
    if (!std::isfinite(out.lo.value) || !std::isfinite(out.hi.value)) {
      std::ostringstream os;
      os << "non-finite value at x=" << x << ", alpha=" << alpha;
      throw EvaluationError(os.str(), ins.span);
    }
  }
  IntervalJet r{v.back().lo, v.back().hi, std::move(events)};
  return r;
}

IntervalJet LevelEvaluator::jets(double x, double alpha, Side side) const { return run(x, alpha, side, true, nullptr); }

std::pair<double, double> LevelEvaluator::levels(double x, double alpha) const {
  const IntervalJet j = run(x, alpha, Side::Right, false, nullptr);
  return {j.lo.value, j.hi.value};
}

std::vector<std::uint8_t> LevelEvaluator::signature(double x, double alpha) const {
  std::vector<std::uint8_t> sig;
  run(x, alpha, Side::Right, false, &sig);
  return sig;
}

std::pair<double, double> eval_levels(const Expr& e, const Family& fam, double x, double alpha) {
  return LevelEvaluator(e, fam).levels(x, alpha);
}

FuzzyNumber eval_fuzzy(const Expr& e, const Family& fam, double x, const AlphaGrid& grid) {
  const LevelEvaluator ev(e, fam);
  Eigen::ArrayXd lo(grid.size()), hi(grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i) std::tie(lo(i), hi(i)) = ev.levels(x, grid[i]);
  FuzzyNumber f(grid, std::move(lo), std::move(hi));
  const ValidityReport rep = validate(f);
  if (!rep.valid()) throw EvaluationError("result is not a fuzzy number: " + rep.summary(), e.span());
  return f;
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Yes: return "yes";
    case Verdict::MarginalTies: return "marginal_ties";
    case Verdict::No: return "no";
  }
  return "?";
}

const char* to_string(FailureReason r) {
  switch (r) {
    case FailureReason::None: return "none";
    case FailureReason::Kink: return "kink";
    case FailureReason::FiniteDifferenceMismatch: return "fd_mismatch";
    case FailureReason::NotNested: return "not_nested";
  }
  return "?";
}

namespace {

enum class Position { Interior, AtLower, AtUpper };

Position position_of(double x, const DerivativeOptions& o) {
  if (!o.domain) return Position::Interior;
  const double reach = 2.0 * o.fd_step;
  if (x - o.domain->lo < reach) return Position::AtLower;
  if (o.domain->hi - x < reach) return Position::AtUpper;
  return Position::Interior;
}

// Endpoint values of the function whose derivative is checked: the level functions
// for order 1, their first derivatives for order 2.
std::optional<std::pair<double, double>> sample(const LevelEvaluator& ev, double x, double alpha, int order,
                                                Side side) {
  try {
    if (order == 1) return ev.levels(x, alpha);
    const IntervalJet j = ev.jets(x, alpha, side);
    return std::pair{j.lo.d1, j.hi.d1};
  } catch (const EvaluationError&) {
    return std::nullopt;
  }
}

struct FdOutcome {
  double fd_lo = 0.0, fd_hi = 0.0, residual = std::numeric_limits<double>::infinity();
  const char* stencil = "none";
};

double rel(double ad, double fd) { return std::abs(ad - fd) / (1.0 + std::abs(ad)); }

FdOutcome fd_check(const LevelEvaluator& ev, double x, double alpha, int order, Position pos, double ad_lo,
                   double ad_hi, const DerivativeOptions& o) {
  const double h = o.fd_step;
  FdOutcome best;
  auto consider = [&](const char* name, double lo, double hi) {
    const double r = std::max(rel(ad_lo, lo), rel(ad_hi, hi));
    if (r < best.residual) best = {lo, hi, r, name};
  };
  std::optional<std::pair<double, double>> f0;
  auto centre = [&] {
    if (!f0) f0 = sample(ev, x, alpha, order, Side::Right);
    return f0;
  };
  if (pos == Position::Interior) {
    const auto p = sample(ev, x + h, alpha, order, Side::Right);
    const auto m = sample(ev, x - h, alpha, order, Side::Left);
    if (p && m) consider("central", (p->first - m->first) / (2 * h), (p->second - m->second) / (2 * h));
    if (best.residual <= o.fd_tol) return best;
  }
  if (pos != Position::AtUpper) {
    const auto p1 = sample(ev, x + h, alpha, order, Side::Right);
    const auto p2 = sample(ev, x + 2 * h, alpha, order, Side::Right);
    const auto c = centre();
    if (p1 && p2 && c)
      consider("forward", (-3 * c->first + 4 * p1->first - p2->first) / (2 * h),
               (-3 * c->second + 4 * p1->second - p2->second) / (2 * h));
    if (best.residual <= o.fd_tol) return best;
  }
  if (pos != Position::AtLower) {
    const auto m1 = sample(ev, x - h, alpha, order, Side::Left);
    const auto m2 = sample(ev, x - 2 * h, alpha, order, Side::Left);
    const auto c = centre();
    if (m1 && m2 && c)
      consider("backward", (3 * c->first - 4 * m1->first + m2->first) / (2 * h),
               (3 * c->second - 4 * m1->second + m2->second) / (2 * h));
  }
  return best;
}

bool derivatives_split(const IntervalJet& a, const IntervalJet& b, int order, double tol) {
  auto split = [tol](double u, double v) { return std::abs(u - v) > tol * std::max({1.0, std::abs(u), std::abs(v)}); };
  if (split(a.lo.d1, b.lo.d1) || split(a.hi.d1, b.hi.d1)) return true;
  return order == 2 && (split(a.lo.d2, b.lo.d2) || split(a.hi.d2, b.hi.d2));
}

Witness witness_of(const BranchEvent& ev, double x) {
  return {ev.node, ev.span, x, ev.alpha, ev.description};
}

DerivativeResult compute(const LevelEvaluator& ev, double x, const AlphaGrid& grid, const DerivativeOptions& o,
                         int order) {
  DerivativeResult res;
  res.order = order;
  res.x = x;
  res.grid = grid;
  const Eigen::Index n = grid.size();
  res.raw_lower.resize(n);
  res.raw_upper.resize(n);
  const Position pos = position_of(x, o);
  const Side primary = pos == Position::AtUpper ? Side::Left : Side::Right;

  bool kink = false;
  bool fd_bad = false;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double a = grid[k];
    const IntervalJet p = ev.jets(x, a, primary);
    res.raw_lower(k) = p.lo.derivative(order);
    res.raw_upper(k) = p.hi.derivative(order);

    bool level_kink = false;
    if (pos == Position::Interior) {
      const IntervalJet q = ev.jets(x, a, Side::Left);
      level_kink = derivatives_split(p, q, order, o.kink_tol);
    }
    for (const BranchEvent& be : p.branch_events) {
      const bool relevant = be.d1_gap > 0.0 || (order == 2 && be.d2_gap > 0.0);
      if (level_kink && relevant) res.witnesses.push_back(witness_of(be, x));
      else res.ties.push_back(witness_of(be, x));
    }
    if (level_kink) {
      kink = true;
      if (p.branch_events.empty()) {
        std::ostringstream os;
        os << "left and right derivatives differ at alpha=" << a;
        res.witnesses.push_back({std::nullopt, ev.expr().span(), x, a, os.str()});
      }
    }

    const FdOutcome fd = fd_check(ev, x, a, order, pos, res.raw_lower(k), res.raw_upper(k), o);
    res.diagnostics.push_back({a, res.raw_lower(k), res.raw_upper(k), fd.fd_lo, fd.fd_hi, fd.residual, fd.stencil});
    if (!(fd.residual <= o.fd_tol)) {
      fd_bad = true;
      std::ostringstream os;
      os << "AD (" << res.raw_lower(k) << ", " << res.raw_upper(k) << ") vs FD (" << fd.fd_lo << ", " << fd.fd_hi
         << ") at alpha=" << a;
      if (!level_kink) res.witnesses.push_back({std::nullopt, ev.expr().span(), x, a, os.str()});
    }
    if (std::isfinite(fd.residual)) res.max_fd_residual = std::max(res.max_fd_residual, fd.residual);
  }

  // Candidates that cross strictly between two grid levels.
  if (pos == Position::Interior) {
    std::vector<std::uint8_t> prev = ev.signature(x, grid[0]);
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
      std::vector<std::uint8_t> next = ev.signature(x, grid[k + 1]);
      if (next != prev) {
        double a0 = grid[k], a1 = grid[k + 1];
        while (a1 - a0 > 1e-12) {
          const double m = 0.5 * (a0 + a1);
          if (ev.signature(x, m) == prev) a0 = m;
          else a1 = m;
        }
        const IntervalJet j0 = ev.jets(x, a0, Side::Right);
        const IntervalJet j1 = ev.jets(x, a1, Side::Right);
        if (derivatives_split(j0, j1, order, o.kink_tol)) {
          kink = true;
          const std::vector<std::uint8_t> s1 = ev.signature(x, a1);
          std::size_t slot = 0;
          while (slot < prev.size() && prev[slot] == s1[slot]) ++slot;
          const std::vector<std::size_t> products = ev.product_nodes();
          const std::size_t node = products.at(std::min(slot / 2, products.size() - 1));
          std::ostringstream os;
          os << (slot % 2 == 0 ? "lower" : "upper") << " product candidates cross between levels " << grid[k]
             << " and " << grid[k + 1] << " (derivative jumps from " << j0.lo.derivative(order) << ", "
             << j0.hi.derivative(order) << " to " << j1.lo.derivative(order) << ", " << j1.hi.derivative(order)
             << ")";
          res.witnesses.push_back({node, ev.span_of(node), x, 0.5 * (a0 + a1), os.str()});
        }
      }
      prev = std::move(next);
    }
  }

  if (kink) {
    res.verdict = Verdict::No;
    res.reason = FailureReason::Kink;
    std::ostringstream os;
    os << "level function has a corner at x=" << x;
    if (!res.witnesses.empty()) os << " (alpha=" << res.witnesses.front().alpha << ")";
    res.reason_text = os.str();
    return res;
  }
  if (fd_bad) {
    res.verdict = Verdict::No;
    res.reason = FailureReason::FiniteDifferenceMismatch;
    res.reason_text = "jet derivative disagrees with finite differences";
    return res;
  }
  FuzzyNumber f(grid, res.raw_lower.min(res.raw_upper), res.raw_lower.max(res.raw_upper));
  const ValidityReport rep = validate(f);
  if (!rep.valid()) {
    res.verdict = Verdict::No;
    res.reason = FailureReason::NotNested;
    res.reason_text = "derivative cuts do not form a fuzzy number: " + rep.summary();
    return res;
  }
  res.fuzzy = std::move(f);
  res.verdict = res.ties.empty() ? Verdict::Yes : Verdict::MarginalTies;
  return res;
}

LevelEvaluator make_evaluator(const Expr& e, const Family& fam, const DerivativeOptions& o) {
  return LevelEvaluator(e, fam, o.tie_eps, o.kink_tol);
}

}  // namespace

DerivativeResult derivative(const LevelEvaluator& ev, double x, const AlphaGrid& grid, const DerivativeOptions& opts) {
  return compute(ev, x, grid, opts, 1);
}

DerivativeResult derivative(const Expr& e, const Family& fam, double x, const AlphaGrid& grid,
                            const DerivativeOptions& opts) {
  return derivative(make_evaluator(e, fam, opts), x, grid, opts);
}

DerivativeResult second_derivative(const LevelEvaluator& ev, double x, const AlphaGrid& grid,
                                   const DerivativeOptions& opts) {
  for (double probe : {x, x - opts.probe_step, x + opts.probe_step}) {
    if (opts.domain && (probe < opts.domain->lo || probe > opts.domain->hi)) continue;
    const DerivativeResult d = compute(ev, probe, grid, opts, 1);
    if (!d.differentiable()) {
      std::ostringstream os;
      os << "first derivative is not defined at x=" << probe << ": " << d.reason_text;
      if (!d.witnesses.empty()) os << "; " << d.witnesses.front().description;
      throw NotDifferentiable(os.str());
    }
  }
  return compute(ev, x, grid, opts, 2);
}

DerivativeResult second_derivative(const Expr& e, const Family& fam, double x, const AlphaGrid& grid,
                                   const DerivativeOptions& opts) {
  return second_derivative(make_evaluator(e, fam, opts), x, grid, opts);
}

ContinuityReport continuity_probe(const Expr& e, const Family& fam, double x0, double eps, int trials,
                                  const ContinuityOptions& opts) {
  if (!(eps > 0.0)) throw InvalidParameter("continuity probe needs eps > 0");
  if (trials < 1) throw InvalidParameter("continuity probe needs at least one trial");
  const LevelEvaluator ev(e, fam);
  const AlphaGrid& grid = opts.grid;
  const Eigen::Index n = grid.size();
  Eigen::ArrayXd lo0(n), hi0(n);
  for (Eigen::Index i = 0; i < n; ++i) std::tie(lo0(i), hi0(i)) = ev.levels(x0, grid[i]);

  auto dist = [&](double x) {
    double d = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto [l, h] = ev.levels(x, grid[i]);
      d = std::max({d, std::abs(l - lo0(i)), std::abs(h - hi0(i))});
    }
    return d;
  };

  std::mt19937_64 rng(opts.seed);
  ContinuityReport rep;
  rep.eps = eps;
  // Tests the open ball of radius delta with `count` samples, the first two just inside
  // its ends; the first failing sample is stored.
  auto passes = [&](double delta, int count, std::vector<ContinuitySample>* all) {
    std::uniform_real_distribution<double> u(x0 - delta, x0 + delta);
    const double edge = delta * (1.0 - 1e-12);
    bool ok = true;
    for (int i = 0; i < count; ++i) {
      double x = i == 0 ? x0 - edge : i == 1 ? x0 + edge : u(rng);
      if (!(std::abs(x - x0) < delta)) continue;
      const double d = dist(x);
      if (!(d < eps)) {
        ok = false;
        if (!rep.boundary_witness || std::abs(x - x0) < std::abs(rep.boundary_witness->x - x0))
          rep.boundary_witness = ContinuitySample{x, d};
        if (all) all->push_back({x, d});
        else return false;
      }
    }
    return ok;
  };

  double lo = 0.0, hi = 0.0;
  double delta = 1.0;
  if (passes(delta, trials, nullptr)) {
    while (true) {
      if (2.0 * delta > opts.max_delta) {
        rep.capped = true;
        break;
      }
      if (!passes(2.0 * delta, trials, nullptr)) break;
      delta *= 2.0;
    }
    lo = delta;
    hi = 2.0 * delta;
  } else {
    while (delta > 1e-300 && !passes(delta, trials, nullptr)) delta *= 0.5;
    lo = delta > 1e-300 ? delta : 0.0;
    hi = 2.0 * delta;
  }
  if (!rep.capped && lo > 0.0) {
    for (int it = 0; it < opts.max_bisections && hi - lo > 1e-14 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (passes(mid, trials, nullptr)) lo = mid;
      else hi = mid;
    }
  }
  // Fresh samples at the estimate; shrink until they all pass.
  for (int round = 0; round < 64 && lo > 0.0; ++round) {
    std::vector<ContinuitySample> found;
    rep.verification_samples = trials;
    passes(lo, trials, &found);
    rep.violations = std::move(found);
    if (rep.violations.empty()) break;
    lo *= 0.5;
  }
  rep.delta_est = lo;
  return rep;
}

}  // namespace fuzzcalc
