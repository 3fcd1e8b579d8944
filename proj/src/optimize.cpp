#include "fuzzcalc/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fuzzcalc {

const char* to_string(Dominance d) {
  switch (d) {
    case Dominance::None: return "none";
    case Dominance::Weak: return "weak";
    case Dominance::Strict: return "strict";
  }
  return "?";
}

const char* to_string(SufficiencyVerdict v) {
  switch (v) {
    case SufficiencyVerdict::GlobalNonDominated: return "global_non_dominated";
    case SufficiencyVerdict::LocalNonDominated: return "local_non_dominated";
    case SufficiencyVerdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

namespace {

Dominance compare_cuts(const Eigen::ArrayXd& alo, const Eigen::ArrayXd& ahi, const Eigen::ArrayXd& blo,
                       const Eigen::ArrayXd& bhi, double tol) {
  if ((alo > blo + tol).any() || (ahi > bhi + tol).any()) return Dominance::None;
  if ((alo < blo - tol).any() || (ahi < bhi - tol).any()) return Dominance::Strict;
  return Dominance::Weak;
}

}  // namespace

Dominance dominates(const FuzzyNumber& a, const FuzzyNumber& b, double tol) {
  if (!(a.grid() == b.grid())) throw InvalidParameter("dominance needs operands on the same alpha grid");
  return compare_cuts(a.lower(), a.upper(), b.lower(), b.upper(), tol);
}

bool open_ball_contains(const FuzzyNumber& center, double radius, const FuzzyNumber& probe) {
  if (!(radius > 0.0)) throw InvalidParameter("open ball radius must be positive");
  return distance(center, probe) < radius;
}

void Problem::validate() const {
  if (!std::isfinite(domain.lo) || !std::isfinite(domain.hi) || !(domain.lo < domain.hi))
    throw InvalidParameter("domain must be a finite interval with lo < hi");
  if (config.x_scan_points < 3) throw InvalidParameter("x_scan_points must be at least 3");
  if (!(config.root_tol > 0.0)) throw InvalidParameter("root_tol must be positive");
  if (!(config.dominance_tol >= 0.0)) throw InvalidParameter("dominance_tol must be non-negative");
  if (config.max_bisect_iter < 1) throw InvalidParameter("max_bisect_iter must be at least 1");
  if (config.brute_points < 0) throw InvalidParameter("brute_points must be non-negative");
}

DerivativeOptions Problem::derivative_options() const {
  DerivativeOptions o;
  o.domain = domain;
  return o;
}

std::vector<double> Problem::scan_points(int count) const {
  std::vector<double> xs(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i)
    xs[static_cast<std::size_t>(i)] = domain.lo + (domain.hi - domain.lo) * static_cast<double>(i) / (count - 1);
  xs.back() = domain.hi;
  return xs;
}

namespace {

struct Root {
  double x;
  int endpoint;
  Eigen::Index level;
  double residual;
};

class Searcher {
 public:
  explicit Searcher(const Problem& p)
      : p_(p), ev_(p.objective, p.family), opts_(p.derivative_options()), xs_(p.scan_points(p.config.x_scan_points)) {}

  Side side_at(double x) const { return p_.domain.hi - x < 2.0 * opts_.fd_step ? Side::Left : Side::Right; }

  // Derivative of the requested endpoint function at (x, alpha).
  Jet2<double> endpoint(int e, double x, double alpha) const {
    const IntervalJet j = ev_.jets(x, alpha, side_at(x));
    return e == 1 ? j.lo : j.hi;
  }

  void classify(std::vector<std::string>* warnings) {
    ok_.assign(xs_.size(), true);
    for (std::size_t i = 0; i < xs_.size(); ++i) {
      try {
        ok_[i] = derivative(ev_, xs_[i], p_.grid, opts_).differentiable();
      } catch (const EvaluationError&) {
        ok_[i] = false;
      }
    }
    if (!warnings) return;
    for (std::size_t i = 0; i < xs_.size();) {
      if (ok_[i]) {
        ++i;
        continue;
      }
      std::size_t j = i;
      while (j + 1 < xs_.size() && !ok_[j + 1]) ++j;
      std::ostringstream os;
      os << "objective is not differentiable at scan points in [" << xs_[i] << ", " << xs_[j]
         << "]; region excluded from the root search";
      warnings->push_back(os.str());
      i = j + 1;
    }
  }

  std::vector<Root> roots(int e, Eigen::Index k, std::vector<std::string>* warnings) const {
    const double alpha = p_.grid[k];
    const double tol = p_.config.root_tol;
    std::vector<double> g(xs_.size(), 0.0);
    for (std::size_t i = 0; i < xs_.size(); ++i)
      if (ok_[i]) g[i] = endpoint(e, xs_[i], alpha).d1;
    std::vector<Root> out;
    auto hit = [&](std::size_t i) { return ok_[i] && std::abs(g[i]) <= tol; };
    for (std::size_t i = 0; i < xs_.size(); ++i) {
      if (hit(i) && (i == 0 || !hit(i - 1))) out.push_back({xs_[i], e, k, g[i]});
      if (i + 1 == xs_.size() || !ok_[i] || !ok_[i + 1] || hit(i) || hit(i + 1)) continue;
      if ((g[i] < 0.0) == (g[i + 1] < 0.0)) continue;
      double a = xs_[i], b = xs_[i + 1], ga = g[i], gb = g[i + 1];
      for (int it = 0; it < p_.config.max_bisect_iter; ++it) {
        const double m = 0.5 * (a + b);
        if (m <= a || m >= b) break;
        const double gm = endpoint(e, m, alpha).d1;
        if (gm == 0.0) {
          a = b = m;
          ga = gb = 0.0;
          break;
        }
        if ((gm < 0.0) == (ga < 0.0)) {
          a = m;
          ga = gm;
        } else {
          b = m;
          gb = gm;
        }
      }
      const double x = std::abs(ga) <= std::abs(gb) ? a : b;
      const double r = std::abs(ga) <= std::abs(gb) ? ga : gb;
      if (std::abs(r) <= tol) {
        out.push_back({x, e, k, r});
      } else if (warnings) {
        std::ostringstream os;
        os << "f" << e << "' changes sign without a root near x=" << x << " at alpha=" << alpha;
        warnings->push_back(os.str());
      }
    }
    // Touching roots: |g| has a local minimum at a scan point with no sign change around it.
    for (std::size_t i = 1; i + 1 < xs_.size(); ++i) {
      if (!ok_[i - 1] || !ok_[i] || !ok_[i + 1] || hit(i - 1) || hit(i) || hit(i + 1)) continue;
      if ((g[i - 1] < 0.0) != (g[i] < 0.0) || (g[i] < 0.0) != (g[i + 1] < 0.0)) continue;
      if (std::abs(g[i]) > std::abs(g[i - 1]) || std::abs(g[i]) > std::abs(g[i + 1])) continue;
      constexpr double kInvPhi = 0.6180339887498949;
      double a = xs_[i - 1], b = xs_[i + 1];
      double c = b - kInvPhi * (b - a), d = a + kInvPhi * (b - a);
      double gc = std::abs(endpoint(e, c, alpha).d1), gd = std::abs(endpoint(e, d, alpha).d1);
      for (int it = 0; it < 2 * p_.config.max_bisect_iter; ++it) {
        if (gc < gd) {
          b = d;
          d = c;
          gd = gc;
          c = b - kInvPhi * (b - a);
          gc = std::abs(endpoint(e, c, alpha).d1);
        } else {
          a = c;
          c = d;
          gc = gd;
          d = a + kInvPhi * (b - a);
          gd = std::abs(endpoint(e, d, alpha).d1);
        }
      }
      const double x = gc < gd ? c : d;
      const double r = endpoint(e, x, alpha).d1;
      if (std::abs(r) <= tol) out.push_back({x, e, k, r});
    }
    std::sort(out.begin(), out.end(), [](const Root& u, const Root& v) { return u.x < v.x; });
    return out;
  }

  // Newton continuation of a root to another level.
  std::optional<double> continue_root(int e, double x, double alpha) const {
    const double tol = p_.config.root_tol;
    for (int it = 0; it < 30; ++it) {
      const Jet2<double> j = endpoint(e, x, alpha);
      if (std::abs(j.d1) <= tol) return x;
      if (j.d2 == 0.0 || !std::isfinite(j.d2)) return std::nullopt;
      x -= j.d1 / j.d2;
      if (!(x >= p_.domain.lo && x <= p_.domain.hi)) return std::nullopt;
    }
    return std::nullopt;
  }

  const std::vector<double>& xs() const { return xs_; }
  const LevelEvaluator& evaluator() const { return ev_; }

 private:
  const Problem& p_;
  LevelEvaluator ev_;
  DerivativeOptions opts_;
  std::vector<double> xs_;
  std::vector<bool> ok_;
};

std::vector<std::vector<Root>> all_roots(Searcher& s, const Problem& p, std::vector<std::string>* warnings) {
  s.classify(warnings);
  std::vector<std::vector<Root>> by_level;  // index 2*k + (endpoint - 1)
  for (Eigen::Index k = 0; k < p.grid.size(); ++k)
    for (int e : {1, 2}) by_level.push_back(s.roots(e, k, warnings));
  return by_level;
}

}  // namespace

std::vector<StationaryCandidate> stationary_candidates(const Problem& p, std::vector<std::string>* warnings) {
  p.validate();
  Searcher s(p);
  std::vector<StationaryCandidate> out;
  for (const auto& level : all_roots(s, p, warnings))
    for (const Root& r : level) out.push_back({r.x, {r.endpoint, p.grid[r.level], r.residual}});
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.x != b.x) return a.x < b.x;
    if (a.witness.alpha != b.witness.alpha) return a.witness.alpha < b.witness.alpha;
    return a.witness.endpoint < b.witness.endpoint;
  });
  return out;
}

std::vector<StationaryPoint> find_stationary(const Problem& p, std::vector<std::string>* warnings) {
  p.validate();
  Searcher s(p);
  const auto by_level = all_roots(s, p, warnings);
  const double link_radius = 10.0 * p.config.root_tol;
  const double spacing = (p.domain.hi - p.domain.lo) / (p.config.x_scan_points - 1);

  struct Chain {
    std::vector<Root> points;
  };
  std::vector<Chain> chains;
  for (int e : {1, 2}) {
    std::vector<std::size_t> open;  // chains ending at the previous level
    for (Eigen::Index k = 0; k < p.grid.size(); ++k) {
      const std::vector<Root>& here = by_level[static_cast<std::size_t>(2 * k + (e - 1))];
      std::vector<bool> claimed(here.size(), false);
      std::vector<std::size_t> next_open;
      for (std::size_t c : open) {
        const Root& last = chains[c].points.back();
        const auto xn = s.continue_root(e, last.x, p.grid[k]);
        if (!xn) continue;
        std::optional<std::size_t> best;
        for (std::size_t r = 0; r < here.size(); ++r) {
          if (claimed[r]) continue;
          const double d = std::abs(here[r].x - *xn);
          if (d <= std::max(link_radius, 0.5 * spacing) && (!best || d < std::abs(here[*best].x - *xn))) best = r;
        }
        if (!best) continue;
        claimed[*best] = true;
        chains[c].points.push_back(here[*best]);
        next_open.push_back(c);
      }
      for (std::size_t r = 0; r < here.size(); ++r) {
        if (claimed[r]) continue;
        chains.push_back({{here[r]}});
        next_open.push_back(chains.size() - 1);
      }
      open = std::move(next_open);
    }
  }

  // Each chain is represented by its root at the highest level.
  std::vector<std::size_t> order(chains.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Root& ra = chains[a].points.back();
    const Root& rb = chains[b].points.back();
    if (ra.x != rb.x) return ra.x < rb.x;
    return ra.level > rb.level;
  });

  std::vector<StationaryPoint> out;
  std::vector<Root> heads;
  for (std::size_t idx : order) {
    const Chain& c = chains[idx];
    const Root& head = c.points.back();
    Branch b{head.endpoint, p.grid[c.points.front().level], c.points.front().x, p.grid[head.level], head.x,
             static_cast<int>(c.points.size())};
    if (!out.empty() && std::abs(head.x - out.back().x_star) <= link_radius) {
      out.back().branches.push_back(b);
      Root& best = heads.back();
      if (head.level > best.level || (head.level == best.level && head.endpoint < best.endpoint)) {
        best = head;
        out.back().x_star = head.x;
        out.back().witness = {head.endpoint, p.grid[head.level], head.residual};
      }
      continue;
    }
    StationaryPoint sp;
    sp.x_star = head.x;
    sp.witness = {head.endpoint, p.grid[head.level], head.residual};
    sp.branches.push_back(b);
    out.push_back(std::move(sp));
    heads.push_back(head);
  }
  for (StationaryPoint& sp : out) sp.fuzzy_point = p.family.instantiate(sp.x_star, p.grid);
  return out;
}

SufficiencyEvidence sufficiency_check(const Problem& p, const StationaryPoint& s) {
  p.validate();
  const LevelEvaluator ev(p.objective, p.family);
  const DerivativeOptions opts = p.derivative_options();
  SufficiencyEvidence ev_out;
  bool have_min = false;
  std::vector<double> failed;
  std::string first_failure;

  auto scan = [&](double x) -> std::optional<DerivativeResult> {
    try {
      DerivativeResult d = second_derivative(ev, x, p.grid, opts);
      if (!d.differentiable()) {
        if (first_failure.empty()) first_failure = d.reason_text;
        return std::nullopt;
      }
      return d;
    } catch (const Error& err) {
      if (first_failure.empty()) first_failure = err.what();
      return std::nullopt;
    }
  };

  for (double x : p.scan_points(p.config.x_scan_points)) {
    const auto d = scan(x);
    if (!d) {
      failed.push_back(x);
      continue;
    }
    ++ev_out.points_checked;
    for (Eigen::Index k = 0; k < p.grid.size(); ++k) {
      const double v = d->raw_lower(k);
      if (!have_min || v < ev_out.min_f1pp) {
        have_min = true;
        ev_out.min_f1pp = v;
        ev_out.min_at_x = x;
        ev_out.min_at_alpha = p.grid[k];
      }
    }
  }

  const auto core = scan(s.x_star);
  if (core) ev_out.core_f1pp = core->raw_lower(p.grid.size() - 1);

  const double tol = p.config.root_tol;
  std::ostringstream why;
  if (failed.empty() && have_min && ev_out.min_f1pp >= -tol) {
    ev_out.verdict = SufficiencyVerdict::GlobalNonDominated;
    why << "f1'' >= 0 at all " << ev_out.points_checked << " scan points and " << p.grid.size() << " levels";
  } else if (core && ev_out.core_f1pp > tol) {
    ev_out.verdict = SufficiencyVerdict::LocalNonDominated;
    why << "f1''(x*, 1) = " << ev_out.core_f1pp << " > 0";
    if (!failed.empty()) why << "; second derivative undefined at " << failed.size() << " scan point(s)";
    else why << "; f1'' = " << ev_out.min_f1pp << " at x=" << ev_out.min_at_x << ", alpha=" << ev_out.min_at_alpha;
  } else {
    ev_out.verdict = SufficiencyVerdict::Inconclusive;
    if (!core) why << "second derivative undefined at x*: " << first_failure;
    else if (!failed.empty()) why << "second derivative undefined at " << failed.size() << " scan point(s): " << first_failure;
    else
      why << "f1'' = " << ev_out.min_f1pp << " at x=" << ev_out.min_at_x << ", alpha=" << ev_out.min_at_alpha
          << " and f1''(x*, 1) = " << ev_out.core_f1pp;
  }
  ev_out.reason = why.str();
  return ev_out;
}

BruteCheck verify_nondominated(const Problem& p, double x_star) {
  p.validate();
  const LevelEvaluator ev(p.objective, p.family);
  const Eigen::Index n = p.grid.size();
  auto cuts = [&](double x, Eigen::ArrayXd& lo, Eigen::ArrayXd& hi) {
    for (Eigen::Index k = 0; k < n; ++k) std::tie(lo(k), hi(k)) = ev.levels(x, p.grid[k]);
  };
  Eigen::ArrayXd slo(n), shi(n), lo(n), hi(n);
  cuts(x_star, slo, shi);

  BruteCheck out;
  const int count = p.config.effective_brute_points();
  double best_margin = 0.0;
  for (double x : p.scan_points(count)) {
    ++out.points;
    if (std::abs(x - x_star) <= 1e-12 * std::max(1.0, std::abs(x_star))) continue;
    cuts(x, lo, hi);
    if (compare_cuts(lo, hi, slo, shi, p.config.dominance_tol) != Dominance::Strict) continue;
    // Report the most clearly dominating point.
    const double margin = std::max((slo - lo).maxCoeff(), (shi - hi).maxCoeff());
    if (!out.counterexample || margin > best_margin) {
      out.counterexample = x;
      best_margin = margin;
    }
    out.passed = false;
  }
  return out;
}

SolveReport solve(const Problem& p) {
  p.validate();
  SolveReport r;
  r.stationary = find_stationary(p, &r.warnings);
  for (const StationaryPoint& s : r.stationary) {
    r.sufficiency.push_back(sufficiency_check(p, s));
    r.brute_check.push_back(verify_nondominated(p, s));
  }
  return r;
}

}  // namespace fuzzcalc
