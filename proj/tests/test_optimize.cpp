#include <doctest.h>

#include <fuzzcalc/optimize.hpp>

#include "support/expr_gen.hpp"

#include <cmath>
#include <random>

using namespace fuzzcalc;

namespace {

const Family kTri = Family::triangular_offset(1, 1);

Problem make_problem(const std::string& text, Family fam, double lo, double hi) {
  Problem p;
  p.objective = parse(text);
  p.family = std::move(fam);
  p.domain = {lo, hi};
  return p;
}

Problem quadratic() { return make_problem("X*X - 4*X", kTri, 1, 5); }

FuzzyNumber random_nested(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-3.0, 3.0), w(0.0, 2.0);
  const double peak = u(rng);
  return make_triangular(peak - w(rng), peak, peak + w(rng));
}

}  // namespace

TEST_CASE("dominates examples") {
  const FuzzyNumber a = make_triangular(0, 1, 2);
  CHECK(dominates(a, a) == Dominance::Weak);
  CHECK(dominates(a, make_triangular(1, 2, 3)) == Dominance::Strict);
  CHECK(dominates(make_triangular(1, 2, 3), a) == Dominance::None);
  CHECK(dominates(a, make_triangular(1, 1, 1)) == Dominance::None);
  // Differences inside the band are not strict.
  CHECK(dominates(a, 1.0 * a + FuzzyNumber::crisp(5e-10)) == Dominance::Weak);
  CHECK_THROWS_AS(dominates(a, make_triangular(0, 1, 2, AlphaGrid::uniform(5))), InvalidParameter);
}

TEST_CASE("open_ball_contains examples") {
  const FuzzyNumber c = make_triangular(0, 1, 2), p = make_triangular(1, 2, 3);
  CHECK(open_ball_contains(c, 0.1, c));
  CHECK_FALSE(open_ball_contains(c, 1.0, p));
  CHECK(open_ball_contains(c, 1.5, p));
  CHECK_THROWS_AS(open_ball_contains(c, 0.0, p), InvalidParameter);
}

TEST_CASE("problem validation") {
  Problem p = quadratic();
  CHECK_NOTHROW(p.validate());
  p.domain = {2, 2};
  CHECK_THROWS_AS(p.validate(), InvalidParameter);
  p = quadratic();
  p.config.x_scan_points = 2;
  CHECK_THROWS_AS(p.validate(), InvalidParameter);
  const std::vector<double> s = quadratic().scan_points(5);
  CHECK(s == std::vector<double>{1, 2, 3, 4, 5});
}

TEST_CASE("find_stationary on the quadratic example") {
  const Problem p = quadratic();
  const std::vector<StationaryPoint> s = find_stationary(p);
  REQUIRE(s.size() == 1);
  CHECK(std::abs(s[0].x_star - 2.0) <= 1e-6);
  CHECK(distance(s[0].fuzzy_point, make_triangular(1, 2, 3)) <= 1e-9);
  CHECK(std::abs(s[0].witness.residual) <= p.config.root_tol);
  CHECK(s[0].witness.alpha == 1.0);
  // Both endpoint derivatives contribute a branch through the core.
  CHECK(s[0].branches.size() == 2);

  // Raw candidates cover every level; each carries its own root.
  const std::vector<StationaryCandidate> all = stationary_candidates(p);
  CHECK(all.size() >= 2 * 101 - 2);
  for (const StationaryCandidate& c : all) CHECK(std::abs(c.witness.residual) <= p.config.root_tol);
}

TEST_CASE("find_stationary simple cases") {
  CHECK(find_stationary(make_problem("X", kTri, 0, 1)).empty());

  const std::vector<StationaryPoint> q = find_stationary(make_problem("X*X", Family::triangular_offset(0, 0), -1, 1));
  REQUIRE(q.size() == 1);
  CHECK(std::abs(q[0].x_star) <= 1e-9);

  std::vector<std::string> warnings;
  find_stationary(make_problem("X*X", kTri, 0, 1), &warnings);
  CHECK_FALSE(warnings.empty());
}

TEST_CASE("sufficiency_check examples") {
  const Problem p = quadratic();
  const StationaryPoint s = find_stationary(p).front();
  const SufficiencyEvidence e = sufficiency_check(p, s);
  CHECK(e.verdict == SufficiencyVerdict::GlobalNonDominated);
  CHECK(std::abs(e.min_f1pp - 2.0) <= 1e-9);
  CHECK(e.points_checked == p.config.x_scan_points);

  const Problem crisp = make_problem("X*X", Family::triangular_offset(0, 0), -1, 1);
  const SufficiencyEvidence c = sufficiency_check(crisp, find_stationary(crisp).front());
  CHECK(c.verdict == SufficiencyVerdict::GlobalNonDominated);

  // Cubic: f'' = 6x changes sign over [-1, 1] and is 0 at the candidate.
  const Problem cubic = make_problem("X*X*X", Family::triangular_offset(0, 0), -1, 1);
  const std::vector<StationaryPoint> cs = find_stationary(cubic);
  REQUIRE_FALSE(cs.empty());
  const SufficiencyEvidence ce = sufficiency_check(cubic, cs.front());
  CHECK(ce.verdict == SufficiencyVerdict::Inconclusive);
  CHECK(ce.min_f1pp < 0.0);

  // Concave part away from the candidate: local only.
  const Problem local = make_problem("X*X*X - 3*X", Family::triangular_offset(0, 0), -2, 2);
  bool saw_local = false;
  for (const StationaryPoint& sp : find_stationary(local))
    if (std::abs(sp.x_star - 1.0) <= 1e-6) saw_local = sufficiency_check(local, sp).verdict == SufficiencyVerdict::LocalNonDominated;
  CHECK(saw_local);

  // A non-differentiable scan point makes the check inconclusive with a reason.
  const Problem corner = make_problem("X*X - 0.5*X", kTri, 0, 1);
  StationaryPoint fake;
  fake.x_star = 0.25;
  const SufficiencyEvidence ie = sufficiency_check(corner, fake);
  CHECK(ie.verdict == SufficiencyVerdict::Inconclusive);
  CHECK_FALSE(ie.reason.empty());
}

TEST_CASE("verify_nondominated examples") {
  const Problem p = quadratic();
  const BruteCheck ok = verify_nondominated(p, 2.0);
  CHECK(ok.passed);
  CHECK(ok.points == 1000);
  // f at x = 3 is not strictly dominated anywhere on [1, 5]: its levels trade off.
  CHECK(verify_nondominated(p, 3.0).passed);
  const BruteCheck bad = verify_nondominated(p, 4.0);
  CHECK_FALSE(bad.passed);
  REQUIRE(bad.counterexample);
  CHECK(std::abs(*bad.counterexample - 2.0) <= 0.01);
  // Substitution oracle for the counterexample.
  const FuzzyNumber at4 = eval_fuzzy(p.objective, p.family, 4.0, p.grid);
  const FuzzyNumber at_c = eval_fuzzy(p.objective, p.family, *bad.counterexample, p.grid);
  CHECK(dominates(at_c, at4) == Dominance::Strict);

  const Problem constant = make_problem("tri(0,1,2)", kTri, -3, 3);
  for (double x : {-3.0, 0.0, 1.7}) CHECK(verify_nondominated(constant, x).passed);
}

TEST_CASE("solve assembles the report") {
  const SolveReport r = solve(quadratic());
  REQUIRE(r.stationary.size() == 1);
  REQUIRE(r.sufficiency.size() == 1);
  REQUIRE(r.brute_check.size() == 1);
  CHECK(r.brute_check[0].passed);
  CHECK(r.warnings.empty());
  CHECK(solve(make_problem("X", kTri, 0, 1)).stationary.empty());
}

TEST_CASE("property: dominance is a preorder and strictness is asymmetric") {
  std::mt19937_64 rng(51);
  for (int i = 0; i < 500; ++i) {
    const FuzzyNumber a = random_nested(rng), b = random_nested(rng), c = random_nested(rng);
    CHECK(dominates(a, a) == Dominance::Weak);
    const Dominance ab = dominates(a, b), bc = dominates(b, c), ba = dominates(b, a);
    if (ab != Dominance::None && bc != Dominance::None) CHECK(dominates(a, c, 2e-9) != Dominance::None);
    if (ab == Dominance::Strict) CHECK(ba != Dominance::Strict);
  }
}

TEST_CASE("property: stationary points satisfy their witnesses") {
  const char* texts[] = {"X*X - 4*X", "exp(X) - 3*X", "tri(1,2,3)*X*X - 6*X", "X*X*X - 3*X*X + X"};
  for (const char* text : texts) {
    const Problem p = make_problem(text, kTri, 1, 5);
    const LevelEvaluator ev(p.objective, p.family);
    for (const StationaryPoint& s : find_stationary(p)) {
      const IntervalJet j = ev.jets(s.x_star, s.witness.alpha);
      const double g = s.witness.endpoint == 1 ? j.lo.d1 : j.hi.d1;
      CHECK_MESSAGE(std::abs(g) <= p.config.root_tol, text << " x*=" << s.x_star);
    }
  }
}

TEST_CASE("property: convex instances contain the core minimizer") {
  std::mt19937_64 rng(52);
  std::uniform_real_distribution<double> uc(-3.0, 3.0), ua(0.5, 3.0);
  for (int i = 0; i < 20; ++i) {
    const double a = ua(rng), b = uc(rng);
    Problem p;
    p.objective = Expr::sub(Expr::scalar_mul(a, Expr::mul(X, X)), Expr::scalar_mul(b, X));
    p.family = kTri;
    p.domain = {1, 6};
    const double minimizer = b / (2 * a);
    if (minimizer < 1.05 || minimizer > 5.95) continue;
    const SolveReport r = solve(p);
    for (std::size_t k = 0; k < r.stationary.size(); ++k) {
      if (r.sufficiency[k].verdict != SufficiencyVerdict::GlobalNonDominated || !r.brute_check[k].passed) continue;
      // Brute minimizer of f1(., 1) is the crisp minimizer of a x^2 - b x.
      bool found = false;
      for (const StationaryPoint& s : r.stationary) found |= std::abs(s.x_star - minimizer) <= 10 * p.config.root_tol;
      CHECK(found);
    }
  }
}

TEST_CASE("property: positive scaling keeps the stationary set") {
  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> uk(0.1, 10.0);
  const char* texts[] = {"X*X - 4*X", "exp(X) - 3*X", "X*X*X - 3*X*X + X"};
  for (const char* text : texts) {
    const Problem p = make_problem(text, kTri, 1, 5);
    Problem q = p;
    q.objective = Expr::scalar_mul(uk(rng), p.objective);
    const auto a = find_stationary(p), b = find_stationary(q);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i].x_star - b[i].x_star) <= 10 * p.config.root_tol);
  }
}
