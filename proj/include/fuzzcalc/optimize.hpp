#ifndef FUZZCALC_OPTIMIZE_HPP
#define FUZZCALC_OPTIMIZE_HPP

#include "fuzzcalc/calculus.hpp"

#include <optional>
#include <string>
#include <vector>

namespace fuzzcalc {

enum class Dominance { None, Weak, Strict };

const char* to_string(Dominance d);

// Endpoint-wise order of cuts: Weak when a <= b at every level within tol, Strict when
// additionally some endpoint is below by more than tol. Both operands must share a grid.
Dominance dominates(const FuzzyNumber& a, const FuzzyNumber& b, double tol = 1e-9);

bool open_ball_contains(const FuzzyNumber& center, double radius, const FuzzyNumber& probe);

struct SolverConfig {
  int x_scan_points = 100;
  double root_tol = 1e-10;
  double dominance_tol = 1e-9;
  int max_bisect_iter = 50;
  int brute_points = 0;  // 0 selects 10 * x_scan_points

  int effective_brute_points() const { return brute_points > 0 ? brute_points : 10 * x_scan_points; }
};

// Minimize f(x~) over x~ = family(x), x in [domain.lo, domain.hi].
struct Problem {
  Expr objective = Expr::var();
  Family family;
  Interval<double> domain{0.0, 1.0};
  AlphaGrid grid = AlphaGrid::uniform();
  SolverConfig config;

  // Throws InvalidParameter when the invariants do not hold.
  void validate() const;
  DerivativeOptions derivative_options() const;
  // x_scan_points equally spaced points covering the domain, ends included.
  std::vector<double> scan_points(int count) const;
};

struct StationaryWitness {
  int endpoint = 1;  // 1 for the lower level function, 2 for the upper
  double alpha = 0.0;
  double residual = 0.0;
};

// A connected run of roots of one endpoint derivative across adjacent levels.
struct Branch {
  int endpoint = 1;
  double alpha_first = 0.0;
  double x_first = 0.0;
  double alpha_last = 0.0;
  double x_last = 0.0;
  int levels = 0;
};

struct StationaryCandidate {
  double x = 0.0;
  StationaryWitness witness;
};

struct StationaryPoint {
  double x_star = 0.0;
  StationaryWitness witness;
  FuzzyNumber fuzzy_point = FuzzyNumber::crisp(0.0);
  std::vector<Branch> branches;
};

// Every root of f1'(., alpha) and f2'(., alpha) over the grid levels, sorted by x then alpha.
std::vector<StationaryCandidate> stationary_candidates(const Problem& p, std::vector<std::string>* warnings = nullptr);

// Roots grouped into branches; one point per distinct branch representative.
std::vector<StationaryPoint> find_stationary(const Problem& p, std::vector<std::string>* warnings = nullptr);

enum class SufficiencyVerdict { GlobalNonDominated, LocalNonDominated, Inconclusive };

const char* to_string(SufficiencyVerdict v);

struct SufficiencyEvidence {
  SufficiencyVerdict verdict = SufficiencyVerdict::Inconclusive;
  double min_f1pp = 0.0;
  double min_at_x = 0.0;
  double min_at_alpha = 0.0;
  double core_f1pp = 0.0;  // f1'' at (x*, alpha = 1)
  int points_checked = 0;
  std::string reason;
};

SufficiencyEvidence sufficiency_check(const Problem& p, const StationaryPoint& s);

struct BruteCheck {
  bool passed = true;
  std::optional<double> counterexample;
  int points = 0;
};

BruteCheck verify_nondominated(const Problem& p, double x_star);
inline BruteCheck verify_nondominated(const Problem& p, const StationaryPoint& s) {
  return verify_nondominated(p, s.x_star);
}

struct SolveReport {
  std::vector<StationaryPoint> stationary;
  std::vector<SufficiencyEvidence> sufficiency;
  std::vector<BruteCheck> brute_check;
  std::vector<std::string> warnings;
};

SolveReport solve(const Problem& p);

}  // namespace fuzzcalc

#endif  // FUZZCALC_OPTIMIZE_HPP
