#ifndef FUZZCALC_CALCULUS_HPP
#define FUZZCALC_CALCULUS_HPP

#include "fuzzcalc/core.hpp"
#include "fuzzcalc/expr.hpp"
#include "fuzzcalc/family.hpp"
#include "fuzzcalc/jet.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fuzzcalc {

class EvaluationError : public Error {
 public:
  EvaluationError(const std::string& message, SourceSpan span) : Error(message), span_(span) {}
  SourceSpan span() const { return span_; }

 private:
  SourceSpan span_;
};

class NotDifferentiable : public Error {
 public:
  using Error::Error;
};

// Which one-sided limit decides the active candidate when product candidates tie.
enum class Side { Left, Right };

// A min/max tie inside a product node.
struct BranchEvent {
  std::size_t node = 0;
  SourceSpan span;
  double alpha = 0.0;
  double d1_gap = 0.0;  // spread of first derivatives among the tied candidates
  double d2_gap = 0.0;
  std::string description;
};

struct IntervalJet {
  Jet2<double> lo;
  Jet2<double> hi;
  std::vector<BranchEvent> branch_events;
};

// Compiled form of an expression over a family; evaluates both level functions
// together with their x-derivatives.
class LevelEvaluator {
 public:
  struct Instr;

  LevelEvaluator(const Expr& e, const Family& fam, double tie_eps = 1e-9, double kink_tol = 1e-7);
  ~LevelEvaluator();
  LevelEvaluator(const LevelEvaluator&);
  LevelEvaluator& operator=(const LevelEvaluator&);

  IntervalJet jets(double x, double alpha, Side side = Side::Right) const;
  std::pair<double, double> levels(double x, double alpha) const;

  // Chosen (lower, upper) candidate of every product node, in tape order.
  std::vector<std::uint8_t> signature(double x, double alpha) const;

  const Expr& expr() const { return expr_; }
  const Family& family() const { return family_; }
  std::size_t size() const;
  SourceSpan span_of(std::size_t node) const;
  std::vector<std::size_t> product_nodes() const;

 private:
  IntervalJet run(double x, double alpha, Side side, bool record, std::vector<std::uint8_t>* sig) const;

  Expr expr_;
  Family family_;
  double tie_eps_;
  double kink_tol_;
  std::vector<Instr> tape_;
};

std::pair<double, double> eval_levels(const Expr& e, const Family& fam, double x, double alpha);

// Throws EvaluationError if the computed cuts are not nested.
FuzzyNumber eval_fuzzy(const Expr& e, const Family& fam, double x, const AlphaGrid& grid = AlphaGrid::uniform());

struct DerivativeOptions {
  // Crisp range of x; near its ends only the inward one-sided derivative is required.
  std::optional<Interval<double>> domain;
  double fd_step = 1e-5;
  double fd_tol = 1e-6;
  double probe_step = 1e-4;
  double tie_eps = 1e-9;
  double kink_tol = 1e-7;
};

enum class Verdict { Yes, MarginalTies, No };
enum class FailureReason { None, Kink, FiniteDifferenceMismatch, NotNested };

const char* to_string(Verdict v);
const char* to_string(FailureReason r);

struct Witness {
  std::optional<std::size_t> node;
  SourceSpan span;
  double x = 0.0;
  double alpha = 0.0;
  std::string description;
};

struct LevelDiagnostic {
  double alpha = 0.0;
  double ad_lo = 0.0, ad_hi = 0.0;
  double fd_lo = 0.0, fd_hi = 0.0;
  // |ad - fd| / (1 + |ad|), worse of the two endpoints.
  double residual = 0.0;
  std::string stencil;
};

struct DerivativeResult {
  int order = 1;
  double x = 0.0;
  AlphaGrid grid;
  Eigen::ArrayXd raw_lower;  // derivative of the lower level function
  Eigen::ArrayXd raw_upper;  // derivative of the upper level function
  std::optional<FuzzyNumber> fuzzy;
  Verdict verdict = Verdict::Yes;
  FailureReason reason = FailureReason::None;
  std::string reason_text;
  std::vector<Witness> witnesses;
  std::vector<Witness> ties;
  std::vector<LevelDiagnostic> diagnostics;
  double max_fd_residual = 0.0;

  bool differentiable() const { return verdict != Verdict::No; }
};

DerivativeResult derivative(const LevelEvaluator& ev, double x, const AlphaGrid& grid = AlphaGrid::uniform(),
                            const DerivativeOptions& opts = {});
DerivativeResult derivative(const Expr& e, const Family& fam, double x, const AlphaGrid& grid = AlphaGrid::uniform(),
                            const DerivativeOptions& opts = {});

// Requires a differentiable first derivative at x and x +- probe_step (inside the domain);
// throws NotDifferentiable otherwise.
DerivativeResult second_derivative(const LevelEvaluator& ev, double x, const AlphaGrid& grid = AlphaGrid::uniform(),
                                   const DerivativeOptions& opts = {});
DerivativeResult second_derivative(const Expr& e, const Family& fam, double x,
                                   const AlphaGrid& grid = AlphaGrid::uniform(), const DerivativeOptions& opts = {});

struct ContinuityOptions {
  std::uint64_t seed = 20240611;
  AlphaGrid grid = AlphaGrid::uniform();
  double max_delta = 1024.0;
  int max_bisections = 200;
};

struct ContinuitySample {
  double x = 0.0;
  double distance = 0.0;
};

struct ContinuityReport {
  double eps = 0.0;
  double delta_est = 0.0;
  bool capped = false;  // every tested delta up to max_delta passed
  int verification_samples = 0;
  std::vector<ContinuitySample> violations;
  // Smallest failing sample seen just beyond delta_est.
  std::optional<ContinuitySample> boundary_witness;
};

// Estimates the largest delta with d_F(f(x), f(x0)) < eps for all sampled |x - x0| < delta.
ContinuityReport continuity_probe(const Expr& e, const Family& fam, double x0, double eps, int trials,
                                  const ContinuityOptions& opts = {});

}  // namespace fuzzcalc

#endif  // FUZZCALC_CALCULUS_HPP
