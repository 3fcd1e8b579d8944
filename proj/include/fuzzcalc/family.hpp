#ifndef FUZZCALC_FAMILY_HPP
#define FUZZCALC_FAMILY_HPP

#include "fuzzcalc/core.hpp"

#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>

namespace fuzzcalc {

// x -> (x - l, x, x + r)
struct TriangularOffset {
  double l = 1.0;
  double r = 1.0;
};

// x -> (x - l, x - inner_l, x + inner_r, x + r)
struct TrapezoidalOffset {
  double l = 1.0;
  double inner_l = 0.5;
  double inner_r = 0.5;
  double r = 1.0;
};

// x -> gaussian membership centred at x, truncated at alpha_min.
struct GaussianSpread {
  double sigma = 1.0;
  double alpha_min = kDefaultGaussianAlphaMin;
};

// x -> ((x - l), x, x, (x + r))_{L,R}
struct LeftRightOffset {
  double l = 1.0;
  double r = 1.0;
  ShapeFn left = ShapeFn::identity();
  ShapeFn right = ShapeFn::identity();
};

// Arbitrary endpoint functions of (x, alpha). All six callbacks are required.
struct CustomFamily {
  using Fn = std::function<double(double, double)>;
  Fn lower, upper;
  Fn d_lower, d_upper;
  Fn d2_lower, d2_upper;
  std::string name = "custom";
};

// Fuzzification rule x -> x~ with endpoint functions x1(x, alpha), x2(x, alpha).
class Family {
 public:
  using Kind = std::variant<TriangularOffset, TrapezoidalOffset, GaussianSpread, LeftRightOffset, CustomFamily>;

  Family() : Family(TriangularOffset{}) {}

  static Family triangular_offset(double l, double r);
  static Family trapezoidal_offset(double l, double inner_l, double inner_r, double r);
  static Family gaussian(double sigma, double alpha_min = kDefaultGaussianAlphaMin);
  static Family lr(double l, double r, ShapeFn left, ShapeFn right);
  static Family custom(CustomFamily fns);

  const Kind& kind() const { return kind_; }
  std::string_view name() const;

  // Built-in kinds shift a fixed shape by x.
  bool is_translation() const { return !std::holds_alternative<CustomFamily>(kind_); }

  Interval<double> endpoints(double x, double alpha) const;

  // (dx1/dx, dx2/dx) for order 1, (d2x1/dx2, d2x2/dx2) for order 2.
  std::pair<double, double> endpoint_derivatives(double x, double alpha, int order) const;

  FuzzyNumber instantiate(double x, const AlphaGrid& grid = AlphaGrid::uniform()) const;

 private:
  explicit Family(Kind kind) : kind_(std::move(kind)) {}
  Kind kind_;
};

}  // namespace fuzzcalc

#endif  // FUZZCALC_FAMILY_HPP
