#include "fuzzcalc/family.hpp"

#include <cmath>
#include <sstream>

namespace fuzzcalc {

namespace {

void check_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    std::ostringstream os;
    os << "alpha " << alpha << " outside [0,1]";
    throw RangeError(os.str());
  }
}

void check_spread(double v, const char* what) {
  if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidParameter(std::string(what) + " must be finite and >= 0");
}

// Offsets of the endpoints relative to x for the translation kinds.
struct OffsetVisitor {
  double alpha;

  std::pair<double, double> operator()(const TriangularOffset& k) const {
    return {-k.l * (1.0 - alpha), k.r * (1.0 - alpha)};
  }
  std::pair<double, double> operator()(const TrapezoidalOffset& k) const {
    return {-k.l + alpha * (k.l - k.inner_l), k.r - alpha * (k.r - k.inner_r)};
  }
  std::pair<double, double> operator()(const GaussianSpread& k) const {
    const double half = detail::gaussian_half_width(k.sigma, alpha, k.alpha_min);
    return {-half, half};
  }
  std::pair<double, double> operator()(const LeftRightOffset& k) const {
    return {-k.l + k.l * k.left.inverse(alpha), k.r - k.r * k.right.inverse(alpha)};
  }
  std::pair<double, double> operator()(const CustomFamily&) const { return {0.0, 0.0}; }
};

}  // namespace

Family Family::triangular_offset(double l, double r) {
  check_spread(l, "triangular offset l");
  check_spread(r, "triangular offset r");
  return Family(TriangularOffset{l, r});
}

Family Family::trapezoidal_offset(double l, double inner_l, double inner_r, double r) {
  for (double v : {l, inner_l, inner_r, r})
    if (!std::isfinite(v)) throw InvalidParameter("trapezoidal offsets must be finite");
  if (!(l >= inner_l && r >= inner_r && inner_l + inner_r >= 0.0))
    throw InvalidParameter("trapezoidal offsets require l >= inner_l, r >= inner_r and a non-empty core");
  return Family(TrapezoidalOffset{l, inner_l, inner_r, r});
}

Family Family::gaussian(double sigma, double alpha_min) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InvalidParameter("gaussian family requires sigma > 0");
  if (!(alpha_min > 0.0 && alpha_min < 1.0)) throw InvalidParameter("gaussian alpha_min must lie in (0,1)");
  return Family(GaussianSpread{sigma, alpha_min});
}

Family Family::lr(double l, double r, ShapeFn left, ShapeFn right) {
  check_spread(l, "LR spread l");
  check_spread(r, "LR spread r");
  left.check();
  right.check();
  return Family(LeftRightOffset{l, r, std::move(left), std::move(right)});
}

Family Family::custom(CustomFamily fns) {
  if (!fns.lower || !fns.upper) throw InvalidParameter("custom family needs both endpoint functions");
  if (!fns.d_lower || !fns.d_upper || !fns.d2_lower || !fns.d2_upper)
    throw InvalidParameter("custom family '" + fns.name +
                           "' must supply first and second derivative callbacks for both endpoints");
  return Family(std::move(fns));
}

std::string_view Family::name() const {
  return std::visit(
      [](const auto& k) -> std::string_view {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, TriangularOffset>) return "triangular_offset";
        else if constexpr (std::is_same_v<T, TrapezoidalOffset>) return "trapezoidal_offset";
        else if constexpr (std::is_same_v<T, GaussianSpread>) return "gaussian";
        else if constexpr (std::is_same_v<T, LeftRightOffset>) return "lr";
        else return k.name;
      },
      kind_);
}

Interval<double> Family::endpoints(double x, double alpha) const {
  check_alpha(alpha);
  if (auto c = std::get_if<CustomFamily>(&kind_)) return {c->lower(x, alpha), c->upper(x, alpha)};
  const auto [lo, hi] = std::visit(OffsetVisitor{alpha}, kind_);
  return {x + lo, x + hi};
}

std::pair<double, double> Family::endpoint_derivatives(double x, double alpha, int order) const {
  check_alpha(alpha);
  if (order != 1 && order != 2) throw InvalidParameter("endpoint derivative order must be 1 or 2");
  if (auto c = std::get_if<CustomFamily>(&kind_)) {
    if (order == 1) return {c->d_lower(x, alpha), c->d_upper(x, alpha)};
    return {c->d2_lower(x, alpha), c->d2_upper(x, alpha)};
  }
  return order == 1 ? std::pair{1.0, 1.0} : std::pair{0.0, 0.0};
}

FuzzyNumber Family::instantiate(double x, const AlphaGrid& grid) const {
  Eigen::ArrayXd lo(grid.size()), hi(grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const auto c = endpoints(x, grid[i]);
    lo(i) = c.lo;
    hi(i) = c.hi;
  }
  FuzzyNumber::Tag tag = std::visit(
      [x](const auto& k) -> FuzzyNumber::Tag {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, TriangularOffset>) return Triangular<double>{x - k.l, x, x + k.r};
        else if constexpr (std::is_same_v<T, TrapezoidalOffset>)
          return Trapezoidal<double>{x - k.l, x - k.inner_l, x + k.inner_r, x + k.r};
        else if constexpr (std::is_same_v<T, GaussianSpread>) return Gaussian<double>{x, k.sigma, k.alpha_min};
        else if constexpr (std::is_same_v<T, LeftRightOffset>) return LeftRight<double>{x, x, k.l, k.r};
        else return Generic{};
      },
      kind_);
  return FuzzyNumber(grid, std::move(lo), std::move(hi), std::move(tag));
}

}  // namespace fuzzcalc
