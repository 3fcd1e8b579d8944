#ifndef FUZZCALC_CORE_HPP
#define FUZZCALC_CORE_HPP

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

namespace fuzzcalc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

inline constexpr double kNestTolerance = 1e-9;
inline constexpr Eigen::Index kDefaultLevels = 101;
inline constexpr double kDefaultGaussianAlphaMin = 1e-4;

template <typename Scalar>
struct Interval {
  Scalar lo{};
  Scalar hi{};

  Scalar width() const { return hi - lo; }
  Scalar mid() const { return (lo + hi) / Scalar(2); }
  // `inner` lies inside this interval up to `tol` at either end.
  bool contains(const Interval& inner, Scalar tol = Scalar(0)) const {
    return lo <= inner.lo + tol && inner.hi <= hi + tol;
  }
  bool contains(Scalar v) const { return lo <= v && v <= hi; }

  friend bool operator==(const Interval&, const Interval&) = default;
};

using IntervalD = Interval<double>;

// Discretization of the membership parameter: strictly increasing levels
// starting at 0 and ending at 1.
class AlphaGrid {
 public:
  AlphaGrid() : AlphaGrid(uniform()) {}

  explicit AlphaGrid(Eigen::ArrayXd levels) : levels_(std::move(levels)) {
    if (levels_.size() < 2) throw InvalidParameter("alpha grid needs at least two levels");
    if (levels_(0) != 0.0 || levels_(levels_.size() - 1) != 1.0)
      throw InvalidParameter("alpha grid must start at 0 and end at 1");
    for (Eigen::Index i = 1; i < levels_.size(); ++i) {
      if (!(levels_(i) > levels_(i - 1)))
        throw InvalidParameter("alpha grid levels must be strictly increasing");
    }
  }

  static AlphaGrid uniform(Eigen::Index count = kDefaultLevels) {
    if (count < 2) throw InvalidParameter("alpha grid needs at least two levels");
    Eigen::ArrayXd levels(count);
    for (Eigen::Index i = 0; i < count; ++i)
      levels(i) = static_cast<double>(i) / static_cast<double>(count - 1);
    return AlphaGrid(std::move(levels));
  }

  // Union of the two level sets.
  static AlphaGrid merge(const AlphaGrid& a, const AlphaGrid& b) {
    std::vector<double> all(a.levels_.data(), a.levels_.data() + a.size());
    all.insert(all.end(), b.levels_.data(), b.levels_.data() + b.size());
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    return AlphaGrid(Eigen::Map<Eigen::ArrayXd>(all.data(), static_cast<Eigen::Index>(all.size())));
  }

  Eigen::Index size() const { return levels_.size(); }
  double operator[](Eigen::Index i) const { return levels_(i); }
  const Eigen::ArrayXd& levels() const { return levels_; }

  // Index i with levels[i] <= alpha <= levels[i + 1]; alpha must lie in [0, 1].
  Eigen::Index bracket(double alpha) const {
    const double* first = levels_.data();
    const double* last = first + levels_.size();
    auto it = std::upper_bound(first, last, alpha);
    Eigen::Index i = static_cast<Eigen::Index>(it - first) - 1;
    return std::clamp<Eigen::Index>(i, 0, levels_.size() - 2);
  }

  std::optional<Eigen::Index> find(double alpha, double tol = 0.0) const {
    for (Eigen::Index i = 0; i < levels_.size(); ++i)
      if (std::abs(levels_(i) - alpha) <= tol) return i;
    return std::nullopt;
  }

  friend bool operator==(const AlphaGrid& a, const AlphaGrid& b) {
    return a.size() == b.size() && (a.levels_ == b.levels_).all();
  }

 private:
  Eigen::ArrayXd levels_;
};

// Parametric descriptors carried along with the cuts.
template <typename Scalar>
struct Triangular {
  Scalar left, peak, right;
  friend bool operator==(const Triangular&, const Triangular&) = default;
};

template <typename Scalar>
struct Trapezoidal {
  Scalar a, b, c, d;
  friend bool operator==(const Trapezoidal&, const Trapezoidal&) = default;
};

template <typename Scalar>
struct Gaussian {
  Scalar mu, sigma;
  double alpha_min = kDefaultGaussianAlphaMin;
  friend bool operator==(const Gaussian&, const Gaussian&) = default;
};

// Shape functions are not part of the tag; only the anchor parameters are.
template <typename Scalar>
struct LeftRight {
  Scalar lower_core, upper_core, left_spread, right_spread;
  friend bool operator==(const LeftRight&, const LeftRight&) = default;
};

struct Generic {
  friend bool operator==(const Generic&, const Generic&) = default;
};

template <typename Scalar>
using ShapeTag = std::variant<Generic, Triangular<Scalar>, Trapezoidal<Scalar>, Gaussian<Scalar>,
                              LeftRight<Scalar>>;

namespace detail {

template <typename Scalar>
Interval<Scalar> triangular_cut(const Triangular<Scalar>& t, double alpha) {
  return {t.left + Scalar(alpha) * (t.peak - t.left), t.right - Scalar(alpha) * (t.right - t.peak)};
}

template <typename Scalar>
Interval<Scalar> trapezoidal_cut(const Trapezoidal<Scalar>& t, double alpha) {
  return {t.a + Scalar(alpha) * (t.b - t.a), t.d - Scalar(alpha) * (t.d - t.c)};
}

inline double gaussian_half_width(double sigma, double alpha, double alpha_min) {
  const double clamped = std::max(alpha, alpha_min);
  return std::sqrt(-2.0 * sigma * sigma * std::log(clamped));
}

template <typename Scalar>
Interval<Scalar> gaussian_cut(const Gaussian<Scalar>& g, double alpha) {
  const Scalar half = Scalar(gaussian_half_width(double(g.sigma), alpha, g.alpha_min));
  return {g.mu - half, g.mu + half};
}

}  // namespace detail

// Invertible non-decreasing map [0,1] -> [0,1] used by LR fuzzy numbers.
class ShapeFn {
 public:
  using Map = std::function<double(double)>;

  explicit ShapeFn(Map value, Map inverse = {}, std::string name = "custom",
                   std::optional<double> exponent = std::nullopt)
      : value_(std::move(value)),
        inverse_(std::move(inverse)),
        name_(std::move(name)),
        exponent_(exponent) {
    if (!value_) throw InvalidParameter("shape function needs a value map");
  }

  static ShapeFn identity() {
    return ShapeFn([](double t) { return t; }, [](double a) { return a; }, "identity", 1.0);
  }

  static ShapeFn power(double p) {
    if (!(p > 0.0) || !std::isfinite(p)) throw InvalidParameter("shape exponent must be positive");
    return ShapeFn([p](double t) { return std::pow(t, p); },
                   [p](double a) { return std::pow(a, 1.0 / p); }, "power", p);
  }

  double operator()(double t) const { return value_(t); }

  // Closed-form inverse when supplied, otherwise bisection on the monotone map.
  double inverse(double alpha) const {
    if (inverse_) return inverse_(alpha);
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
      const double mid = 0.5 * (lo + hi);
      (value_(mid) < alpha ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }

  const std::string& name() const { return name_; }
  const std::optional<double>& exponent() const { return exponent_; }

  // Endpoint conditions and monotonicity on a uniform sample.
  void check(int samples = 1001) const {
    if (std::abs(value_(0.0)) > 1e-12 || std::abs(value_(1.0) - 1.0) > 1e-12)
      throw ShapeError("shape function '" + name_ + "' must satisfy L(0)=0 and L(1)=1");
    double prev = value_(0.0);
    for (int i = 1; i < samples; ++i) {
      const double t = static_cast<double>(i) / (samples - 1);
      const double v = value_(t);
      if (!std::isfinite(v) || v < prev - 1e-15 || v < -1e-15 || v > 1.0 + 1e-15) {
        std::ostringstream os;
        os << "shape function '" << name_ << "' is not monotone in [0,1] near t=" << t;
        throw ShapeError(os.str());
      }
      prev = v;
    }
  }

 private:
  Map value_;
  Map inverse_;
  std::string name_;
  std::optional<double> exponent_;
};

// A fuzzy number stored as its nested alpha-cuts on a fixed grid.
template <typename Scalar>
class BasicFuzzyNumber {
 public:
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
  using Tag = ShapeTag<Scalar>;

  BasicFuzzyNumber(AlphaGrid grid, Array lower, Array upper, Tag tag = Generic{})
      : grid_(std::move(grid)), lower_(std::move(lower)), upper_(std::move(upper)), tag_(std::move(tag)) {
    if (lower_.size() != grid_.size() || upper_.size() != grid_.size())
      throw InvalidParameter("cut count does not match the alpha grid");
  }

  static BasicFuzzyNumber crisp(Scalar value, const AlphaGrid& grid = AlphaGrid::uniform()) {
    return BasicFuzzyNumber(grid, Array::Constant(grid.size(), value), Array::Constant(grid.size(), value),
                            Triangular<Scalar>{value, value, value});
  }

  const AlphaGrid& grid() const { return grid_; }
  const Array& lower() const { return lower_; }
  const Array& upper() const { return upper_; }
  const Tag& tag() const { return tag_; }
  Eigen::Index size() const { return grid_.size(); }

  Interval<Scalar> cut(Eigen::Index level) const { return {lower_(level), upper_(level)}; }
  Interval<Scalar> support() const { return cut(0); }
  Interval<Scalar> core() const { return cut(size() - 1); }

  bool is_crisp(Scalar tol = Scalar(0)) const {
    const Scalar v = lower_(0);
    return ((lower_ - v).abs() <= tol).all() && ((upper_ - v).abs() <= tol).all();
  }

  // Cuts at the levels of `target`: exact for parametric tags, interpolated otherwise.
  BasicFuzzyNumber resampled(const AlphaGrid& target) const;

  friend bool operator==(const BasicFuzzyNumber& a, const BasicFuzzyNumber& b) {
    return a.grid_ == b.grid_ && (a.lower_ == b.lower_).all() && (a.upper_ == b.upper_).all() &&
           a.tag_ == b.tag_;
  }

 private:
  AlphaGrid grid_;
  Array lower_;
  Array upper_;
  Tag tag_;
};

using FuzzyNumber = BasicFuzzyNumber<double>;

template <typename Scalar>
Interval<Scalar> alpha_cut(const BasicFuzzyNumber<Scalar>& f, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    std::ostringstream os;
    os << "alpha " << alpha << " outside [0,1]";
    throw RangeError(os.str());
  }
  const AlphaGrid& g = f.grid();
  const Eigen::Index i = g.bracket(alpha);
  if (alpha == g[i]) return f.cut(i);
  if (alpha == g[i + 1]) return f.cut(i + 1);
  const Scalar w = Scalar((alpha - g[i]) / (g[i + 1] - g[i]));
  return {f.lower()(i) + w * (f.lower()(i + 1) - f.lower()(i)),
          f.upper()(i) + w * (f.upper()(i + 1) - f.upper()(i))};
}

template <typename Scalar>
BasicFuzzyNumber<Scalar> BasicFuzzyNumber<Scalar>::resampled(const AlphaGrid& target) const {
  if (target == grid_) return *this;
  Array lo(target.size()), hi(target.size());
  for (Eigen::Index i = 0; i < target.size(); ++i) {
    const double a = target[i];
    Interval<Scalar> c = std::visit(
        [&](const auto& t) -> Interval<Scalar> {
          using T = std::decay_t<decltype(t)>;
          if constexpr (std::is_same_v<T, Triangular<Scalar>>) return detail::triangular_cut(t, a);
          else if constexpr (std::is_same_v<T, Trapezoidal<Scalar>>) return detail::trapezoidal_cut(t, a);
          else if constexpr (std::is_same_v<T, Gaussian<Scalar>>) return detail::gaussian_cut(t, a);
          else return alpha_cut(*this, a);
        },
        tag_);
    lo(i) = c.lo;
    hi(i) = c.hi;
  }
  return BasicFuzzyNumber(target, std::move(lo), std::move(hi), tag_);
}

template <typename Scalar = double>
BasicFuzzyNumber<Scalar> make_triangular(std::type_identity_t<Scalar> left, std::type_identity_t<Scalar> peak,
                                         std::type_identity_t<Scalar> right,
                                         const AlphaGrid& grid = AlphaGrid::uniform()) {
  if (!(left <= peak && peak <= right))
    throw InvalidParameter("triangular fuzzy number requires left <= peak <= right");
  const Triangular<Scalar> tag{left, peak, right};
  typename BasicFuzzyNumber<Scalar>::Array lo(grid.size()), hi(grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const auto c = detail::triangular_cut(tag, grid[i]);
    lo(i) = c.lo;
    hi(i) = c.hi;
  }
  return BasicFuzzyNumber<Scalar>(grid, std::move(lo), std::move(hi), tag);
}

template <typename Scalar = double>
BasicFuzzyNumber<Scalar> make_trapezoidal(std::type_identity_t<Scalar> a, std::type_identity_t<Scalar> b,
                                          std::type_identity_t<Scalar> c, std::type_identity_t<Scalar> d,
                                          const AlphaGrid& grid = AlphaGrid::uniform()) {
  if (!(a <= b && b <= c && c <= d))
    throw InvalidParameter("trapezoidal fuzzy number requires a <= b <= c <= d");
  const Trapezoidal<Scalar> tag{a, b, c, d};
  typename BasicFuzzyNumber<Scalar>::Array lo(grid.size()), hi(grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const auto cut = detail::trapezoidal_cut(tag, grid[i]);
    lo(i) = cut.lo;
    hi(i) = cut.hi;
  }
  return BasicFuzzyNumber<Scalar>(grid, std::move(lo), std::move(hi), tag);
}

// Cuts below alpha_min are clamped to the alpha_min cut, which keeps the support compact.
template <typename Scalar = double>
BasicFuzzyNumber<Scalar> make_gaussian(std::type_identity_t<Scalar> mu, std::type_identity_t<Scalar> sigma,
                                       double alpha_min = kDefaultGaussianAlphaMin,
                                       const AlphaGrid& grid = AlphaGrid::uniform()) {
  if (!(sigma > Scalar(0))) throw InvalidParameter("gaussian fuzzy number requires sigma > 0");
  if (!(alpha_min > 0.0 && alpha_min < 1.0)) throw InvalidParameter("gaussian alpha_min must lie in (0,1)");
  const Gaussian<Scalar> tag{mu, sigma, alpha_min};
  typename BasicFuzzyNumber<Scalar>::Array lo(grid.size()), hi(grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const auto cut = detail::gaussian_cut(tag, grid[i]);
    lo(i) = cut.lo;
    hi(i) = cut.hi;
  }
  return BasicFuzzyNumber<Scalar>(grid, std::move(lo), std::move(hi), tag);
}

inline FuzzyNumber make_lr(double lower_core, double upper_core, double left_spread, double right_spread,
                           const ShapeFn& left, const ShapeFn& right,
                           const AlphaGrid& grid = AlphaGrid::uniform()) {
  if (!(left_spread >= 0.0 && right_spread >= 0.0))
    throw InvalidParameter("LR spreads must be non-negative");
  if (!(lower_core <= upper_core)) throw InvalidParameter("LR fuzzy number requires lower_core <= upper_core");
  left.check();
  right.check();
  Eigen::ArrayXd lo(grid.size()), hi(grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    lo(i) = (lower_core - left_spread) + left_spread * left.inverse(grid[i]);
    hi(i) = (upper_core + right_spread) - right_spread * right.inverse(grid[i]);
  }
  return FuzzyNumber(grid, std::move(lo), std::move(hi),
                     LeftRight<double>{lower_core, upper_core, left_spread, right_spread});
}

namespace detail {

template <typename Scalar>
std::optional<Trapezoidal<Scalar>> as_trapezoid(const ShapeTag<Scalar>& tag) {
  if (auto t = std::get_if<Triangular<Scalar>>(&tag)) return Trapezoidal<Scalar>{t->left, t->peak, t->peak, t->right};
  if (auto t = std::get_if<Trapezoidal<Scalar>>(&tag)) return *t;
  return std::nullopt;
}

template <typename Scalar>
ShapeTag<Scalar> narrow(const Trapezoidal<Scalar>& t) {
  if (t.b == t.c) return Triangular<Scalar>{t.a, t.b, t.d};
  return t;
}

template <typename Scalar>
ShapeTag<Scalar> sum_tag(const ShapeTag<Scalar>& a, const ShapeTag<Scalar>& b) {
  auto ta = as_trapezoid(a), tb = as_trapezoid(b);
  if (ta && tb) return narrow(Trapezoidal<Scalar>{ta->a + tb->a, ta->b + tb->b, ta->c + tb->c, ta->d + tb->d});
  return Generic{};
}

template <typename Scalar>
ShapeTag<Scalar> difference_tag(const ShapeTag<Scalar>& a, const ShapeTag<Scalar>& b) {
  auto ta = as_trapezoid(a), tb = as_trapezoid(b);
  if (ta && tb) return narrow(Trapezoidal<Scalar>{ta->a - tb->d, ta->b - tb->c, ta->c - tb->b, ta->d - tb->a});
  return Generic{};
}

template <typename Scalar>
ShapeTag<Scalar> scaled_tag(Scalar k, const ShapeTag<Scalar>& a) {
  if (auto t = as_trapezoid(a)) {
    if (k >= Scalar(0)) return narrow(Trapezoidal<Scalar>{k * t->a, k * t->b, k * t->c, k * t->d});
    return narrow(Trapezoidal<Scalar>{k * t->d, k * t->c, k * t->b, k * t->a});
  }
  if (auto g = std::get_if<Gaussian<Scalar>>(&a); g && k != Scalar(0))
    return Gaussian<Scalar>{k * g->mu, std::abs(k) * g->sigma, g->alpha_min};
  return Generic{};
}

template <typename Scalar>
std::pair<BasicFuzzyNumber<Scalar>, BasicFuzzyNumber<Scalar>> align(const BasicFuzzyNumber<Scalar>& a,
                                                                     const BasicFuzzyNumber<Scalar>& b) {
  if (a.grid() == b.grid()) return {a, b};
  const AlphaGrid merged = AlphaGrid::merge(a.grid(), b.grid());
  return {a.resampled(merged), b.resampled(merged)};
}

}  // namespace detail

template <typename Scalar>
BasicFuzzyNumber<Scalar> add(const BasicFuzzyNumber<Scalar>& a, const BasicFuzzyNumber<Scalar>& b) {
  auto [x, y] = detail::align(a, b);
  return BasicFuzzyNumber<Scalar>(x.grid(), x.lower() + y.lower(), x.upper() + y.upper(),
                                  detail::sum_tag(x.tag(), y.tag()));
}

template <typename Scalar>
BasicFuzzyNumber<Scalar> sub(const BasicFuzzyNumber<Scalar>& a, const BasicFuzzyNumber<Scalar>& b) {
  auto [x, y] = detail::align(a, b);
  return BasicFuzzyNumber<Scalar>(x.grid(), x.lower() - y.upper(), x.upper() - y.lower(),
                                  detail::difference_tag(x.tag(), y.tag()));
}

template <typename Scalar>
BasicFuzzyNumber<Scalar> mul(const BasicFuzzyNumber<Scalar>& a, const BasicFuzzyNumber<Scalar>& b) {
  auto [x, y] = detail::align(a, b);
  using Array = typename BasicFuzzyNumber<Scalar>::Array;
  const Array p1 = x.lower() * y.lower();
  const Array p2 = x.lower() * y.upper();
  const Array p3 = x.upper() * y.lower();
  const Array p4 = x.upper() * y.upper();
  Array lo = p1.min(p2).min(p3.min(p4));
  Array hi = p1.max(p2).max(p3.max(p4));
  ShapeTag<Scalar> tag = Generic{};
  if (x.is_crisp()) tag = detail::scaled_tag(x.lower()(0), y.tag());
  else if (y.is_crisp()) tag = detail::scaled_tag(y.lower()(0), x.tag());
  return BasicFuzzyNumber<Scalar>(x.grid(), std::move(lo), std::move(hi), tag);
}

template <typename Scalar>
BasicFuzzyNumber<Scalar> scalar_mul(std::type_identity_t<Scalar> k, const BasicFuzzyNumber<Scalar>& a) {
  if (k >= Scalar(0))
    return BasicFuzzyNumber<Scalar>(a.grid(), k * a.lower(), k * a.upper(), detail::scaled_tag<Scalar>(k, a.tag()));
  return BasicFuzzyNumber<Scalar>(a.grid(), k * a.upper(), k * a.lower(), detail::scaled_tag<Scalar>(k, a.tag()));
}

template <typename Scalar>
BasicFuzzyNumber<Scalar> operator+(const BasicFuzzyNumber<Scalar>& a, const BasicFuzzyNumber<Scalar>& b) {
  return add(a, b);
}

template <typename Scalar>
BasicFuzzyNumber<Scalar> operator-(const BasicFuzzyNumber<Scalar>& a, const BasicFuzzyNumber<Scalar>& b) {
  return sub(a, b);
}

template <typename Scalar>
BasicFuzzyNumber<Scalar> operator-(const BasicFuzzyNumber<Scalar>& a) {
  return scalar_mul<Scalar>(Scalar(-1), a);
}

template <typename Scalar>
BasicFuzzyNumber<Scalar> operator*(const BasicFuzzyNumber<Scalar>& a, const BasicFuzzyNumber<Scalar>& b) {
  return mul(a, b);
}

template <typename Scalar>
BasicFuzzyNumber<Scalar> operator*(std::type_identity_t<Scalar> k, const BasicFuzzyNumber<Scalar>& a) {
  return scalar_mul<Scalar>(k, a);
}

// Supremum over grid levels of the Hausdorff distance between cuts.
template <typename Scalar>
Scalar distance(const BasicFuzzyNumber<Scalar>& a, const BasicFuzzyNumber<Scalar>& b) {
  auto [x, y] = detail::align(a, b);
  return (x.lower() - y.lower()).abs().max((x.upper() - y.upper()).abs()).maxCoeff();
}

struct NestingViolation {
  Eigen::Index outer = 0;  // lower alpha level
  Eigen::Index inner = 0;  // higher alpha level, whose cut escapes the outer one
  double alpha_outer = 0.0;
  double alpha_inner = 0.0;
  double amount = 0.0;
};

struct ValidityReport {
  std::optional<NestingViolation> worst_nesting;
  std::vector<Eigen::Index> inverted_levels;
  bool empty_core = false;
  bool unbounded_support = false;

  bool valid() const {
    return !worst_nesting && inverted_levels.empty() && !empty_core && !unbounded_support;
  }

  std::string summary() const {
    if (valid()) return "valid";
    std::ostringstream os;
    const char* sep = "";
    if (worst_nesting) {
      os << "nesting violation: cut at alpha=" << worst_nesting->alpha_inner
         << " escapes cut at alpha=" << worst_nesting->alpha_outer << " by " << worst_nesting->amount;
      sep = "; ";
    }
    if (!inverted_levels.empty()) {
      os << sep << inverted_levels.size() << " inverted interval(s)";
      sep = "; ";
    }
    if (empty_core) {
      os << sep << "empty 1-cut";
      sep = "; ";
    }
    if (unbounded_support) os << sep << "non-finite cut endpoints";
    return os.str();
  }
};

// Checks normality, nesting and bounded support at grid resolution. Tolerances are
// absolute up to unit magnitude and relative beyond it.
template <typename Scalar>
ValidityReport validate(const BasicFuzzyNumber<Scalar>& f, double tol = kNestTolerance) {
  ValidityReport report;
  const auto& lo = f.lower();
  const auto& hi = f.upper();
  const Eigen::Index n = f.size();
  auto band = [tol](double a, double b) { return tol * std::max({1.0, std::abs(a), std::abs(b)}); };

  for (Eigen::Index i = 0; i < n; ++i) {
    const double l = double(lo(i)), h = double(hi(i));
    if (!std::isfinite(l) || !std::isfinite(h)) {
      report.unbounded_support = true;
      continue;
    }
    if (l > h + band(l, h)) {
      if (i == n - 1) report.empty_core = true;
      else report.inverted_levels.push_back(i);
    }
  }
  if (report.unbounded_support) return report;

  // Running extremes of the lower cuts; a later level must stay inside all earlier ones.
  Eigen::Index lo_arg = 0, hi_arg = 0;
  double best = 0.0;
  NestingViolation worst;
  for (Eigen::Index j = 1; j < n; ++j) {
    if (double(lo(j - 1)) > double(lo(lo_arg))) lo_arg = j - 1;
    if (double(hi(j - 1)) < double(hi(hi_arg))) hi_arg = j - 1;
    const double lo_gap = double(lo(lo_arg)) - double(lo(j));
    const double hi_gap = double(hi(j)) - double(hi(hi_arg));
    if (lo_gap > band(double(lo(lo_arg)), double(lo(j))) && lo_gap > best) {
      best = lo_gap;
      worst = {lo_arg, j, f.grid()[lo_arg], f.grid()[j], lo_gap};
    }
    if (hi_gap > band(double(hi(hi_arg)), double(hi(j))) && hi_gap > best) {
      best = hi_gap;
      worst = {hi_arg, j, f.grid()[hi_arg], f.grid()[j], hi_gap};
    }
  }
  if (best > 0.0) report.worst_nesting = worst;
  return report;
}

}  // namespace fuzzcalc

#endif  // FUZZCALC_CORE_HPP
