#ifndef FUZZCALC_JET_HPP
#define FUZZCALC_JET_HPP

#include <cmath>

namespace fuzzcalc {

// Truncated Taylor coefficients (f, f', f'') with respect to the crisp parameter.
template <typename Scalar>
struct Jet2 {
  Scalar value{};
  Scalar d1{};
  Scalar d2{};

  static Jet2 constant(Scalar v) { return {v, Scalar(0), Scalar(0)}; }

  bool finite() const { return std::isfinite(value) && std::isfinite(d1) && std::isfinite(d2); }

  // Derivative of the requested order; order 0 is the value.
  Scalar derivative(int order) const { return order == 0 ? value : order == 1 ? d1 : d2; }

  friend bool operator==(const Jet2&, const Jet2&) = default;
};

template <typename Scalar>
Jet2<Scalar> operator+(const Jet2<Scalar>& a, const Jet2<Scalar>& b) {
  return {a.value + b.value, a.d1 + b.d1, a.d2 + b.d2};
}

template <typename Scalar>
Jet2<Scalar> operator-(const Jet2<Scalar>& a, const Jet2<Scalar>& b) {
  return {a.value - b.value, a.d1 - b.d1, a.d2 - b.d2};
}

template <typename Scalar>
Jet2<Scalar> operator-(const Jet2<Scalar>& a) {
  return {-a.value, -a.d1, -a.d2};
}

template <typename Scalar>
Jet2<Scalar> operator*(const Jet2<Scalar>& a, const Jet2<Scalar>& b) {
  return {a.value * b.value, a.d1 * b.value + a.value * b.d1,
          a.d2 * b.value + Scalar(2) * a.d1 * b.d1 + a.value * b.d2};
}

template <typename Scalar>
Jet2<Scalar> operator*(Scalar k, const Jet2<Scalar>& a) {
  return {k * a.value, k * a.d1, k * a.d2};
}

template <typename Scalar>
Jet2<Scalar> exp(const Jet2<Scalar>& a) {
  using std::exp;
  const Scalar e = exp(a.value);
  return {e, e * a.d1, e * (a.d2 + a.d1 * a.d1)};
}

}  // namespace fuzzcalc

#endif  // FUZZCALC_JET_HPP
