#include <doctest.h>

#include <fuzzcalc/family.hpp>

#include <cmath>
#include <random>
#include <vector>

using namespace fuzzcalc;

namespace {

std::vector<Family> builtins() {
  return {Family::triangular_offset(1, 1),
          Family::triangular_offset(0.3, 2.5),
          Family::trapezoidal_offset(1, 0.5, 0.5, 1),
          Family::trapezoidal_offset(2, 0.1, 1.0, 3),
          Family::gaussian(1.0),
          Family::gaussian(0.4, 1e-3),
          Family::lr(1, 2, ShapeFn::power(2.0), ShapeFn::identity())};
}

}  // namespace

TEST_CASE("instantiate examples") {
  const FuzzyNumber a = Family::triangular_offset(1, 1).instantiate(2.0);
  CHECK(distance(a, make_triangular(1, 2, 3)) <= 1e-12);
  CHECK(Family::triangular_offset(0, 0).instantiate(4.25).is_crisp());
  CHECK(Family::triangular_offset(0, 0).instantiate(4.25).lower()(7) == 4.25);

  const FuzzyNumber t = Family::trapezoidal_offset(1, 0.5, 0.5, 1).instantiate(1.0);
  for (Eigen::Index k = 0; k < t.size(); ++k) {
    const double al = t.grid()[k];
    CHECK(std::abs(t.lower()(k) - al / 2) <= 1e-12);
    CHECK(std::abs(t.upper()(k) - (2 - al / 2)) <= 1e-12);
  }
}

TEST_CASE("endpoints examples") {
  const auto e = Family::triangular_offset(1, 1).endpoints(1.0, 0.0);
  CHECK(e.lo == 0.0);
  CHECK(e.hi == 2.0);
  const auto peak = Family::triangular_offset(1, 1).endpoints(7.5, 1.0);
  CHECK(peak.lo == peak.hi);

  const double a = std::exp(-2.0);
  const auto g = Family::gaussian(1.0).endpoints(0.0, a);
  CHECK(std::abs(g.lo + 2.0) <= 1e-12);
  CHECK(std::abs(g.hi - 2.0) <= 1e-12);
  // Membership inversion oracle.
  CHECK(std::abs(std::exp(-0.5 * g.hi * g.hi) - a) <= 1e-14);
}

TEST_CASE("endpoint_derivatives examples") {
  for (double al : {0.0, 0.3, 1.0}) {
    CHECK(Family::triangular_offset(1, 1).endpoint_derivatives(3.0, al, 1) == std::pair{1.0, 1.0});
    CHECK(Family::triangular_offset(1, 1).endpoint_derivatives(3.0, al, 2) == std::pair{0.0, 0.0});
    CHECK(Family::gaussian(1.0).endpoint_derivatives(-2.0, al, 1) == std::pair{1.0, 1.0});
  }
  // Finite-difference oracle for the gaussian first derivative.
  const Family g = Family::gaussian(1.0);
  const double h = 1e-5;
  const double fd = (g.endpoints(0.7 + h, 0.4).lo - g.endpoints(0.7 - h, 0.4).lo) / (2 * h);
  CHECK(std::abs(fd - 1.0) <= 1e-6);
  CHECK_THROWS_AS(g.endpoint_derivatives(0.0, 0.5, 3), InvalidParameter);
}

TEST_CASE("invalid family parameters") {
  CHECK_THROWS_AS(Family::triangular_offset(-1, 1), InvalidParameter);
  CHECK_THROWS_AS(Family::trapezoidal_offset(1, 2, 0.5, 1), InvalidParameter);
  CHECK_THROWS_AS(Family::gaussian(0.0), InvalidParameter);
  CHECK_THROWS_AS(Family::custom(CustomFamily{}), InvalidParameter);
}

TEST_CASE("custom family requires every callback and uses them") {
  CustomFamily fns;
  fns.lower = [](double x, double a) { return x * x - (1 - a); };
  fns.upper = [](double x, double a) { return x * x + (1 - a); };
  fns.d_lower = fns.d_upper = [](double x, double) { return 2 * x; };
  CHECK_THROWS_AS(Family::custom(fns), InvalidParameter);
  fns.d2_lower = fns.d2_upper = [](double, double) { return 2.0; };
  const Family f = Family::custom(fns);
  CHECK_FALSE(f.is_translation());
  CHECK(f.endpoint_derivatives(3.0, 0.5, 1) == std::pair{6.0, 6.0});
  CHECK(f.endpoint_derivatives(3.0, 0.5, 2) == std::pair{2.0, 2.0});
  CHECK(f.endpoints(2.0, 0.0).lo == 3.0);
}

TEST_CASE("property: first derivatives match central differences") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> ux(-50.0, 50.0), ua(0.0, 1.0);
  const double h = 1e-5;
  for (const Family& fam : builtins()) {
    for (int i = 0; i < 200; ++i) {
      const double x = ux(rng), al = ua(rng);
      const auto [d1, d2] = fam.endpoint_derivatives(x, al, 1);
      const auto p = fam.endpoints(x + h, al), m = fam.endpoints(x - h, al);
      const double f1 = (p.lo - m.lo) / (2 * h), f2 = (p.hi - m.hi) / (2 * h);
      CHECK(std::abs(d1 - f1) <= 1e-6 * (1 + std::abs(d1)));
      CHECK(std::abs(d2 - f2) <= 1e-6 * (1 + std::abs(d2)));
    }
  }
}

TEST_CASE("property: instantiate validates across the range") {
  for (const Family& fam : builtins()) {
    for (int i = 0; i <= 200; ++i) {
      const double x = -100.0 + i;
      const ValidityReport r = validate(fam.instantiate(x));
      REQUIRE_MESSAGE(r.valid(), std::string(fam.name()) << " at " << x << ": " << r.summary());
    }
  }
}

TEST_CASE("property: translation by c shifts endpoints") {
  std::mt19937_64 rng(22);
  std::uniform_int_distribution<int> ui(-100, 100);
  std::uniform_real_distribution<double> ua(0.0, 1.0);
  for (const Family& fam : builtins()) {
    REQUIRE(fam.is_translation());
    for (int i = 0; i < 200; ++i) {
      // Dyadic shifts keep the sums exact.
      const double x = ui(rng) / 8.0, c = ui(rng) / 4.0, al = ua(rng);
      const auto base = fam.endpoints(x, al), shifted = fam.endpoints(x + c, al);
      const auto zero = fam.endpoints(0.0, al);
      CHECK(shifted.lo - base.lo == doctest::Approx(c).epsilon(1e-12));
      CHECK(shifted.hi - base.hi == doctest::Approx(c).epsilon(1e-12));
      CHECK(base.lo == doctest::Approx(zero.lo + x).epsilon(1e-12));
    }
  }
}
