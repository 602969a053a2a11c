#include <doctest.h>

#include <cmath>
#include <string>

#include "fmopto/errors.hpp"
#include "fmopto/sidebands.hpp"
#include "device_params.hpp"

using namespace fmopto;
using fmopto::testing::point;

namespace {

// Power series, only trusted for modest x.
double series_j(int k, double x) {
  const int n = std::abs(k);
  long double term = 1.0L;
  for (int i = 1; i <= n; ++i) term *= static_cast<long double>(x) / (2.0L * i);
  long double sum = term;
  const long double q = -0.25L * x * x;
  for (int m = 1; m < 200; ++m) {
    term *= q / (static_cast<long double>(m) * (m + n));
    sum += term;
    if (std::fabs(term) < 1e-30L) break;
  }
  const double v = static_cast<double>(sum);
  return (k < 0 && (n % 2)) ? -v : v;
}

}  // namespace

TEST_CASE("Bessel J against independent evaluations") {
  for (double x : {0.0, 1e-8, 0.3, 1.0, 2.2, 2.404825557695773, 3.5, 7.0, 12.5}) {
    for (int k = -40; k <= 40; ++k) {
      CHECK(std::abs(bessel_j(k, x) - series_j(k, x)) < 1e-12);
    }
  }
  for (double x : {0.5, 5.0, 17.3, 33.0, 49.9}) {
    for (int k = 0; k <= 120; k += 3) {
      CHECK(std::abs(bessel_j(k, x) - std::cyl_bessel_j(static_cast<double>(k), x)) < 1e-12);
    }
  }
}

TEST_CASE("Bessel J identities") {
  for (double x : {0.7, 2.2, 9.0, 25.0, 48.0}) {
    // parity in order and argument
    for (int k = 0; k <= 30; ++k) {
      const double sign = (k % 2) ? -1.0 : 1.0;
      CHECK(bessel_j(-k, x) == doctest::Approx(sign * bessel_j(k, x)).epsilon(1e-14));
      CHECK(bessel_j(k, -x) == doctest::Approx(sign * bessel_j(k, x)).epsilon(1e-14));
    }
    // three-term recurrence
    for (int k = 1; k < 80; ++k) {
      const double lhs = bessel_j(k - 1, x) + bessel_j(k + 1, x);
      CHECK(std::abs(lhs - 2.0 * k / x * bessel_j(k, x)) < 1e-11);
    }
    // completeness
    double total = 0.0;
    for (int k = -kMaxBesselOrder; k <= kMaxBesselOrder; ++k) total += bessel_j(k, x) * bessel_j(k, x);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("Bessel J reference values") {
  CHECK(bessel_j(0, 0.0) == 1.0);
  CHECK(bessel_j(3, 0.0) == 0.0);
  CHECK(bessel_j(0, 2.2) == doctest::Approx(0.1103622669).epsilon(1e-9));
  CHECK(std::abs(bessel_j(0, 2.4048)) < 1e-4);
  CHECK(std::abs(bessel_j(0, 2.404825557695773)) < 1e-14);
  CHECK(bessel_j(1, 1.0) == doctest::Approx(0.4400505857).epsilon(1e-9));
}

TEST_CASE("Bessel J decays past the turning point") {
  for (double x : {1.0, 2.2, 10.0, 30.0}) {
    for (int k = static_cast<int>(std::ceil(x)) + 1; k < 100; ++k) {
      CHECK(bessel_j(k + 1, x) < bessel_j(k, x));
      CHECK(bessel_j(k + 1, x) >= 0.0);
    }
  }
}

TEST_CASE("Bessel J domain errors") {
  CHECK_THROWS_AS(bessel_j(0, 50.5), InvalidArgument);
  CHECK_THROWS_AS(bessel_j(201, 1.0), InvalidArgument);
  CHECK_THROWS_AS(bessel_j(-201, 1.0), InvalidArgument);
  CHECK_NOTHROW(bessel_j(200, 50.0));
}

TEST_CASE("sideband table") {
  const ReducedParams r = point(1.0, 2.2, 30.0, 0.0, 0.8);
  const SidebandTable t = sideband_table(r);
  CHECK(t.K == default_truncation(2.2));
  CHECK(t.K == static_cast<int>(std::ceil(2.2 + 10.0 * std::cbrt(2.2) + 10.0)));
  REQUIRE(t.entries.size() == static_cast<std::size_t>(2 * t.K + 1));
  CHECK(t.residual_weight() < 1e-10);
  for (int k = -t.K; k <= t.K; ++k) {
    const Sideband& s = t.at(k);
    CHECK(s.k == k);
    CHECK(s.weight == bessel_j(k, 2.2));
    CHECK(s.bs_detuning == doctest::Approx(0.8 - 1.0 + 30.0 * k));
    CHECK(s.tms_detuning == doctest::Approx(0.8 + 1.0 + 30.0 * k));
  }

  const SidebandTable z = sideband_table(point(1.0, 0.0, 30.0, 0.0));
  CHECK(z.at(0).weight == 1.0);
  CHECK(z.residual_weight() == doctest::Approx(0.0));
}

TEST_CASE("sideband table truncation") {
  const ReducedParams r = point(1.0, 3.5, 30.0, 0.0);
  const int kmin = minimal_truncation(3.5);
  CHECK(kmin > 3);
  CHECK(kmin <= default_truncation(3.5));
  CHECK(sideband_table(r, kmin).residual_weight() < 1e-10);
  CHECK_THROWS_AS(sideband_table(r, kmin - 1), InvalidArgument);
  try {
    sideband_table(r, 2);
    FAIL("expected InvalidArgument");
  } catch (const InvalidArgument& e) {
    CHECK(std::string(e.what()).find("minimal adequate K is " + std::to_string(kmin)) != std::string::npos);
  }
  CHECK_THROWS_AS(sideband_table(r, -1), InvalidArgument);
}

TEST_CASE("nearest resonant sideband") {
  CHECK(nearest_resonant_index(1.0, 30.0) == 0);
  CHECK(nearest_resonant_index(-29.0, 30.0) == 1);
  CHECK(nearest_resonant_index(31.0, 30.0) == -1);
  CHECK(nearest_resonant_index(-58.0, 30.0) == 2);
  CHECK(nearest_resonant_index(15.0, 30.0) == 0);
  CHECK(nearest_resonant_index(16.0, 30.0) == 0);   // |15| vs |-15|: smaller |k|
  CHECK(nearest_resonant_index(46.0, 30.0) == -1);  // |45-30| vs |45-60|
  CHECK(nearest_resonant_index(-44.0, 30.0) == 1);
  CHECK(nearest_resonant_index(1.0, 0.5) == 0);
  CHECK(nearest_resonant_index(3.0, 0.5) == -4);
  CHECK_THROWS_AS(nearest_resonant_index(1.0, 0.0), InvalidArgument);
}

TEST_CASE("rotating-wave reduction") {
  SUBCASE("no modulation is the identity") {
    const ReducedParams r = point(0.3, 0.0, 30.0, 5.0);
    const RwaModel m = rwa_reduce(r);
    CHECK(m.k0 == 0);
    CHECK(m.weight == 1.0);
    CHECK(m.params.G_re == r.G_re);
    CHECK(m.params.delta_c_prime == r.delta_c_prime);
    CHECK(m.params.xi == 0.0);
    CHECK(m.params.n_th == r.n_th);
  }
  SUBCASE("central sideband") {
    const RwaModel m = rwa_reduce(point(2.5, 2.2, 30.0, 1000.0));
    CHECK(m.k0 == 0);
    CHECK(m.params.G_re == doctest::Approx(0.2759056673).epsilon(1e-9));
    CHECK(m.params.xi == 0.0);
    CHECK(m.validity.nu_over_omega_m == 30.0);
    double biggest = 0.0;
    for (int k = -30; k <= 30; ++k) biggest = std::max(biggest, std::abs(2.5 * bessel_j(k, 2.2)));
    CHECK(m.validity.nu_over_max_coupling == doctest::Approx(30.0 / biggest));
  }
  SUBCASE("Bessel zero switches the coupling off") {
    const RwaModel m = rwa_reduce(point(2.5, 2.4048, 30.0, 0.0));
    CHECK(std::abs(m.params.G_re) < 2.5e-4);
  }
  SUBCASE("shifted sideband") {
    const ReducedParams r = point(0.4, 1.5, 30.0, 0.0, -29.0);
    const RwaModel m = rwa_reduce(r);
    CHECK(m.k0 == 1);
    CHECK(m.weight == bessel_j(1, 1.5));
    CHECK(m.params.delta_c_prime == doctest::Approx(1.0));
    CHECK(m.params.G_re == doctest::Approx(0.4 * bessel_j(1, 1.5)));
  }
}
