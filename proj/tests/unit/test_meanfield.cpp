#include <doctest.h>

#include <cmath>
#include <string>

#include "fmopto/errors.hpp"
#include "fmopto/meanfield.hpp"
#include "device_params.hpp"

using namespace fmopto;

namespace {

const cplx I{0.0, 1.0};

// omega_m = 1 so rates read directly in reduced units.
PhysicalParams unit_device(double delta_c, double kappa, double gamma, double g) {
  PhysicalParams p;
  p.omega_m = 1.0;
  p.omega_l = 100.0;
  p.omega_c = p.omega_l + delta_c;
  p.kappa = kappa;
  p.gamma = gamma;
  p.g = g;
  return p;
}

}  // namespace

TEST_CASE("steady mean fields: zero drive") {
  const PhysicalParams p = fmopto::testing::device();
  const SteadyMeanField mf = steady_mean_fields(p, 0.0);
  CHECK(mf.state.alpha == cplx{});
  CHECK(mf.state.beta == cplx{});
  CHECK(mf.delta_c_prime == doctest::Approx(p.delta_c()).epsilon(1e-15));
  CHECK(mf.G == cplx{});
}

TEST_CASE("steady mean fields: no coupling is a linear solve") {
  const PhysicalParams p = unit_device(0.7, 0.05, 1e-3, 0.0);
  const double E = 3.0;
  const SteadyMeanField mf = steady_mean_fields(p, E);
  const cplx expect = -I * E / cplx(0.025, 0.7);
  CHECK(std::abs(mf.state.alpha - expect) <= 1e-13 * std::abs(expect));
  CHECK(mf.state.beta == cplx{});
  CHECK(mf.delta_c_prime == doctest::Approx(0.7).epsilon(1e-13));
}

TEST_CASE("steady mean fields: residuals and self-consistency") {
  const PhysicalParams p = unit_device(1.2, 0.0189, 3e-6, 1.9e-5);
  const double E = 2000.0;
  const SteadyMeanField mf = steady_mean_fields(p, E);
  CHECK(mf.residuals.max() < 1e-12);

  // Evaluate the three relations independently.
  const double d = mf.delta_c_prime;
  const cplx a = -I * E / cplx(0.5 * p.kappa, d);
  const cplx b = I * p.g * std::norm(a) / cplx(0.5 * p.gamma, 1.0);
  CHECK(std::abs(mf.state.alpha - a) <= 1e-11 * std::abs(a));
  CHECK(std::abs(mf.state.beta - b) <= 1e-11 * std::abs(b));
  CHECK(d == doctest::Approx(1.2 - 2.0 * p.g * b.real()).epsilon(1e-11));
  CHECK(std::abs(mf.G - p.g * mf.state.alpha) < 1e-15);
  // Radiation pressure pushes the detuning down for red driving.
  CHECK(d < 1.2);
}

TEST_CASE("steady mean fields: drive phase only rotates alpha") {
  // Phase of E enters only through alpha; the solver takes |E|, so compare
  // against a rotated copy of its own alpha.
  const PhysicalParams p = unit_device(1.0, 0.02, 1e-4, 2e-5);
  const SteadyMeanField a = steady_mean_fields(p, 1500.0);
  const double phi = 0.83;
  const cplx rotated = a.state.alpha * std::exp(I * phi);
  CHECK(std::abs(rotated) == doctest::Approx(std::abs(a.state.alpha)).epsilon(1e-15));
  // beta and Delta' depend on |alpha| only.
  const cplx b = I * p.g * std::norm(rotated) / cplx(0.5 * p.gamma, 1.0);
  CHECK(std::abs(b - a.state.beta) <= 1e-12 * std::abs(b));
}

TEST_CASE("steady mean fields: amplitude for a target coupling") {
  const double g = kTwoPi * 200.0;
  const double wm = kTwoPi * 10.56e6;
  CHECK(amplitude_for_coupling(wm, g) == doctest::Approx(52800.0).epsilon(1e-12));
}

TEST_CASE("steady mean fields: stalled iteration reports the branches") {
  // Red-detuned device with a far upper branch: three roots of the intensity
  // cubic. Cap the iteration so it cannot finish.
  const PhysicalParams p = unit_device(1.2, 0.0189, 3e-6, 1.9e-5);
  MeanFieldSolverOptions opt;
  opt.max_iterations = 2;
  try {
    steady_mean_fields(p, 1500.0, opt);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(std::string(e.what()).find("3 steady branch(es) (multistable)") != std::string::npos);
  }
  // uncapped, the iteration settles on the lightly shifted branch
  CHECK(steady_mean_fields(p, 1500.0).delta_c_prime > 1.1);
}

TEST_CASE("steady mean fields: single branch beyond the fold") {
  // Above the fold the damped map cycles; the cubic has one root, which must
  // satisfy all three relations.
  const PhysicalParams p = unit_device(0.1, 1e-2, 1e-6, 1e-3);
  const SteadyMeanField mf = steady_mean_fields(p, 20.0);
  CHECK(mf.iterations > 10000);
  CHECK(mf.residuals.max() < 1e-12);
  const double d = mf.delta_c_prime;
  const cplx a = -I * 20.0 / cplx(0.5 * p.kappa, d);
  CHECK(std::abs(mf.state.alpha - a) <= 1e-12 * std::abs(a));
  const cplx b = I * p.g * std::norm(a) / cplx(0.5 * p.gamma, 1.0);
  CHECK(std::abs(mf.state.beta - b) <= 1e-11 * std::abs(b));
  CHECK(d == doctest::Approx(0.1 - 2.0 * p.g * b.real()).epsilon(1e-11));
  // pushed past the resonance: a single, blue-shifted branch
  CHECK(d < 0.0);
}

TEST_CASE("mean-field integration: pure decay without drive") {
  ReducedParams r = fmopto::testing::point(0.0, 0.0, 1.0, 0.0);
  r.kappa = 0.3;
  r.g = 0.0;
  r.E = 0.0;
  const cplx a0{2.0, -1.0};
  MeanFieldIntegration span;
  span.t0 = 0.0;
  span.t1 = 20.0;
  span.stride = 50;
  span.step.steps_per_period = 2048;
  const MeanFieldTrajectory tr = integrate_mean_fields(r, {a0, cplx{}}, span);
  REQUIRE(tr.times.size() == tr.states.size());
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    const double expect = std::abs(a0) * std::exp(-0.5 * r.kappa * tr.times[i]);
    CHECK(std::abs(tr.states[i].alpha) == doctest::Approx(expect).epsilon(1e-9));
    if (i > 0) CHECK(tr.times[i] > tr.times[i - 1]);
  }
}

TEST_CASE("mean-field integration: energies decay monotonically when uncoupled") {
  ReducedParams r = fmopto::testing::point(0.0, 0.0, 1.0, 0.0);
  r.kappa = 0.2;
  r.gamma = 0.05;
  MeanFieldIntegration span;
  span.t1 = 30.0;
  span.stride = 10;
  span.step.steps_per_period = 2048;
  const MeanFieldTrajectory tr = integrate_mean_fields(r, {cplx{1.0, 1.0}, cplx{0.5, -2.0}}, span);
  for (std::size_t i = 1; i < tr.states.size(); ++i) {
    CHECK(std::norm(tr.states[i].alpha) < std::norm(tr.states[i - 1].alpha));
    CHECK(std::norm(tr.states[i].beta) < std::norm(tr.states[i - 1].beta));
    const double t = tr.times[i];
    CHECK(std::norm(tr.states[i].beta) == doctest::Approx(4.25 * std::exp(-r.gamma * t)).epsilon(1e-8));
  }
}

TEST_CASE("mean-field integration: static long-time limit is the fixed point") {
  // Larger gamma than the device so the mechanical ring-down fits in the test.
  const PhysicalParams p = unit_device(1.0, 0.5, 0.2, 1e-3);
  const double E = 40.0;
  const SteadyMeanField mf = steady_mean_fields(p, E);

  ReducedParams r;
  r.delta_c_prime = mf.delta_c_prime;
  r.kappa = p.kappa;
  r.gamma = p.gamma;
  r.g = p.g;
  r.E = E;
  r.xi = 0.0;
  r.nu = 1.0;
  MeanFieldIntegration span;
  span.t1 = 400.0;
  span.stride = 1000000;
  const MeanFieldTrajectory tr = integrate_mean_fields(r, {}, span);
  const MeanFieldState last = tr.states.back();
  CHECK(std::abs(last.alpha - mf.state.alpha) <= 1e-8 * std::abs(mf.state.alpha));
  CHECK(std::abs(last.beta - mf.state.beta) <= 1e-8 * std::abs(mf.state.beta));
}

TEST_CASE("mean-field integration: modulated orbit is periodic") {
  ReducedParams r = fmopto::testing::point(0.0, 1.5, 10.0, 0.0);
  r.kappa = 0.5;
  r.gamma = 0.3;
  r.g = 1e-3;
  r.E = 5.0;
  const double T = kTwoPi / r.nu;
  MeanFieldIntegration span;
  span.t1 = 300.0 * T;
  const MeanFieldTrajectory tr = integrate_mean_fields(r, {}, span);
  const long per = resolve_step(span.step, r.nu).steps_per_period;
  REQUIRE(per > 0);
  const std::size_t n = tr.states.size();
  for (long k = 0; k < per; k += 7) {
    const auto& a = tr.states[n - 1 - static_cast<std::size_t>(k)];
    const auto& b = tr.states[n - 1 - static_cast<std::size_t>(k + per)];
    CHECK(std::abs(a.alpha - b.alpha) <= 1e-9 * std::abs(a.alpha));
    CHECK(std::abs(a.beta - b.beta) <= 1e-9 * std::abs(a.beta) + 1e-15);
  }
}

TEST_CASE("mean-field integration: divergence bound") {
  ReducedParams r = fmopto::testing::point(0.0, 0.0, 1.0, 0.0);
  r.kappa = 0.0;
  r.delta_c_prime = 0.0;
  r.E = 10.0;
  MeanFieldIntegration span;
  span.t1 = 100.0;
  span.alpha_bound = 50.0;
  CHECK_THROWS_AS(integrate_mean_fields(r, {}, span), DivergenceError);
}
