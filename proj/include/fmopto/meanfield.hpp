#pragma once

#include <complex>
#include <vector>

#include "fmopto/model.hpp"
#include "fmopto/step_policy.hpp"

namespace fmopto {

using cplx = std::complex<double>;

/// Classical displacements of the cavity (alpha) and mechanical (beta) modes.
struct MeanFieldState {
  cplx alpha{};
  cplx beta{};
};

struct MeanFieldResiduals {
  double alpha = 0.0;
  double beta = 0.0;
  double delta = 0.0;
  double max() const noexcept;
};

struct SteadyMeanField {
  MeanFieldState state;
  double delta_c_prime = 0.0;  ///< rad/s
  cplx G{};                    ///< g*alpha, rad/s
  int iterations = 0;
  MeanFieldResiduals residuals;
};

struct MeanFieldSolverOptions {
  double damping = 0.5;
  int max_iterations = 10000;
  double tolerance = 1e-12;
};

/// Static (xi = 0) fixed point of
///   alpha = -iE/(kappa/2 + i*Delta'),
///   beta = i*g*|alpha|^2/(gamma/2 + i*omega_m),
///   Delta' = Delta_c - g*(beta + beta*),
/// by damped iteration on Delta'. `E` in rad/s.
/// When the iteration hits its cap, the cubic for |alpha|^2 is solved
/// directly and a single positive root is accepted if it meets the same
/// tolerance. Otherwise throws ConvergenceError with the last residuals and
/// the branches found (multistability is reported, not resolved).
SteadyMeanField steady_mean_fields(const PhysicalParams& params, double E,
                                   const MeanFieldSolverOptions& options = {});

/// |alpha| needed for a target linearized coupling.
inline double amplitude_for_coupling(double G, double g) { return G / g; }

struct MeanFieldTrajectory {
  std::vector<double> times;
  std::vector<MeanFieldState> states;
};

struct MeanFieldIntegration {
  double t0 = 0.0;
  double t1 = 0.0;
  StepPolicy step;
  long stride = 1;              ///< store every `stride` steps
  double alpha_bound = 1e12;    ///< divergence threshold on |alpha|
};

/// Integrates the modulated mean-field equations in reduced units:
///   alpha' = -i(Delta' + xi*nu*cos(nu*t))alpha - kappa/2*alpha - iE
///   beta'  = -i*beta - gamma/2*beta + i*g*|alpha|^2
/// using reduced.E and reduced.g. Throws DivergenceError when |alpha|
/// exceeds the bound.
MeanFieldTrajectory integrate_mean_fields(const ReducedParams& reduced, MeanFieldState initial,
                                          const MeanFieldIntegration& span);

}  // namespace fmopto
