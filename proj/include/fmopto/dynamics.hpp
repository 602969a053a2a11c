#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "fmopto/meanfield.hpp"
#include "fmopto/model.hpp"
#include "fmopto/step_policy.hpp"

namespace fmopto {

// Quadrature ordering throughout: u = (x, y, q, p), cavity first.
using Mat4 = Eigen::Matrix4d;
using DriftMatrix = Eigen::Matrix4d;
using CovarianceMatrix = Eigen::Matrix4d;

struct DiffusionMatrix {
  Eigen::Vector4d diag = Eigen::Vector4d::Zero();
  Mat4 dense() const { return diag.asDiagonal(); }
};

/// Instantaneous detuning Delta' + xi*nu*cos(nu*t).
double modulated_detuning(const ReducedParams& r, double t);

/// Linearized drift matrix at time t.
DriftMatrix build_drift(const ReducedParams& r, double t);

/// diag[kappa/2, kappa/2, gamma(2n_th+1)/2, gamma(2n_th+1)/2]
DiffusionMatrix build_diffusion(const ReducedParams& r);

/// Cavity vacuum times mechanical thermal state.
CovarianceMatrix initial_covariance(double n_th);

/// Standard symplectic form for (x, y, q, p).
Mat4 symplectic_form();

/// Minimum eigenvalue of the Hermitian matrix V + (i/2)*Omega.
double physicality_margin(const CovarianceMatrix& V);

/// Largest |V_ij - V_ji|.
double asymmetry(const CovarianceMatrix& V);

/// Both the uncertainty check (margin >= -tol) and symmetry to 1e-12.
bool is_physical(const CovarianceMatrix& V, double tol = 1e-6);

/// A V + V A^T + D
Mat4 covariance_rhs(const DriftMatrix& A, const DiffusionMatrix& D, const CovarianceMatrix& V);

/// RK4 stepping of dV/dt = A(t)V + VA(t)^T + D for one parameter point. The
/// only time-dependent entries of A are the two detuning slots, so the static
/// part is built once.
class CovarianceStepper {
 public:
  CovarianceStepper(const ReducedParams& r, double dt);

  /// Advances V from t to t + dt in place and re-symmetrizes.
  void step(CovarianceMatrix& V, double t) const;
  void step(CovarianceMatrix& V, double t, double h) const;

  double dt() const noexcept { return dt_; }

 private:
  Mat4 rhs(double t, const Mat4& V) const;

  ReducedParams params_;
  DriftMatrix static_drift_;
  Mat4 diffusion_;
  double dt_;
};

/// One step of the covariance evolution written as a Gaussian channel,
/// V -> X V X^T + Y.
struct StepChannel {
  Mat4 X = Mat4::Identity();
  Mat4 Y = Mat4::Zero();
  void apply(CovarianceMatrix& V) const;
};

/// Channel over [t, t+h]: X = exp(h M) with M the fourth-order Magnus
/// generator of A on the step (two Gauss points), Y the exact noise of the
/// frozen generator (Van Loan block exponential). For constant G the only
/// time-dependent part of A commutes with the damping, so M is a Hamiltonian
/// generator plus the physical damping and the step is completely positive:
/// V + (i/2)Omega >= 0 is kept to rounding.
StepChannel step_channel(const ReducedParams& r, double t, double h);

/// Channels for every step of one modulation period, reused period after
/// period. Falls back to per-step evaluation when dt does not divide it.
class ChannelPropagator {
 public:
  ChannelPropagator(const ReducedParams& r, const ResolvedStep& step, double t0 = 0.0);

  /// Advances V over step n (from t0 + n*dt) of length h.
  void step(CovarianceMatrix& V, long n, double h) const;

  /// Propagator of the homogeneous system over one modulation period.
  Mat4 monodromy() const;

 private:
  ReducedParams params_;
  double dt_;
  double t0_;
  std::vector<StepChannel> table_;
};

enum class Integrator { channel, rk4 };

std::string_view to_string(Integrator m);

struct CovarianceIntegration {
  Integrator method = Integrator::channel;
  double t0 = 0.0;
  double t1 = 0.0;
  StepPolicy step;
  /// Store V every `stride` steps; 0 means once per modulation period.
  long stride = 0;
  /// Number of trailing modulation periods stored at every step.
  int dense_tail_periods = 10;
  /// Divergence when any diagonal exceeds this multiple of its initial value.
  double divergence_factor = 1e12;
};

struct SimulationTrace {
  std::vector<double> times;
  std::vector<CovarianceMatrix> covariances;
  ReducedParams params;
  double dt = 0.0;
  long steps_per_period = 0;
  long steps = 0;
  std::string method = "magnus4-channel";
  /// Index into `times` where the dense tail begins.
  std::size_t dense_begin = 0;
  bool diverged = false;
  double divergence_time = 0.0;
};

/// Integrates the covariance equation of motion from V0. Divergence is
/// reported through `SimulationTrace::diverged`, with the trace truncated at
/// the offending step. Throws StepPolicyError for an unresolved step.
SimulationTrace integrate_covariance(const ReducedParams& r, const CovarianceMatrix& V0,
                                     const CovarianceIntegration& span);

/// Variant in which the coupling follows the mean field, G(t) = g*alpha(t),
/// with alpha and beta co-integrated from `initial` (uses r.g and r.E).
/// Not the canonical path; provided for comparison with constant G. Always
/// steps with RK4 (the channel form needs a frozen coupling).
SimulationTrace integrate_covariance_tracking(const ReducedParams& r, const CovarianceMatrix& V0,
                                              MeanFieldState initial,
                                              const CovarianceIntegration& span);

/// One modulation period of the asymptotic periodic state.
struct PeriodicState {
  std::vector<double> times;                 ///< 0, dt, ..., 2*pi/nu
  std::vector<CovarianceMatrix> covariances;  ///< first and last coincide
  double floquet_radius = 0.0;               ///< largest multiplier modulus
};

/// Periodic steady state: fixed point of the one-period channel,
/// V = X V X^T + Y, solved as a 16x16 linear system in extended precision.
/// Throws SolverError when the period map is not contracting or the solve
/// is ill-conditioned (cond > 1e12). Needs an aligned step policy.
PeriodicState periodic_steady_state(const ReducedParams& r, const StepPolicy& step = {});

/// Unique solution of A V + V A^T + D = 0 for Hurwitz A, via the 16x16
/// vectorized system. Throws SolverError for non-Hurwitz A or a condition
/// number above 1e12.
CovarianceMatrix lyapunov_steady(const DriftMatrix& A, const DiffusionMatrix& D);

/// max|A V + V A^T + D| / max|D|, accumulated in extended precision.
double lyapunov_residual(const DriftMatrix& A, const DiffusionMatrix& D, const CovarianceMatrix& V);

}  // namespace fmopto
