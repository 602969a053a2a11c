#pragma once

#include <optional>

namespace fmopto {

/// Fixed-step resolution rule shared by every integrator in the library.
///
/// The step resolves both the modulation and the mechanical oscillation:
/// dt <= 2*pi/(nu*steps_per_period) and dt <= 2*pi/steps_per_mech_period
/// (times in units of 1/omega_m). Without an explicit `dt` the step is chosen
/// so that an integer number of steps spans one modulation period exactly.
struct StepPolicy {
  int steps_per_period = 128;
  int steps_per_mech_period = 64;
  std::optional<double> dt;
};

struct ResolvedStep {
  double dt = 0.0;
  /// Steps per modulation period, or 0 when an explicit dt does not divide it.
  long steps_per_period = 0;
};

/// Throws StepPolicyError when an explicit dt fails the resolution rule or
/// the policy itself is malformed.
ResolvedStep resolve_step(const StepPolicy& policy, double nu);

}  // namespace fmopto
