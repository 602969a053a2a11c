#include "fmopto/step_policy.hpp"

#include <cmath>
#include <string>

#include "fmopto/errors.hpp"
#include "fmopto/model.hpp"

namespace fmopto {

ResolvedStep resolve_step(const StepPolicy& policy, double nu) {
  if (!(nu > 0.0) || !std::isfinite(nu)) throw StepPolicyError("modulation frequency must be positive");
  if (policy.steps_per_period < 1 || policy.steps_per_mech_period < 1)
    throw StepPolicyError("steps per period must be at least 1");

  const double period = kTwoPi / nu;
  const double limit_mod = period / policy.steps_per_period;
  const double limit_mech = kTwoPi / policy.steps_per_mech_period;

  if (policy.dt) {
    const double dt = *policy.dt;
    const double limit = std::min(limit_mod, limit_mech);
    if (!(dt > 0.0) || dt > limit * (1.0 + 1e-12))
      throw StepPolicyError("dt = " + std::to_string(dt) + " fails the resolution rule (dt <= " +
                            std::to_string(limit) + ")");
    const double n = std::round(period / dt);
    const bool aligned = n >= 1.0 && std::abs(n * dt - period) <= 1e-12 * period;
    return {dt, aligned ? static_cast<long>(n) : 0L};
  }

  // Smallest integer step count per modulation period meeting both limits.
  const long n_mech = static_cast<long>(std::ceil(policy.steps_per_mech_period / nu - 1e-12));
  const long n = std::max<long>(policy.steps_per_period, n_mech);
  return {period / static_cast<double>(n), n};
}

}  // namespace fmopto
