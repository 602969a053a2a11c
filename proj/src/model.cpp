#include "fmopto/model.hpp"

#include <cmath>
#include <string>

#include "fmopto/errors.hpp"
#include "fmopto/meanfield.hpp"

namespace fmopto {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw InvalidArgument(message);
}

bool finite(double x) { return std::isfinite(x); }

}  // namespace

void PhysicalParams::validate() const {
  require(finite(omega_c) && omega_c > 0.0, "omega_c must be positive");
  require(finite(omega_m) && omega_m > 0.0, "omega_m must be positive");
  require(finite(omega_l) && omega_l >= 0.0, "omega_l must be non-negative");
  require(finite(kappa) && kappa >= 0.0, "kappa must be non-negative");
  require(finite(gamma) && gamma >= 0.0, "gamma must be non-negative");
  require(finite(g) && g >= 0.0, "g must be non-negative");
  require(finite(temperature) && temperature >= 0.0, "temperature must be non-negative");
  if (power) require(finite(*power) && *power >= 0.0, "power must be non-negative");
}

void ModulationParams::validate() const {
  require(finite(xi) && xi >= 0.0, "xi must be non-negative");
  require(finite(nu) && nu > 0.0, "nu must be positive");
}

void ReducedParams::validate() const {
  require(finite(delta_c_prime) && finite(G_re) && finite(G_im) && finite(g) && finite(E),
          "reduced parameters must be finite");
  require(finite(kappa) && kappa >= 0.0, "kappa must be non-negative");
  require(finite(gamma) && gamma >= 0.0, "gamma must be non-negative");
  require(finite(n_th) && n_th >= 0.0, "n_th must be non-negative");
  require(finite(xi) && xi >= 0.0, "xi must be non-negative");
  require(finite(nu) && nu > 0.0, "nu must be positive");
}

double thermal_occupation(double omega_m, double temperature) {
  require(omega_m > 0.0, "omega_m must be positive");
  require(temperature >= 0.0, "temperature must be non-negative");
  if (temperature < kZeroTemperature) return 0.0;
  const double x = kHbar * omega_m / (kBoltzmann * temperature);
  return 1.0 / std::expm1(x);
}

double drive_amplitude(double power, double kappa, double omega_l) {
  require(power >= 0.0 && kappa >= 0.0 && omega_l >= 0.0, "drive inputs must be non-negative");
  if (power == 0.0 || kappa == 0.0) return 0.0;
  require(omega_l > 0.0, "omega_l must be positive for a nonzero drive");
  return std::sqrt(2.0 * kappa * power / (kHbar * omega_l));
}

ReducedParams reduce(const PhysicalParams& params, const ModulationParams& modulation,
                     std::optional<std::complex<double>> G_override) {
  params.validate();
  modulation.validate();
  const double wm = params.omega_m;

  ReducedParams r;
  r.kappa = params.kappa / wm;
  r.gamma = params.gamma / wm;
  r.g = params.g / wm;
  r.xi = modulation.xi;
  r.nu = modulation.nu / wm;
  r.n_th = thermal_occupation(wm, params.temperature);

  if (G_override) {
    r.set_G(*G_override / wm);
    double delta = params.delta_c();
    if (params.g > 0.0) {
      const double alpha_sq = std::norm(*G_override) / (params.g * params.g);
      const cplx beta = cplx(0.0, params.g * alpha_sq) / cplx(0.5 * params.gamma, wm);
      delta -= 2.0 * params.g * beta.real();
    }
    r.delta_c_prime = delta / wm;
    if (params.power) r.E = drive_amplitude(*params.power, params.kappa, params.omega_l) / wm;
    return r;
  }

  if (!params.power) throw InvalidArgument("reduce: neither drive power nor a coupling override was given");
  const double E = drive_amplitude(*params.power, params.kappa, params.omega_l);
  const SteadyMeanField mf = steady_mean_fields(params, E);
  r.delta_c_prime = mf.delta_c_prime / wm;
  // The drive phase is free; rotate it so that alpha, hence G, is real positive.
  r.set_G(std::abs(mf.G) / wm);
  r.E = E / wm;
  return r;
}

}  // namespace fmopto
