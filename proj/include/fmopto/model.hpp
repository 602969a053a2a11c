#pragma once

#include <complex>
#include <optional>

namespace fmopto {

// CODATA 2018 (both exact in the revised SI).
inline constexpr double kHbar = 1.054571817e-34;      // J s
inline constexpr double kBoltzmann = 1.380649e-23;    // J / K
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Temperatures below this are treated as absolute zero.
inline constexpr double kZeroTemperature = 1e-6;  // K

/// Laboratory-unit system constants. Frequencies and rates in rad/s.
struct PhysicalParams {
  double omega_c = 0.0;  ///< optical resonance
  double omega_m = 0.0;  ///< mechanical resonance
  double omega_l = 0.0;  ///< drive laser
  double kappa = 0.0;    ///< optical energy decay rate
  double gamma = 0.0;    ///< mechanical damping rate
  double g = 0.0;        ///< single-photon optomechanical coupling
  std::optional<double> power;  ///< drive power, W
  double temperature = 0.0;     ///< bath temperature, K

  /// Cavity-laser detuning omega_c - omega_l.
  double delta_c() const noexcept { return omega_c - omega_l; }

  /// Throws InvalidArgument when an invariant is violated.
  void validate() const;
};

/// Cosine modulation of the cavity frequency, amplitude xi*nu.
struct ModulationParams {
  double xi = 0.0;  ///< normalized amplitude
  double nu = 1.0;  ///< angular frequency (rad/s in physical context, omega_m units once reduced)

  void validate() const;
};

/// Dimensionless working parameters; every rate and frequency is in units of
/// the mechanical frequency and times are in units of 1/omega_m.
struct ReducedParams {
  double delta_c_prime = 1.0;  ///< effective detuning
  double G_re = 0.0;           ///< linearized coupling, real part
  double G_im = 0.0;           ///< linearized coupling, imaginary part
  double kappa = 0.0;
  double gamma = 0.0;
  double xi = 0.0;
  double nu = 1.0;
  double n_th = 0.0;
  double g = 0.0;  ///< single-photon coupling; 0 when G was set directly
  double E = 0.0;  ///< drive amplitude; 0 when G was set directly

  std::complex<double> G() const noexcept { return {G_re, G_im}; }
  void set_G(std::complex<double> value) noexcept {
    G_re = value.real();
    G_im = value.imag();
  }

  void validate() const;

  friend bool operator==(const ReducedParams&, const ReducedParams&) = default;
};

/// Bose-Einstein occupation 1/(exp(hbar*omega_m/(k_B*T)) - 1); 0 at T = 0.
double thermal_occupation(double omega_m, double temperature);

/// Drive amplitude sqrt(2*kappa*P/(hbar*omega_l)) in rad/s.
double drive_amplitude(double power, double kappa, double omega_l);

/// Nondimensionalize by omega_m. Without `G_override` the coupling comes from
/// the static mean-field solution for the configured drive power, with the
/// drive phase chosen so that G is real and positive. With an override
/// (rad/s) and g > 0 the static mechanical displacement implied by
/// |alpha| = |G|/g shifts the detuning; with g = 0 the detuning is left as is.
ReducedParams reduce(const PhysicalParams& params, const ModulationParams& modulation,
                     std::optional<std::complex<double>> G_override = std::nullopt);

}  // namespace fmopto
