#pragma once

#include <optional>
#include <vector>

#include "fmopto/model.hpp"

namespace fmopto {

inline constexpr double kMaxBesselArgument = 50.0;
inline constexpr int kMaxBesselOrder = 200;

/// Bessel function of the first kind J_k(x) for integer k, |k| <= 200 and
/// |x| <= 50, accurate to 1e-12 absolute. Throws InvalidArgument outside
/// that range.
double bessel_j(int k, double x);

struct Sideband {
  int k = 0;
  double weight = 0.0;        ///< J_k(xi)
  double bs_detuning = 0.0;   ///< Delta' - 1 + k*nu (beam splitter)
  double tms_detuning = 0.0;  ///< Delta' + 1 + k*nu (two-mode squeezing)
};

struct SidebandTable {
  double xi = 0.0;
  double nu = 1.0;
  int K = 0;
  std::vector<Sideband> entries;  ///< k = -K..K in order

  const Sideband& at(int k) const { return entries.at(static_cast<std::size_t>(k + K)); }
  /// 1 - sum_k J_k(xi)^2 over the table.
  double residual_weight() const;
};

/// ceil(xi + 10*xi^(1/3) + 10)
int default_truncation(double xi);

/// Smallest K meeting the completeness bound 1 - sum J_k^2 < 1e-10.
int minimal_truncation(double xi);

/// Sideband table over k in [-K, K]; K defaults to default_truncation(xi).
/// Throws InvalidArgument when K leaves more than 1e-10 of the Bessel weight
/// outside the table (the message names the minimal adequate K).
SidebandTable sideband_table(const ReducedParams& r, std::optional<int> K = std::nullopt);

/// argmin_k |Delta' - 1 + k*nu|; ties go to the smaller |k|, then to negative k.
int nearest_resonant_index(double delta_c_prime, double nu);

struct RwaValidity {
  double nu_over_omega_m = 0.0;
  double nu_over_max_coupling = 0.0;  ///< nu / max_k |G J_k(xi)|
};

struct RwaModel {
  ReducedParams params;  ///< static model: xi = 0, G -> G*J_k0(xi)
  int k0 = 0;
  double weight = 1.0;   ///< J_k0(xi)
  RwaValidity validity;
};

/// Rotating-wave reduction onto the nearest resonant sideband. For k0 != 0
/// the static model is expressed in the frame of that sideband, so its
/// detuning is Delta' + k0*nu.
RwaModel rwa_reduce(const ReducedParams& r);

}  // namespace fmopto
