#include "fmopto/sidebands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>

#include "fmopto/errors.hpp"

namespace fmopto {

namespace {

double parity(int k) { return (k % 2 == 0) ? 1.0 : -1.0; }

// Alternating power series; adequate for 0 < x <= 2.
double bessel_series(int n, double x) {
  const double half = 0.5 * x;
  double lead = 1.0;
  for (int i = 1; i <= n; ++i) lead *= half / i;
  if (lead == 0.0) return 0.0;
  const double q = half * half;
  double term = lead;
  double sum = term;
  for (int m = 0; m < 200; ++m) {
    term *= -q / ((m + 1.0) * (m + 1.0 + n));
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return sum;
}

// Miller downward recurrence J_{j-1} = (2j/x) J_j - J_{j+1}, normalized with
// J_0 + 2 sum_{j>=1} J_{2j} = 1.
double bessel_miller(int n, double x) {
  const double top = std::max(static_cast<double>(n), x);
  int start = static_cast<int>(top + 20.0 + std::ceil(std::sqrt(60.0 * top)));
  start += start % 2;
  constexpr double kBig = 1e250;
  const double two_over_x = 2.0 / x;
  double above = 0.0;
  double current = 1e-300;
  double norm = 0.0;
  double result = 0.0;
  for (int j = start; j > 0; --j) {
    const double below = j * two_over_x * current - above;
    above = current;
    current = below;  // now J_{j-1}
    if (std::abs(current) > kBig) {
      current /= kBig;
      above /= kBig;
      norm /= kBig;
      result /= kBig;
    }
    const int order = j - 1;
    if (order == n) result = current;
    if (order > 0 && order % 2 == 0) norm += 2.0 * current;
  }
  norm += current;  // J_0
  return result / norm;
}

}  // namespace

double bessel_j(int k, double x) {
  if (!std::isfinite(x) || std::abs(x) > kMaxBesselArgument)
    throw InvalidArgument("bessel_j: |x| must not exceed " + std::to_string(kMaxBesselArgument));
  if (std::abs(k) > kMaxBesselOrder)
    throw InvalidArgument("bessel_j: |k| must not exceed " + std::to_string(kMaxBesselOrder));
  const int n = std::abs(k);
  double sign = k < 0 ? parity(n) : 1.0;
  if (x < 0.0) sign *= parity(n);
  const double ax = std::abs(x);
  if (ax == 0.0) return n == 0 ? 1.0 : 0.0;
  const double value = ax <= 2.0 ? bessel_series(n, ax) : bessel_miller(n, ax);
  return sign * value;
}

double SidebandTable::residual_weight() const {
  double sum = 0.0;
  for (const auto& e : entries) sum += e.weight * e.weight;
  return 1.0 - sum;
}

int default_truncation(double xi) {
  const double a = std::abs(xi);
  return static_cast<int>(std::ceil(a + 10.0 * std::cbrt(a) + 10.0));
}

int minimal_truncation(double xi) {
  double sum = bessel_j(0, xi) * bessel_j(0, xi);
  int K = 0;
  while (1.0 - sum >= 1e-10 && K < kMaxBesselOrder) {
    ++K;
    const double w = bessel_j(K, xi);
    sum += 2.0 * w * w;
  }
  return K;
}

SidebandTable sideband_table(const ReducedParams& r, std::optional<int> K) {
  r.validate();
  const int k_max = K.value_or(default_truncation(r.xi));
  if (k_max < 0 || k_max > kMaxBesselOrder) throw InvalidArgument("sideband_table: K out of range");
  SidebandTable table;
  table.xi = r.xi;
  table.nu = r.nu;
  table.K = k_max;
  table.entries.reserve(static_cast<std::size_t>(2 * k_max + 1));
  for (int k = -k_max; k <= k_max; ++k) {
    Sideband s;
    s.k = k;
    s.weight = bessel_j(k, r.xi);
    s.bs_detuning = r.delta_c_prime - 1.0 + k * r.nu;
    s.tms_detuning = r.delta_c_prime + 1.0 + k * r.nu;
    table.entries.push_back(s);
  }
  if (!(table.residual_weight() < 1e-10)) {
    throw InvalidArgument("sideband_table: K = " + std::to_string(k_max) +
                          " leaves Bessel weight outside the table; minimal adequate K is " +
                          std::to_string(minimal_truncation(r.xi)));
  }
  return table;
}

int nearest_resonant_index(double delta_c_prime, double nu) {
  if (!(nu > 0.0)) throw InvalidArgument("nearest_resonant_index: nu must be positive");
  const double offset = delta_c_prime - 1.0;
  const double centre = -offset / nu;
  const long lo = static_cast<long>(std::floor(centre));
  int best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (long k = lo - 1; k <= lo + 2; ++k) {
    const double dist = std::abs(offset + static_cast<double>(k) * nu);
    const int ki = static_cast<int>(k);
    const bool better = dist < best_dist ||
                        (dist == best_dist && (std::abs(ki) < std::abs(best) ||
                                               (std::abs(ki) == std::abs(best) && ki < best)));
    if (better) {
      best = ki;
      best_dist = dist;
    }
  }
  return best;
}

RwaModel rwa_reduce(const ReducedParams& r) {
  r.validate();
  RwaModel model;
  model.k0 = nearest_resonant_index(r.delta_c_prime, r.nu);
  model.weight = bessel_j(model.k0, r.xi);
  model.params = r;
  model.params.xi = 0.0;
  model.params.delta_c_prime = r.delta_c_prime + model.k0 * r.nu;
  model.params.set_G(r.G() * model.weight);

  double strongest = 0.0;
  const double G_abs = std::abs(r.G());
  for (const auto& e : sideband_table(r).entries) strongest = std::max(strongest, G_abs * std::abs(e.weight));
  model.validity.nu_over_omega_m = r.nu;
  model.validity.nu_over_max_coupling =
      strongest > 0.0 ? r.nu / strongest : std::numeric_limits<double>::infinity();
  return model;
}

}  // namespace fmopto
