#pragma once

#include <array>
#include <complex>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "fmopto/dynamics.hpp"
#include "fmopto/model.hpp"
#include "fmopto/step_policy.hpp"

namespace fmopto {

enum class Verdict { stable, unstable, undecided };
enum class StabilityMethod { eigenvalue, routh_hurwitz, floquet, divergence_probe, none };

std::string_view to_string(Verdict v);
std::string_view to_string(StabilityMethod m);

/// `margin` is negative for stable points. Its meaning depends on the method:
/// max eigenvalue real part, max Floquet modulus - 1, or the negated smallest
/// normalized Hurwitz determinant. The time-domain probe reports -1/t_settle
/// when stable, an estimated growth rate when unstable, and 0 when undecided.
struct StabilityVerdict {
  Verdict verdict = Verdict::undecided;
  double margin = 0.0;
  StabilityMethod method = StabilityMethod::none;
};

StabilityVerdict eigen_stability(const DriftMatrix& A);

/// Coefficients c[0..4] of det(sI - A) = c0 s^4 + c1 s^3 + c2 s^2 + c3 s + c4 (c0 = 1).
std::array<double, 5> characteristic_polynomial(const DriftMatrix& A);

/// Hurwitz determinant test on the characteristic quartic.
/// Throws SolverError when a leading Hurwitz minor vanishes to roundoff.
StabilityVerdict routh_hurwitz(const DriftMatrix& A);

struct FloquetResult {
  std::array<std::complex<double>, 4> multipliers;
  StabilityVerdict verdict;
};

/// Monodromy of u' = A(t)u over one modulation period 2*pi/nu, from identity,
/// using the same Magnus steps as the covariance integrator.
FloquetResult floquet_multipliers(const ReducedParams& r, const StepPolicy& step = {});

struct ProbeOptions {
  double horizon_lifetimes = 50.0;  ///< horizon in units of 1/kappa
  StepPolicy step;
  double divergence_factor = 1e12;
  double settle_tolerance = 1e-6;
  int settle_periods = 5;
};

/// Time-domain probe: integrates the covariance from the thermal initial
/// state. Unstable when the divergence ceiling trips; stable once the
/// period-averaged phonon number changes by less than the tolerance
/// (relative) for `settle_periods` consecutive periods; undecided otherwise.
StabilityVerdict divergence_probe(const ReducedParams& r, const ProbeOptions& options = {});

struct GridAxis {
  std::string name;
  std::vector<double> values;
};

struct MapPoint {
  double row_value = 0.0;
  double col_value = 0.0;
  StabilityVerdict verdict;
  double coupling = 0.0;  ///< |G| at the point (NaN when the point failed)
  std::string error;      ///< non-empty when the point could not be evaluated
};

struct BoundaryPoint {
  double row_value = 0.0;
  double col_value = 0.0;
};

struct StabilityMap {
  GridAxis rows;
  GridAxis cols;
  std::vector<MapPoint> points;  ///< row-major
  std::vector<BoundaryPoint> boundary;

  const MapPoint& at(std::size_t i, std::size_t j) const { return points.at(i * cols.values.size() + j); }
};

struct MapOptions {
  StepPolicy step;
  int parallel = 1;
  double boundary_tolerance = 1e-4;  ///< relative to the column range
};

/// Builds ReducedParams for (row value, column value); may throw, in which
/// case the point is recorded as undecided.
using PointBuilder = std::function<ReducedParams(double, double)>;

/// Classifies each grid point with the cheapest adequate method
/// (Routh-Hurwitz when xi = 0, Floquet otherwise) and extracts the boundary
/// by bisection along each row between neighbouring points whose verdicts
/// differ.
StabilityMap stability_map(const GridAxis& rows, const GridAxis& cols, const PointBuilder& build,
                           const MapOptions& options = {});

/// Static/Floquet dispatch used by stability_map.
StabilityVerdict classify(const ReducedParams& r, const StepPolicy& step = {});

}  // namespace fmopto
