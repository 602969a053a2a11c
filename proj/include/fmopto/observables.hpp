#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "fmopto/dynamics.hpp"

namespace fmopto {

struct ObservableSeries {
  std::vector<double> times;
  std::vector<double> values;
  std::string label;
};

/// V = [[A, C], [C^T, B]] with A the cavity block and B the mechanical block.
struct BlockDecomposition {
  Eigen::Matrix2d A;
  Eigen::Matrix2d B;
  Eigen::Matrix2d C;

  CovarianceMatrix reassemble() const;
};

BlockDecomposition decompose(const CovarianceMatrix& V);

/// (V33 + V44 - 1)/2 without clamping.
double phonon_number_raw(const CovarianceMatrix& V);

/// Mean phonon number, clamped at zero.
double phonon_number(const CovarianceMatrix& V);

/// Smallest symplectic eigenvalue of the partially transposed state.
/// Throws UnphysicalError when Sigma^2 - 4 det V is negative beyond 1e-10
/// relative to Sigma^2.
double eta_minus(const CovarianceMatrix& V);

/// max(0, -ln(2*eta_minus)).
double log_negativity(const CovarianceMatrix& V);

/// Time average of log_negativity over [times[first], times[last]]. Between
/// samples the covariance follows the quintic through the six nearest samples,
/// and each interval is split where 2*eta_minus crosses 1, so the kink of
/// max(0, .) does not drop the quadrature to second order. Needs at least
/// six samples in the range.
double log_negativity_mean(const std::vector<double>& times, const std::vector<CovarianceMatrix>& covs,
                           std::size_t first, std::size_t last);

/// Two-mode squeezed vacuum with squeezing parameter r.
CovarianceMatrix two_mode_squeezed(double r);

struct CutoffOptions {
  double relative_tolerance = 1e-4;
  int straight_periods = 5;
  int min_periods = 10;
};

struct Cutoff {
  double t_ss = 0.0;
  bool settled = false;
};

/// Per-period means of a series, grouped by modulation period from the first
/// sample. Only complete periods are returned.
struct PeriodMeans {
  std::vector<double> starts;
  std::vector<double> means;
  std::vector<std::size_t> first_index;  ///< first sample of each period
  std::vector<std::size_t> counts;
};
PeriodMeans period_means(const ObservableSeries& series, double nu);

/// Earliest period start after which consecutive period means agree to the
/// relative tolerance for `straight_periods` periods in a row. Unsettled
/// series report the last sample time. Throws InvalidArgument when the
/// series spans fewer than `min_periods` periods.
Cutoff transient_cutoff(const ObservableSeries& series, double nu, const CutoffOptions& options = {});

/// Mean over the last `window_periods` complete modulation periods. Throws
/// UnsettledError when `cutoff` is unsettled and InvalidArgument when the
/// window after t_ss is too short.
double period_average(const ObservableSeries& series, double nu, int window_periods, const Cutoff& cutoff);

/// Convenience overload that computes the cutoff from the series itself.
double period_average(const ObservableSeries& series, double nu, int window_periods = 10);

}  // namespace fmopto
