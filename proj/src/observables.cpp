#include "fmopto/observables.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fmopto/errors.hpp"
#include "fmopto/model.hpp"

namespace fmopto {

CovarianceMatrix BlockDecomposition::reassemble() const {
  CovarianceMatrix V;
  V.topLeftCorner<2, 2>() = A;
  V.topRightCorner<2, 2>() = C;
  V.bottomLeftCorner<2, 2>() = C.transpose();
  V.bottomRightCorner<2, 2>() = B;
  return V;
}

BlockDecomposition decompose(const CovarianceMatrix& V) {
  return {V.topLeftCorner<2, 2>(), V.bottomRightCorner<2, 2>(), V.topRightCorner<2, 2>()};
}

double phonon_number_raw(const CovarianceMatrix& V) { return 0.5 * (V(2, 2) + V(3, 3) - 1.0); }

double phonon_number(const CovarianceMatrix& V) { return std::max(0.0, phonon_number_raw(V)); }

double eta_minus(const CovarianceMatrix& V) {
  const BlockDecomposition blocks = decompose(V);
  const double sigma = blocks.A.determinant() + blocks.B.determinant() - 2.0 * blocks.C.determinant();
  const double det = V.determinant();
  double radicand = sigma * sigma - 4.0 * det;
  if (radicand < -1e-10 * sigma * sigma || !std::isfinite(radicand)) {
    std::ostringstream msg;
    msg << "eta_minus: unphysical covariance (Sigma^2 - 4 det V = " << radicand << ")";
    throw UnphysicalError(msg.str());
  }
  radicand = std::max(0.0, radicand);
  // eta_-^2 eta_+^2 = det V; dividing avoids the cancellation in Sigma - sqrt(.)
  // when the two symplectic eigenvalues are far apart.
  const double plus_sq = 0.5 * (sigma + std::sqrt(radicand));
  double minus_sq = plus_sq > 0.0 ? det / plus_sq : 0.5 * (sigma - std::sqrt(radicand));
  minus_sq = std::max(0.0, minus_sq);
  return std::sqrt(minus_sq);
}

double log_negativity(const CovarianceMatrix& V) { return std::max(0.0, -std::log(2.0 * eta_minus(V))); }

namespace {

// Five-point Gauss-Legendre on [a, b].
template <class F>
double gauss5(const F& f, double a, double b) {
  static constexpr double x[5] = {0.0, 0.5384693101056831, -0.5384693101056831, 0.9061798459386640,
                                  -0.9061798459386640};
  static constexpr double w[5] = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665, 0.2369268850561891,
                                  0.2369268850561891};
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double sum = 0.0;
  for (int k = 0; k < 5; ++k) sum += w[k] * f(c + h * x[k]);
  return h * sum;
}

}  // namespace

double log_negativity_mean(const std::vector<double>& times, const std::vector<CovarianceMatrix>& covs,
                           std::size_t first, std::size_t last) {
  if (times.size() != covs.size()) throw InvalidArgument("log_negativity_mean: length mismatch");
  constexpr std::size_t kNodes = 6;
  if (last >= times.size() || last < first + kNodes - 1)
    throw InvalidArgument("log_negativity_mean: need at least six samples in range");
  const double span = times[last] - times[first];
  if (!(span > 0.0)) throw InvalidArgument("log_negativity_mean: empty time range");

  double integral = 0.0;
  for (std::size_t i = first; i < last; ++i) {
    const std::size_t j = std::clamp(i >= first + 2 ? i - 2 : first, first, last - (kNodes - 1));
    const double* t = &times[j];
    const auto V_at = [&](double s) {
      CovarianceMatrix V = CovarianceMatrix::Zero();
      for (std::size_t k = 0; k < kNodes; ++k) {
        double l = 1.0;
        for (std::size_t m = 0; m < kNodes; ++m)
          if (m != k) l *= (s - t[m]) / (t[k] - t[m]);
        V += l * covs[j + k];
      }
      return V;
    };
    // unclipped -ln(2 eta_-)
    const auto f = [&](double s) { return -std::log(2.0 * eta_minus(V_at(s))); };

    constexpr int kScan = 4;
    // Values this small are rounding on the vacuum kink, not entanglement.
    constexpr double kFloor = 1e-13;
    const double a = times[i];
    const double h = (times[i + 1] - a) / kScan;
    double ta = a;
    double fa = f(ta);
    for (int k = 1; k <= kScan; ++k) {
      const double tb = k == kScan ? times[i + 1] : a + k * h;
      const double fb = f(tb);
      const bool pa = fa > kFloor;
      const bool pb = fb > kFloor;
      if (pa && pb) {
        integral += gauss5(f, ta, tb);
      } else if (pa || pb) {
        double lo = ta, hi = tb;  // f(lo) and f(hi) differ in sign
        const bool rising = pb;
        for (int it = 0; it < 60 && hi - lo > 1e-15 * std::abs(hi); ++it) {
          const double mid = 0.5 * (lo + hi);
          ((f(mid) > 0.0) == rising ? hi : lo) = mid;
        }
        const double root = 0.5 * (lo + hi);
        integral += rising ? gauss5(f, root, tb) : gauss5(f, ta, root);
      }
      ta = tb;
      fa = fb;
    }
  }
  return integral / span;
}

CovarianceMatrix two_mode_squeezed(double r) {
  const double c = 0.5 * std::cosh(2.0 * r);
  const double s = 0.5 * std::sinh(2.0 * r);
  BlockDecomposition b;
  b.A = c * Eigen::Matrix2d::Identity();
  b.B = b.A;
  b.C << s, 0.0, 0.0, -s;
  return b.reassemble();
}

PeriodMeans period_means(const ObservableSeries& series, double nu) {
  if (!(nu > 0.0)) throw InvalidArgument("period_means: nu must be positive");
  if (series.times.size() != series.values.size()) throw InvalidArgument("period_means: length mismatch");
  PeriodMeans out;
  if (series.times.empty()) return out;
  const double period = kTwoPi / nu;
  const double t0 = series.times.front();
  const double t_end = series.times.back();
  const auto index_of = [&](double t) { return static_cast<long>(std::floor((t - t0) / period + 1e-9)); };

  std::size_t i = 0;
  while (i < series.times.size()) {
    const long p = index_of(series.times[i]);
    const double start = t0 + static_cast<double>(p) * period;
    // Complete periods only: the series must reach the start of the next one.
    if (t_end < start + period * (1.0 - 1e-9)) break;
    std::size_t j = i;
    double sum = 0.0;
    while (j < series.times.size() && index_of(series.times[j]) == p) sum += series.values[j++];
    out.starts.push_back(start);
    out.means.push_back(sum / static_cast<double>(j - i));
    out.first_index.push_back(i);
    out.counts.push_back(j - i);
    i = j;
  }
  return out;
}

Cutoff transient_cutoff(const ObservableSeries& series, double nu, const CutoffOptions& options) {
  const PeriodMeans pm = period_means(series, nu);
  if (static_cast<int>(pm.means.size()) < options.min_periods)
    throw InvalidArgument("transient_cutoff: series spans fewer than " + std::to_string(options.min_periods) +
                          " complete modulation periods");
  int run = 0;
  for (std::size_t p = 1; p < pm.means.size(); ++p) {
    const double a = pm.means[p - 1];
    const double b = pm.means[p];
    const bool ok = std::isfinite(a) && std::isfinite(b) &&
                    std::abs(b - a) <= options.relative_tolerance * std::max(std::abs(a), std::abs(b));
    run = ok ? run + 1 : 0;
    if (run >= options.straight_periods) return {pm.starts[p - static_cast<std::size_t>(run)], true};
  }
  return {series.times.back(), false};
}

double period_average(const ObservableSeries& series, double nu, int window_periods, const Cutoff& cutoff) {
  if (!cutoff.settled) throw UnsettledError("period_average: series has not settled");
  if (window_periods < 1) throw InvalidArgument("period_average: window must span at least one period");
  const PeriodMeans pm = period_means(series, nu);
  const std::size_t w = static_cast<std::size_t>(window_periods);
  if (pm.means.size() < w) throw InvalidArgument("period_average: series shorter than the averaging window");
  const std::size_t first = pm.means.size() - w;
  if (pm.starts[first] < cutoff.t_ss - 1e-9 * (kTwoPi / nu))
    throw InvalidArgument("period_average: averaging window starts before the transient cutoff");
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t p = first; p < pm.means.size(); ++p) {
    for (std::size_t k = 0; k < pm.counts[p]; ++k) sum += series.values[pm.first_index[p] + k];
    count += pm.counts[p];
  }
  return sum / static_cast<double>(count);
}

double period_average(const ObservableSeries& series, double nu, int window_periods) {
  return period_average(series, nu, window_periods, transient_cutoff(series, nu));
}

}  // namespace fmopto
