#include "fmopto/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fmopto/errors.hpp"
#include "fmopto/observables.hpp"
#include "fmopto/parallel.hpp"
#include "fmopto/rk4.hpp"

namespace fmopto {

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::stable:
      return "stable";
    case Verdict::unstable:
      return "unstable";
    case Verdict::undecided:
      return "undecided";
  }
  return "undecided";
}

std::string_view to_string(StabilityMethod m) {
  switch (m) {
    case StabilityMethod::eigenvalue:
      return "eigenvalue";
    case StabilityMethod::routh_hurwitz:
      return "routh-hurwitz";
    case StabilityMethod::floquet:
      return "floquet";
    case StabilityMethod::divergence_probe:
      return "divergence-probe";
    case StabilityMethod::none:
      return "none";
  }
  return "none";
}

StabilityVerdict eigen_stability(const DriftMatrix& A) {
  const double max_re = Eigen::EigenSolver<Mat4>(A, false).eigenvalues().real().maxCoeff();
  return {max_re < 0.0 ? Verdict::stable : Verdict::unstable, max_re, StabilityMethod::eigenvalue};
}

std::array<double, 5> characteristic_polynomial(const DriftMatrix& A) {
  // Faddeev-LeVerrier: M_k = A M_{k-1} + c_{k-1} I, c_k = -tr(A M_k)/k.
  std::array<double, 5> c{1.0, 0.0, 0.0, 0.0, 0.0};
  Mat4 M = Mat4::Zero();
  for (int k = 1; k <= 4; ++k) {
    M = A * M + c[k - 1] * Mat4::Identity();
    c[k] = -(A * M).trace() / k;
  }
  return c;
}

StabilityVerdict routh_hurwitz(const DriftMatrix& A) {
  const auto c = characteristic_polynomial(A);
  const double a1 = c[1], a2 = c[2], a3 = c[3], a4 = c[4];
  const double h1 = a1;
  const double h2 = a1 * a2 - a3;
  const double h3 = a3 * h2 - a1 * a1 * a4;

  const double s1 = std::abs(a1);
  const double s2 = std::abs(a1 * a2) + std::abs(a3);
  const double s3 = std::abs(a3) * s2 + a1 * a1 * std::abs(a4);
  const double s4 = std::abs(a4);
  // h1 and h2 are the pivots of the Routh array.
  constexpr double kSingular = 1e-14;
  if (std::abs(h1) <= kSingular * A.diagonal().cwiseAbs().sum() || s2 == 0.0 ||
      std::abs(h2) <= kSingular * s2) {
    std::ostringstream msg;
    msg << "routh_hurwitz: leading Hurwitz minors vanish (a1 = " << a1 << ", a1 a2 - a3 = " << h2 << ")";
    throw SolverError(msg.str());
  }
  const double n3 = s3 > 0.0 ? h3 / s3 : 0.0;
  const double n4 = s4 > 0.0 ? a4 / s4 : 0.0;
  const double worst = std::min({h1 / s1, h2 / s2, n3, n4});
  const bool stable = h1 > 0.0 && h2 > 0.0 && h3 > 0.0 && a4 > 0.0;
  return {stable ? Verdict::stable : Verdict::unstable, -worst, StabilityMethod::routh_hurwitz};
}

FloquetResult floquet_multipliers(const ReducedParams& r, const StepPolicy& step) {
  r.validate();
  // Same per-step propagators as the covariance integrator.
  const Mat4 phi = ChannelPropagator(r, resolve_step(step, r.nu)).monodromy();
  if (!phi.allFinite()) throw SolverError("floquet_multipliers: monodromy integration produced non-finite values");

  const Eigen::Vector4cd mu = Eigen::EigenSolver<Mat4>(phi, false).eigenvalues();
  FloquetResult out;
  for (int i = 0; i < 4; ++i) out.multipliers[i] = mu(i);
  std::sort(out.multipliers.begin(), out.multipliers.end(),
            [](auto a, auto b) { return std::abs(a) > std::abs(b); });
  const double margin = std::abs(out.multipliers[0]) - 1.0;
  out.verdict = {margin < 0.0 ? Verdict::stable : Verdict::unstable, margin, StabilityMethod::floquet};
  return out;
}

StabilityVerdict divergence_probe(const ReducedParams& r, const ProbeOptions& options) {
  r.validate();
  if (!(r.kappa > 0.0)) throw InvalidArgument("divergence_probe: the horizon is defined in cavity lifetimes; kappa must be positive");
  const ResolvedStep resolved = resolve_step(options.step, r.nu);
  const double period = kTwoPi / r.nu;
  const long per_period = resolved.steps_per_period > 0 ? resolved.steps_per_period
                                                         : std::max(1L, std::lround(period / resolved.dt));
  const double horizon = options.horizon_lifetimes / r.kappa;
  const long periods = static_cast<long>(std::ceil(horizon / period));

  const ChannelPropagator prop(r, resolved);
  CovarianceMatrix V = initial_covariance(r.n_th);
  Eigen::Vector4d base;
  for (int i = 0; i < 4; ++i) base(i) = std::max(V(i, i), 0.5);
  const Eigen::Vector4d ceiling = options.divergence_factor * base;

  StabilityVerdict out{Verdict::undecided, 0.0, StabilityMethod::divergence_probe};
  double previous = std::numeric_limits<double>::quiet_NaN();
  int calm = 0;
  long step_index = 0;
  for (long p = 0; p < periods; ++p) {
    double sum = 0.0;
    for (long k = 0; k < per_period; ++k, ++step_index) {
      sum += phonon_number_raw(V);
      prop.step(V, step_index, resolved.dt);
      bool blown = !V.allFinite();
      for (int i = 0; i < 4 && !blown; ++i) blown = V(i, i) > ceiling(i);
      if (blown) {
        const double t = static_cast<double>(step_index + 1) * resolved.dt;
        double ratio = 0.0;
        for (int i = 0; i < 4; ++i) ratio = std::max(ratio, V(i, i) / base(i));
        out.verdict = Verdict::unstable;
        out.margin = std::isfinite(ratio) ? std::log(ratio) / (2.0 * t) : 1.0 / t;
        return out;
      }
    }
    const double mean = sum / static_cast<double>(per_period);
    if (std::isfinite(previous)) {
      const double scale = std::max(std::abs(mean), std::abs(previous));
      const bool quiet = std::abs(mean - previous) <= options.settle_tolerance * scale;
      calm = quiet ? calm + 1 : 0;
      if (calm >= options.settle_periods) {
        out.verdict = Verdict::stable;
        out.margin = -1.0 / (static_cast<double>(p + 1) * period);
        return out;
      }
    }
    previous = mean;
  }
  return out;
}

StabilityVerdict classify(const ReducedParams& r, const StepPolicy& step) {
  if (r.xi == 0.0) return routh_hurwitz(build_drift(r, 0.0));
  return floquet_multipliers(r, step).verdict;
}

namespace {

bool decided(const StabilityVerdict& v) { return v.verdict != Verdict::undecided; }

}  // namespace

StabilityMap stability_map(const GridAxis& rows, const GridAxis& cols, const PointBuilder& build,
                           const MapOptions& options) {
  if (rows.values.empty() || cols.values.empty()) throw InvalidArgument("stability_map: empty grid axis");
  StabilityMap map;
  map.rows = rows;
  map.cols = cols;
  const std::size_t nr = rows.values.size();
  const std::size_t nc = cols.values.size();
  map.points.resize(nr * nc);

  parallel_for(nr * nc, options.parallel, [&](std::size_t idx) {
    MapPoint& pt = map.points[idx];
    pt.row_value = rows.values[idx / nc];
    pt.col_value = cols.values[idx % nc];
    try {
      const ReducedParams r = build(pt.row_value, pt.col_value);
      pt.coupling = std::abs(r.G());
      pt.verdict = classify(r, options.step);
    } catch (const std::exception& e) {
      pt.verdict = {Verdict::undecided, 0.0, StabilityMethod::none};
      pt.coupling = std::numeric_limits<double>::quiet_NaN();
      pt.error = e.what();
    }
  });

  const double range = std::abs(cols.values.back() - cols.values.front());
  const double tol = options.boundary_tolerance * (range > 0.0 ? range : 1.0);
  std::vector<std::vector<BoundaryPoint>> per_row(nr);
  parallel_for(nr, options.parallel, [&](std::size_t i) {
    const double row = rows.values[i];
    for (std::size_t j = 0; j + 1 < nc; ++j) {
      const auto& a = map.at(i, j).verdict;
      const auto& b = map.at(i, j + 1).verdict;
      if (!decided(a) || !decided(b) || a.verdict == b.verdict) continue;
      double lo = cols.values[j];
      double hi = cols.values[j + 1];
      const Verdict lo_verdict = a.verdict;
      try {
        while (std::abs(hi - lo) > tol) {
          const double mid = 0.5 * (lo + hi);
          if (classify(build(row, mid), options.step).verdict == lo_verdict)
            lo = mid;
          else
            hi = mid;
        }
        per_row[i].push_back({row, 0.5 * (lo + hi)});
      } catch (const std::exception&) {
        // Unevaluable interior point: leave this segment without a boundary.
      }
    }
  });
  for (auto& row : per_row) map.boundary.insert(map.boundary.end(), row.begin(), row.end());
  return map;
}

}  // namespace fmopto
