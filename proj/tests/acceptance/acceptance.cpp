// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.
#include <Eigen/Eigenvalues>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "../unit/device_params.hpp"
#include "fmopto/dynamics.hpp"
#include "fmopto/harness/runner.hpp"
#include "fmopto/model.hpp"
#include "fmopto/observables.hpp"
#include "fmopto/sidebands.hpp"
#include "fmopto/stability.hpp"

using namespace fmopto;
using fmopto::testing::point;
namespace h = fmopto::harness;

namespace {

constexpr double kNu = 30.0;
constexpr double kNthHot = 1000.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = secs < budget_s;
  const bool pass = o.pass && in_time;
  if (!pass) ++failures;
  std::printf("criterion %2d: %s  %s  [%.2f s of %.0f s]%s\n", id, pass ? "PASS" : "FAIL", o.detail.c_str(), secs,
              budget_s, in_time ? "" : " over budget");
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Library defaults; `refine` halves the step.
h::SimulationSettings desk_settings(bool refine = false) {
  h::SimulationSettings s;
  s.t_max_periods = 3000.0;
  s.average_periods = 10;
  if (refine) s.step.steps_per_period *= 2;
  return s;
}

// Every simulated point that criteria 3-6 report, kept for criterion 10.
struct Reported {
  std::string label;
  ReducedParams params;
  h::PointResult result;
  bool phonon = true;       // phonon number is reported
  bool entanglement = false;
};
std::vector<Reported> reported;

h::PointResult run(const std::string& label, const ReducedParams& r, bool phonon, bool entanglement) {
  h::PointResult p = h::simulate_point(r, desk_settings(), {.keep_trace = false, .with_floquet = true});
  reported.push_back({label, r, p, phonon, entanglement});
  return p;
}

double rwa_phonons(const ReducedParams& r) {
  const RwaModel m = rwa_reduce(r);
  return phonon_number(lyapunov_steady(build_drift(m.params, 0.0), build_diffusion(m.params)));
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

std::vector<double> xi_grid() {
  std::vector<double> xs;
  for (int i = 0; i < 30; ++i) xs.push_back(3.5 * i / 29.0);
  return xs;
}

}  // namespace

int main() {
  std::printf("fmopto %s acceptance\n", h::version().c_str());

  criterion(1, 1.0, [] {
    double lo = 0.1, hi = 1.0;
    if (routh_hurwitz(build_drift(point(lo, 0.0, kNu, 0.0), 0.0)).verdict != Verdict::stable ||
        routh_hurwitz(build_drift(point(hi, 0.0, kNu, 0.0), 0.0)).verdict != Verdict::unstable)
      return Outcome{false, "bracket does not straddle the threshold"};
    while (hi - lo > 1e-6) {
      const double mid = 0.5 * (lo + hi);
      (routh_hurwitz(build_drift(point(mid, 0.0, kNu, 0.0), 0.0)).verdict == Verdict::stable ? lo : hi) = mid;
    }
    const double Gc = 0.5 * (lo + hi);
    return Outcome{Gc >= 0.45 && Gc <= 0.55, fmt("static threshold G_c = %.6f omega_m (want [0.45, 0.55])", Gc)};
  });

  criterion(2, 1.0, [] {
    const double n = thermal_occupation(kTwoPi * 10.56e6, 0.5);
    return Outcome{n >= 976.0 && n <= 996.0, fmt("n_th(2pi x 10.56 MHz, 0.5 K) = %.3f (want [976, 996])", n)};
  });

  criterion(3, 60.0, [] {
    const ReducedParams r = point(1.0, 2.2, kNu, kNthHot);
    const h::PointResult p = run("cooling", r, true, false);
    if (!p.error.empty()) return Outcome{false, "simulation error: " + p.error};
    const double oracle = rwa_phonons(r);
    const double gap = rel(p.phonon_avg, oracle);
    const bool ok = !p.diverged && p.settled && p.phonon_avg < 1.0 && gap < 0.2;
    return Outcome{ok, fmt("G=1, xi=2.2: settled=%d diverged=%d <n>=%.6f, rotating-wave oracle %.6f, gap %.2f%%",
                           p.settled, p.diverged, p.phonon_avg, oracle, 100.0 * gap)};
  });

  criterion(4, 600.0, [] {
    const double G = 2.5;
    const h::PointResult a = run("G=2.5 xi=2.2", point(G, 2.2, kNu, kNthHot), true, false);
    const h::PointResult b = run("G=2.5 xi=2.4048", point(G, 2.4048, kNu, kNthHot), true, false);
    if (!a.error.empty() || !b.error.empty()) return Outcome{false, "simulation error: " + a.error + b.error};
    const auto xs = xi_grid();
    std::vector<bool> flag(xs.size()), predicted(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const h::PointResult p = run(fmt("G=2.5 xi=%.4f", xs[i]), point(G, xs[i], kNu, kNthHot), true, false);
      flag[i] = p.unstable();
      predicted[i] = std::abs(G * bessel_j(0, xs[i])) >= 0.5;
    }
    int mismatches = 0, unexplained = 0, flagged = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      flagged += flag[i];
      if (flag[i] == predicted[i]) continue;
      ++mismatches;
      // within grid resolution: a neighbour sits on the other side of the predicted boundary
      const bool edge = (i > 0 && predicted[i - 1] != predicted[i]) ||
                        (i + 1 < xs.size() && predicted[i + 1] != predicted[i]);
      if (!edge) ++unexplained;
    }
    const bool ok = a.phonon_avg < 1.0 && !a.unstable() && b.phonon_avg > 1.0 && unexplained == 0;
    return Outcome{ok, fmt("<n>(2.2)=%.4f <n>(2.4048)=%.2f; sweep flags %d/30 unstable, %d off the |2.5 J0|>=0.5 "
                           "predictor (%d away from its edge)",
                           a.phonon_avg, b.phonon_avg, flagged, mismatches, unexplained)};
  });

  criterion(5, 600.0, [] {
    const auto xs = xi_grid();
    int stable = 0;
    for (double x : xs) {
      const h::PointResult p = run(fmt("T=0 xi=%.4f", x), point(1.0, x, kNu, 0.0), false, true);
      stable += !p.unstable();
    }
    const h::PointResult a = run("T=0 xi=2.2", point(1.0, 2.2, kNu, 0.0), false, true);
    const h::PointResult b = run("T=0 xi=2.4048", point(1.0, 2.4048, kNu, 0.0), false, true);
    if (!a.error.empty() || !b.error.empty()) return Outcome{false, "simulation error: " + a.error + b.error};
    // Asymptotic check: the exact periodic steady state at the Bessel zero.
    const PeriodicState ps = periodic_steady_state(point(1.0, 2.4048, kNu, 0.0));
    double en_ps = 0.0;
    for (std::size_t i = 0; i + 1 < ps.covariances.size(); ++i) en_ps += log_negativity(ps.covariances[i]);
    en_ps /= static_cast<double>(ps.covariances.size() - 1);
    const bool ok = a.entanglement_avg > b.entanglement_avg && b.entanglement_avg > 0.0 && en_ps > 0.0 &&
                    en_ps < a.entanglement_avg;
    return Outcome{ok, fmt("E_N(2.2)=%.5f > E_N(2.4048)=%.5f > 0 (settled %d/%d at the horizon; periodic "
                           "steady state E_N(2.4048)=%.3e); %d/30 sweep points stable",
                           a.entanglement_avg, b.entanglement_avg, a.settled, b.settled, en_ps, stable)};
  });

  criterion(6, 300.0, [] {
    const ReducedParams base = point(1.0, 2.2, kNu, 0.0);
    std::string detail;
    double prev = std::numeric_limits<double>::infinity();
    bool ok = true;
    for (double mK : {0.0, 50.0, 100.0, 200.0}) {
      ReducedParams r = base;
      r.n_th = thermal_occupation(kTwoPi * 10.56e6, 1e-3 * mK);
      const h::PointResult p = run(fmt("T=%.0f mK", mK), r, false, true);
      if (!p.error.empty() || p.unstable()) return Outcome{false, "simulation failed at " + fmt("%.0f mK", mK)};
      ok = ok && p.entanglement_avg <= prev;
      prev = p.entanglement_avg;
      detail += fmt("%s%.0f mK: %.5f", detail.empty() ? "E_N at " : ", ", mK, p.entanglement_avg);
    }
    return Outcome{ok, detail + " (non-increasing)"};
  });

  criterion(7, 30.0, [] {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    int sets = 0, drawn = 0;
    double worst = 0.0;
    while (sets < 100) {
      ++drawn;
      ReducedParams r;
      r.delta_c_prime = 0.2 + 1.8 * U(rng);
      r.set_G(std::polar(0.6 * U(rng), kTwoPi * U(rng)));
      r.kappa = 0.02 + 0.5 * U(rng);
      r.gamma = 1e-3 + 0.05 * U(rng);
      r.n_th = 100.0 * U(rng);
      r.nu = 1.0;
      const Mat4 A = build_drift(r, 0.0);
      const double slow = -Eigen::EigenSolver<Mat4>(A, false).eigenvalues().real().maxCoeff();
      if (!(slow > 1e-3)) continue;  // unstable, or too slow for a desk-length integration
      const Mat4 V = lyapunov_steady(A, build_diffusion(r));
      CovarianceIntegration span;
      span.t1 = 16.0 / slow;
      const Mat4 W = integrate_covariance(r, initial_covariance(r.n_th), span).covariances.back();
      for (int i = 0; i < 4; ++i)
        for (int j = i; j < 4; ++j) worst = std::max(worst, rel(W(i, j), V(i, j)));
      ++sets;
    }
    return Outcome{worst < 1e-6, fmt("100 stable static sets (%d drawn): worst entry-wise relative gap %.2e", drawn,
                                     worst)};
  });

  criterion(8, 1.0, [] {
    double worst = 0.0;
    for (double r : {0.1, 0.5, 1.0, 2.0}) worst = std::max(worst, std::abs(log_negativity(two_mode_squeezed(r)) - 2 * r));
    double separable = log_negativity(initial_covariance(0.0));
    for (double n : {0.5, 10.0, 1000.0}) {
      Mat4 th = 0.5 * Mat4::Identity();
      th(0, 0) = th(1, 1) = n + 0.5;
      th(2, 2) = th(3, 3) = 3.0 * n + 0.5;
      separable = std::max(separable, log_negativity(th));
    }
    return Outcome{worst < 1e-10 && separable == 0.0,
                   fmt("two-mode squeezed |E_N - 2r| <= %.1e; vacuum/thermal E_N = %g", worst, separable)};
  });

  criterion(9, 900.0, [] {
    int agree = 0, total = 0;
    double worst_margin = 0.0;
    for (int i = 0; i < 20; ++i) {
      for (int j = 0; j < 20; ++j) {
        const ReducedParams r = point(0.1 + 2.4 * j / 19.0, 3.5 * i / 19.0, kNu, kNthHot);
        const StabilityVerdict f = floquet_multipliers(r).verdict;
        const StabilityVerdict p = divergence_probe(r);
        ++total;
        if (f.verdict == p.verdict) {
          ++agree;
        } else {
          worst_margin = std::max(worst_margin, std::abs(f.margin));
        }
      }
    }
    const double share = static_cast<double>(agree) / total;
    return Outcome{share >= 0.95 && worst_margin < 1e-3,
                   fmt("Floquet vs probe agree on %d/%d (%.1f%%); disagreements have |margin| <= %.2e", agree, total,
                       100.0 * share, worst_margin)};
  });

  criterion(10, 900.0, [] {
    double min_phys = std::numeric_limits<double>::infinity();
    double max_asym = 0.0;
    double worst = 0.0;
    std::string worst_label;
    int compared = 0;
    for (const Reported& rep : reported) {
      const h::PointResult& p = rep.result;
      if (!p.error.empty()) return Outcome{false, rep.label + ": " + p.error};
      min_phys = std::min(min_phys, p.min_physicality);
      max_asym = std::max(max_asym, p.max_asymmetry);
      if (p.unstable()) continue;  // nothing reported for diverging points
      const h::PointResult q = h::simulate_point(rep.params, desk_settings(true));
      const auto check = [&](double a, double b, const char* what) {
        const double d = rel(b, a);
        if (d > worst) {
          worst = d;
          worst_label = rep.label + " " + what;
        }
        ++compared;
      };
      if (rep.phonon) check(p.phonon_avg, q.phonon_avg, "<n>");
      if (rep.entanglement) check(p.entanglement_avg, q.entanglement_avg, "E_N");
    }
    const bool ok = min_phys >= -1e-6 && max_asym < 1e-9 && worst < 1e-4;
    return Outcome{ok, fmt("%zu runs: min physicality margin %.2e, max asymmetry %.1e; dt halving moves %d averages "
                           "by <= %.2e (worst: %s)",
                           reported.size(), min_phys, max_asym, compared, worst, worst_label.c_str())};
  });

  std::printf("%s: %d criterion(s) failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
