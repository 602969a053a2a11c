#include "fmopto/meanfield.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "fmopto/errors.hpp"
#include "fmopto/rk4.hpp"

namespace fmopto {

namespace {

constexpr cplx I{0.0, 1.0};

// Everything below works in units of omega_m.
struct Scaled {
  double delta_c, kappa, gamma, g, E;
};

cplx alpha_of(const Scaled& s, double delta) { return -I * s.E / cplx(0.5 * s.kappa, delta); }

cplx beta_of(const Scaled& s, cplx alpha) { return I * s.g * std::norm(alpha) / cplx(0.5 * s.gamma, 1.0); }

double delta_of(const Scaled& s, cplx beta) { return s.delta_c - 2.0 * s.g * beta.real(); }

double relative(double diff, double scale) { return std::abs(diff) / std::max(scale, 1e-300); }

MeanFieldResiduals residuals_of(const Scaled& s, const MeanFieldState& st, double delta) {
  MeanFieldResiduals res;
  const cplx a = alpha_of(s, delta);
  const cplx b = beta_of(s, st.alpha);
  res.alpha = std::abs(st.alpha - a) / std::max(std::abs(a), 1e-300);
  res.beta = std::abs(st.beta - b) / std::max(std::abs(b), 1e-300);
  if (a == cplx{} && st.alpha == cplx{}) res.alpha = 0.0;
  if (b == cplx{} && st.beta == cplx{}) res.beta = 0.0;
  res.delta = relative(delta - delta_of(s, st.beta), std::max({std::abs(s.delta_c), std::abs(delta), 1.0}));
  return res;
}

// Positive roots of x((kappa/2)^2 + (Delta_c - a x)^2) = E^2 with x = |alpha|^2
// and a = 2g^2/(gamma^2/4 + 1), i.e. the static shift Delta' = Delta_c - a x.
std::vector<double> intensity_roots(const Scaled& s) {
  const double a = 2.0 * s.g * s.g / (0.25 * s.gamma * s.gamma + 1.0);
  const double c2 = 0.25 * s.kappa * s.kappa + s.delta_c * s.delta_c;
  const double E2 = s.E * s.E;
  const auto f = [&](double x) { return x * (0.25 * s.kappa * s.kappa + (s.delta_c - a * x) * (s.delta_c - a * x)) - E2; };
  const auto df = [&](double x) { return a * a * 3.0 * x * x - 4.0 * a * s.delta_c * x + c2; };

  std::vector<double> out;
  if (a == 0.0) {
    if (c2 > 0.0) out.push_back(E2 / c2);
    return out;
  }
  // monic companion: x^3 - (2 Delta_c / a) x^2 + (c2 / a^2) x - E^2 / a^2
  Eigen::Matrix3d C = Eigen::Matrix3d::Zero();
  C(0, 0) = 2.0 * s.delta_c / a;
  C(0, 1) = -c2 / (a * a);
  C(0, 2) = E2 / (a * a);
  C(1, 0) = 1.0;
  C(2, 1) = 1.0;
  const Eigen::Vector3cd ev = C.eigenvalues();
  for (int i = 0; i < 3; ++i) {
    double x = ev(i).real();
    if (std::abs(ev(i).imag()) > 1e-7 * std::abs(ev(i)) || !(x > 0.0)) continue;
    for (int k = 0; k < 20; ++k) {
      const double d = df(x);
      if (d == 0.0) break;
      const double step = f(x) / d;
      x -= step;
      if (std::abs(step) <= 1e-15 * std::abs(x)) break;
    }
    if (x > 0.0) out.push_back(x);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(), [](double u, double v) { return std::abs(u - v) <= 1e-9 * v; }),
            out.end());
  return out;
}

}  // namespace

double MeanFieldResiduals::max() const noexcept { return std::max({alpha, beta, delta}); }

SteadyMeanField steady_mean_fields(const PhysicalParams& params, double E, const MeanFieldSolverOptions& options) {
  params.validate();
  if (!(E >= 0.0) || !std::isfinite(E)) throw InvalidArgument("drive amplitude must be finite and non-negative");
  const double wm = params.omega_m;
  const Scaled s{params.delta_c() / wm, params.kappa / wm, params.gamma / wm, params.g / wm, E / wm};
  if (s.kappa == 0.0 && s.delta_c == 0.0 && s.E != 0.0)
    throw InvalidArgument("steady_mean_fields: kappa = 0 and Delta_c = 0 make the cavity solve singular");

  double delta = s.delta_c;
  MeanFieldState st;
  MeanFieldResiduals res;
  int it = 0;
  for (; it <= options.max_iterations; ++it) {
    st.alpha = alpha_of(s, delta);
    st.beta = beta_of(s, st.alpha);
    res = residuals_of(s, st, delta);
    if (res.max() < options.tolerance) break;
    if (!std::isfinite(res.delta)) break;
    delta = (1.0 - options.damping) * delta + options.damping * delta_of(s, st.beta);
  }
  if (!(res.max() < options.tolerance)) {
    // The damped map can oscillate around a unique fixed point; the intensity
    // cubic tells that case apart from genuine multistability.
    const std::vector<double> roots = intensity_roots(s);
    const double shift = 2.0 * s.g * s.g / (0.25 * s.gamma * s.gamma + 1.0);
    bool rescued = false;
    if (roots.size() == 1) {
      const double d = s.delta_c - shift * roots.front();
      MeanFieldState cand;
      cand.alpha = alpha_of(s, d);
      cand.beta = beta_of(s, cand.alpha);
      const MeanFieldResiduals cres = residuals_of(s, cand, d);
      if (cres.max() < options.tolerance) {
        st = cand;
        delta = d;
        res = cres;
        rescued = true;
      }
    }
    if (!rescued) {
      std::ostringstream msg;
      msg << "mean-field iteration did not converge after " << it << " iterations; residuals alpha=" << res.alpha
          << " beta=" << res.beta << " delta=" << res.delta << "; " << roots.size() << " steady branch(es)";
      if (roots.size() > 1) {
        msg << " (multistable) at Delta'/omega_m =";
        for (double x : roots) msg << ' ' << s.delta_c - shift * x;
      }
      throw ConvergenceError(msg.str());
    }
  }

  SteadyMeanField out;
  out.state = st;
  out.delta_c_prime = delta * wm;
  out.G = params.g * st.alpha;
  out.iterations = it;
  out.residuals = res;
  return out;
}

MeanFieldTrajectory integrate_mean_fields(const ReducedParams& r, MeanFieldState initial,
                                          const MeanFieldIntegration& span) {
  r.validate();
  if (!(span.t1 > span.t0) || !std::isfinite(span.t1)) throw InvalidArgument("integrate_mean_fields: empty or infinite span");
  if (span.stride < 1) throw InvalidArgument("integrate_mean_fields: stride must be >= 1");
  const ResolvedStep step = resolve_step(span.step, r.nu);

  using State = Eigen::Vector2cd;
  const auto rhs = [&r](double t, const State& y) -> State {
    const double delta = r.delta_c_prime + r.xi * r.nu * std::cos(r.nu * t);
    State dy;
    dy(0) = -I * delta * y(0) - 0.5 * r.kappa * y(0) - I * r.E;
    dy(1) = -I * y(1) - 0.5 * r.gamma * y(1) + I * r.g * std::norm(y(0));
    return dy;
  };

  const double total = span.t1 - span.t0;
  const long n_steps = static_cast<long>(std::ceil(total / step.dt - 1e-9));

  MeanFieldTrajectory traj;
  State y(initial.alpha, initial.beta);
  traj.times.push_back(span.t0);
  traj.states.push_back(initial);
  for (long n = 0; n < n_steps; ++n) {
    const double t = span.t0 + static_cast<double>(n) * step.dt;
    const double h = std::min(step.dt, span.t1 - t);
    y = rk4_step(rhs, t, y, h);
    if (!(std::abs(y(0)) <= span.alpha_bound)) {
      std::ostringstream msg;
      msg << "mean-field trajectory diverged at t=" << t + h << " (|alpha| > " << span.alpha_bound << ")";
      throw DivergenceError(msg.str());
    }
    if ((n + 1) % span.stride == 0 || n + 1 == n_steps) {
      traj.times.push_back(n + 1 == n_steps ? span.t1 : t + h);
      traj.states.push_back({y(0), y(1)});
    }
  }
  return traj;
}

}  // namespace fmopto
