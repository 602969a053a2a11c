#include "fmopto/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fmopto/errors.hpp"
#include "fmopto/rk4.hpp"

#include <unsupported/Eigen/MatrixFunctions>

namespace fmopto {

double modulated_detuning(const ReducedParams& r, double t) {
  return r.delta_c_prime + r.xi * r.nu * std::cos(r.nu * t);
}

DriftMatrix build_drift(const ReducedParams& r, double t) {
  const double delta = modulated_detuning(r, t);
  const double re = 2.0 * r.G_re;
  const double im = 2.0 * r.G_im;
  DriftMatrix A;
  // clang-format off
  A << -0.5 * r.kappa,  delta,          -im,            0.0,
       -delta,          -0.5 * r.kappa,  re,            0.0,
        0.0,             0.0,           -0.5 * r.gamma, 1.0,
        re,              im,            -1.0,          -0.5 * r.gamma;
  // clang-format on
  return A;
}

DiffusionMatrix build_diffusion(const ReducedParams& r) {
  const double mech = 0.5 * r.gamma * (2.0 * r.n_th + 1.0);
  DiffusionMatrix D;
  D.diag << 0.5 * r.kappa, 0.5 * r.kappa, mech, mech;
  return D;
}

CovarianceMatrix initial_covariance(double n_th) {
  if (!(n_th >= 0.0)) throw InvalidArgument("initial_covariance: n_th must be non-negative");
  const double mech = n_th + 0.5;
  return Eigen::Vector4d(0.5, 0.5, mech, mech).asDiagonal();
}

Mat4 symplectic_form() {
  Mat4 omega = Mat4::Zero();
  omega(0, 1) = 1.0;
  omega(1, 0) = -1.0;
  omega(2, 3) = 1.0;
  omega(3, 2) = -1.0;
  return omega;
}

double physicality_margin(const CovarianceMatrix& V) {
  const Eigen::Matrix4cd M = V.cast<std::complex<double>>() + std::complex<double>(0.0, 0.5) * symplectic_form();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> solver(M, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

double asymmetry(const CovarianceMatrix& V) { return (V - V.transpose()).cwiseAbs().maxCoeff(); }

bool is_physical(const CovarianceMatrix& V, double tol) {
  return V.allFinite() && asymmetry(V) < 1e-12 && physicality_margin(V) >= -tol;
}

Mat4 covariance_rhs(const DriftMatrix& A, const DiffusionMatrix& D, const CovarianceMatrix& V) {
  const Mat4 AV = A * V;
  Mat4 out = AV + AV.transpose();
  out.diagonal() += D.diag;
  return out;
}

CovarianceStepper::CovarianceStepper(const ReducedParams& r, double dt)
    : params_(r), static_drift_(build_drift(r, 0.0)), diffusion_(build_diffusion(r).dense()), dt_(dt) {}

Mat4 CovarianceStepper::rhs(double t, const Mat4& V) const {
  Mat4 A = static_drift_;
  const double delta = modulated_detuning(params_, t);
  A(0, 1) = delta;
  A(1, 0) = -delta;
  const Mat4 AV = A * V;
  return AV + AV.transpose() + diffusion_;
}

void CovarianceStepper::step(CovarianceMatrix& V, double t) const { step(V, t, dt_); }

void CovarianceStepper::step(CovarianceMatrix& V, double t, double h) const {
  const auto f = [this](double tt, const Mat4& y) -> Mat4 { return rhs(tt, y); };
  V = rk4_step(f, t, V, h);
  V = 0.5 * (V + V.transpose()).eval();
}

void StepChannel::apply(CovarianceMatrix& V) const {
  V = X * V * X.transpose() + Y;
  V = 0.5 * (V + V.transpose()).eval();
}

StepChannel step_channel(const ReducedParams& r, double t, double h) {
  const double c = std::sqrt(3.0) / 6.0;
  const Mat4 A1 = build_drift(r, t + (0.5 - c) * h);
  const Mat4 A2 = build_drift(r, t + (0.5 + c) * h);
  // h M = h/2 (A1 + A2) + sqrt(3)/12 h^2 [A2, A1]
  const Mat4 hM = 0.5 * h * (A1 + A2) + (std::sqrt(3.0) / 12.0) * h * h * (A2 * A1 - A1 * A2);

  using Mat8 = Eigen::Matrix<double, 8, 8>;
  Mat8 C = Mat8::Zero();
  C.topLeftCorner<4, 4>() = -hM;
  C.topRightCorner<4, 4>() = h * build_diffusion(r).dense();
  C.bottomRightCorner<4, 4>() = hM.transpose();
  const Mat8 E = C.exp();

  StepChannel ch;
  ch.X = E.bottomRightCorner<4, 4>().transpose();
  const Mat4 Y = ch.X * E.topRightCorner<4, 4>();
  ch.Y = 0.5 * (Y + Y.transpose());
  return ch;
}

ChannelPropagator::ChannelPropagator(const ReducedParams& r, const ResolvedStep& step, double t0)
    : params_(r), dt_(step.dt), t0_(t0) {
  if (step.steps_per_period > 0) {
    table_.reserve(static_cast<std::size_t>(step.steps_per_period));
    for (long k = 0; k < step.steps_per_period; ++k)
      table_.push_back(step_channel(r, t0 + static_cast<double>(k) * dt_, dt_));
  }
}

void ChannelPropagator::step(CovarianceMatrix& V, long n, double h) const {
  if (!table_.empty() && std::abs(h - dt_) <= 1e-9 * dt_) {
    table_[static_cast<std::size_t>(n % static_cast<long>(table_.size()))].apply(V);
    return;
  }
  step_channel(params_, t0_ + static_cast<double>(n) * dt_, h).apply(V);
}

Mat4 ChannelPropagator::monodromy() const {
  const double period = kTwoPi / params_.nu;
  Mat4 phi = Mat4::Identity();
  if (!table_.empty()) {
    for (const auto& ch : table_) phi = ch.X * phi;
    return phi;
  }
  const long n = static_cast<long>(std::ceil(period / dt_ - 1e-9));
  const double h = period / static_cast<double>(n);
  for (long k = 0; k < n; ++k) phi = step_channel(params_, t0_ + static_cast<double>(k) * h, h).X * phi;
  return phi;
}

std::string_view to_string(Integrator m) {
  switch (m) {
    case Integrator::channel:
      return "magnus4-channel";
    case Integrator::rk4:
      return "rk4";
  }
  return "unknown";
}

namespace {

struct Schedule {
  double dt;
  long steps_per_period;
  long n_steps;
  long stride;
  long dense_start;
};

Schedule make_schedule(const ReducedParams& r, const CovarianceIntegration& span) {
  if (!(span.t1 > span.t0) || !std::isfinite(span.t0) || !std::isfinite(span.t1))
    throw InvalidArgument("integrate_covariance: t_span must be finite with t1 > t0");
  if (span.stride < 0 || span.dense_tail_periods < 0) throw InvalidArgument("integrate_covariance: negative stride");
  const ResolvedStep step = resolve_step(span.step, r.nu);
  Schedule s;
  s.dt = step.dt;
  s.steps_per_period = step.steps_per_period;
  const long per_period =
      step.steps_per_period > 0 ? step.steps_per_period
                                : std::max(1L, static_cast<long>(std::lround(kTwoPi / r.nu / step.dt)));
  s.n_steps = static_cast<long>(std::ceil((span.t1 - span.t0) / step.dt - 1e-9));
  s.stride = span.stride > 0 ? span.stride : per_period;
  s.dense_start = std::max(0L, s.n_steps - per_period * span.dense_tail_periods);
  return s;
}

// Drives any stepper over the schedule, storing samples and watching the
// covariance diagonal against the divergence ceiling.
template <class StepFn>
SimulationTrace drive(const ReducedParams& r, const CovarianceMatrix& V0, const CovarianceIntegration& span,
                      StepFn&& advance) {
  const Schedule s = make_schedule(r, span);
  SimulationTrace trace;
  trace.params = r;
  trace.dt = s.dt;
  trace.steps_per_period = s.steps_per_period;
  trace.steps = s.n_steps;
  trace.method = std::string(to_string(span.method));

  Eigen::Vector4d ceiling;
  for (int i = 0; i < 4; ++i) ceiling(i) = span.divergence_factor * std::max(V0(i, i), 0.5);

  CovarianceMatrix V = V0;
  trace.times.push_back(span.t0);
  trace.covariances.push_back(V);
  bool dense_marked = false;
  if (s.dense_start == 0) {
    trace.dense_begin = 0;
    dense_marked = true;
  }

  for (long n = 0; n < s.n_steps; ++n) {
    const double t = span.t0 + static_cast<double>(n) * s.dt;
    const bool last = n + 1 == s.n_steps;
    const double h = last ? span.t1 - t : s.dt;
    V = advance(V, n, t, h);
    const double t_next = last ? span.t1 : span.t0 + static_cast<double>(n + 1) * s.dt;

    bool blown = !V.allFinite();
    for (int i = 0; i < 4 && !blown; ++i) blown = V(i, i) > ceiling(i);
    if (blown) {
      trace.times.push_back(t_next);
      trace.covariances.push_back(V);
      trace.diverged = true;
      trace.divergence_time = t_next;
      trace.steps = n + 1;
      if (!dense_marked) trace.dense_begin = trace.times.size() - 1;
      return trace;
    }

    const long idx = n + 1;
    const bool in_tail = idx >= s.dense_start;
    if (in_tail || idx % s.stride == 0 || last) {
      if (in_tail && !dense_marked) {
        trace.dense_begin = trace.times.size();
        dense_marked = true;
      }
      trace.times.push_back(t_next);
      trace.covariances.push_back(V);
    }
  }
  return trace;
}

}  // namespace

SimulationTrace integrate_covariance(const ReducedParams& r, const CovarianceMatrix& V0,
                                     const CovarianceIntegration& span) {
  r.validate();
  const ResolvedStep step = resolve_step(span.step, r.nu);
  if (span.method == Integrator::rk4) {
    const CovarianceStepper stepper(r, step.dt);
    return drive(r, V0, span, [&stepper](CovarianceMatrix V, long, double t, double h) {
      stepper.step(V, t, h);
      return V;
    });
  }
  const ChannelPropagator prop(r, step, span.t0);
  return drive(r, V0, span, [&prop](CovarianceMatrix V, long n, double, double h) {
    prop.step(V, n, h);
    return V;
  });
}

SimulationTrace integrate_covariance_tracking(const ReducedParams& r, const CovarianceMatrix& V0,
                                              MeanFieldState initial, const CovarianceIntegration& span) {
  r.validate();
  using State = Eigen::Matrix<double, 20, 1>;
  const DiffusionMatrix D = build_diffusion(r);
  const auto rhs = [&r, &D](double t, const State& y) -> State {
    const std::complex<double> I{0.0, 1.0};
    const std::complex<double> alpha(y(0), y(1));
    const std::complex<double> beta(y(2), y(3));
    const double delta = modulated_detuning(r, t);
    const std::complex<double> dalpha = -I * delta * alpha - 0.5 * r.kappa * alpha - I * r.E;
    const std::complex<double> dbeta = -I * beta - 0.5 * r.gamma * beta + I * r.g * std::norm(alpha);

    ReducedParams local = r;
    local.set_G(r.g * alpha);
    const Mat4 V = Eigen::Map<const Mat4>(y.data() + 4);
    const Mat4 dV = covariance_rhs(build_drift(local, t), D, V);

    State dy;
    dy << dalpha.real(), dalpha.imag(), dbeta.real(), dbeta.imag(), Eigen::Map<const Eigen::Matrix<double, 16, 1>>(dV.data());
    return dy;
  };

  State y;
  y.head<4>() << initial.alpha.real(), initial.alpha.imag(), initial.beta.real(), initial.beta.imag();
  CovarianceIntegration rk = span;
  rk.method = Integrator::rk4;
  return drive(r, V0, rk, [&](const CovarianceMatrix& V, long, double t, double h) {
    Eigen::Map<Mat4>(y.data() + 4) = V;
    y = rk4_step(rhs, t, y, h);
    Mat4 out = Eigen::Map<const Mat4>(y.data() + 4);
    return Mat4(0.5 * (out + out.transpose()));
  });
}

namespace {

using Mat16 = Eigen::Matrix<double, 16, 16>;

// Column-major vec: vec(AV) = (I (x) A) vec V and vec(V A^T) = (A (x) I) vec V.
Mat16 lyapunov_operator(const DriftMatrix& A) {
  Mat16 L = Mat16::Zero();
  for (int c = 0; c < 4; ++c)
    for (int r = 0; r < 4; ++r)
      for (int j = 0; j < 4; ++j) {
        L(c * 4 + r, c * 4 + j) += A(r, j);
        L(c * 4 + r, j * 4 + r) += A(c, j);
      }
  return L;
}

// Solves L vec V = vec B in long double with one refinement step and
// returns the symmetrized V.
Mat4 solve_vectorized(const Mat16& L, const Mat4& B) {
  using Mat16l = Eigen::Matrix<long double, 16, 16>;
  using Vec16l = Eigen::Matrix<long double, 16, 1>;
  const Mat16l Ll = L.cast<long double>();
  Vec16l b;
  for (int c = 0; c < 4; ++c)
    for (int r = 0; r < 4; ++r) b(c * 4 + r) = static_cast<long double>(B(r, c));
  const Eigen::FullPivLU<Mat16l> lu(Ll);
  Vec16l x = lu.solve(b);
  x += lu.solve(Vec16l(b - Ll * x));
  Mat4 V;
  for (int c = 0; c < 4; ++c)
    for (int r = 0; r < 4; ++r) V(r, c) = static_cast<double>(x(c * 4 + r));
  return 0.5 * (V + V.transpose());
}

}  // namespace

PeriodicState periodic_steady_state(const ReducedParams& r, const StepPolicy& step) {
  r.validate();
  const ResolvedStep resolved = resolve_step(step, r.nu);
  if (resolved.steps_per_period <= 0)
    throw StepPolicyError("periodic_steady_state: dt must divide the modulation period");
  const ChannelPropagator prop(r, resolved);
  const long n = resolved.steps_per_period;

  // Compose the period channel: X from the propagators, Y by pushing V = 0.
  const Mat4 X = prop.monodromy();
  Mat4 Y = Mat4::Zero();
  for (long k = 0; k < n; ++k) prop.step(Y, k, resolved.dt);

  PeriodicState out;
  out.floquet_radius = Eigen::EigenSolver<Mat4>(X, false).eigenvalues().cwiseAbs().maxCoeff();
  if (!(out.floquet_radius < 1.0)) {
    std::ostringstream msg;
    msg << "periodic_steady_state: period map is not contracting (max |mu| = " << out.floquet_radius << ")";
    throw SolverError(msg.str());
  }

  // vec(X V X^T) = (X (x) X) vec V, column-major.
  Mat16 K = Mat16::Identity();
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d) K(b * 4 + a, d * 4 + c) -= X(a, c) * X(b, d);
  const Eigen::Matrix<double, 16, 1> sv = Eigen::JacobiSVD<Mat16>(K).singularValues();
  if (!(sv(0) / sv(15) <= 1e12)) {
    std::ostringstream msg;
    msg << "periodic_steady_state: period map too close to marginal (cond = " << sv(0) / sv(15) << ")";
    throw SolverError(msg.str());
  }
  Mat4 V = solve_vectorized(K, Y);

  out.times.push_back(0.0);
  out.covariances.push_back(V);
  for (long k = 0; k < n; ++k) {
    prop.step(V, k, resolved.dt);
    out.times.push_back(static_cast<double>(k + 1) * resolved.dt);
    out.covariances.push_back(V);
  }
  return out;
}

CovarianceMatrix lyapunov_steady(const DriftMatrix& A, const DiffusionMatrix& D) {
  if (!A.allFinite() || !D.diag.allFinite()) throw InvalidArgument("lyapunov_steady: non-finite input");
  const double max_re = Eigen::EigenSolver<Mat4>(A, false).eigenvalues().real().maxCoeff();
  if (!(max_re < 0.0)) {
    std::ostringstream msg;
    msg << "lyapunov_steady: drift matrix is not Hurwitz (max Re lambda = " << max_re << ")";
    throw SolverError(msg.str());
  }

  const Mat16 L = lyapunov_operator(A);
  const Eigen::Matrix<double, 16, 1> sv = Eigen::JacobiSVD<Mat16>(L).singularValues();
  const double cond = sv(0) / sv(15);
  if (!(cond <= 1e12)) {
    std::ostringstream msg;
    msg << "lyapunov_steady: Lyapunov operator is ill-conditioned (cond = " << cond << ")";
    throw SolverError(msg.str());
  }

  Mat4 V = solve_vectorized(L, -D.dense());

  const double residual = lyapunov_residual(A, D, V);
  if (!(residual < 1e-10)) {
    std::ostringstream msg;
    msg << "lyapunov_steady: residual " << residual << " above 1e-10";
    throw SolverError(msg.str());
  }
  return V;
}

double lyapunov_residual(const DriftMatrix& A, const DiffusionMatrix& D, const CovarianceMatrix& V) {
  using Mat4l = Eigen::Matrix<long double, 4, 4>;
  const Mat4l Al = A.cast<long double>();
  const Mat4l Vl = V.cast<long double>();
  Mat4l R = Al * Vl + Vl * Al.transpose();
  for (int i = 0; i < 4; ++i) R(i, i) += static_cast<long double>(D.diag(i));
  const double scale = D.diag.cwiseAbs().maxCoeff();
  const double r = static_cast<double>(R.cwiseAbs().maxCoeff());
  return scale > 0.0 ? r / scale : r;
}

}  // namespace fmopto
