#pragma once

namespace fmopto {

/// One classical fourth-order Runge-Kutta step for y' = f(t, y).
/// `State` needs vector-space arithmetic (Eigen types qualify).
template <class State, class Rhs>
State rk4_step(const Rhs& f, double t, const State& y, double h) {
  const double half = 0.5 * h;
  const State k1 = f(t, y);
  const State k2 = f(t + half, State(y + half * k1));
  const State k3 = f(t + half, State(y + half * k2));
  const State k4 = f(t + h, State(y + h * k3));
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace fmopto
