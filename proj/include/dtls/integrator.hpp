#pragma once

// Fixed-step classical fourth-order Runge-Kutta.

#include <cmath>
#include <cstdint>

#include <Eigen/Dense>

namespace dtls {

// One RK4 step of y' = f(t, y). State must support +, scalar * and be copyable.
template <class State, class Rhs>
State rk4_step(const Rhs& f, double t, const State& y, double h) {
    const State k1 = f(t, y);
    const State k2 = f(t + 0.5 * h, State(y + (0.5 * h) * k1));
    const State k3 = f(t + 0.5 * h, State(y + (0.5 * h) * k2));
    const State k4 = f(t + h, State(y + h * k3));
    return State(y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

// For an autonomous linear system y' = A y an RK4 step is exactly
// y -> P(hA) y with P(z) = 1 + z + z^2/2 + z^3/6 + z^4/24.
Eigen::MatrixXcd rk4_step_matrix(const Eigen::MatrixXcd& a, double h);

// m^n by binary powering; n = 0 gives the identity.
Eigen::MatrixXcd matrix_power(const Eigen::MatrixXcd& m, std::uint64_t n);

struct StepPlan {
    std::uint64_t steps = 0;
    double h = 0.0;
};

// Smallest number of equal steps not longer than max_step covering interval.
StepPlan plan_steps(double interval, double max_step);

} // namespace dtls
