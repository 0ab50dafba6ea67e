#include "dtls/integrator.hpp"

#include <stdexcept>

namespace dtls {

Eigen::MatrixXcd rk4_step_matrix(const Eigen::MatrixXcd& a, double h) {
    const Eigen::Index n = a.rows();
    const Eigen::MatrixXcd z = h * a;
    // Horner form of 1 + z(1 + z/2(1 + z/3(1 + z/4)))
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
    Eigen::MatrixXcd p = id + z / 4.0;
    p = id + (z / 3.0) * p;
    p = id + (z / 2.0) * p;
    return id + z * p;
}

Eigen::MatrixXcd matrix_power(const Eigen::MatrixXcd& m, std::uint64_t n) {
    Eigen::MatrixXcd result = Eigen::MatrixXcd::Identity(m.rows(), m.cols());
    Eigen::MatrixXcd base = m;
    bool first = true;
    while (n > 0) {
        if (n & 1u) {
            if (first) {
                result = base;
                first = false;
            } else {
                result = (result * base).eval();
            }
        }
        n >>= 1u;
        if (n > 0) base = (base * base).eval();
    }
    return result;
}

StepPlan plan_steps(double interval, double max_step) {
    if (!(max_step > 0.0)) throw std::invalid_argument("integration step must be positive");
    if (interval < 0.0) throw std::invalid_argument("negative integration interval");
    if (interval == 0.0) return {0, 0.0};
    const auto steps = static_cast<std::uint64_t>(std::ceil(interval / max_step - 1e-9));
    const std::uint64_t n = steps == 0 ? 1 : steps;
    return {n, interval / static_cast<double>(n)};
}

} // namespace dtls
