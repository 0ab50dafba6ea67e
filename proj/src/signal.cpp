#include "dtls/signal.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

namespace dtls {

SpectralPeak dominant_frequency(const std::vector<double>& x, double dt, const FrequencyOptions& opts) {
    const std::size_t n = x.size();
    if (n < 8) throw std::invalid_argument("dominant_frequency needs at least 8 samples");
    if (!(dt > 0.0)) throw std::invalid_argument("dominant_frequency needs dt > 0");

    Eigen::VectorXd r = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(n));
    if (opts.detrend) {
        Eigen::MatrixXd a(n, 2);
        for (std::size_t i = 0; i < n; ++i) {
            a(i, 0) = 1.0;
            a(i, 1) = static_cast<double>(i);
        }
        const Eigen::VectorXd coef = a.colPivHouseholderQr().solve(r);
        r -= a * coef;
    }

    std::size_t padded = 1;
    while (padded < 16 * n) padded <<= 1;
    std::vector<double> buf(padded, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double w = opts.window == Window::hann
                             ? 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / static_cast<double>(n - 1))
                             : 1.0;
        buf[i] = r(static_cast<Eigen::Index>(i)) * w;
    }
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> spec;
    fft.fwd(spec, buf);

    const double d_omega = 2.0 * std::numbers::pi / (static_cast<double>(padded) * dt);
    const std::size_t half = padded / 2;
    std::size_t best = 0;
    double best_mag = -1.0;
    for (std::size_t k = 1; k < half; ++k) {
        if (static_cast<double>(k) * d_omega < opts.min_omega) continue;
        const double m = std::abs(spec[k]);
        if (m > best_mag) {
            best_mag = m;
            best = k;
        }
    }
    if (best == 0) return {};

    double shift = 0.0;
    if (best + 1 < half && best > 1) {
        const double l = std::log(std::abs(spec[best - 1]) + 1e-300);
        const double c = std::log(best_mag + 1e-300);
        const double rr = std::log(std::abs(spec[best + 1]) + 1e-300);
        const double den = l - 2.0 * c + rr;
        if (den < 0.0) shift = 0.5 * (l - rr) / den;
    }
    return {(static_cast<double>(best) + shift) * d_omega, best_mag};
}

std::vector<ExponentialMode> exponential_modes(const std::vector<double>& x, double dt, double rel_tol) {
    const auto n = static_cast<Eigen::Index>(x.size());
    if (n < 8) throw std::invalid_argument("exponential_modes needs at least 8 samples");
    if (!(dt > 0.0)) throw std::invalid_argument("exponential_modes needs dt > 0");
    const Eigen::Index pencil = n / 3;
    Eigen::MatrixXd y(n - pencil, pencil + 1);
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
        for (Eigen::Index j = 0; j < y.cols(); ++j) y(i, j) = x[static_cast<std::size_t>(i + j)];
    }
    const Eigen::BDCSVD<Eigen::MatrixXd> svd(y, Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) == 0.0) return {};
    Eigen::Index m = 0;
    while (m < sv.size() && sv(m) > rel_tol * sv(0)) ++m;

    const Eigen::MatrixXd v = svd.matrixV().leftCols(m);
    const Eigen::MatrixXd v1 = v.topRows(pencil);
    const Eigen::MatrixXd v2 = v.bottomRows(pencil);
    const Eigen::MatrixXd a = v1.completeOrthogonalDecomposition().solve(v2);
    const Eigen::VectorXcd z = Eigen::EigenSolver<Eigen::MatrixXd>(a.transpose()).eigenvalues();

    // Amplitudes from the Vandermonde least-squares problem.
    Eigen::MatrixXcd vand(n, m);
    Eigen::VectorXcd rhs(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        rhs(i) = x[static_cast<std::size_t>(i)];
        for (Eigen::Index k = 0; k < m; ++k) vand(i, k) = std::pow(z(k), static_cast<double>(i));
    }
    const Eigen::VectorXcd amp = vand.colPivHouseholderQr().solve(rhs);

    const double horizon = dt * static_cast<double>(n - 1);
    std::vector<ExponentialMode> modes;
    for (Eigen::Index k = 0; k < m; ++k) modes.push_back({std::log(z(k)) / dt, amp(k)});
    const auto weight = [horizon](const ExponentialMode& e) {
        return std::abs(e.amplitude) / std::max(std::abs(e.lambda.real()), 1.0 / horizon);
    };
    std::sort(modes.begin(), modes.end(), [&](const auto& l, const auto& r) { return weight(l) > weight(r); });
    return modes;
}

std::vector<double> oscillatory_part(const std::vector<double>& x, double dt, double min_omega, double rel_tol) {
    std::vector<double> out = x;
    for (const auto& e : exponential_modes(x, dt, rel_tol)) {
        if (std::abs(e.lambda.imag()) >= min_omega) continue;
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i] -= std::real(e.amplitude * std::exp(e.lambda * (dt * static_cast<double>(i))));
        }
    }
    return out;
}

double envelope_decay_rate(const std::vector<double>& t, const std::vector<std::complex<double>>& x,
                           std::complex<double> asymptote, double floor) {
    if (t.size() != x.size() || t.size() < 3) throw std::invalid_argument("envelope_decay_rate needs >= 3 paired samples");
    double peak = 0.0;
    for (const auto& v : x) peak = std::max(peak, std::abs(v - asymptote));
    double st = 0, sy = 0, stt = 0, sty = 0;
    int count = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double d = std::abs(x[i] - asymptote);
        if (d <= floor * peak || d == 0.0) continue;
        const double ly = std::log(d);
        st += t[i];
        sy += ly;
        stt += t[i] * t[i];
        sty += t[i] * ly;
        ++count;
    }
    if (count < 3) throw std::invalid_argument("envelope_decay_rate: too few samples above the floor");
    const double den = count * stt - st * st;
    return -(count * sty - st * sy) / den;
}

double buildup_time(const std::vector<double>& t, const std::vector<double>& x, double asymptote) {
    if (t.size() != x.size() || t.empty()) throw std::invalid_argument("buildup_time needs paired samples");
    const double span = asymptote - x.front();
    if (span == 0.0) return 0.0;
    const double target = (1.0 - std::exp(-1.0)) * span;
    for (std::size_t i = 1; i < t.size(); ++i) {
        const double p0 = (x[i - 1] - x.front()) / target;
        const double p1 = (x[i] - x.front()) / target;
        if (p1 >= 1.0) {
            const double frac = p1 == p0 ? 0.0 : (1.0 - p0) / (p1 - p0);
            return t[i - 1] + frac * (t[i] - t[i - 1]);
        }
    }
    return -1.0;
}

} // namespace dtls
