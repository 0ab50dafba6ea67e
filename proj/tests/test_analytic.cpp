#include <doctest.h>

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "dtls/analytic.hpp"
#include "dtls/signal.hpp"
#include "dtls/spectra.hpp"

using namespace dtls::analytic;

namespace {

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = a + (b - a) * i / (n - 1);
    return v;
}

double relative_gap(double a, double b) { return std::abs(a - b) / std::abs(b); }

} // namespace

TEST_CASE("F: anchor values") {
    CHECK(f_function(0.02, 0.5, 0.0) == 0.0);
    CHECK(f_function(0.02, 0.0, 50.0) == doctest::Approx(2.0 * (1.0 - std::exp(-1.0)) / 0.02).epsilon(1e-12));
    CHECK(f_function(0.02, 0.0, 50.0) == doctest::Approx(63.2121).epsilon(1e-6));
    for (double x : {0.001, 0.02, 0.3}) {
        for (double tau : {1e-6, 0.5, 10.0, 1e3}) {
            CHECK(f_function(x, 0.0, tau) == doctest::Approx(2.0 * (-std::expm1(-x * tau)) / x).epsilon(1e-12));
        }
    }
    CHECK_THROWS_AS(f_function(0.0, 0.1, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(f_function(-0.1, 0.1, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(f_function(0.1, 0.1, -1.0), std::invalid_argument);
}

TEST_CASE("F: even in y and finite near the removable point") {
    for (double x : {0.005, 0.02, 0.2}) {
        for (double y : {1e-12, 1e-6, 0.01, 0.3, 2.0}) {
            for (double tau : {0.1, 10.0, 100.0, 1e4}) {
                const double a = f_function(x, y, tau), b = f_function(x, -y, tau);
                CHECK(std::isfinite(a));
                CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)));
            }
        }
    }
    // Continuity across the series branch.
    const double x = 1e-6, tau = 50.0;
    CHECK(f_function(x, 1e-7, tau) == doctest::Approx(f_function(x, 3e-6, tau)).epsilon(1e-6));
}

TEST_CASE("F: long-time profile has FWHM 2x above the broad background") {
    const auto y = linspace(-0.5, 0.5, 401);
    std::vector<double> v;
    for (double yi : y) v.push_back(f_function(0.02, yi, 1e4));
    // The narrow line sits on a negative component of width ~1.
    const auto raw = dtls::fwhm(y, v);
    CHECK(raw.fwhm < 0.04);
    dtls::FwhmOptions o;
    o.baseline = dtls::Baseline::wings;
    o.expected_width = 0.04;
    const auto m = dtls::fwhm(y, v, o);
    CHECK(m.status == dtls::PeakStatus::ok);
    CHECK(relative_gap(m.fwhm, 0.04) < 0.02);
    CHECK(m.peak_delta == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
}

TEST_CASE("lambda_nonlinear_absorption: trivial limits and evenness") {
    LambdaParams p;
    p.omega1 = 0.0;
    for (double d : {-0.1, 0.0, 0.03}) {
        p.delta = d;
        CHECK(lambda_nonlinear_absorption(p, 100.0) == 0.0);
    }
    p.omega1 = 0.05;
    for (double d : {-0.1, 0.0, 0.03}) {
        p.delta = d;
        CHECK(lambda_nonlinear_absorption(p, 0.0) == 0.0);
    }
    p.delta = 0.0;
    CHECK(lambda_nonlinear_absorption(p, 50.0) < 0.0);
    for (double t : {1.0, 30.0, 700.0}) {
        p.delta = 0.013;
        const double a = lambda_nonlinear_absorption(p, t);
        p.delta = -0.013;
        CHECK(lambda_nonlinear_absorption(p, t) == doctest::Approx(a).epsilon(1e-12));
    }
}

TEST_CASE("LambdaParams validation and warnings") {
    LambdaParams p;
    p.gamma_ba = 0.3;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.gamma_ba = 0.5;
    p.scale_K = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.scale_K = 1.0;
    p.omega1 = 0.05;
    CHECK(p.adiabatic_warnings().empty());
    p.omega1 = 0.3;
    p.delta = 0.2;
    CHECK(p.adiabatic_warnings().size() == 2);
}

TEST_CASE("lambda_steady_absorption: EIT dip") {
    LambdaParams p;
    p.omega1 = 0.1;
    CHECK(lambda_steady_absorption(p).fwhm_delta == doctest::Approx(0.04).epsilon(1e-14));

    p.omega1 = 0.05;
    const auto d = linspace(-0.2, 0.2, 2001);
    std::vector<double> alpha, dip;
    for (double di : d) {
        p.delta = di;
        const double a = lambda_steady_absorption(p).absorption;
        alpha.push_back(a);
        dip.push_back(a - linear_absorption(p.omega2, p.gamma, di));
    }
    const auto centre = static_cast<std::size_t>(std::min_element(alpha.begin(), alpha.end()) - alpha.begin());
    CHECK(d[centre] == doctest::Approx(0.0).scale(1.0));
    const auto m = dtls::fwhm(d, dip);
    CHECK(m.status == dtls::PeakStatus::ok);
    CHECK(m.peak_value < 0.0);
    CHECK(relative_gap(m.fwhm, 4.0 * 0.05 * 0.05) < 0.03);
}

TEST_CASE("lambda_exact_ode: dark without probe, conserved trace") {
    LambdaParams p;
    p.omega1 = 0.05;
    p.omega2 = 0.0;
    const auto dark = lambda_exact_ode(p, 500.0, {0.0, 10.0});
    for (const auto& s : dark.states) {
        CHECK(s.cc == 1.0);
        CHECK(s.aa == 0.0);
        CHECK(std::abs(s.bc) == 0.0);
    }

    p.omega2 = 1e-3;
    p.delta = 0.01;
    const auto traj = lambda_exact_ode(p, 5000.0, {0.0, 50.0});
    double drift = 0.0;
    for (const auto& s : traj.states) drift = std::max(drift, std::abs(s.trace() - 1.0));
    CHECK(drift <= 1e-9);
    CHECK(traj.times.back() == doctest::Approx(5000.0));
}

TEST_CASE("lambda_exact_ode: Raman transient oscillates at delta") {
    LambdaParams p;
    p.omega1 = 0.05; // beta = 0.005
    p.delta = 0.1;
    const double dt = 0.5;
    const auto traj = lambda_exact_ode(p, 1500.0, {0.0, dt});
    std::vector<double> x;
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        if (traj.times[i] >= 10.0) x.push_back(traj.states[i].bc.imag());
    }
    const auto osc = dtls::oscillatory_part(x, dt, 0.01);
    const auto peak = dtls::dominant_frequency(osc, dt, {0.01, dtls::Window::rectangular, false});
    CHECK(relative_gap(peak.omega, 0.1) < 0.02);
}

TEST_CASE("lambda: adiabatic formula against exact integration") {
    LambdaParams p;
    p.omega1 = 0.05;
    p.delta = 0.01;
    const auto ex = lambda_exact_nonlinear_absorption(p, 2000.0, {0.0, 2000.0});
    REQUIRE(ex.times.size() == 2);
    const double adiabatic = lambda_nonlinear_absorption(p, 2000.0);
    CHECK(relative_gap(adiabatic, ex.delta_alpha.back()) <= 0.05);
}

TEST_CASE("N system: background, narrowing and steady limit") {
    NParams p;
    p.omega1 = 0.05;
    p.A = 0.0;
    p.B = 1.0;
    p.delta = 0.02;
    const double kp = n_kprime(p);
    CHECK(n_nonlinear_absorption(p, 300.0) == doctest::Approx(-kp / (0.25 + 0.02 * 0.02)).epsilon(1e-14));
    CHECK(n_nonlinear_absorption(p, 300.0) == n_nonlinear_absorption(p, 3.0));

    p.A = std::sqrt(0.5);
    p.B = std::sqrt(0.5);
    CHECK(p.beta_prime() == doctest::Approx(p.beta() / 2.0).epsilon(1e-14));
    CHECK(p.beta_prime() <= p.beta());

    for (double d : {0.0, 0.003, -0.02, 0.1}) {
        p.delta = d;
        const double lhs = n_nonlinear_absorption(p, 1e9) + linear_absorption(p.omega2, p.gamma, d);
        CHECK(std::abs(lhs - n_steady_absorption(p)) <= 1e-10 * std::abs(n_steady_absorption(p)));
    }

    // EIA enhancement at resonance.
    p.delta = 0.0;
    NParams off = p;
    off.omega1 = 0.0;
    CHECK(n_steady_absorption(p) > n_steady_absorption(off));
    CHECK(n_steady_absorption(off) == doctest::Approx(linear_absorption(p.omega2, 1.0, 0.0)).epsilon(1e-14));
}

TEST_CASE("N system: long-time resonance width 2 beta'") {
    NParams p;
    p.omega1 = 0.05;
    p.A = std::sqrt(0.5);
    p.B = std::sqrt(0.5);
    const double bp = p.beta_prime(); // 0.0025
    REQUIRE(bp <= 0.01);
    const auto d = linspace(-0.1, 0.1, 2001);
    std::vector<double> res;
    for (double di : d) {
        p.delta = di;
        const double background = -n_kprime(p) / (0.25 + di * di);
        res.push_back(n_nonlinear_absorption(p, 1e5) - background);
    }
    const auto m = dtls::fwhm(d, res);
    CHECK(m.status == dtls::PeakStatus::ok);
    CHECK(m.peak_value > 0.0);
    CHECK(relative_gap(m.fwhm, 2.0 * bp) < 0.10);
}

TEST_CASE("N system: pump state matches a two-level Bloch integration") {
    NParams p;
    p.omega1 = 0.08;
    const auto s0 = n_pump_steady_state(p);

    // Cycling transition c <-> d with H = O1 (|c><d| + |d><c|), decay d -> c.
    const std::complex<double> I(0.0, 1.0);
    Eigen::Matrix2cd h;
    h << 0.0, p.omega1, p.omega1, 0.0;
    const auto rhs = [&](const Eigen::Matrix2cd& r) {
        Eigen::Matrix2cd d = -I * (h * r - r * h);
        d(1, 1) -= r(1, 1);
        d(0, 0) += r(1, 1);
        d(0, 1) -= 0.5 * r(0, 1);
        d(1, 0) -= 0.5 * r(1, 0);
        return d;
    };
    Eigen::Matrix2cd r = Eigen::Matrix2cd::Zero();
    r(0, 0) = 1.0;
    const double dt = 0.01;
    for (int i = 0; i < 20000; ++i) {
        const Eigen::Matrix2cd k1 = rhs(r);
        const Eigen::Matrix2cd k2 = rhs(r + 0.5 * dt * k1);
        const Eigen::Matrix2cd k3 = rhs(r + 0.5 * dt * k2);
        const Eigen::Matrix2cd k4 = rhs(r + dt * k3);
        r += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    CHECK(std::abs(s0.dd - r(1, 1).real()) < 1e-9);
    CHECK(std::abs(s0.cc - r(0, 0).real()) < 1e-9);
    CHECK(std::abs(s0.cd - r(0, 1)) < 1e-9);
    // Lowest order: sigma_cd ~ 2 i O1 / gamma.
    NParams weak;
    weak.omega1 = 1e-4;
    CHECK(std::abs(n_pump_steady_state(weak).cd - 2.0 * I * 1e-4) < 1e-10);
}

TEST_CASE("n_exact_ode: homogeneous without probe, steady limit") {
    NParams p;
    p.omega1 = 0.05;
    p.A = 0.5;
    p.B = std::sqrt(0.75);
    p.omega2 = 0.0;
    for (const auto& s : n_exact_ode(p, 200.0, {0.0, 5.0}).states) {
        CHECK(std::abs(s.ac) + std::abs(s.bc) + std::abs(s.ad) + std::abs(s.bd) == 0.0);
    }
    p.omega2 = 1e-3;
    p.delta = 0.004;
    const auto traj = n_exact_ode(p, 20000.0, {0.0, 20000.0});
    const auto st = n_first_order_steady(p);
    CHECK(std::abs(traj.states.back().bc - st.bc) <= 1e-8 * std::abs(st.bc));
    CHECK(std::abs(traj.states.back().ac - st.ac) <= 1e-6 * std::abs(st.ac));
}

TEST_CASE("n_raman_free_decay: envelope rate beta (1 - |A|^2)") {
    for (double a2 : {0.0, 0.75}) {
        NParams p;
        p.omega1 = 0.05;
        p.A = std::sqrt(a2);
        p.B = std::sqrt(1.0 - a2);
        p.delta = 0.001;
        const double rate = p.beta() * (1.0 - a2);
        const auto traj = n_raman_free_decay(p, 5.0 / rate, {0.0, 1.0});
        std::vector<std::complex<double>> ac;
        for (const auto& s : traj.states) ac.push_back(s.ac);
        const double k = dtls::envelope_decay_rate(traj.times, ac);
        CAPTURE(a2);
        CHECK(relative_gap(k, rate) < 0.10);
    }
}

TEST_CASE("N params validation") {
    NParams p;
    p.A = 0.5;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.B = std::sqrt(0.75);
    CHECK_NOTHROW(p.validate());
    p.scale_Kprime = -1.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("F: short-time wings oscillate with period 2 pi / tau") {
    const double tau = 100.0, x = 1e-3;
    const auto y = linspace(0.05, 0.6, 5501);
    std::vector<double> maxima;
    for (std::size_t i = 1; i + 1 < y.size(); ++i) {
        const double a = f_function(x, y[i - 1], tau), b = f_function(x, y[i], tau), c = f_function(x, y[i + 1], tau);
        if (b > a && b >= c) maxima.push_back(y[i]);
    }
    REQUIRE(maxima.size() >= 5);
    const double period = (maxima.back() - maxima.front()) / static_cast<double>(maxima.size() - 1);
    CHECK(relative_gap(period, 2.0 * std::numbers::pi / tau) < 0.10);
}
