#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "dtls/signal.hpp"

using namespace dtls;

namespace {

std::vector<double> sample(double dt, int n, const auto& f) {
    std::vector<double> x(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = f(i * dt);
    return x;
}

} // namespace

TEST_CASE("dominant_frequency: pure and damped sines") {
    const double dt = 0.5;
    const auto x = sample(dt, 800, [](double t) { return 3.0 + 0.01 * t + std::sin(0.37 * t + 0.2); });
    CHECK(dominant_frequency(x, dt).omega == doctest::Approx(0.37).epsilon(1e-3));

    const auto d = sample(dt, 1200, [](double t) { return std::exp(-0.01 * t) * std::cos(0.1 * t); });
    const auto p = dominant_frequency(d, dt, {0.0, Window::rectangular, false});
    CHECK(p.omega == doctest::Approx(0.1).epsilon(5e-3));
    CHECK(p.magnitude > 0.0);

    // A weaker line above the cut-off is still found.
    const auto two = sample(dt, 1000, [](double t) { return 5.0 * std::sin(0.02 * t) + 0.1 * std::sin(0.6 * t); });
    CHECK(dominant_frequency(two, dt, {0.2}).omega == doctest::Approx(0.6).epsilon(2e-3));

    CHECK_THROWS_AS(dominant_frequency(std::vector<double>(5, 1.0), dt), std::invalid_argument);
    CHECK_THROWS_AS(dominant_frequency(x, 0.0), std::invalid_argument);
}

TEST_CASE("exponential_modes: recovers rates and amplitudes") {
    const double dt = 0.25;
    const std::complex<double> l1(-0.03, 0.1), l2(-0.002, 0.0);
    const auto x = sample(dt, 600, [&](double t) {
        return (2.0 * std::exp(l1 * t)).real() + 0.5 * std::exp(l2.real() * t);
    });
    const auto modes = exponential_modes(x, dt);
    REQUIRE(modes.size() == 3);
    bool seen_osc = false, seen_slow = false;
    for (const auto& m : modes) {
        if (std::abs(m.lambda - l1) < 1e-8 || std::abs(m.lambda - std::conj(l1)) < 1e-8) {
            seen_osc = true;
            CHECK(std::abs(m.amplitude) == doctest::Approx(1.0).epsilon(1e-8));
        }
        if (std::abs(m.lambda - l2) < 1e-8) {
            seen_slow = true;
            CHECK(std::abs(m.amplitude - 0.5) < 1e-8);
        }
    }
    CHECK(seen_osc);
    CHECK(seen_slow);
}

TEST_CASE("oscillatory_part: removes the non-oscillating background") {
    const double dt = 0.5;
    const auto x = sample(dt, 500, [](double t) { return 4.0 - 3.0 * std::exp(-0.05 * t) + 0.01 * std::cos(0.2 * t); });
    const auto osc = oscillatory_part(x, dt, 0.05);
    const auto ref = sample(dt, 500, [](double t) { return 0.01 * std::cos(0.2 * t); });
    for (std::size_t i = 0; i < osc.size(); ++i) CHECK(std::abs(osc[i] - ref[i]) < 1e-8);
}

TEST_CASE("envelope_decay_rate and buildup_time") {
    std::vector<double> t;
    std::vector<std::complex<double>> z;
    std::vector<double> rise;
    for (int i = 0; i <= 400; ++i) {
        const double ti = 0.5 * i;
        t.push_back(ti);
        z.push_back(std::exp(std::complex<double>(-0.04, 0.3) * ti) + 0.2);
        rise.push_back(1.0 - std::exp(-ti / 17.0));
    }
    CHECK(envelope_decay_rate(t, z, 0.2) == doctest::Approx(0.04).epsilon(1e-9));
    CHECK(buildup_time(t, rise, 1.0) == doctest::Approx(17.0).epsilon(1e-3));
    CHECK(buildup_time(t, rise, 2.0) < 0.0);
    std::vector<double> fall;
    for (double v : rise) fall.push_back(-v);
    CHECK(buildup_time(t, fall, -1.0) == doctest::Approx(17.0).epsilon(1e-3));
}
