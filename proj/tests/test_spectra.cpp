#include <doctest.h>

#include <cmath>

#include "dtls/analytic.hpp"
#include "dtls/engine.hpp"
#include "dtls/signal.hpp"
#include "dtls/spectra.hpp"

using namespace dtls;

namespace {

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = a + (b - a) * i / (n - 1);
    return v;
}

FieldSpec field(double amplitude, const Polarization& pol) {
    FieldSpec f;
    f.rabi_amplitude = amplitude;
    f.pol = pol;
    return f;
}

ScanConfig lin_perp(double fg, double fe, double omega1, std::vector<double> deltas, std::vector<double> times) {
    ScanConfig c;
    c.transition = AtomicTransition::make(fg, fe);
    c.pump = field(omega1, Polarization::linear_x());
    c.probe = field(0.02, Polarization::linear_y());
    c.deltas = std::move(deltas);
    c.times = std::move(times);
    return c;
}

} // namespace

TEST_CASE("absorption channels vanish on zero coherences") {
    const auto t = AtomicTransition::make(1, 2);
    const FieldSpec probe = field(0.02, Polarization::linear_y());
    const auto z = BlockedDensityMatrix::zeros(t, Frame::first_order_plus);
    CHECK(absorption_S(z, t, probe) == 0.0);
    CHECK(absorption_FWM(z, t, probe, 0.1, 12.0) == 0.0);
    CHECK_THROWS_AS(absorption_S(BlockedDensityMatrix::isotropic_ground(t), t, probe), std::invalid_argument);
}

TEST_CASE("FWM of a stationary coherence averages to zero over full periods") {
    Eigen::MatrixXcd eg(1, 1), low(1, 1);
    eg(0, 0) = cplx(0.3, -0.7);
    low(0, 0) = 1.0;
    const double delta = 0.13, period = M_PI / delta;
    const int per = 64, periods = 7;
    double sum = 0.0, scale = 0.0;
    for (int i = 0; i < per * periods; ++i) {
        const double v = absorption_FWM(eg, 0.01, low, delta, i * period / per);
        sum += v;
        scale = std::max(scale, std::abs(v));
    }
    CHECK(scale > 0.0);
    CHECK(std::abs(sum / (per * periods)) < 1e-8 * scale);
}

TEST_CASE("linear baseline is the two-level Lorentzian") {
    const auto t = AtomicTransition::make(0, 1);
    const FieldSpec probe = field(0.01, Polarization::sigma_plus());
    const auto deltas = linspace(-2.0, 2.0, 21);
    const auto lb = linear_baseline(t, probe, {}, deltas, {0.0, 60.0});
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        const double lorentz = analytic::linear_absorption(0.01, 1.0, deltas[i]);
        CHECK(lb.steady[i] == doctest::Approx(lorentz).epsilon(1e-10));
        CHECK(lb.time_matched(static_cast<Eigen::Index>(i), 1) == doctest::Approx(lorentz).epsilon(1e-9));
        CHECK(lb.time_matched(static_cast<Eigen::Index>(i), 0) == 0.0);
        CHECK(lb.steady[i] > 0.0);
    }
}

TEST_CASE("gauge invariance of the S channel") {
    auto c = lin_perp(1, 2, 0.2, {0.0, 0.03}, linspace(0.0, 80.0, 41));
    const auto a = scan(c);
    c.pump.pol = c.pump.pol.rotated_phase(0.9);
    c.probe.pol = c.probe.pol.rotated_phase(0.9);
    const auto b = scan(c);
    CHECK((a.alpha_S - b.alpha_S).cwiseAbs().maxCoeff() <= 1e-10 * a.alpha_S.cwiseAbs().maxCoeff());
}

TEST_CASE("scan: pump off gives no nonlinear absorption") {
    auto c = lin_perp(1, 2, 0.0, linspace(-0.1, 0.1, 5), linspace(0.0, 50.0, 11));
    const auto g = scan(c);
    // Pumped and pump-free runs take different propagation paths; only
    // round-off separates them.
    CHECK(g.alpha_S.cwiseAbs().maxCoeff() > 0.0);
    CHECK(g.delta_alpha.cwiseAbs().maxCoeff() <= 1e-12 * g.alpha_S.cwiseAbs().maxCoeff());
}

TEST_CASE("scan: baseline does not depend on the pump") {
    auto c = lin_perp(1, 2, 0.2, {-0.05, 0.0, 0.05}, linspace(0.0, 30.0, 7));
    const auto a = scan(c);
    c.pump.pol = Polarization::linear_z();
    c.pump.rabi_amplitude = 0.1;
    const auto b = scan(c);
    CHECK((a.alpha_linear - b.alpha_linear).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.alpha_linear_steady == b.alpha_linear_steady);
}

TEST_CASE("scan: shapes, start value and single-point consistency") {
    auto c = lin_perp(1, 0, 0.2, {0.02}, {0.0, 10.0, 25.0});
    const auto g = scan(c);
    CHECK(g.alpha_S.rows() == 1);
    CHECK(g.alpha_S.cols() == 3);
    CHECK(g.delta_alpha(0, 0) == 0.0);

    const auto z0 = build_zero_order_generator(c.transition, c.pump, {});
    const auto gen = build_first_order_generator(c.transition, c.pump, c.probe, {}, 0.02,
                                                 EvolvingPump{z0, BlockedDensityMatrix::isotropic_ground(c.transition)});
    const auto tr = evolve_first_order(gen, c.times);
    for (std::size_t j = 0; j < c.times.size(); ++j) {
        CHECK(g.alpha_S(0, static_cast<Eigen::Index>(j)) == absorption_S(tr.sigma[j], c.transition, c.probe));
    }
    c.pump.turn_on_time = 5.0;
    CHECK_THROWS_AS(scan(c), std::invalid_argument);
}

TEST_CASE("scan: multithreaded result is bitwise identical") {
    auto c = lin_perp(1, 2, 0.2, linspace(-0.1, 0.1, 9), linspace(0.0, 60.0, 31));
    const auto a = scan(c);
    c.threads = 4;
    const auto b = scan(c);
    CHECK((a.alpha_S.array() == b.alpha_S.array()).all());
    CHECK((a.delta_alpha.array() == b.delta_alpha.array()).all());
}

TEST_CASE("scan: Zeeman validity warning") {
    auto c = lin_perp(1, 0, 0.2, {-0.2, 0.2}, {0.0, 5.0});
    c.zeeman.larmor_g = 0.05;
    bool warned = false;
    for (const auto& w : scan(c).warnings) warned = warned || w.find("larmor_g") != std::string::npos;
    CHECK(warned);
}

TEST_CASE("fwhm on synthetic profiles") {
    const auto x = linspace(-1.0, 1.0, 401);
    std::vector<double> y;
    for (double xi : x) y.push_back(2.0 / (1.0 + std::pow((xi - 0.1) / 0.05, 2)));
    auto m = fwhm(x, y);
    CHECK(m.status == PeakStatus::ok);
    CHECK(m.fwhm == doctest::Approx(0.1).epsilon(0.005));
    CHECK(m.peak_delta == doctest::Approx(0.1).epsilon(1e-3));
    CHECK(m.lorentzian_score > 0.999);

    std::vector<double> dip;
    for (double v : y) dip.push_back(3.0 - v);
    FwhmOptions o;
    o.baseline = Baseline::edges;
    m = fwhm(x, dip, o);
    CHECK(m.peak_value < 0.0);
    CHECK(m.fwhm == doctest::Approx(0.1).epsilon(0.01));

    std::vector<double> ramp;
    for (double xi : x) ramp.push_back(xi);
    o.polarity = Polarity::peak;
    o.baseline = Baseline::none;
    CHECK(fwhm(x, ramp, o).status == PeakStatus::edge_peak);
    CHECK(fwhm(x, std::vector<double>(x.size(), 0.0)).status == PeakStatus::no_peak);

    const auto narrow = linspace(0.05, 0.15, 9);
    std::vector<double> top;
    for (double xi : narrow) top.push_back(2.0 / (1.0 + std::pow((xi - 0.1) / 0.5, 2)));
    CHECK(fwhm(narrow, top).status == PeakStatus::unbounded);

    CHECK_THROWS_AS(fwhm({0, 1, 2, 3}, {0, 1, 2, 1}), std::invalid_argument);
    CHECK_THROWS_AS(fwhm({0, 1, 1, 3, 4}, {0, 1, 2, 1, 0}), std::invalid_argument);
}

TEST_CASE("EIT and EIA: signs, evenness and width narrowing") {
    const auto deltas = linspace(-0.2, 0.2, 81);
    const auto times = linspace(0.0, 300.0, 301);
    const auto eit = scan(lin_perp(1, 0, 0.2, deltas, times));
    const auto eia = scan(lin_perp(1, 2, 0.2, deltas, times));
    const Eigen::Index last = static_cast<Eigen::Index>(times.size()) - 1;
    CHECK(eit.delta_alpha(40, last) < 0.0);
    CHECK(eia.delta_alpha(40, last) > 0.0);

    for (const auto* g : {&eit, &eia}) {
        double scale = g->delta_alpha.cwiseAbs().maxCoeff(), odd = 0.0;
        for (Eigen::Index i = 0; i < 40; ++i) odd = std::max(odd, (g->delta_alpha.row(i) - g->delta_alpha.row(80 - i)).cwiseAbs().maxCoeff());
        CHECK(odd <= 1e-10 * scale);

        // Width once the widest Raman detuning has oscillated once: it
        // narrows monotonically; EIT undershoots its asymptote slightly and
        // relaxes back by under 1%.
        FwhmOptions wings;
        wings.baseline = Baseline::wings;
        std::vector<double> w;
        for (Eigen::Index j = 0; j <= last; ++j) {
            if (times[static_cast<std::size_t>(j)] < 2.0 * M_PI / 0.2) continue;
            const auto m = fwhm(deltas, g->column(j), wings);
            REQUIRE(m.status == PeakStatus::ok);
            w.push_back(m.fwhm);
        }
        const auto lowest = static_cast<std::size_t>(std::min_element(w.begin(), w.end()) - w.begin());
        for (std::size_t k = 1; k <= lowest; ++k) CHECK(w[k] <= w[k - 1] * (1.0 + 1e-9));
        CHECK(*std::max_element(w.begin() + static_cast<std::ptrdiff_t>(lowest), w.end()) <= 1.01 * w[lowest]);
        if (g == &eia) CHECK(lowest == w.size() - 1);
    }

    // The EIA line is still far from Lorentzian when the EIT line is close.
    const auto se = fwhm(deltas, eit.column(last));
    const auto sa = fwhm(deltas, eia.column(last));
    CHECK(sa.lorentzian_score < se.lorentzian_score);
    CHECK(sa.fwhm < se.fwhm);
}

TEST_CASE("EIA build-up slows with angular momentum") {
    std::vector<double> times = linspace(0.0, 3000.0, 1501);
    double previous = 0.0;
    for (auto [fg, fe] : std::vector<std::pair<double, double>>{{1, 2}, {2, 3}, {3, 4}}) {
        auto c = lin_perp(fg, fe, 0.2, {0.0}, times);
        c.times.push_back(2e4);
        const auto g = scan(c);
        auto trace = g.row(0);
        const double asymptote = trace.back();
        trace.pop_back();
        const double tb = buildup_time(times, trace, asymptote);
        CAPTURE(fg);
        CHECK(asymptote > 0.0);
        CHECK(tb > 0.0);
        CHECK(tb >= previous);
        previous = tb;
    }
}
