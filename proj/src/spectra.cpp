#include "dtls/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <sstream>
#include <stdexcept>

#include <unsupported/Eigen/NonLinearOptimization>

#include "dtls/errors.hpp"
#include "dtls/parallel.hpp"

namespace dtls {

namespace {

constexpr cplx I{0.0, 1.0};

void check_grid(const std::vector<double>& deltas, const std::vector<double>& times) {
    if (deltas.empty()) throw std::invalid_argument("delta grid is empty");
    if (times.empty()) throw std::invalid_argument("time grid is empty");
    for (double d : deltas) {
        if (!std::isfinite(d)) throw std::invalid_argument("delta grid contains non-finite values");
    }
}

} // namespace

double absorption_S(const Eigen::MatrixXcd& sigma_ge, cplx probe_amplitude, const Eigen::MatrixXcd& raising) {
    return std::imag(std::conj(probe_amplitude) * (sigma_ge * raising).trace());
}

double absorption_S(const BlockedDensityMatrix& sigma, const AtomicTransition& t, const FieldSpec& probe) {
    if (sigma.frame != Frame::first_order_plus) throw std::invalid_argument("absorption_S needs a first-order state");
    return absorption_S(sigma.ge, probe.rabi_amplitude, dipole_coupling(t, probe.pol).m.adjoint());
}

double absorption_FWM(const Eigen::MatrixXcd& sigma_eg, cplx probe_amplitude, const Eigen::MatrixXcd& lowering,
                      double delta, double t) {
    return -std::imag(probe_amplitude * (sigma_eg * lowering).trace() * std::exp(2.0 * I * delta * t));
}

double absorption_FWM(const BlockedDensityMatrix& sigma, const AtomicTransition& t, const FieldSpec& probe,
                      double delta, double time) {
    if (sigma.frame != Frame::first_order_plus) throw std::invalid_argument("absorption_FWM needs a first-order state");
    return absorption_FWM(sigma.eg, probe.rabi_amplitude, dipole_coupling(t, probe.pol).m, delta, time);
}

std::vector<double> SpectrumGrid::column(Eigen::Index time_index) const {
    std::vector<double> out(static_cast<std::size_t>(delta_alpha.rows()));
    for (Eigen::Index i = 0; i < delta_alpha.rows(); ++i) out[static_cast<std::size_t>(i)] = delta_alpha(i, time_index);
    return out;
}

std::vector<double> SpectrumGrid::row(Eigen::Index delta_index) const {
    std::vector<double> out(static_cast<std::size_t>(delta_alpha.cols()));
    for (Eigen::Index j = 0; j < delta_alpha.cols(); ++j) out[static_cast<std::size_t>(j)] = delta_alpha(delta_index, j);
    return out;
}

LinearBaseline linear_baseline(const AtomicTransition& t, const FieldSpec& probe, const ZeemanSetting& z,
                               const std::vector<double>& deltas, const std::vector<double>& times, double step,
                               int threads) {
    check_grid(deltas, times);
    FieldSpec off;
    const AffineGenerator gz = build_zero_order_generator(t, off, z);
    const StationaryPump ps{BlockedDensityMatrix::isotropic_ground(t)};
    const Eigen::MatrixXcd raising = dipole_coupling(t, probe.pol).m.adjoint();

    LinearBaseline out;
    out.time_matched.resize(static_cast<Eigen::Index>(deltas.size()), static_cast<Eigen::Index>(times.size()));
    out.steady.assign(deltas.size(), 0.0);
    std::vector<double> steps(deltas.size(), 0.0);
    std::vector<std::exception_ptr> errors;
    parallel_for(deltas.size(), threads, [&](std::size_t i) {
        const AffineGenerator g = build_first_order_generator(t, off, probe, z, deltas[i], ps);
        const FirstOrderTrajectory tr = evolve_first_order(g, times, {step});
        for (std::size_t j = 0; j < times.size(); ++j) {
            out.time_matched(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                absorption_S(tr.sigma[j].ge, probe.rabi_amplitude, raising);
        }
        steps[i] = tr.step;
        // Stationary limit; the pump-free coherence block is never singular,
        // the least-squares solve only sidesteps the ground-state kernel.
        const Eigen::VectorXcd x = g.linear.completeOrthogonalDecomposition().solve(-g.constant_drive);
        const BlockedDensityMatrix s = BlockedDensityMatrix::from_vector(x, t.dg(), t.de(), Frame::first_order_plus);
        out.steady[i] = absorption_S(s.ge, probe.rabi_amplitude, raising);
    }, errors);
    rethrow_first(errors, [&](std::size_t i) { return delta_label(deltas[i]); });
    out.step = *std::max_element(steps.begin(), steps.end());
    return out;
}

SpectrumGrid scan(const ScanConfig& cfg) {
    check_grid(cfg.deltas, cfg.times);
    const AtomicTransition& t = cfg.transition;
    const AffineGenerator gz = build_zero_order_generator(t, cfg.pump, cfg.zeeman);
    const BlockedDensityMatrix rho0 = cfg.initial.value_or(BlockedDensityMatrix::isotropic_ground(t));

    PumpState pump_state;
    if (cfg.turn_on == TurnOn::pump_preconditioned) {
        pump_state = StationaryPump{steady_state_zero_order(gz, rho0).sigma};
    } else {
        if (cfg.pump.turn_on_time > 0.0) {
            throw std::invalid_argument("pump turn_on_time must be <= 0 (the probe defines t = 0)");
        }
        const BlockedDensityMatrix start =
            cfg.pump.turn_on_time < 0.0 ? evolve_zero_order(gz, rho0, -cfg.pump.turn_on_time, {cfg.step}) : rho0;
        pump_state = EvolvingPump{gz, start};
    }

    SpectrumGrid grid;
    grid.deltas = cfg.deltas;
    grid.times = cfg.times;
    const auto nd = static_cast<Eigen::Index>(cfg.deltas.size());
    const auto nt = static_cast<Eigen::Index>(cfg.times.size());
    grid.alpha_S.resize(nd, nt);
    grid.alpha_FWM.resize(nd, nt);

    const Eigen::MatrixXcd lowering = dipole_coupling(t, cfg.probe.pol).m;
    const Eigen::MatrixXcd raising = lowering.adjoint();
    std::vector<double> steps(cfg.deltas.size(), 0.0);
    std::vector<std::vector<std::string>> warnings(cfg.deltas.size());
    std::vector<std::exception_ptr> errors;
    parallel_for(cfg.deltas.size(), cfg.threads, [&](std::size_t i) {
        const double delta = cfg.deltas[i];
        const AffineGenerator g = build_first_order_generator(t, cfg.pump, cfg.probe, cfg.zeeman, delta, pump_state);
        const FirstOrderTrajectory tr = evolve_first_order(g, cfg.times, {cfg.step});
        const auto row = static_cast<Eigen::Index>(i);
        for (std::size_t j = 0; j < cfg.times.size(); ++j) {
            const auto col = static_cast<Eigen::Index>(j);
            grid.alpha_S(row, col) = absorption_S(tr.sigma[j].ge, cfg.probe.rabi_amplitude, raising);
            grid.alpha_FWM(row, col) =
                absorption_FWM(tr.sigma[j].eg, cfg.probe.rabi_amplitude, lowering, delta, cfg.times[j]);
        }
        steps[i] = tr.step;
        warnings[i] = g.warnings;
    }, errors);
    rethrow_first(errors, [&](std::size_t i) { return delta_label(cfg.deltas[i]); });

    const LinearBaseline lin = linear_baseline(t, cfg.probe, cfg.zeeman, cfg.deltas, cfg.times, cfg.step, cfg.threads);
    grid.alpha_linear = lin.time_matched;
    grid.alpha_linear_steady = lin.steady;
    grid.delta_alpha = grid.alpha_S - grid.alpha_linear;
    if (cfg.include_fwm) grid.delta_alpha += grid.alpha_FWM;
    grid.step = std::max(*std::max_element(steps.begin(), steps.end()), lin.step);

    grid.warnings = warnings.front();
    const double zeeman = std::abs(cfg.zeeman.larmor_g);
    if (zeeman > 0.0) {
        const auto [lo, hi] = std::minmax_element(cfg.deltas.begin(), cfg.deltas.end());
        if (std::max(std::abs(*lo), std::abs(*hi)) >= 2.0 * zeeman) {
            grid.warnings.push_back("delta grid reaches |delta| >= 2 larmor_g; Zeeman resonances overlap the scan");
        }
    }
    grid.metadata["step"] = grid.step;
    grid.metadata["include_fwm"] = cfg.include_fwm;
    grid.metadata["turn_on"] = cfg.turn_on == TurnOn::simultaneous ? "simultaneous" : "pump_preconditioned";
    return grid;
}

const char* to_string(PeakStatus s) {
    switch (s) {
    case PeakStatus::ok: return "ok";
    case PeakStatus::no_peak: return "no_peak";
    case PeakStatus::edge_peak: return "edge_peak";
    case PeakStatus::unbounded: return "unbounded";
    }
    return "unknown";
}

namespace {

// y = c + a / (1 + ((x - x0) / h)^2), parameters (a, x0, h, c).
struct LorentzFunctor {
    using Scalar = double;
    using InputType = Eigen::VectorXd;
    using ValueType = Eigen::VectorXd;
    using JacobianType = Eigen::MatrixXd;
    enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

    const std::vector<double>& x;
    const std::vector<double>& y;

    int inputs() const { return 4; }
    int values() const { return static_cast<int>(x.size()); }

    int operator()(const Eigen::VectorXd& p, Eigen::VectorXd& f) const {
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double u = (x[i] - p(1)) / p(2);
            f(static_cast<Eigen::Index>(i)) = p(3) + p(0) / (1.0 + u * u) - y[i];
        }
        return 0;
    }

    int df(const Eigen::VectorXd& p, Eigen::MatrixXd& j) const {
        for (std::size_t i = 0; i < x.size(); ++i) {
            const auto r = static_cast<Eigen::Index>(i);
            const double u = (x[i] - p(1)) / p(2);
            const double d = 1.0 + u * u;
            j(r, 0) = 1.0 / d;
            j(r, 1) = p(0) * 2.0 * u / (d * d * p(2));
            j(r, 2) = p(0) * 2.0 * u * u / (d * d * p(2));
            j(r, 3) = 1.0;
        }
        return 0;
    }
};

double lorentzian_score(const std::vector<double>& x, const std::vector<double>& y, double amplitude, double center,
                        double width, double offset) {
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(y.size());
    double total = 0.0;
    for (double v : y) total += (v - mean) * (v - mean);
    if (total == 0.0) return 0.0;

    LorentzFunctor fn{x, y};
    Eigen::VectorXd p(4);
    p << amplitude, center, std::max(0.5 * width, 1e-12), offset;
    Eigen::LevenbergMarquardt<LorentzFunctor> lm(fn);
    lm.minimize(p);
    Eigen::VectorXd r(static_cast<Eigen::Index>(x.size()));
    fn(p, r);
    if (!r.allFinite()) return 0.0;
    return std::clamp(1.0 - r.squaredNorm() / total, 0.0, 1.0);
}

// Least-squares a + b (x - c)^2 over the selected points.
std::pair<double, double> even_quadratic(const std::vector<double>& x, const std::vector<double>& y,
                                         const std::vector<std::size_t>& idx, double c) {
    Eigen::MatrixXd a(static_cast<Eigen::Index>(idx.size()), 2);
    Eigen::VectorXd b(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) {
        const auto r = static_cast<Eigen::Index>(k);
        const double u = x[idx[k]] - c;
        a(r, 0) = 1.0;
        a(r, 1) = u * u;
        b(r) = y[idx[k]];
    }
    const Eigen::VectorXd s = a.colPivHouseholderQr().solve(b);
    return {s(0), s(1)};
}

} // namespace

LineshapeMetrics fwhm(const std::vector<double>& delta, const std::vector<double>& values, const FwhmOptions& opts) {
    const std::size_t n = delta.size();
    if (n < 5 || values.size() != n) throw std::invalid_argument("fwhm needs at least 5 (delta, value) pairs");
    for (std::size_t i = 1; i < n; ++i) {
        if (!(delta[i] > delta[i - 1])) throw std::invalid_argument("fwhm needs strictly increasing delta");
    }

    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    const double center_guess = delta[static_cast<std::size_t>(
        std::abs(*mx) >= std::abs(*mn) ? mx - values.begin() : mn - values.begin())];

    // Baseline model b(x) = b0 + b2 (x - center)^2.
    double b0 = 0.0, b2 = 0.0, bc = center_guess;
    if (opts.baseline == Baseline::edges) {
        b0 = 0.5 * (values.front() + values.back());
    } else if (opts.baseline == Baseline::wings) {
        std::vector<std::size_t> idx;
        if (opts.expected_width > 0.0) {
            for (std::size_t i = 0; i < n; ++i) {
                if (std::abs(delta[i] - bc) >= opts.wing_factor * opts.expected_width) idx.push_back(i);
            }
        } else {
            const std::size_t q = std::max<std::size_t>(1, n / 4);
            for (std::size_t i = 0; i < q; ++i) {
                idx.push_back(i);
                idx.push_back(n - 1 - i);
            }
        }
        if (idx.size() >= 3) {
            std::tie(b0, b2) = even_quadratic(delta, values, idx, bc);
        } else if (!idx.empty()) {
            for (std::size_t i : idx) b0 += values[i];
            b0 /= static_cast<double>(idx.size());
        } else {
            b0 = 0.5 * (values.front() + values.back());
        }
    }
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = values[i] - (b0 + b2 * (delta[i] - bc) * (delta[i] - bc));

    LineshapeMetrics m;
    const auto [rmn, rmx] = std::minmax_element(r.begin(), r.end());
    double sign = 1.0;
    if (opts.polarity == Polarity::dip || (opts.polarity == Polarity::automatic && std::abs(*rmn) > std::abs(*rmx))) {
        sign = -1.0;
    }
    std::size_t k = 0;
    for (std::size_t i = 1; i < n; ++i) {
        if (sign * r[i] > sign * r[k]) k = i;
    }
    if (!(sign * r[k] > 0.0)) return m;

    m.peak_delta = delta[k];
    m.peak_value = r[k];
    if (k == 0 || k == n - 1) {
        m.status = PeakStatus::edge_peak;
        m.baseline = values[k] - r[k];
        return m;
    }

    // Parabola through the three samples around the extremum.
    {
        const double x0 = delta[k - 1], x1 = delta[k], x2 = delta[k + 1];
        const double y0 = r[k - 1], y1 = r[k], y2 = r[k + 1];
        const double d01 = (y1 - y0) / (x1 - x0), d12 = (y2 - y1) / (x2 - x1);
        const double c2 = (d12 - d01) / (x2 - x0);
        if (c2 != 0.0) {
            const double c1 = d01 - c2 * (x0 + x1);
            const double xv = std::clamp(-c1 / (2.0 * c2), x0, x2);
            m.peak_delta = xv;
            m.peak_value = y1 + d01 * (xv - x1) + c2 * (xv - x0) * (xv - x1);
        }
    }
    m.baseline = b0 + b2 * (m.peak_delta - bc) * (m.peak_delta - bc);

    const double half = 0.5 * m.peak_value;
    double left = 0.0, right = 0.0;
    bool found_left = false, found_right = false;
    for (std::size_t i = k; i > 0; --i) {
        if (sign * r[i - 1] <= sign * half) {
            left = delta[i - 1] + (half - r[i - 1]) / (r[i] - r[i - 1]) * (delta[i] - delta[i - 1]);
            found_left = true;
            break;
        }
    }
    for (std::size_t i = k; i + 1 < n; ++i) {
        if (sign * r[i + 1] <= sign * half) {
            right = delta[i] + (half - r[i]) / (r[i + 1] - r[i]) * (delta[i + 1] - delta[i]);
            found_right = true;
            break;
        }
    }
    if (!found_left || !found_right) {
        m.status = PeakStatus::unbounded;
        return m;
    }
    m.fwhm = right - left;
    m.status = PeakStatus::ok;
    m.lorentzian_score = lorentzian_score(delta, r, m.peak_value, m.peak_delta, m.fwhm, 0.0);
    return m;
}

} // namespace dtls
