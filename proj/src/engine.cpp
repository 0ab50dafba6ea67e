#include "dtls/engine.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <numbers>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "dtls/errors.hpp"
#include "dtls/integrator.hpp"

namespace dtls {

namespace {

constexpr cplx I{0.0, 1.0};

Eigen::MatrixXcd embed_ge(const Eigen::MatrixXcd& ge, int dg, int de) {
    Eigen::MatrixXcd full = Eigen::MatrixXcd::Zero(dg + de, dg + de);
    full.block(0, dg, dg, de) = ge;
    return full;
}

// H_B - D1 P_e + V1 in the w1 rotating frame (ground energy set to zero).
Eigen::MatrixXcd pump_hamiltonian(const AtomicTransition& t, const FieldSpec& pump, const ZeemanSetting& z) {
    const int dg = t.dg(), de = t.de();
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dg + de, dg + de);
    for (int i = 0; i < dg; ++i) h(i, i) = -t.mg(i) * z.larmor_g;
    for (int i = 0; i < de; ++i) h(dg + i, dg + i) = -t.me(i) * z.larmor_e - pump.detuning;
    const Eigen::MatrixXcd v = pump.rabi_amplitude * dipole_coupling(t, pump.pol).m;
    h.block(0, dg, dg, de) = v;
    h.block(dg, 0, de, dg) = v.adjoint();
    return h;
}

double largest_rate(const AtomicTransition& t, const FieldSpec& pump, const ZeemanSetting& z, double delta) {
    return std::max({t.gamma, std::abs(delta), std::abs(pump.rabi_amplitude), std::abs(z.larmor_g),
                     std::abs(z.larmor_e), std::abs(pump.detuning)});
}

Eigen::MatrixXcd left_mult(const Eigen::MatrixXcd& a) {
    const auto n = a.rows();
    return Eigen::kroneckerProduct(Eigen::MatrixXcd::Identity(n, n), a);
}

Eigen::MatrixXcd right_mult(const Eigen::MatrixXcd& b) {
    const auto n = b.rows();
    return Eigen::kroneckerProduct(b.transpose(), Eigen::MatrixXcd::Identity(n, n));
}

Eigen::MatrixXcd liouvillian(const AtomicTransition& t, const Eigen::MatrixXcd& h) {
    const int dg = t.dg(), de = t.de();
    const int n = dg + de;
    Eigen::MatrixXcd pe = Eigen::MatrixXcd::Zero(n, n);
    pe.bottomRightCorner(de, de).setIdentity();

    Eigen::MatrixXcd l = -I * (left_mult(h) - right_mult(h)) - (t.gamma / 2.0) * (left_mult(pe) + right_mult(pe));
    for (const auto& q : lowering_operators(t)) {
        const Eigen::MatrixXcd qf = embed_ge(q.m, dg, de);
        l += t.gamma * Eigen::kroneckerProduct(qf.conjugate(), qf);
    }
    return l;
}

void require_layout(const AtomicTransition& t, const BlockedDensityMatrix& s) {
    if (s.gg.rows() != t.dg() || s.gg.cols() != t.dg() || s.ee.rows() != t.de() || s.ee.cols() != t.de() ||
        s.ge.rows() != t.dg() || s.ge.cols() != t.de() || s.eg.rows() != t.de() || s.eg.cols() != t.dg()) {
        throw std::invalid_argument("density matrix blocks do not match the transition dimensions");
    }
}

// Propagators are reused when consecutive sample intervals coincide.
class PropagatorCache {
public:
    PropagatorCache(const Eigen::MatrixXcd& a, double max_step) : a_(a), max_step_(max_step) {}

    const Eigen::MatrixXcd& over(double interval) {
        if (!valid_ || std::abs(interval - interval_) > 1e-12 * std::max(1.0, interval)) {
            const StepPlan plan = plan_steps(interval, max_step_);
            if (plan.steps == 0) {
                prop_ = Eigen::MatrixXcd::Identity(a_.rows(), a_.cols());
            } else {
                prop_ = matrix_power(rk4_step_matrix(a_, plan.h), plan.steps);
                largest_h_ = std::max(largest_h_, plan.h);
            }
            interval_ = interval;
            valid_ = true;
        }
        return prop_;
    }

    double largest_step() const { return largest_h_; }

private:
    const Eigen::MatrixXcd& a_;
    double max_step_;
    Eigen::MatrixXcd prop_;
    double interval_ = 0.0;
    bool valid_ = false;
    double largest_h_ = 0.0;
};

void check_times(const std::vector<double>& times) {
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!(times[i] >= 0.0) || !std::isfinite(times[i])) throw std::invalid_argument("sample times must be finite and >= 0");
        if (i > 0 && times[i] < times[i - 1]) throw std::invalid_argument("sample times must be non-decreasing");
    }
}

} // namespace

std::vector<std::string> validate_field(const FieldSpec& f, double gamma, const char* name) {
    const double a = std::abs(f.rabi_amplitude);
    if (!std::isfinite(a) || !std::isfinite(f.detuning)) {
        throw std::invalid_argument(std::string(name) + ": non-finite field parameters");
    }
    if (a >= gamma) {
        throw std::invalid_argument(std::string(name) + ": Rabi amplitude must stay below gamma (weak-field model)");
    }
    std::vector<std::string> warnings;
    if (a > gamma / 2.0) {
        std::ostringstream os;
        os << name << ": Rabi amplitude " << a << " exceeds gamma/2; saturation effects are significant";
        warnings.push_back(os.str());
    }
    return warnings;
}

BlockedDensityMatrix BlockedDensityMatrix::zeros(const AtomicTransition& t, Frame frame) {
    const int dg = t.dg(), de = t.de();
    return {Eigen::MatrixXcd::Zero(dg, dg), Eigen::MatrixXcd::Zero(dg, de), Eigen::MatrixXcd::Zero(de, dg),
            Eigen::MatrixXcd::Zero(de, de), frame};
}

BlockedDensityMatrix BlockedDensityMatrix::isotropic_ground(const AtomicTransition& t) {
    BlockedDensityMatrix s = zeros(t, Frame::zero_order);
    s.gg = Eigen::MatrixXcd::Identity(t.dg(), t.dg()) / static_cast<double>(t.dg());
    return s;
}

BlockedDensityMatrix BlockedDensityMatrix::from_full(const Eigen::MatrixXcd& full, int dg, Frame frame) {
    const int de = static_cast<int>(full.rows()) - dg;
    return {full.topLeftCorner(dg, dg), full.topRightCorner(dg, de), full.bottomLeftCorner(de, dg),
            full.bottomRightCorner(de, de), frame};
}

BlockedDensityMatrix BlockedDensityMatrix::from_vector(const Eigen::VectorXcd& v, int dg, int de, Frame frame) {
    const int n = dg + de;
    if (v.size() != static_cast<Eigen::Index>(n) * n) throw std::invalid_argument("state vector has the wrong size");
    const Eigen::MatrixXcd full = Eigen::Map<const Eigen::MatrixXcd>(v.data(), n, n);
    return from_full(full, dg, frame);
}

Eigen::MatrixXcd BlockedDensityMatrix::full() const {
    const auto dg = gg.rows(), de = ee.rows();
    Eigen::MatrixXcd m(dg + de, dg + de);
    m.topLeftCorner(dg, dg) = gg;
    m.topRightCorner(dg, de) = ge;
    m.bottomLeftCorner(de, dg) = eg;
    m.bottomRightCorner(de, de) = ee;
    return m;
}

Eigen::VectorXcd BlockedDensityMatrix::vectorized() const {
    const Eigen::MatrixXcd m = full();
    return Eigen::Map<const Eigen::VectorXcd>(m.data(), m.size());
}

double BlockedDensityMatrix::hermiticity_defect() const {
    const Eigen::MatrixXcd m = full();
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

Eigen::VectorXcd AffineGenerator::drive(double t) const {
    Eigen::VectorXcd b = constant_drive;
    if (zero_order_drive) {
        const Eigen::MatrixXcd prop = (zero_order_drive->pump_generator * t).exp();
        b += zero_order_drive->source * (prop * zero_order_drive->initial);
    }
    return b;
}

Eigen::MatrixXcd AffineGenerator::augmented() const {
    const Eigen::Index n = linear.rows();
    if (zero_order_drive) {
        Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
        a.topLeftCorner(n, n) = linear;
        a.topRightCorner(n, n) = zero_order_drive->source;
        a.bottomRightCorner(n, n) = zero_order_drive->pump_generator;
        return a;
    }
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n + 1, n + 1);
    a.topLeftCorner(n, n) = linear;
    a.topRightCorner(n, 1) = constant_drive;
    return a;
}

Eigen::VectorXcd AffineGenerator::augmented_initial(const Eigen::VectorXcd& sigma0) const {
    const Eigen::Index n = linear.rows();
    if (zero_order_drive) {
        Eigen::VectorXcd x(2 * n);
        x << sigma0, zero_order_drive->initial;
        return x;
    }
    Eigen::VectorXcd x(n + 1);
    x << sigma0, cplx(1.0, 0.0);
    return x;
}

AffineGenerator build_zero_order_generator(const AtomicTransition& t, const FieldSpec& pump, const ZeemanSetting& z) {
    t.validate();
    AffineGenerator gen;
    gen.transition = t;
    gen.frame = Frame::zero_order;
    gen.warnings = validate_field(pump, t.gamma, "pump");
    gen.linear = liouvillian(t, pump_hamiltonian(t, pump, z));
    gen.constant_drive = Eigen::VectorXcd::Zero(gen.linear.rows());
    gen.max_rate = largest_rate(t, pump, z, 0.0);
    return gen;
}

double default_step(const AffineGenerator& gen) { return 0.02 / gen.max_rate; }

namespace {

BlockedDensityMatrix checked_state(const AffineGenerator& gen, const Eigen::VectorXcd& v, Frame frame, double t) {
    if (!v.allFinite()) throw NumericError("evolution produced non-finite values", t);
    return BlockedDensityMatrix::from_vector(v, gen.transition.dg(), gen.transition.de(), frame);
}

void require_zero_order(const AffineGenerator& gen, const BlockedDensityMatrix& s) {
    if (gen.frame != Frame::zero_order || s.frame != Frame::zero_order) {
        throw std::invalid_argument("zero-order evolution needs zero-order generator and state");
    }
    require_layout(gen.transition, s);
}

} // namespace

BlockedDensityMatrix evolve_zero_order(const AffineGenerator& gen, const BlockedDensityMatrix& sigma0_init, double t,
                                       const EvolveOptions& opts) {
    return evolve_zero_order_trajectory(gen, sigma0_init, {t}, opts).front();
}

std::vector<BlockedDensityMatrix> evolve_zero_order_trajectory(const AffineGenerator& gen,
                                                               const BlockedDensityMatrix& sigma0_init,
                                                               const std::vector<double>& times,
                                                               const EvolveOptions& opts) {
    require_zero_order(gen, sigma0_init);
    check_times(times);
    const double h = opts.step > 0.0 ? opts.step : default_step(gen);
    PropagatorCache cache(gen.linear, h);
    std::vector<BlockedDensityMatrix> out;
    out.reserve(times.size());
    Eigen::VectorXcd x = sigma0_init.vectorized();
    double now = 0.0;
    for (double t : times) {
        if (t > now) x = cache.over(t - now) * x;
        now = t;
        out.push_back(checked_state(gen, x, Frame::zero_order, t));
    }
    return out;
}

SteadyState steady_state_zero_order(const AffineGenerator& gen, const std::optional<BlockedDensityMatrix>& initial) {
    if (gen.frame != Frame::zero_order) throw std::invalid_argument("steady state needs a zero-order generator");
    const BlockedDensityMatrix rho0 = initial.value_or(BlockedDensityMatrix::isotropic_ground(gen.transition));
    require_zero_order(gen, rho0);

    Eigen::FullPivLU<Eigen::MatrixXcd> right(gen.linear);
    right.setThreshold(1e-10);
    Eigen::FullPivLU<Eigen::MatrixXcd> left(gen.linear.adjoint());
    left.setThreshold(1e-10);
    const Eigen::MatrixXcd v = right.kernel();
    const Eigen::MatrixXcd w = left.kernel();
    if (v.cols() == 0 || v.cols() != w.cols()) {
        throw NumericError("could not isolate the stationary subspace", 0.0);
    }
    // Projection onto ker L along range L: the long-time limit of exp(L t).
    const Eigen::MatrixXcd gram = w.adjoint() * v;
    const Eigen::VectorXcd coeff = gram.fullPivLu().solve(w.adjoint() * rho0.vectorized());
    Eigen::VectorXcd x = v * coeff;
    const auto n = gen.transition.dim();
    cplx tr = 0.0;
    for (int i = 0; i < n; ++i) tr += x[static_cast<Eigen::Index>(i) * n + i];
    if (std::abs(tr) < 1e-14) throw NumericError("stationary state has zero trace", 0.0);
    x /= tr;

    SteadyState out{checked_state(gen, x, Frame::zero_order, 0.0), static_cast<int>(v.cols()), 0.0};
    // Remove round-off anti-Hermitian residue.
    const Eigen::MatrixXcd full = out.sigma.full();
    out.sigma = BlockedDensityMatrix::from_full(0.5 * (full + full.adjoint()), gen.transition.dg(), Frame::zero_order);
    out.residual = (gen.linear * out.sigma.vectorized()).cwiseAbs().maxCoeff();
    return out;
}

AffineGenerator build_first_order_generator(const AtomicTransition& t, const FieldSpec& pump, const FieldSpec& probe,
                                            const ZeemanSetting& z, double delta, const PumpState& sigma0) {
    t.validate();
    if (!std::isfinite(delta)) throw std::invalid_argument("delta must be finite");
    AffineGenerator gen;
    gen.transition = t;
    gen.frame = Frame::first_order_plus;
    gen.warnings = validate_field(pump, t.gamma, "pump");
    for (auto& w : validate_field(probe, t.gamma, "probe")) gen.warnings.push_back(std::move(w));

    const Eigen::MatrixXcd l0 = liouvillian(t, pump_hamiltonian(t, pump, z));
    const Eigen::Index size = l0.rows();
    gen.linear = l0 - I * delta * Eigen::MatrixXcd::Identity(size, size);
    gen.max_rate = largest_rate(t, pump, z, delta);

    const Eigen::MatrixXcd theta =
        embed_ge(probe.rabi_amplitude * dipole_coupling(t, probe.pol).m, t.dg(), t.de());
    const Eigen::MatrixXcd source = -I * (left_mult(theta) - right_mult(theta));

    if (const auto* stat = std::get_if<StationaryPump>(&sigma0)) {
        if (stat->sigma0.frame != Frame::zero_order) throw std::invalid_argument("pump state must be in the zero-order frame");
        require_layout(t, stat->sigma0);
        gen.constant_drive = source * stat->sigma0.vectorized();
    } else {
        const auto& evolving = std::get<EvolvingPump>(sigma0);
        require_zero_order(evolving.zero_order, evolving.initial);
        if (!(evolving.zero_order.transition == t)) throw std::invalid_argument("zero-order generator built for another transition");
        gen.constant_drive = Eigen::VectorXcd::Zero(size);
        gen.zero_order_drive = ZeroOrderDrive{source, evolving.zero_order.linear, evolving.initial.vectorized()};
        gen.max_rate = std::max(gen.max_rate, evolving.zero_order.max_rate);
    }
    return gen;
}

FirstOrderTrajectory evolve_first_order(const AffineGenerator& gen, const std::vector<double>& times,
                                        const EvolveOptions& opts) {
    if (gen.frame != Frame::first_order_plus) throw std::invalid_argument("evolve_first_order needs a first-order generator");
    check_times(times);
    FirstOrderTrajectory traj;
    if (times.empty()) return traj;

    const double h = opts.step > 0.0 ? opts.step : default_step(gen);
    const Eigen::MatrixXcd a = gen.augmented();
    PropagatorCache cache(a, h);
    const Eigen::Index n = gen.state_size();
    Eigen::VectorXcd x = gen.augmented_initial(Eigen::VectorXcd::Zero(n));
    double now = 0.0;
    traj.times = times;
    traj.sigma.reserve(times.size());
    for (double t : times) {
        if (t > now) x = cache.over(t - now) * x;
        now = t;
        traj.sigma.push_back(checked_state(gen, x.head(n), Frame::first_order_plus, t));
    }
    traj.step = cache.largest_step() > 0.0 ? cache.largest_step() : h;
    return traj;
}

FirstOrderTrajectory evolve_first_order_exact(const AffineGenerator& gen, const std::vector<double>& times) {
    if (gen.frame != Frame::first_order_plus) throw std::invalid_argument("evolve_first_order needs a first-order generator");
    check_times(times);
    FirstOrderTrajectory traj;
    traj.times = times;
    const Eigen::MatrixXcd a = gen.augmented();
    const Eigen::Index n = gen.state_size();
    const Eigen::VectorXcd x0 = gen.augmented_initial(Eigen::VectorXcd::Zero(n));
    for (double t : times) {
        const Eigen::MatrixXcd prop = (a * t).exp();
        const Eigen::VectorXcd x = prop * x0;
        traj.sigma.push_back(checked_state(gen, x.head(n), Frame::first_order_plus, t));
    }
    return traj;
}

namespace {

struct OracleModel {
    int dg, de;
    double gamma;
    Eigen::MatrixXcd h0;
    Eigen::MatrixXcd probe_ge; // O2 (e2.Q_ge), phase 0
    std::array<Eigen::MatrixXcd, 3> q;
};

// Master-equation right-hand side in matrix form for the w1 frame with the
// probe coupling p e^{i delta t} + h.c.
Eigen::MatrixXcd oracle_rhs(const OracleModel& m, const Eigen::MatrixXcd& probe_ge, double delta, double t,
                            const Eigen::MatrixXcd& rho) {
    Eigen::MatrixXcd h = m.h0;
    const Eigen::MatrixXcd p = probe_ge * std::exp(I * delta * t);
    h.topRightCorner(m.dg, m.de) += p;
    h.bottomLeftCorner(m.de, m.dg) += p.adjoint();

    Eigen::MatrixXcd out = -I * (h * rho - rho * h);
    out.bottomRows(m.de) -= 0.5 * m.gamma * rho.bottomRows(m.de);
    out.rightCols(m.de) -= 0.5 * m.gamma * rho.rightCols(m.de);
    const Eigen::MatrixXcd ee = rho.bottomRightCorner(m.de, m.de);
    for (const auto& qq : m.q) out.topLeftCorner(m.dg, m.dg) += m.gamma * qq * ee * qq.adjoint();
    return out;
}

struct OracleRun {
    std::vector<Eigen::MatrixXcd> rho;
    std::vector<double> work;
    double step = 0.0;
};

OracleRun oracle_run(const OracleModel& m, cplx amp, const Eigen::MatrixXcd& m2, double delta,
                     const std::vector<double>& times, const Eigen::MatrixXcd& initial, double max_step) {
    const Eigen::MatrixXcd probe_ge = amp * m2;
    OracleRun run;
    run.rho.reserve(times.size());
    run.work.reserve(times.size());
    Eigen::MatrixXcd rho = initial;
    double now = 0.0;
    const auto f = [&](double t, const Eigen::MatrixXcd& r) { return oracle_rhs(m, probe_ge, delta, t, r); };
    for (double ts : times) {
        if (ts > now) {
            const StepPlan plan = plan_steps(ts - now, max_step);
            for (std::uint64_t k = 0; k < plan.steps; ++k) {
                rho = rk4_step(f, now + static_cast<double>(k) * plan.h, rho, plan.h);
            }
            run.step = std::max(run.step, plan.h);
            if (!rho.allFinite()) throw NumericError("oracle integration produced non-finite values", ts);
            now = ts;
        }
        run.rho.push_back(rho);
        const cplx tr = (rho.bottomLeftCorner(m.de, m.dg) * m2).trace();
        run.work.push_back(-std::imag(amp * std::exp(I * delta * ts) * tr));
    }
    return run;
}

} // namespace

OracleResult oracle_bichromatic(const AtomicTransition& t, const FieldSpec& pump, const FieldSpec& probe,
                                const ZeemanSetting& z, double delta, const std::vector<double>& times,
                                const BlockedDensityMatrix& initial, const OracleOptions& opts) {
    t.validate();
    if (initial.frame != Frame::zero_order) throw std::invalid_argument("oracle needs a zero-order initial state");
    require_layout(t, initial);
    check_times(times);
    if (!std::isfinite(delta)) throw std::invalid_argument("delta must be finite");

    OracleResult res;
    res.warnings = validate_field(pump, t.gamma, "pump");
    for (auto& w : validate_field(probe, t.gamma, "probe")) res.warnings.push_back(std::move(w));
    if (std::abs(probe.rabi_amplitude) > 1e-2 * t.gamma) {
        res.warnings.push_back("probe amplitude above 1e-2 gamma; first-order comparison may be contaminated");
    }

    OracleModel m{t.dg(), t.de(), t.gamma, pump_hamiltonian(t, pump, z), {}, {}};
    const auto qs = lowering_operators(t);
    for (int i = 0; i < 3; ++i) m.q[static_cast<std::size_t>(i)] = qs[static_cast<std::size_t>(i)].m;
    const Eigen::MatrixXcd m2 = dipole_coupling(t, probe.pol).m;

    const double rate = std::max(largest_rate(t, pump, z, delta), std::abs(probe.rabi_amplitude));
    const double max_step = opts.step > 0.0 ? opts.step : 0.02 / rate;
    const Eigen::MatrixXcd rho0 = initial.full();

    res.times = times;
    const bool probe_off = probe.rabi_amplitude == cplx(0.0, 0.0);
    const int phases = probe_off ? 1 : 4;
    std::vector<OracleRun> runs;
    for (int k = 0; k < phases; ++k) {
        const cplx amp = probe.rabi_amplitude * std::exp(I * (0.5 * std::numbers::pi * k));
        runs.push_back(oracle_run(m, amp, m2, delta, times, rho0, max_step));
    }
    res.step = runs.front().step;
    res.rho = runs.front().rho;
    for (const auto& r : runs) res.probe_work.push_back(r.work);

    const std::size_t n = times.size();
    res.alpha_S.assign(n, 0.0);
    res.alpha_FWM.assign(n, 0.0);
    if (!probe_off) {
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0, f = 0.0;
            for (int k = 0; k < 4; ++k) {
                const double w = runs[static_cast<std::size_t>(k)].work[i];
                s += w;
                f += (k % 2 == 0 ? w : -w);
            }
            res.alpha_S[i] = s / 4.0;
            res.alpha_FWM[i] = f / 4.0;
        }
    }

    if (opts.check_scaling && !probe_off) {
        std::vector<double> half(n, 0.0);
        for (int k = 0; k < 4; ++k) {
            const cplx amp = 0.5 * probe.rabi_amplitude * std::exp(I * (0.5 * std::numbers::pi * k));
            const OracleRun r = oracle_run(m, amp, m2, delta, times, rho0, max_step);
            for (std::size_t i = 0; i < n; ++i) half[i] += r.work[i] / 4.0;
        }
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            num = std::max(num, std::abs(4.0 * half[i] - res.alpha_S[i]));
            den = std::max(den, std::abs(res.alpha_S[i]));
        }
        res.scaling_deviation = den > 0.0 ? num / den : 0.0;
        if (res.scaling_deviation > opts.tolerance) {
            std::ostringstream os;
            os << "probe nonlinearity: |O2|^2 scaling violated by " << res.scaling_deviation;
            res.warnings.push_back(os.str());
        }
    }
    return res;
}

} // namespace dtls
