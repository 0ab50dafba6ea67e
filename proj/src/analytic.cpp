#include "dtls/analytic.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

#include "dtls/errors.hpp"
#include "dtls/integrator.hpp"

namespace dtls::analytic {

namespace {

constexpr cplx I{0.0, 1.0};

// (1 - exp(-z tau)) / z for Re z >= 0, including z -> 0.
cplx relaxation_integral(cplx z, double tau) {
    const cplx w = z * tau;
    if (std::abs(w) < 1e-4) {
        return tau * (1.0 - w / 2.0 + w * w / 6.0 - w * w * w / 24.0);
    }
    // 1 - exp(-w) without cancellation when Re w is small.
    const double a = -w.real();
    const double b = -w.imag();
    const double s = std::sin(0.5 * b);
    const cplx em1(std::expm1(a) * std::cos(b) - 2.0 * s * s, std::exp(a) * std::sin(b));
    return -em1 / z;
}

double f_unchecked(double x, double y, double tau) {
    const cplx z(x, -y);
    return (relaxation_integral(z, tau) / cplx(0.5, -y)).real();
}

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw std::invalid_argument(std::string(what) + " must be finite");
}

} // namespace

double f_function(double x, double y, double tau) {
    if (!(x > 0.0)) throw std::invalid_argument("f_function: x must be positive");
    if (!(tau >= 0.0)) throw std::invalid_argument("f_function: tau must be non-negative");
    require_finite(y, "f_function: y");
    return f_unchecked(x, y, tau);
}

void LambdaParams::validate() const {
    if (!(gamma > 0.0)) throw std::invalid_argument("LambdaParams: gamma must be positive");
    if (!(omega1 >= 0.0)) throw std::invalid_argument("LambdaParams: omega1 must be non-negative");
    if (gamma_ba < 0.0 || gamma_bc < 0.0) throw std::invalid_argument("LambdaParams: branching rates must be non-negative");
    if (std::abs(gamma_ba + gamma_bc - gamma) > 1e-12 * gamma) {
        throw std::invalid_argument("LambdaParams: gamma_ba + gamma_bc must equal gamma");
    }
    if (!(scale_K > 0.0)) throw std::invalid_argument("LambdaParams: scale_K must be positive");
    require_finite(delta, "LambdaParams: delta");
}

namespace {

std::vector<std::string> adiabatic_notes(double beta, double delta, double gamma) {
    std::vector<std::string> notes;
    if (beta > gamma / 10.0) {
        std::ostringstream os;
        os << "optical pumping rate beta = " << beta << " exceeds gamma/10; adiabatic formulas are approximate";
        notes.push_back(os.str());
    }
    if (std::abs(delta) > gamma / 10.0) {
        std::ostringstream os;
        os << "|delta| = " << std::abs(delta) << " exceeds gamma/10; adiabatic formulas are approximate";
        notes.push_back(os.str());
    }
    return notes;
}

} // namespace

std::vector<std::string> LambdaParams::adiabatic_warnings() const { return adiabatic_notes(beta(), delta, gamma); }

void NParams::validate() const {
    if (!(gamma > 0.0)) throw std::invalid_argument("NParams: gamma must be positive");
    if (!(omega1 >= 0.0)) throw std::invalid_argument("NParams: omega1 must be non-negative");
    if (std::abs(std::norm(A) + std::norm(B) - 1.0) > 1e-12) {
        throw std::invalid_argument("NParams: |A|^2 + |B|^2 must equal 1");
    }
    if (!(scale_Kprime > 0.0)) throw std::invalid_argument("NParams: scale_Kprime must be positive");
    require_finite(delta, "NParams: delta");
}

std::vector<std::string> NParams::adiabatic_warnings() const { return adiabatic_notes(beta(), delta, gamma); }

double lambda_k(const LambdaParams& p) {
    return p.scale_K * 2.0 * p.omega1 * p.omega1 * std::norm(p.omega2) / (p.gamma * p.gamma * p.gamma);
}

double n_kprime(const NParams& p) {
    return p.scale_Kprime * 2.0 * p.omega1 * p.omega1 * std::norm(p.omega2) / p.gamma;
}

double linear_absorption(cplx omega2, double gamma, double delta) {
    return std::norm(omega2) * (1.0 / cplx(gamma / 2.0, -delta)).real();
}

double lambda_nonlinear_absorption(const LambdaParams& p, double t) {
    p.validate();
    if (t < 0.0) throw std::invalid_argument("lambda_nonlinear_absorption: t must be non-negative");
    if (p.omega1 == 0.0) return 0.0;
    return -lambda_k(p) * f_function(p.beta() / p.gamma, p.delta / p.gamma, p.gamma * t);
}

SteadyAbsorption lambda_steady_absorption(const LambdaParams& p) {
    p.validate();
    const cplx optical(p.gamma / 2.0, -p.delta);
    double alpha = linear_absorption(p.omega2, p.gamma, p.delta);
    if (p.omega1 > 0.0) {
        const cplx raman(p.beta(), -p.delta);
        alpha -= std::norm(p.omega2) *
                 (2.0 * p.omega1 * p.omega1 / (p.gamma * optical * raman)).real();
    }
    return {alpha, 4.0 * p.omega1 * p.omega1 / p.gamma};
}

namespace {

using LambdaVec = Eigen::Matrix<cplx, 6, 1>; // aa, bb, cc, bc, ab, ac

LambdaVec pack(const LambdaState& s) {
    LambdaVec v;
    v << s.aa, s.bb, s.cc, s.bc, s.ab, s.ac;
    return v;
}

LambdaState unpack(const LambdaVec& v) {
    return {v[0].real(), v[1].real(), v[2].real(), v[3], v[4], v[5]};
}

struct LambdaRhs {
    LambdaParams p;

    LambdaVec operator()(double /*t*/, const LambdaVec& y) const {
        const double o1 = p.omega1;
        const cplx o2 = p.omega2;
        const cplx o2c = std::conj(o2);
        const cplx aa = y[0], bb = y[1], cc = y[2], bc = y[3], ab = y[4], ac = y[5];
        const cplx cb = std::conj(bc), ba = std::conj(ab);
        LambdaVec d;
        d[0] = -I * o1 * (ba - ab) + p.gamma_ba * bb;
        d[1] = -I * o2c * cb + I * o2 * bc - I * o1 * (ab - ba) - p.gamma * bb;
        d[2] = -I * o2 * bc + I * o2c * cb + p.gamma_bc * bb;
        d[3] = -cplx(p.gamma / 2.0, -p.delta) * bc - I * o2c * (cc - bb) - I * o1 * ac;
        d[4] = -(p.gamma / 2.0) * ab + I * o1 * (aa - bb) + I * o2 * ac;
        d[5] = I * p.delta * ac - I * o1 * bc + I * o2c * ab;
        return d;
    }
};

struct Schedule {
    double h;
    std::uint64_t stride;  // steps between samples
    std::uint64_t samples; // number of samples after t = 0
};

Schedule make_schedule(double horizon, double default_step, const OdeOptions& opts) {
    if (!(horizon >= 0.0)) throw std::invalid_argument("integration horizon must be non-negative");
    const double h0 = opts.step > 0.0 ? opts.step : default_step;
    if (opts.sample_every > 0.0) {
        const auto stride = static_cast<std::uint64_t>(std::ceil(opts.sample_every / h0 - 1e-9));
        const auto samples = static_cast<std::uint64_t>(std::floor(horizon / opts.sample_every + 1e-9));
        return {opts.sample_every / static_cast<double>(std::max<std::uint64_t>(stride, 1)),
                std::max<std::uint64_t>(stride, 1), samples};
    }
    const StepPlan plan = plan_steps(horizon, h0);
    return {plan.h, 1, plan.steps};
}

template <class Vec>
void check_finite(const Vec& v, double t) {
    if (!v.allFinite()) throw NumericError("integration produced non-finite values", t);
}

} // namespace

double lambda_default_step(const LambdaParams& p) {
    const double fastest = std::max({p.gamma, std::abs(p.delta), p.omega1, std::abs(p.omega2)});
    return std::min(0.05 / p.gamma, 0.1 / fastest);
}

LambdaTrajectory lambda_exact_ode(const LambdaParams& p, double horizon, const OdeOptions& opts) {
    p.validate();
    const Schedule sched = make_schedule(horizon, lambda_default_step(p), opts);
    const LambdaRhs rhs{p};
    LambdaTrajectory traj;
    traj.step = sched.h;
    traj.times.reserve(sched.samples + 1);
    traj.states.reserve(sched.samples + 1);

    LambdaVec y = pack(LambdaState{});
    traj.times.push_back(0.0);
    traj.states.push_back(unpack(y));
    std::uint64_t step = 0;
    for (std::uint64_t s = 1; s <= sched.samples; ++s) {
        for (std::uint64_t k = 0; k < sched.stride; ++k, ++step) {
            const double t = static_cast<double>(step) * sched.h;
            y = rk4_step(rhs, t, y, sched.h);
            check_finite(y, t);
        }
        traj.times.push_back(static_cast<double>(step) * sched.h);
        traj.states.push_back(unpack(y));
    }
    return traj;
}

double lambda_probe_absorption(const LambdaState& s, const LambdaParams& p) { return -(s.bc * p.omega2).imag(); }

ExactNonlinear lambda_exact_nonlinear_absorption(const LambdaParams& p, double horizon, const OdeOptions& opts) {
    OdeOptions o = opts;
    if (o.step <= 0.0) o.step = lambda_default_step(p);
    LambdaParams bare = p;
    bare.omega1 = 0.0;
    const LambdaTrajectory pumped = lambda_exact_ode(p, horizon, o);
    const LambdaTrajectory linear = lambda_exact_ode(bare, horizon, o);
    ExactNonlinear out;
    out.times = pumped.times;
    out.step = pumped.step;
    out.delta_alpha.reserve(pumped.times.size());
    for (std::size_t i = 0; i < pumped.times.size(); ++i) {
        out.delta_alpha.push_back(lambda_probe_absorption(pumped.states[i], p) -
                                  lambda_probe_absorption(linear.states[i], bare));
    }
    return out;
}

double n_nonlinear_absorption(const NParams& p, double t) {
    p.validate();
    if (t < 0.0) throw std::invalid_argument("n_nonlinear_absorption: t must be non-negative");
    if (p.omega1 == 0.0) return 0.0;
    const double kp = n_kprime(p);
    const double background = -kp / (0.25 * p.gamma * p.gamma + p.delta * p.delta);
    const double a2 = std::norm(p.A);
    if (a2 == 0.0) return background;
    const double resonance =
        kp * a2 / (p.gamma * p.gamma) * f_unchecked(p.beta_prime() / p.gamma, p.delta / p.gamma, p.gamma * t);
    return background + resonance;
}

double n_steady_absorption(const NParams& p) {
    p.validate();
    const cplx optical(p.gamma / 2.0, -p.delta);
    cplx bracket = 1.0;
    if (p.omega1 > 0.0) {
        const double o1sq = p.omega1 * p.omega1;
        bracket -= 4.0 * o1sq / (p.gamma * p.gamma);
        const double a2 = std::norm(p.A);
        if (a2 > 0.0) bracket += 2.0 * a2 * o1sq / (p.gamma * cplx(p.beta_prime(), -p.delta));
    }
    return std::norm(p.omega2) * (bracket / optical).real();
}

NPumpState n_pump_steady_state(const NParams& p) {
    p.validate();
    const double o1sq = p.omega1 * p.omega1;
    const double dd = 4.0 * o1sq / (p.gamma * p.gamma + 8.0 * o1sq);
    const double cc = 1.0 - dd;
    return {cc, dd, 2.0 * I * p.omega1 * (cc - dd) / p.gamma};
}

namespace {

using NVec = Eigen::Matrix<cplx, 4, 1>; // ac, bc, ad, bd
using NMat = Eigen::Matrix<cplx, 4, 4>;

NMat n_matrix(const NParams& p) {
    const double o1 = p.omega1;
    const cplx a = p.A;
    const double g = p.gamma;
    const double d = p.delta;
    NMat m = NMat::Zero();
    m(0, 0) = I * d;
    m(0, 1) = -I * o1 * a;
    m(0, 2) = I * o1;
    m(0, 3) = g * a;
    m(1, 0) = -I * o1 * a;
    m(1, 1) = -cplx(g / 2.0, -d);
    m(1, 3) = I * o1;
    m(2, 0) = I * o1;
    m(2, 2) = -cplx(g / 2.0, -d);
    m(2, 3) = -I * o1 * a;
    m(3, 1) = I * o1;
    m(3, 2) = -I * o1 * a;
    m(3, 3) = -cplx(g, -d);
    return m;
}

NVec n_source(const NParams& p) {
    const NPumpState s0 = n_pump_steady_state(p);
    const cplx o2c = std::conj(p.omega2);
    NVec b = NVec::Zero();
    b[1] = -I * o2c * s0.cc;
    b[3] = -I * o2c * s0.cd;
    return b;
}

NState to_state(const NVec& v) { return {v[0], v[1], v[2], v[3]}; }

NTrajectory integrate_n(const NParams& p, double horizon, const OdeOptions& opts, const NVec& y0, const NVec& b) {
    const NMat m = n_matrix(p);
    const auto rhs = [&](double, const NVec& y) -> NVec { return m * y + b; };
    const Schedule sched = make_schedule(horizon, n_default_step(p), opts);
    NTrajectory traj;
    traj.step = sched.h;
    NVec y = y0;
    traj.times.push_back(0.0);
    traj.states.push_back(to_state(y));
    std::uint64_t step = 0;
    for (std::uint64_t s = 1; s <= sched.samples; ++s) {
        for (std::uint64_t k = 0; k < sched.stride; ++k, ++step) {
            const double t = static_cast<double>(step) * sched.h;
            y = rk4_step(rhs, t, y, sched.h);
            check_finite(y, t);
        }
        traj.times.push_back(static_cast<double>(step) * sched.h);
        traj.states.push_back(to_state(y));
    }
    return traj;
}

} // namespace

double n_default_step(const NParams& p) {
    const double fastest = std::max({p.gamma, std::abs(p.delta), p.omega1, std::abs(p.omega2)});
    return std::min(0.05 / p.gamma, 0.1 / fastest);
}

NTrajectory n_exact_ode(const NParams& p, double horizon, const OdeOptions& opts) {
    p.validate();
    return integrate_n(p, horizon, opts, NVec::Zero(), n_source(p));
}

NTrajectory n_raman_free_decay(const NParams& p, double horizon, const OdeOptions& opts) {
    p.validate();
    NVec y0 = NVec::Zero();
    y0[0] = 1.0;
    return integrate_n(p, horizon, opts, y0, NVec::Zero());
}

NState n_first_order_steady(const NParams& p) {
    p.validate();
    const NVec x = n_matrix(p).fullPivLu().solve(-n_source(p));
    return to_state(x);
}

double n_probe_absorption(const NState& s, const NParams& p) { return -(s.bc * p.omega2).imag(); }

} // namespace dtls::analytic
