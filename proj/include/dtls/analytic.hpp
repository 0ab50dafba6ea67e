#pragma once

// Reference models for coherence resonances: the closed three-level Lambda
// system (EIT) and the four-level N system (EIA). Frequencies are in the
// same units as gamma; the pump is resonant with the optical transition.
//
// Absorption is measured as -Im(sigma_bc * Omega2), i.e. in units where the
// pump-free steady absorption is |Omega2|^2 Re 1/(gamma/2 - i delta).

#include <complex>
#include <string>
#include <vector>

namespace dtls::analytic {

using cplx = std::complex<double>;

// F(x, y, tau) = Re{ (1 - exp[-(x - i y) tau]) / ((1/2 - i y)(x - i y)) }.
// Throws std::invalid_argument for x <= 0 or tau < 0.
double f_function(double x, double y, double tau);

struct LambdaParams {
    double omega1 = 0.0;    // pump Rabi amplitude (Rabi frequency 2*omega1)
    cplx omega2{1e-3, 0.0}; // probe Rabi amplitude
    double gamma = 1.0;
    double gamma_ba = 0.5;  // decay b -> a
    double gamma_bc = 0.5;  // decay b -> c
    double delta = 0.0;     // Raman detuning omega2 - omega1
    double scale_K = 1.0;

    double beta() const { return 2.0 * omega1 * omega1 / gamma; }
    // Throws std::invalid_argument on a broken invariant.
    void validate() const;
    // Non-fatal notes when beta or |delta| exceed gamma/10.
    std::vector<std::string> adiabatic_warnings() const;
};

struct NParams {
    double omega1 = 0.0;
    cplx omega2{1e-3, 0.0};
    double gamma = 1.0;
    double delta = 0.0;
    cplx A{0.0, 0.0};       // relative dipole a-b
    cplx B{1.0, 0.0};       // relative dipole c-b; |A|^2 + |B|^2 = 1
    double scale_Kprime = 1.0;

    double beta() const { return 2.0 * omega1 * omega1 / gamma; }
    double beta_prime() const { return beta() * (1.0 - std::norm(A)); }
    void validate() const;
    std::vector<std::string> adiabatic_warnings() const;
};

// K = scale_K * 2 omega1^2 |omega2|^2 / gamma^3.
double lambda_k(const LambdaParams& p);
// K' = scale_Kprime * 2 omega1^2 |omega2|^2 / gamma.
double n_kprime(const NParams& p);

// Pump-free probe absorption |omega2|^2 Re 1/(gamma/2 - i delta).
double linear_absorption(cplx omega2, double gamma, double delta);

// Adiabatic nonlinear absorption -K F(beta/gamma, delta/gamma, gamma t).
double lambda_nonlinear_absorption(const LambdaParams& p, double t);

struct SteadyAbsorption {
    double absorption;
    double fwhm_delta;
};
// Steady probe absorption of the pumped Lambda system and the EIT width 4 omega1^2/gamma.
SteadyAbsorption lambda_steady_absorption(const LambdaParams& p);

struct LambdaState {
    double aa = 0.0, bb = 0.0, cc = 1.0;
    cplx bc{}, ab{}, ac{};

    double trace() const { return aa + bb + cc; }
};

struct OdeOptions {
    double step = 0.0;       // 0 selects the default step
    double sample_every = 0.0; // 0 samples every step
};

struct LambdaTrajectory {
    std::vector<double> times;
    std::vector<LambdaState> states;
    double step = 0.0;
};

// Default fixed step min(0.05, 0.1 / max(gamma, |delta|, omega1, |omega2|)) in units of 1/gamma.
double lambda_default_step(const LambdaParams& p);

// Full Lambda Bloch equations, fixed-step RK4 from sigma_cc = 1.
// Throws NumericError if the state stops being finite.
LambdaTrajectory lambda_exact_ode(const LambdaParams& p, double horizon, const OdeOptions& opts = {});

// -Im(sigma_bc omega2)
double lambda_probe_absorption(const LambdaState& s, const LambdaParams& p);

// Exact nonlinear absorption: the pumped trajectory minus the pump-free one,
// both integrated on the same grid.
struct ExactNonlinear {
    std::vector<double> times;
    std::vector<double> delta_alpha;
    double step = 0.0;
};
ExactNonlinear lambda_exact_nonlinear_absorption(const LambdaParams& p, double horizon,
                                                 const OdeOptions& opts = {});

// Adiabatic N-system nonlinear absorption: saturation background plus the
// EIA term K'(|A|^2/gamma^2) F(beta'/gamma, delta/gamma, gamma t).
double n_nonlinear_absorption(const NParams& p, double t);

// Steady probe absorption of the pumped N system.
double n_steady_absorption(const NParams& p);

// Pump-only steady state of the c-d cycling transition.
struct NPumpState {
    double cc;
    double dd;
    cplx cd;
};
NPumpState n_pump_steady_state(const NParams& p);

// First-order probe coherences of the N system.
struct NState {
    cplx ac{}, bc{}, ad{}, bd{};
};

struct NTrajectory {
    std::vector<double> times;
    std::vector<NState> states;
    double step = 0.0;
};

double n_default_step(const NParams& p);

// First-order N-system equations from sigma^1(0) = 0, driven by the pump-only
// steady state.
NTrajectory n_exact_ode(const NParams& p, double horizon, const OdeOptions& opts = {});

// Same equations without the probe source, started from a unit Raman
// coherence sigma_ac = 1. Used to measure the Raman damping rate.
NTrajectory n_raman_free_decay(const NParams& p, double horizon, const OdeOptions& opts = {});

// Long-time limit of the driven first-order system (direct linear solve).
NState n_first_order_steady(const NParams& p);

// -Im(sigma_bc omega2) for the first-order state.
double n_probe_absorption(const NState& s, const NParams& p);

} // namespace dtls::analytic
