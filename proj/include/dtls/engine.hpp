#pragma once

// Density-matrix dynamics of a degenerate two-level transition driven by a
// pump (frequency w1) and a weak probe (w2 = w1 + delta).
//
// Zero order (pump only), in the frame rotating at w1:
//   d s0/dt = -i[H_B - D1 P_e + V1, s0] - (G/2){P_e, s0} + G sum_q Q^q_ge s0 Q^q_eg
// where D1 = w1 - w0 is the pump detuning, H_B = -F_z (larmor_g P_g + larmor_e P_e)
// and V1 = O1 (e1.Q_ge) + h.c. with O1 the pump Rabi amplitude.
//
// First order in the probe: the component s+ of rho oscillating as exp(i delta t)
// on top of the w1 rotation obeys the same equation with an extra -i delta s+
// and the source -i[O2 (e2.Q_ge), s0(t)], starting from s+(0) = 0.
//
// States are vectorized column-major from the full (dg + de) x (dg + de)
// matrix with ground sublevels first; superoperators act on that vector.

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "dtls/angular.hpp"

namespace dtls {

struct FieldSpec {
    // Coupling amplitude O: the field couples |g mg> and |e me> with matrix
    // element O times the corresponding entry of e.Q_ge (Rabi frequency 2|O|).
    cplx rabi_amplitude{0.0, 0.0};
    Polarization pol;
    // w - w0. Only the pump detuning enters the engine; the probe is placed
    // by the Raman detuning delta passed to the first-order routines.
    double detuning = 0.0;
    // Pump only: values < 0 switch the pump on that long before the probe
    // (which always defines t = 0) in simultaneous mode.
    double turn_on_time = 0.0;

    bool operator==(const FieldSpec&) const = default;
};

// Throws std::invalid_argument when |amplitude| >= gamma; returns a warning
// when it exceeds gamma / 2.
std::vector<std::string> validate_field(const FieldSpec& f, double gamma, const char* name);

struct ZeemanSetting {
    double larmor_g = 0.0; // g_g mu_B B
    double larmor_e = 0.0; // g_e mu_B B

    bool operator==(const ZeemanSetting&) const = default;
};

enum class Frame { zero_order, first_order_plus };

struct BlockedDensityMatrix {
    Eigen::MatrixXcd gg, ge, eg, ee;
    Frame frame = Frame::zero_order;

    static BlockedDensityMatrix zeros(const AtomicTransition& t, Frame frame);
    // Uniform population over ground sublevels, no coherence.
    static BlockedDensityMatrix isotropic_ground(const AtomicTransition& t);
    static BlockedDensityMatrix from_full(const Eigen::MatrixXcd& full, int dg, Frame frame);
    static BlockedDensityMatrix from_vector(const Eigen::VectorXcd& v, int dg, int de, Frame frame);

    Eigen::MatrixXcd full() const;
    Eigen::VectorXcd vectorized() const;
    cplx trace() const { return gg.trace() + ee.trace(); }
    // Largest |rho - rho^dagger| entry.
    double hermiticity_defect() const;
};

struct AffineGenerator;

// b(t) = source * s0(t) with s0' = pump_generator * s0 and s0(0) = initial.
struct ZeroOrderDrive {
    Eigen::MatrixXcd source;
    Eigen::MatrixXcd pump_generator;
    Eigen::VectorXcd initial;
};

// d sigma/dt = linear * sigma + b(t).
struct AffineGenerator {
    AtomicTransition transition;
    Frame frame = Frame::zero_order;
    Eigen::MatrixXcd linear;
    Eigen::VectorXcd constant_drive;
    std::optional<ZeroOrderDrive> zero_order_drive;
    // Largest rate in the problem; fixes the default step.
    double max_rate = 1.0;
    std::vector<std::string> warnings;

    bool constant_coefficients() const { return !zero_order_drive.has_value(); }
    Eigen::Index state_size() const { return linear.rows(); }
    Eigen::VectorXcd drive(double t) const;
    // Autonomous linear embedding used by the evolution routines:
    // [sigma; 1] for a constant drive, [sigma; s0] for a zero-order drive.
    Eigen::MatrixXcd augmented() const;
    Eigen::VectorXcd augmented_initial(const Eigen::VectorXcd& sigma0) const;
};

// Zero-order generator (drive = 0). Throws on invalid inputs.
AffineGenerator build_zero_order_generator(const AtomicTransition& t, const FieldSpec& pump, const ZeemanSetting& z);

// Default fixed RK4 step 0.02 / max rate.
double default_step(const AffineGenerator& gen);

struct EvolveOptions {
    double step = 0.0; // 0 selects default_step
};

// Fixed-step RK4. The step map of a linear autonomous system is a matrix
// polynomial, so long horizons are covered by binary powering of that map.
BlockedDensityMatrix evolve_zero_order(const AffineGenerator& gen, const BlockedDensityMatrix& sigma0_init, double t,
                                       const EvolveOptions& opts = {});

std::vector<BlockedDensityMatrix> evolve_zero_order_trajectory(const AffineGenerator& gen,
                                                               const BlockedDensityMatrix& sigma0_init,
                                                               const std::vector<double>& times,
                                                               const EvolveOptions& opts = {});

struct SteadyState {
    BlockedDensityMatrix sigma;
    int null_space_dimension = 1;
    double residual = 0.0;
};

// Solves L sigma = 0 with unit trace. With several stationary states the
// limit reached by evolution from `initial` (default: isotropic ground
// state) is returned, i.e. the spectral projection onto the kernel.
SteadyState steady_state_zero_order(const AffineGenerator& gen,
                                    const std::optional<BlockedDensityMatrix>& initial = std::nullopt);

// Where s0 comes from: a stationary matrix (pump switched on long before the
// probe) or the zero-order evolution from a given initial state.
struct StationaryPump {
    BlockedDensityMatrix sigma0;
};
struct EvolvingPump {
    AffineGenerator zero_order;
    BlockedDensityMatrix initial;
};
using PumpState = std::variant<StationaryPump, EvolvingPump>;

AffineGenerator build_first_order_generator(const AtomicTransition& t, const FieldSpec& pump, const FieldSpec& probe,
                                            const ZeemanSetting& z, double delta, const PumpState& sigma0);

struct FirstOrderTrajectory {
    std::vector<double> times;
    std::vector<BlockedDensityMatrix> sigma; // first_order_plus frame
    double step = 0.0;                       // largest step actually used
};

// Integrates from sigma(0) = 0 and samples at the given non-decreasing
// times (t >= 0). An empty list gives an empty trajectory.
FirstOrderTrajectory evolve_first_order(const AffineGenerator& gen, const std::vector<double>& times,
                                        const EvolveOptions& opts = {});

// Same quantity from the matrix exponential of the augmented generator
// (no time stepping). Used as an independent check.
FirstOrderTrajectory evolve_first_order_exact(const AffineGenerator& gen, const std::vector<double>& times);

// Non-perturbative two-field integration used to validate the first-order
// expansion.
struct OracleOptions {
    double step = 0.0;          // 0 selects 0.02 / max rate (probe included)
    bool check_scaling = false; // repeat at half probe amplitude
    double tolerance = 0.01;    // contamination level that triggers a warning
};

struct OracleResult {
    std::vector<double> times;
    // Full density matrix in the w1 rotating frame, probe phase 0.
    std::vector<Eigen::MatrixXcd> rho;
    // Instantaneous probe work -Im(O2 e^{i delta t} Tr(rho_eg e2.Q_ge)) for
    // probe phases 0, pi/2, pi, 3pi/2.
    std::vector<std::vector<double>> probe_work;
    // Phase-cycled separation: the average over the four phases keeps the
    // synchronous (S) part; the alternating sum keeps the part at 2 delta (FWM).
    std::vector<double> alpha_S;
    std::vector<double> alpha_FWM;
    double step = 0.0;
    double scaling_deviation = 0.0; // relative departure from |O2|^2 scaling
    std::vector<std::string> warnings;
};

OracleResult oracle_bichromatic(const AtomicTransition& t, const FieldSpec& pump, const FieldSpec& probe,
                                const ZeemanSetting& z, double delta, const std::vector<double>& times,
                                const BlockedDensityMatrix& initial, const OracleOptions& opts = {});

} // namespace dtls
