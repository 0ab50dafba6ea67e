#pragma once

// Probe-absorption observables and (delta, t) scans.
//
// Sign convention: positive values mean absorption. Delta alpha is the pumped
// S-channel absorption minus the pump-free one observed at the same time
// after probe turn-on, so it starts from zero.

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "dtls/engine.hpp"

namespace dtls {

// Im[conj(O2) Tr(sigma_ge R)] with R = (e2.Q_ge)^dagger the raising matrix.
double absorption_S(const Eigen::MatrixXcd& sigma_ge, cplx probe_amplitude, const Eigen::MatrixXcd& raising);
// Requires a first_order_plus state.
double absorption_S(const BlockedDensityMatrix& sigma, const AtomicTransition& t, const FieldSpec& probe);

// -Im[O2 Tr(sigma_eg L) exp(2 i delta t)] with L = e2.Q_ge.
double absorption_FWM(const Eigen::MatrixXcd& sigma_eg, cplx probe_amplitude, const Eigen::MatrixXcd& lowering,
                      double delta, double t);
double absorption_FWM(const BlockedDensityMatrix& sigma, const AtomicTransition& t, const FieldSpec& probe,
                      double delta, double time);

enum class TurnOn { simultaneous, pump_preconditioned };

struct ScanConfig {
    AtomicTransition transition = AtomicTransition::make(1, 0);
    FieldSpec pump;
    FieldSpec probe;
    ZeemanSetting zeeman;
    std::vector<double> deltas;
    std::vector<double> times;
    TurnOn turn_on = TurnOn::simultaneous;
    // Initial zero-order state; isotropic ground state when empty.
    std::optional<BlockedDensityMatrix> initial;
    double step = 0.0; // 0 selects the engine default
    int threads = 1;
    bool include_fwm = false; // add the FWM channel to delta_alpha
};

struct SpectrumGrid {
    std::vector<double> deltas;
    std::vector<double> times;
    Eigen::MatrixXd alpha_S;       // rows: delta, columns: time
    Eigen::MatrixXd alpha_FWM;
    Eigen::MatrixXd alpha_linear;  // pump-free alpha_S at matching times
    std::vector<double> alpha_linear_steady;
    Eigen::MatrixXd delta_alpha;
    double step = 0.0;
    std::vector<std::string> warnings;
    nlohmann::json metadata = nlohmann::json::object();

    std::vector<double> column(Eigen::Index time_index) const; // delta_alpha profile at one time
    std::vector<double> row(Eigen::Index delta_index) const;   // delta_alpha trace at one delta
};

struct LinearBaseline {
    Eigen::MatrixXd time_matched;
    std::vector<double> steady;
    double step = 0.0;
};

// Pump-free S absorption per delta: at the requested times and in the
// stationary limit.
LinearBaseline linear_baseline(const AtomicTransition& t, const FieldSpec& probe, const ZeemanSetting& z,
                               const std::vector<double>& deltas, const std::vector<double>& times,
                               double step = 0.0, int threads = 1);

// One first-order evolution per delta, spread over cfg.threads workers.
// Engine errors are rethrown with the offending delta in the message.
SpectrumGrid scan(const ScanConfig& cfg);

enum class PeakStatus { ok, no_peak, edge_peak, unbounded };

const char* to_string(PeakStatus s);

struct LineshapeMetrics {
    PeakStatus status = PeakStatus::no_peak;
    double peak_value = 0.0; // relative to the baseline, signed
    double peak_delta = 0.0;
    double fwhm = 0.0;
    double baseline = 0.0;   // baseline value at peak_delta
    double lorentzian_score = 0.0; // 1 - residual/variance of the best Lorentzian, in [0, 1]
};

enum class Baseline {
    none,      // measured from zero
    edges,     // mean of the two outermost samples
    wings      // even quadratic a + b (delta - center)^2 fitted on the far wings
};

enum class Polarity { automatic, peak, dip };

struct FwhmOptions {
    Baseline baseline = Baseline::none;
    // Wing region |delta - center| >= wing_factor * expected_width; when
    // expected_width is 0 the outer quarter on each side is used.
    double expected_width = 0.0;
    double wing_factor = 10.0;
    Polarity polarity = Polarity::automatic;
};

// Peak by parabolic refinement of the extremum, width from linearly
// interpolated half-maximum crossings. Needs at least 5 points with
// strictly increasing delta (std::invalid_argument otherwise).
LineshapeMetrics fwhm(const std::vector<double>& delta, const std::vector<double>& values, const FwhmOptions& opts = {});

} // namespace dtls
