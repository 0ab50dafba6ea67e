#pragma once

// Run configuration. Files are YAML (JSON is accepted as well); the schema
// is documented in README.md. Unknown keys are rejected.

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dtls/analytic.hpp"
#include "dtls/spectra.hpp"

namespace dtls {

enum class Mode { f_function, analytic_lambda, analytic_n, dtls_scan, dtls_trace, oracle_compare };

const char* to_string(Mode m);
// Throws ConfigError for an unknown name.
Mode mode_from_string(const std::string& name, const std::string& key_path = "mode");

enum class OutputFormat { csv, json, both };

struct Grid {
    // Either an explicit list or an evenly spaced (min, max, count) range.
    std::vector<double> values;
    double min = 0.0;
    double max = 0.0;
    int count = 0;

    std::vector<double> points() const;
    bool operator==(const Grid&) const = default;
};

struct RunConfig {
    Mode mode = Mode::dtls_scan;
    // transition
    double Fg = 1.0, Fe = 0.0, gamma = 1.0, g_g = 0.0, g_e = 0.0;
    FieldSpec pump;
    FieldSpec probe;
    ZeemanSetting zeeman;
    Grid delta;
    Grid time; // time.min is ignored; samples run from 0 to time.max
    TurnOn turn_on = TurnOn::simultaneous;
    double step = 0.0;
    int threads = 1;
    bool include_fwm = false;
    bool flip_axis = false; // export -delta_alpha (figure parity for EIT)
    std::optional<double> gamma_mhz; // Gamma / 2pi in MHz, for exported axes

    // analytic modes
    double lambda_gamma_ba = 0.5, lambda_gamma_bc = 0.5, scale_K = 1.0;
    cplx n_A{0.0, 0.0}, n_B{1.0, 0.0};
    double scale_Kprime = 1.0;
    double f_x = 0.02; // f_function: x; delta grid is y, time grid is tau

    // oracle_compare
    bool oracle_check_scaling = true;
    double oracle_tolerance = 0.01;

    std::string output_dir = "out";
    OutputFormat format = OutputFormat::csv;
    std::string prefix = "run";

    AtomicTransition transition() const;
    std::vector<double> deltas() const { return delta.points(); }
    std::vector<double> times() const;
    analytic::LambdaParams lambda_params(double delta) const;
    analytic::NParams n_params(double delta) const;

    bool operator==(const RunConfig&) const = default;
};

// Parses and validates. Errors are ConfigError with the offending key path.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

nlohmann::json to_json(const RunConfig& cfg);

} // namespace dtls
