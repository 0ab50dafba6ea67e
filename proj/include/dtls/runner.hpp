#pragma once

// Mode dispatch, export and run manifests for dtls-run.

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dtls/config.hpp"
#include "dtls/spectra.hpp"

namespace dtls {

const char* code_version();

// Long-format CSV (delta,time,alpha_S,alpha_FWM,delta_alpha), 12 significant
// digits, independent of the global locale. Axes are converted to MHz / us
// when cfg.gamma_mhz is set; delta_alpha is negated when cfg.flip_axis is.
std::string grid_to_csv(const SpectrumGrid& g, const RunConfig& cfg);
// Grid of arrays with a metadata block holding the configuration echo.
nlohmann::json grid_to_json(const SpectrumGrid& g, const RunConfig& cfg);

// Fills a grid for the analytic and DTLS modes (everything except the
// oracle part of oracle_compare).
SpectrumGrid compute_grid(const RunConfig& cfg);

struct OracleComparison {
    std::vector<double> deltas;
    std::vector<double> max_relative_error; // per delta, S channel
    std::vector<double> scaling_deviation;
    SpectrumGrid oracle; // oracle S / FWM channels on the same grid
    std::vector<std::string> warnings;
};
OracleComparison compare_with_oracle(const RunConfig& cfg, const SpectrumGrid& first_order);

struct RunManifest {
    nlohmann::json config;
    std::string version;
    double step = 0.0;
    double wall_time = 0.0;
    std::map<std::string, std::string> checksums; // file name -> sha256
    std::vector<std::string> warnings;
    nlohmann::json summary = nlohmann::json::object();
};
nlohmann::json to_json(const RunManifest& m);

std::string sha256_hex(const std::string& bytes);

// Executes cfg.mode and writes outputs plus <prefix>.manifest.json into
// cfg.output_dir. Existing outputs are only replaced when overwrite is set
// (IoError otherwise).
RunManifest run(const RunConfig& cfg, bool overwrite = false);

} // namespace dtls
