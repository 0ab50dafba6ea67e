#include "dtls/runner.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include <openssl/evp.h>

#include "dtls/errors.hpp"
#include "dtls/parallel.hpp"
#include "dtls/signal.hpp"

#ifndef DTLS_VERSION
#define DTLS_VERSION "unknown"
#endif

namespace dtls {

namespace fs = std::filesystem;

const char* code_version() { return DTLS_VERSION; }

namespace {

void append_number(std::string& out, double v) {
    if (v == 0.0) v = 0.0; // no "-0"
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
    out.append(buf, res.ptr);
}

// Exported axes: Gamma units, or MHz (delta / 2pi) and microseconds.
double delta_axis(const RunConfig& cfg, double delta) { return cfg.gamma_mhz ? delta / cfg.gamma * *cfg.gamma_mhz : delta; }

double time_axis(const RunConfig& cfg, double t) {
    return cfg.gamma_mhz ? t * cfg.gamma / (2.0 * std::numbers::pi * *cfg.gamma_mhz) : t;
}

nlohmann::json matrix_json(const Eigen::MatrixXd& m, double sign = 1.0) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        std::vector<double> r(static_cast<std::size_t>(m.cols()));
        for (Eigen::Index j = 0; j < m.cols(); ++j) r[static_cast<std::size_t>(j)] = sign * m(i, j);
        rows.push_back(r);
    }
    return rows;
}

SpectrumGrid empty_grid(const std::vector<double>& deltas, const std::vector<double>& times) {
    SpectrumGrid g;
    g.deltas = deltas;
    g.times = times;
    const auto nd = static_cast<Eigen::Index>(deltas.size());
    const auto nt = static_cast<Eigen::Index>(times.size());
    g.alpha_S = Eigen::MatrixXd::Zero(nd, nt);
    g.alpha_FWM = Eigen::MatrixXd::Zero(nd, nt);
    g.alpha_linear = Eigen::MatrixXd::Zero(nd, nt);
    g.delta_alpha = Eigen::MatrixXd::Zero(nd, nt);
    g.alpha_linear_steady.assign(deltas.size(), 0.0);
    return g;
}

ScanConfig scan_config(const RunConfig& cfg) {
    ScanConfig s;
    s.transition = cfg.transition();
    s.pump = cfg.pump;
    s.probe = cfg.probe;
    s.zeeman = cfg.zeeman;
    s.deltas = cfg.deltas();
    s.times = cfg.times();
    s.turn_on = cfg.turn_on;
    s.step = cfg.step;
    s.threads = cfg.threads;
    s.include_fwm = cfg.include_fwm;
    return s;
}

void write_file(const fs::path& path, const std::string& bytes, bool overwrite) {
    if (fs::exists(path) && !overwrite) {
        throw IoError("refusing to overwrite " + path.string() + " (pass --overwrite)");
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.close();
    if (!out) throw IoError("failed writing " + path.string());
}

void add_unique(std::vector<std::string>& into, const std::vector<std::string>& from) {
    for (const auto& w : from) {
        if (std::find(into.begin(), into.end(), w) == into.end()) into.push_back(w);
    }
}

} // namespace

std::string grid_to_csv(const SpectrumGrid& g, const RunConfig& cfg) {
    const double sign = cfg.flip_axis ? -1.0 : 1.0;
    std::string out = "delta,time,alpha_S,alpha_FWM,delta_alpha\n";
    for (std::size_t i = 0; i < g.deltas.size(); ++i) {
        for (std::size_t j = 0; j < g.times.size(); ++j) {
            const auto r = static_cast<Eigen::Index>(i);
            const auto c = static_cast<Eigen::Index>(j);
            append_number(out, delta_axis(cfg, g.deltas[i]));
            out += ',';
            append_number(out, time_axis(cfg, g.times[j]));
            out += ',';
            append_number(out, g.alpha_S(r, c));
            out += ',';
            append_number(out, g.alpha_FWM(r, c));
            out += ',';
            append_number(out, sign * g.delta_alpha(r, c));
            out += '\n';
        }
    }
    return out;
}

nlohmann::json grid_to_json(const SpectrumGrid& g, const RunConfig& cfg) {
    nlohmann::json j;
    std::vector<double> d, t;
    for (double v : g.deltas) d.push_back(delta_axis(cfg, v));
    for (double v : g.times) t.push_back(time_axis(cfg, v));
    nlohmann::json meta = g.metadata;
    meta["config"] = to_json(cfg);
    meta["version"] = code_version();
    meta["units"] = cfg.gamma_mhz ? nlohmann::json{{"delta", "MHz (delta / 2pi)"}, {"time", "us"}}
                                  : nlohmann::json{{"delta", "gamma"}, {"time", "1 / gamma"}};
    meta["delta_alpha_sign"] = cfg.flip_axis ? "positive = transparency" : "positive = absorption";
    meta["warnings"] = g.warnings;
    j["metadata"] = meta;
    j["delta"] = d;
    j["time"] = t;
    j["alpha_S"] = matrix_json(g.alpha_S);
    j["alpha_FWM"] = matrix_json(g.alpha_FWM);
    j["alpha_linear"] = matrix_json(g.alpha_linear);
    j["alpha_linear_steady"] = g.alpha_linear_steady;
    j["delta_alpha"] = matrix_json(g.delta_alpha, cfg.flip_axis ? -1.0 : 1.0);
    return j;
}

SpectrumGrid compute_grid(const RunConfig& cfg) {
    const auto deltas = cfg.deltas();
    const auto times = cfg.times();
    switch (cfg.mode) {
    case Mode::f_function: {
        // F(x, y, tau) is stored in delta_alpha with y on the delta axis and tau on the time axis.
        SpectrumGrid g = empty_grid(deltas, times);
        for (std::size_t i = 0; i < deltas.size(); ++i) {
            for (std::size_t j = 0; j < times.size(); ++j) {
                g.delta_alpha(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                    analytic::f_function(cfg.f_x, deltas[i], times[j]);
            }
        }
        return g;
    }
    case Mode::analytic_lambda:
    case Mode::analytic_n: {
        SpectrumGrid g = empty_grid(deltas, times);
        const bool lambda = cfg.mode == Mode::analytic_lambda;
        for (std::size_t i = 0; i < deltas.size(); ++i) {
            const auto r = static_cast<Eigen::Index>(i);
            const double lin = analytic::linear_absorption(cfg.probe.rabi_amplitude, cfg.gamma, deltas[i]);
            g.alpha_linear_steady[i] = lin;
            std::vector<std::string> warnings;
            if (lambda) {
                const auto p = cfg.lambda_params(deltas[i]);
                p.validate();
                warnings = p.adiabatic_warnings();
            } else {
                const auto p = cfg.n_params(deltas[i]);
                p.validate();
                warnings = p.adiabatic_warnings();
            }
            add_unique(g.warnings, warnings);
            for (std::size_t j = 0; j < times.size(); ++j) {
                const auto c = static_cast<Eigen::Index>(j);
                const double da = lambda ? analytic::lambda_nonlinear_absorption(cfg.lambda_params(deltas[i]), times[j])
                                         : analytic::n_nonlinear_absorption(cfg.n_params(deltas[i]), times[j]);
                g.alpha_linear(r, c) = lin;
                g.delta_alpha(r, c) = da;
                g.alpha_S(r, c) = lin + da;
            }
        }
        return g;
    }
    case Mode::dtls_scan:
    case Mode::dtls_trace:
    case Mode::oracle_compare:
        return scan(scan_config(cfg));
    }
    throw std::logic_error("unhandled mode");
}

OracleComparison compare_with_oracle(const RunConfig& cfg, const SpectrumGrid& fo) {
    const AtomicTransition t = cfg.transition();
    BlockedDensityMatrix initial = BlockedDensityMatrix::isotropic_ground(t);
    const AffineGenerator gz = build_zero_order_generator(t, cfg.pump, cfg.zeeman);
    if (cfg.turn_on == TurnOn::pump_preconditioned) {
        initial = steady_state_zero_order(gz, initial).sigma;
    } else if (cfg.pump.turn_on_time < 0.0) {
        initial = evolve_zero_order(gz, initial, -cfg.pump.turn_on_time, {cfg.step});
    }

    OracleComparison cmp;
    cmp.deltas = fo.deltas;
    cmp.max_relative_error.assign(fo.deltas.size(), 0.0);
    cmp.scaling_deviation.assign(fo.deltas.size(), 0.0);
    cmp.oracle = empty_grid(fo.deltas, fo.times);
    cmp.oracle.alpha_linear = fo.alpha_linear;
    cmp.oracle.alpha_linear_steady = fo.alpha_linear_steady;
    std::vector<std::vector<std::string>> warnings(fo.deltas.size());
    OracleOptions opts;
    opts.step = cfg.step;
    opts.check_scaling = cfg.oracle_check_scaling;
    opts.tolerance = cfg.oracle_tolerance;

    std::vector<std::exception_ptr> errors;
    parallel_for(fo.deltas.size(), cfg.threads, [&](std::size_t i) {
        const OracleResult res =
            oracle_bichromatic(t, cfg.pump, cfg.probe, cfg.zeeman, fo.deltas[i], fo.times, initial, opts);
        const auto r = static_cast<Eigen::Index>(i);
        double diff = 0.0, scale = 0.0;
        for (std::size_t j = 0; j < fo.times.size(); ++j) {
            const auto c = static_cast<Eigen::Index>(j);
            cmp.oracle.alpha_S(r, c) = res.alpha_S[j];
            cmp.oracle.alpha_FWM(r, c) = res.alpha_FWM[j];
            diff = std::max(diff, std::abs(fo.alpha_S(r, c) - res.alpha_S[j]));
            scale = std::max(scale, std::abs(res.alpha_S[j]));
        }
        cmp.max_relative_error[i] = scale > 0.0 ? diff / scale : diff;
        cmp.scaling_deviation[i] = res.scaling_deviation;
        warnings[i] = res.warnings;
    }, errors);
    rethrow_first(errors, [&](std::size_t i) { return delta_label(fo.deltas[i]); });
    cmp.oracle.delta_alpha = cmp.oracle.alpha_S - cmp.oracle.alpha_linear;
    if (cfg.include_fwm) cmp.oracle.delta_alpha += cmp.oracle.alpha_FWM;
    for (const auto& w : warnings) add_unique(cmp.warnings, w);
    return cmp;
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 digest failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 0xf];
    }
    return out;
}

nlohmann::json to_json(const RunManifest& m) {
    return {{"config", m.config},       {"version", m.version},   {"step", m.step},
            {"wall_time_s", m.wall_time}, {"checksums", m.checksums}, {"warnings", m.warnings},
            {"summary", m.summary}};
}

namespace {

// Per-delta trace figures for dtls_trace runs.
nlohmann::json trace_summary(const SpectrumGrid& g) {
    nlohmann::json rows = nlohmann::json::array();
    const bool uniform = g.times.size() >= 16;
    for (std::size_t i = 0; i < g.deltas.size(); ++i) {
        const auto x = g.row(static_cast<Eigen::Index>(i));
        nlohmann::json r = {{"delta", g.deltas[i]}, {"final_delta_alpha", x.back()}};
        const double bt = buildup_time(g.times, x, x.back());
        if (bt >= 0.0) r["buildup_time"] = bt;
        if (uniform) {
            const double dt = g.times[1] - g.times[0];
            const auto modes = exponential_modes(x, dt);
            for (const auto& m : modes) {
                if (m.lambda.imag() > 0.0) {
                    r["dominant_oscillation"] = {{"omega", m.lambda.imag()}, {"damping", -m.lambda.real()}};
                    break;
                }
            }
        }
        rows.push_back(r);
    }
    return rows;
}

} // namespace

RunManifest run(const RunConfig& cfg, bool overwrite) {
    const auto start = std::chrono::steady_clock::now();
    const fs::path dir(cfg.output_dir);
    const fs::path manifest_path = dir / (cfg.prefix + ".manifest.json");
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    if (fs::exists(manifest_path) && !overwrite) {
        throw IoError("manifest " + manifest_path.string() + " already exists (pass --overwrite)");
    }

    RunManifest m;
    m.config = to_json(cfg);
    m.version = code_version();

    const SpectrumGrid grid = compute_grid(cfg);
    m.step = grid.step;
    add_unique(m.warnings, grid.warnings);

    std::vector<std::pair<std::string, std::string>> files;
    const auto emit = [&](const std::string& stem, const SpectrumGrid& g) {
        if (cfg.format != OutputFormat::json) files.emplace_back(stem + ".csv", grid_to_csv(g, cfg));
        if (cfg.format != OutputFormat::csv) files.emplace_back(stem + ".json", grid_to_json(g, cfg).dump(1) + "\n");
    };
    emit(cfg.prefix, grid);

    if (cfg.mode == Mode::dtls_trace) m.summary["traces"] = trace_summary(grid);
    if (cfg.mode == Mode::oracle_compare) {
        const OracleComparison cmp = compare_with_oracle(cfg, grid);
        add_unique(m.warnings, cmp.warnings);
        emit(cfg.prefix + ".oracle", cmp.oracle);
        nlohmann::json report = {{"delta", cmp.deltas},
                                 {"max_relative_error_S", cmp.max_relative_error},
                                 {"scaling_deviation", cmp.scaling_deviation},
                                 {"max_over_grid", *std::max_element(cmp.max_relative_error.begin(),
                                                                     cmp.max_relative_error.end())}};
        files.emplace_back(cfg.prefix + ".oracle_report.json", report.dump(1) + "\n");
        m.summary["oracle"] = report;
    }

    for (const auto& [name, bytes] : files) {
        write_file(dir / name, bytes, overwrite);
        m.checksums[name] = sha256_hex(bytes);
    }
    m.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_file(manifest_path, to_json(m).dump(1) + "\n", overwrite);
    return m;
}

} // namespace dtls
