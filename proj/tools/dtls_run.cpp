// dtls-run <mode> --config FILE [--out DIR] [--format csv|json|both]
//          [--threads N] [--step H] [--overwrite]
//
// Exit codes: 0 success, 2 configuration error, 3 numeric failure, 4 I/O.
// Errors are reported on stderr as one JSON object.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dtls/config.hpp"
#include "dtls/errors.hpp"
#include "dtls/runner.hpp"

namespace {

int fail(int code, const char* kind, const std::string& message, const std::string& key = {}) {
    nlohmann::json err = {{"error", kind}, {"message", message}};
    if (!key.empty()) err["key"] = key;
    std::cerr << err.dump() << '\n';
    return code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Transient pump-probe spectra of degenerate two-level transitions"};
    app.require_subcommand(1);
    app.set_version_flag("--version", dtls::code_version());

    std::string config_path;
    std::optional<std::string> out_dir;
    std::optional<std::string> format;
    std::optional<int> threads;
    std::optional<double> step;
    bool overwrite = false;

    for (const char* name : {"f_function", "analytic_lambda", "analytic_n", "dtls_scan", "dtls_trace", "oracle_compare"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "run configuration (YAML or JSON)")->required();
        sub->add_option("--out", out_dir, "output directory (overrides output.dir)");
        sub->add_option("--format", format, "csv, json or both")->check(CLI::IsMember({"csv", "json", "both"}));
        sub->add_option("--threads", threads, "worker threads for delta scans")->check(CLI::PositiveNumber);
        sub->add_option("--step", step, "fixed integration step override")->check(CLI::NonNegativeNumber);
        sub->add_flag("--overwrite", overwrite, "replace existing outputs and manifest");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        dtls::RunConfig cfg = dtls::load_config(config_path);
        cfg.mode = dtls::mode_from_string(app.get_subcommands().front()->get_name());
        if (out_dir) cfg.output_dir = *out_dir;
        if (threads) cfg.threads = *threads;
        if (step) cfg.step = *step;
        if (format) {
            cfg.format = *format == "csv" ? dtls::OutputFormat::csv
                         : *format == "json" ? dtls::OutputFormat::json
                                              : dtls::OutputFormat::both;
        }
        const dtls::RunManifest m = dtls::run(cfg, overwrite);
        for (const auto& w : m.warnings) std::cerr << "warning: " << w << '\n';
        for (const auto& [file, sum] : m.checksums) std::cout << sum << "  " << file << '\n';
        return 0;
    } catch (const dtls::ConfigError& e) {
        return fail(2, "config", e.what(), e.key_path());
    } catch (const std::invalid_argument& e) {
        return fail(2, "config", e.what());
    } catch (const dtls::NumericError& e) {
        return fail(3, "numeric", e.what());
    } catch (const dtls::IoError& e) {
        return fail(4, "io", e.what());
    } catch (const std::exception& e) {
        return fail(3, "numeric", e.what());
    }
}
