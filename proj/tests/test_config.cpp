#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "dtls/config.hpp"
#include "dtls/errors.hpp"
#include "dtls/runner.hpp"

using namespace dtls;
namespace fs = std::filesystem;

namespace {

const char* kMinimalEit = R"(
transition: {Fg: 1, Fe: 0}
pump: {rabi: 0.2, polarization: x}
probe: {polarization: y}
)";

std::string key_of_error(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.key_path();
    }
    return "<no error>";
}

fs::path fresh_dir(const std::string& name) {
    const fs::path p = fs::path(DTLS_TEST_TMP) / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

SpectrumGrid two_by_two() {
    SpectrumGrid g;
    g.deltas = {-0.1, 0.1};
    g.times = {0.0, 5.0};
    g.alpha_S = Eigen::MatrixXd::Constant(2, 2, 1.5e-4);
    g.alpha_FWM = Eigen::MatrixXd::Zero(2, 2);
    g.alpha_linear = Eigen::MatrixXd::Constant(2, 2, 1e-4);
    g.delta_alpha = g.alpha_S - g.alpha_linear;
    g.delta_alpha(0, 0) = -0.0;
    g.alpha_linear_steady = {1e-4, 1e-4};
    return g;
}

} // namespace

TEST_CASE("minimal EIT config fills documented defaults") {
    const RunConfig c = parse_config(kMinimalEit);
    CHECK(c.mode == Mode::dtls_scan);
    CHECK(c.turn_on == TurnOn::simultaneous);
    CHECK(c.pump.rabi_amplitude == cplx(0.2, 0.0));
    CHECK(c.pump.pol == Polarization::linear_x());
    CHECK(c.probe.pol == Polarization::linear_y());
    CHECK(c.probe.rabi_amplitude == cplx(0.02, 0.0));
    CHECK(c.gamma == 1.0);
    CHECK(c.deltas().size() == 81);
    CHECK(c.deltas().front() == doctest::Approx(-0.2));
    CHECK(c.times().size() == 601);
    CHECK(c.times().back() == doctest::Approx(300.0));
    CHECK(c.threads == 1);
    CHECK(c.step == 0.0);
    CHECK(c.format == OutputFormat::csv);
    CHECK(c.lambda_gamma_ba + c.lambda_gamma_bc == doctest::Approx(c.gamma));
}

TEST_CASE("validation errors name the key") {
    CHECK(key_of_error("transition: {gamma: -1}") == "transition.gamma");
    CHECK(key_of_error("pump: {rabi: 2.0}") == "pump.rabi");
    CHECK(key_of_error("bogus: 1") == "bogus");
    CHECK(key_of_error("pump: {colour: red}") == "pump.colour");
    CHECK(key_of_error("delta: {min: 0.1, max: -0.1, count: 5}") == "delta.max");
    CHECK(key_of_error("delta: {values: [0.1, 0.0]}") == "delta.values");
    CHECK(key_of_error("time: {max: 10, count: 0}") == "time.count");
    CHECK(key_of_error("threads: 0") == "threads");
    CHECK(key_of_error("mode: sideways") == "mode");
    CHECK(key_of_error("pump: {polarization: {cartesian: [0, 0, 0]}}") == "pump.polarization");
    CHECK(key_of_error("n_system: {A: 0.5, B: 0.5}") == "n_system.A");
    CHECK(parse_config("n_system: {A: 0.6}").n_B == cplx(0.8, 0.0));
    CHECK(key_of_error("pump: {turn_on_time: 3}") == "pump.turn_on_time");
    CHECK(key_of_error("threads: two") == "threads");
    CHECK(key_of_error("transition: {Fg: 1, Fe: 3}").rfind("transition", 0) == 0);
    CHECK_THROWS_AS(load_config("/nonexistent/run.cfg"), IoError);
}

TEST_CASE("config echo round-trips") {
    const char* text = R"(
mode: oracle_compare
transition: {Fg: 1.5, Fe: 2.5, gamma: 1, g_g: 0.5, g_e: 0.2}
pump: {rabi: [0.1, 0.05], polarization: {cartesian: [1, [0, 1], 0]}, detuning: 0.01, turn_on_time: -20}
probe: {rabi: 0.001, polarization: sigma-}
zeeman: {larmor_g: 0.3, larmor_e: -0.1}
delta: {values: [-0.05, 0.0, 0.02]}
time: {max: 123.5, count: 17}
turn_on: pump_preconditioned
step: 0.01
threads: 3
include_fwm: true
flip_axis: true
gamma_mhz: 6.07
lambda: {gamma_ba: 0.3, gamma_bc: 0.7, scale_K: 2}
n_system: {A: [0.6, 0], B: [0, 0.8], scale_Kprime: 0.5}
f_function: {x: 0.03}
oracle: {check_scaling: false, tolerance: 0.02}
output: {dir: somewhere, prefix: abc, format: both}
)";
    const RunConfig a = parse_config(text);
    const RunConfig b = parse_config(to_json(a).dump());
    CHECK(a == b);
    CHECK(to_json(a) == to_json(b));
    const RunConfig d = parse_config(to_json(parse_config(kMinimalEit)).dump());
    CHECK(d == parse_config(kMinimalEit));
}

TEST_CASE("CSV export") {
    RunConfig cfg = parse_config(kMinimalEit);
    const auto g = two_by_two();
    const std::string csv = grid_to_csv(g, cfg);
    std::istringstream in(csv);
    std::vector<std::string> lines;
    for (std::string l; std::getline(in, l);) lines.push_back(l);
    REQUIRE(lines.size() == 5);
    CHECK(lines[0] == "delta,time,alpha_S,alpha_FWM,delta_alpha");
    CHECK(lines[1] == "-0.1,0,0.00015,0,0");
    CHECK(csv == grid_to_csv(g, cfg));

    cfg.flip_axis = true;
    cfg.gamma_mhz = 6.0;
    std::istringstream flipped(grid_to_csv(g, cfg));
    std::string l;
    std::getline(flipped, l);
    std::getline(flipped, l);
    std::getline(flipped, l);
    CHECK(l == "-0.6,0.132629119243,0.00015,0,-5e-05");
}

TEST_CASE("JSON export carries the configuration") {
    const RunConfig cfg = parse_config(kMinimalEit);
    const auto j = grid_to_json(two_by_two(), cfg);
    CHECK(j.at("metadata").at("config") == to_json(cfg));
    CHECK(j.at("metadata").at("version") == code_version());
    CHECK(j.at("delta").size() == 2);
    CHECK(j.at("delta_alpha").size() == 2);
}

TEST_CASE("sha256") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("run: deterministic outputs and manifest protection") {
    const fs::path dir = fresh_dir("run");
    RunConfig cfg = parse_config(R"(
mode: dtls_scan
transition: {Fg: 1, Fe: 0}
pump: {rabi: 0.2, polarization: x}
probe: {rabi: 0.02, polarization: y}
delta: {min: -0.1, max: 0.1, count: 5}
time: {max: 40, count: 9}
output: {format: both, prefix: eit}
)");
    cfg.output_dir = (dir / "a").string();
    const RunManifest m1 = run(cfg);
    CHECK(m1.checksums.size() == 2);
    CHECK(fs::exists(dir / "a" / "eit.csv"));
    CHECK(fs::exists(dir / "a" / "eit.manifest.json"));
    CHECK(m1.step > 0.0);

    // The manifest is not replaced silently.
    const std::string before = slurp(dir / "a" / "eit.manifest.json");
    CHECK_THROWS_AS(run(cfg), IoError);
    CHECK(slurp(dir / "a" / "eit.manifest.json") == before);

    const RunManifest m2 = run(cfg, true);
    CHECK(m2.checksums == m1.checksums);
    CHECK(m1.checksums.at("eit.csv") == sha256_hex(slurp(dir / "a" / "eit.csv")));

    cfg.output_dir = (dir / "b").string();
    cfg.threads = 3;
    const RunManifest m3 = run(cfg);
    CHECK(m3.checksums.at("eit.csv") == m1.checksums.at("eit.csv"));

    const auto manifest = nlohmann::json::parse(before);
    CHECK(parse_config(manifest.at("config").dump()).delta == cfg.delta);
}

TEST_CASE("run: analytic modes") {
    const fs::path dir = fresh_dir("analytic");
    RunConfig cfg = parse_config(R"(
mode: f_function
delta: {min: -0.2, max: 0.2, count: 5}
time: {max: 50, count: 3}
f_function: {x: 0.02}
)");
    cfg.output_dir = dir.string();
    cfg.prefix = "f";
    run(cfg);
    const auto g = compute_grid(cfg);
    CHECK(g.delta_alpha(2, 0) == 0.0);
    CHECK(g.delta_alpha(2, 2) == doctest::Approx(63.2121).epsilon(1e-6));

    cfg.mode = Mode::analytic_lambda;
    cfg.pump.rabi_amplitude = 0.05;
    cfg.probe.rabi_amplitude = 1e-3;
    const auto l = compute_grid(cfg);
    CHECK(l.delta_alpha(2, 2) < 0.0);
    CHECK(l.delta_alpha(2, 0) == 0.0);

    cfg.mode = Mode::analytic_n;
    cfg.n_A = std::sqrt(0.5);
    cfg.n_B = std::sqrt(0.5);
    const auto n = compute_grid(cfg);
    CHECK(n.delta_alpha.allFinite());
}
