#include "dtls/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "dtls/errors.hpp"

namespace dtls {

namespace {

std::string join(const std::string& base, const std::string& key) { return base.empty() ? key : base + "." + key; }

void require_map(const YAML::Node& n, const std::string& path) {
    if (!n.IsMap()) throw ConfigError(path, "expected a mapping");
}

void check_keys(const YAML::Node& n, const std::string& path, std::initializer_list<const char*> allowed) {
    require_map(n, path);
    for (const auto& kv : n) {
        const auto key = kv.first.as<std::string>();
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
            throw ConfigError(join(path, key), "unknown key");
        }
    }
}

double as_double(const YAML::Node& n, const std::string& path) {
    if (!n.IsScalar()) throw ConfigError(path, "expected a number");
    try {
        const double v = n.as<double>();
        if (!std::isfinite(v)) throw ConfigError(path, "must be finite");
        return v;
    } catch (const YAML::BadConversion&) {
        throw ConfigError(path, "expected a number");
    }
}

int as_int(const YAML::Node& n, const std::string& path) {
    if (!n.IsScalar()) throw ConfigError(path, "expected an integer");
    try {
        return n.as<int>();
    } catch (const YAML::BadConversion&) {
        throw ConfigError(path, "expected an integer");
    }
}

bool as_bool(const YAML::Node& n, const std::string& path) {
    if (!n.IsScalar()) throw ConfigError(path, "expected true or false");
    try {
        return n.as<bool>();
    } catch (const YAML::BadConversion&) {
        throw ConfigError(path, "expected true or false");
    }
}

std::string as_string(const YAML::Node& n, const std::string& path) {
    if (!n.IsScalar()) throw ConfigError(path, "expected a string");
    return n.as<std::string>();
}

// A number or a [re, im] pair.
cplx as_complex(const YAML::Node& n, const std::string& path) {
    if (n.IsSequence()) {
        if (n.size() != 2) throw ConfigError(path, "complex values are written [re, im]");
        return {as_double(n[0], path + "[0]"), as_double(n[1], path + "[1]")};
    }
    return {as_double(n, path), 0.0};
}

std::array<cplx, 3> as_triple(const YAML::Node& n, const std::string& path) {
    if (!n.IsSequence() || n.size() != 3) throw ConfigError(path, "expected three components");
    std::array<cplx, 3> out;
    for (std::size_t i = 0; i < 3; ++i) out[i] = as_complex(n[i], path + "[" + std::to_string(i) + "]");
    return out;
}

Polarization as_polarization(const YAML::Node& n, const std::string& path) {
    try {
        if (n.IsScalar()) {
            const auto s = n.as<std::string>();
            if (s == "x") return Polarization::linear_x();
            if (s == "y") return Polarization::linear_y();
            if (s == "z") return Polarization::linear_z();
            if (s == "sigma+") return Polarization::sigma_plus();
            if (s == "sigma-") return Polarization::sigma_minus();
            throw ConfigError(path, "unknown polarization '" + s + "' (x, y, z, sigma+, sigma-)");
        }
        check_keys(n, path, {"spherical", "cartesian"});
        if (n.size() != 1) throw ConfigError(path, "give exactly one of spherical or cartesian");
        if (n["spherical"]) return Polarization::from_spherical(as_triple(n["spherical"], join(path, "spherical")));
        return Polarization::from_cartesian(as_triple(n["cartesian"], join(path, "cartesian")));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(path, e.what());
    }
}

FieldSpec as_field(const YAML::Node& n, const std::string& path) {
    check_keys(n, path, {"rabi", "polarization", "detuning", "turn_on_time"});
    FieldSpec f;
    if (n["rabi"]) f.rabi_amplitude = as_complex(n["rabi"], join(path, "rabi"));
    if (n["polarization"]) f.pol = as_polarization(n["polarization"], join(path, "polarization"));
    if (n["detuning"]) f.detuning = as_double(n["detuning"], join(path, "detuning"));
    if (n["turn_on_time"]) f.turn_on_time = as_double(n["turn_on_time"], join(path, "turn_on_time"));
    return f;
}

Grid as_grid(const YAML::Node& n, const std::string& path, bool with_min) {
    if (with_min) {
        check_keys(n, path, {"min", "max", "count", "values"});
    } else {
        check_keys(n, path, {"max", "count", "values"});
    }
    Grid g;
    if (n["values"]) {
        if (n["min"] || n["max"] || n["count"]) throw ConfigError(path, "use either values or a range, not both");
        const auto& v = n["values"];
        if (!v.IsSequence() || v.size() == 0) throw ConfigError(join(path, "values"), "expected a non-empty list");
        for (std::size_t i = 0; i < v.size(); ++i) {
            g.values.push_back(as_double(v[i], join(path, "values") + "[" + std::to_string(i) + "]"));
        }
        for (std::size_t i = 1; i < g.values.size(); ++i) {
            if (!(g.values[i] > g.values[i - 1])) throw ConfigError(join(path, "values"), "must be strictly increasing");
        }
        return g;
    }
    if (!n["max"] || !n["count"]) throw ConfigError(path, "needs max and count (or values)");
    g.max = as_double(n["max"], join(path, "max"));
    if (with_min) {
        if (!n["min"]) throw ConfigError(path, "needs min");
        g.min = as_double(n["min"], join(path, "min"));
    }
    g.count = as_int(n["count"], join(path, "count"));
    if (g.count < 1) throw ConfigError(join(path, "count"), "must be >= 1");
    if (g.count > 1 && !(g.max > g.min)) throw ConfigError(join(path, "max"), "must exceed min");
    return g;
}

void validate(const RunConfig& c) {
    try {
        c.transition().validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(c.gamma > 0.0 ? "transition" : "transition.gamma", e.what());
    }
    for (const auto& [name, f] : {std::pair<const char*, const FieldSpec*>{"pump", &c.pump}, {"probe", &c.probe}}) {
        try {
            validate_field(*f, c.gamma, name);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string(name) + ".rabi", e.what());
        }
    }
    if (c.pump.turn_on_time > 0.0) throw ConfigError("pump.turn_on_time", "must be <= 0 (the probe defines t = 0)");
    if (c.probe.turn_on_time != 0.0) throw ConfigError("probe.turn_on_time", "the probe is switched on at t = 0");
    for (double t : c.times()) {
        if (t < 0.0) throw ConfigError("time", "times must be >= 0");
    }
    if (c.time.values.empty() && c.time.count > 1 && !(c.time.max > 0.0)) throw ConfigError("time.max", "must be > 0");
    if (c.step < 0.0) throw ConfigError("step", "must be >= 0");
    if (c.threads < 1) throw ConfigError("threads", "must be >= 1");
    if (c.gamma_mhz && !(*c.gamma_mhz > 0.0)) throw ConfigError("gamma_mhz", "must be > 0");
    if (std::abs(c.lambda_gamma_ba + c.lambda_gamma_bc - c.gamma) > 1e-12 * c.gamma ||
        c.lambda_gamma_ba < 0.0 || c.lambda_gamma_bc < 0.0) {
        throw ConfigError("lambda.gamma_ba", "gamma_ba and gamma_bc must be >= 0 and add up to gamma");
    }
    if (!(c.scale_K > 0.0)) throw ConfigError("lambda.scale_K", "must be > 0");
    if (!(c.scale_Kprime > 0.0)) throw ConfigError("n_system.scale_Kprime", "must be > 0");
    if (std::abs(std::norm(c.n_A) + std::norm(c.n_B) - 1.0) > 1e-12) {
        throw ConfigError("n_system.A", "|A|^2 + |B|^2 must equal 1");
    }
    if (!(c.f_x > 0.0)) throw ConfigError("f_function.x", "must be > 0");
    if (!(c.oracle_tolerance > 0.0)) throw ConfigError("oracle.tolerance", "must be > 0");
    const bool analytic = c.mode == Mode::analytic_lambda || c.mode == Mode::analytic_n;
    if (analytic && (c.pump.rabi_amplitude.imag() != 0.0 || c.pump.rabi_amplitude.real() < 0.0)) {
        throw ConfigError("pump.rabi", "analytic models take a real, non-negative pump amplitude");
    }
    if (analytic && c.pump.detuning != 0.0) throw ConfigError("pump.detuning", "analytic models assume a resonant pump");
    if (c.prefix.empty() || c.prefix.find('/') != std::string::npos) throw ConfigError("output.prefix", "must be a plain file name");
}

nlohmann::json complex_json(cplx v) { return nlohmann::json::array({v.real(), v.imag()}); }

nlohmann::json field_json(const FieldSpec& f) {
    nlohmann::json pol = nlohmann::json::array();
    for (const auto& c : f.pol.components()) pol.push_back(complex_json(c));
    return {{"rabi", complex_json(f.rabi_amplitude)},
            {"polarization", {{"spherical", pol}}},
            {"detuning", f.detuning},
            {"turn_on_time", f.turn_on_time}};
}

nlohmann::json grid_json(const Grid& g, bool with_min) {
    if (!g.values.empty()) return {{"values", g.values}};
    nlohmann::json j = {{"max", g.max}, {"count", g.count}};
    if (with_min) j["min"] = g.min;
    return j;
}

const char* format_name(OutputFormat f) {
    switch (f) {
    case OutputFormat::csv: return "csv";
    case OutputFormat::json: return "json";
    case OutputFormat::both: return "both";
    }
    return "csv";
}

} // namespace

const char* to_string(Mode m) {
    switch (m) {
    case Mode::f_function: return "f_function";
    case Mode::analytic_lambda: return "analytic_lambda";
    case Mode::analytic_n: return "analytic_n";
    case Mode::dtls_scan: return "dtls_scan";
    case Mode::dtls_trace: return "dtls_trace";
    case Mode::oracle_compare: return "oracle_compare";
    }
    return "dtls_scan";
}

Mode mode_from_string(const std::string& name, const std::string& key_path) {
    for (Mode m : {Mode::f_function, Mode::analytic_lambda, Mode::analytic_n, Mode::dtls_scan, Mode::dtls_trace,
                   Mode::oracle_compare}) {
        if (name == to_string(m)) return m;
    }
    throw ConfigError(key_path, "unknown mode '" + name + "'");
}

std::vector<double> Grid::points() const {
    if (!values.empty()) return values;
    if (count == 1) return {max};
    std::vector<double> out(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = min + (max - min) * i / (count - 1);
    return out;
}

AtomicTransition RunConfig::transition() const { return AtomicTransition::make(Fg, Fe, gamma, g_g, g_e); }

std::vector<double> RunConfig::times() const {
    if (!time.values.empty()) return time.values;
    Grid g = time;
    g.min = 0.0;
    return g.points();
}

analytic::LambdaParams RunConfig::lambda_params(double d) const {
    analytic::LambdaParams p;
    p.omega1 = pump.rabi_amplitude.real();
    p.omega2 = probe.rabi_amplitude;
    p.gamma = gamma;
    p.gamma_ba = lambda_gamma_ba;
    p.gamma_bc = lambda_gamma_bc;
    p.delta = d;
    p.scale_K = scale_K;
    return p;
}

analytic::NParams RunConfig::n_params(double d) const {
    analytic::NParams p;
    p.omega1 = pump.rabi_amplitude.real();
    p.omega2 = probe.rabi_amplitude;
    p.gamma = gamma;
    p.delta = d;
    p.A = n_A;
    p.B = n_B;
    p.scale_Kprime = scale_Kprime;
    return p;
}

RunConfig parse_config(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ConfigError("", std::string("malformed configuration: ") + e.what());
    }
    check_keys(root, "",
               {"mode", "transition", "pump", "probe", "zeeman", "delta", "time", "turn_on", "step", "threads",
                "include_fwm", "flip_axis", "gamma_mhz", "lambda", "n_system", "f_function", "oracle", "output"});

    RunConfig c;
    // Defaults that differ from the plain struct: lin-perp-lin fields.
    c.pump.pol = Polarization::linear_x();
    c.probe.pol = Polarization::linear_y();
    c.probe.rabi_amplitude = 0.02;
    c.delta = Grid{{}, -0.2, 0.2, 81};
    c.time = Grid{{}, 0.0, 300.0, 601};

    if (root["mode"]) c.mode = mode_from_string(as_string(root["mode"], "mode"));
    if (const auto t = root["transition"]) {
        check_keys(t, "transition", {"Fg", "Fe", "gamma", "g_g", "g_e"});
        if (t["Fg"]) c.Fg = as_double(t["Fg"], "transition.Fg");
        if (t["Fe"]) c.Fe = as_double(t["Fe"], "transition.Fe");
        if (t["gamma"]) c.gamma = as_double(t["gamma"], "transition.gamma");
        if (t["g_g"]) c.g_g = as_double(t["g_g"], "transition.g_g");
        if (t["g_e"]) c.g_e = as_double(t["g_e"], "transition.g_e");
        for (const auto& [key, v] : {std::pair<const char*, double>{"Fg", c.Fg}, {"Fe", c.Fe}}) {
            try {
                HalfInt::from_double(v);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(std::string("transition.") + key, e.what());
            }
            if (v < 0.0) throw ConfigError(std::string("transition.") + key, "must be >= 0");
        }
        if (!(c.gamma > 0.0)) throw ConfigError("transition.gamma", "must be > 0");
    }
    if (root["pump"]) c.pump = as_field(root["pump"], "pump");
    if (root["probe"]) {
        // Unspecified probe entries keep the defaults above.
        const FieldSpec parsed = as_field(root["probe"], "probe");
        const auto& p = root["probe"];
        if (p["rabi"]) c.probe.rabi_amplitude = parsed.rabi_amplitude;
        if (p["polarization"]) c.probe.pol = parsed.pol;
        if (p["detuning"]) c.probe.detuning = parsed.detuning;
        if (p["turn_on_time"]) c.probe.turn_on_time = parsed.turn_on_time;
    }
    if (const auto z = root["zeeman"]) {
        check_keys(z, "zeeman", {"larmor_g", "larmor_e"});
        if (z["larmor_g"]) c.zeeman.larmor_g = as_double(z["larmor_g"], "zeeman.larmor_g");
        if (z["larmor_e"]) c.zeeman.larmor_e = as_double(z["larmor_e"], "zeeman.larmor_e");
    }
    if (root["delta"]) c.delta = as_grid(root["delta"], "delta", true);
    if (root["time"]) c.time = as_grid(root["time"], "time", false);
    if (root["turn_on"]) {
        const auto s = as_string(root["turn_on"], "turn_on");
        if (s == "simultaneous") {
            c.turn_on = TurnOn::simultaneous;
        } else if (s == "pump_preconditioned") {
            c.turn_on = TurnOn::pump_preconditioned;
        } else {
            throw ConfigError("turn_on", "expected simultaneous or pump_preconditioned");
        }
    }
    if (root["step"]) c.step = as_double(root["step"], "step");
    if (root["threads"]) c.threads = as_int(root["threads"], "threads");
    if (root["include_fwm"]) c.include_fwm = as_bool(root["include_fwm"], "include_fwm");
    if (root["flip_axis"]) c.flip_axis = as_bool(root["flip_axis"], "flip_axis");
    if (root["gamma_mhz"]) c.gamma_mhz = as_double(root["gamma_mhz"], "gamma_mhz");
    if (const auto l = root["lambda"]) {
        check_keys(l, "lambda", {"gamma_ba", "gamma_bc", "scale_K"});
        c.lambda_gamma_ba = 0.5 * c.gamma;
        c.lambda_gamma_bc = 0.5 * c.gamma;
        if (l["gamma_ba"]) c.lambda_gamma_ba = as_double(l["gamma_ba"], "lambda.gamma_ba");
        if (l["gamma_bc"]) c.lambda_gamma_bc = as_double(l["gamma_bc"], "lambda.gamma_bc");
        if (l["scale_K"]) c.scale_K = as_double(l["scale_K"], "lambda.scale_K");
    } else {
        c.lambda_gamma_ba = 0.5 * c.gamma;
        c.lambda_gamma_bc = 0.5 * c.gamma;
    }
    if (const auto n = root["n_system"]) {
        check_keys(n, "n_system", {"A", "B", "scale_Kprime"});
        if (n["A"]) c.n_A = as_complex(n["A"], "n_system.A");
        if (n["B"]) {
            c.n_B = as_complex(n["B"], "n_system.B");
        } else {
            c.n_B = std::sqrt(std::max(0.0, 1.0 - std::norm(c.n_A)));
        }
        if (n["scale_Kprime"]) c.scale_Kprime = as_double(n["scale_Kprime"], "n_system.scale_Kprime");
    }
    if (const auto f = root["f_function"]) {
        check_keys(f, "f_function", {"x"});
        if (f["x"]) c.f_x = as_double(f["x"], "f_function.x");
    }
    if (const auto o = root["oracle"]) {
        check_keys(o, "oracle", {"check_scaling", "tolerance"});
        if (o["check_scaling"]) c.oracle_check_scaling = as_bool(o["check_scaling"], "oracle.check_scaling");
        if (o["tolerance"]) c.oracle_tolerance = as_double(o["tolerance"], "oracle.tolerance");
    }
    if (const auto o = root["output"]) {
        check_keys(o, "output", {"dir", "format", "prefix"});
        if (o["dir"]) c.output_dir = as_string(o["dir"], "output.dir");
        if (o["prefix"]) c.prefix = as_string(o["prefix"], "output.prefix");
        if (o["format"]) {
            const auto s = as_string(o["format"], "output.format");
            if (s == "csv") {
                c.format = OutputFormat::csv;
            } else if (s == "json") {
                c.format = OutputFormat::json;
            } else if (s == "both") {
                c.format = OutputFormat::both;
            } else {
                throw ConfigError("output.format", "expected csv, json or both");
            }
        }
    }
    validate(c);
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read configuration file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

nlohmann::json to_json(const RunConfig& c) {
    nlohmann::json j;
    j["mode"] = to_string(c.mode);
    j["transition"] = {{"Fg", c.Fg}, {"Fe", c.Fe}, {"gamma", c.gamma}, {"g_g", c.g_g}, {"g_e", c.g_e}};
    j["pump"] = field_json(c.pump);
    j["probe"] = field_json(c.probe);
    j["zeeman"] = {{"larmor_g", c.zeeman.larmor_g}, {"larmor_e", c.zeeman.larmor_e}};
    j["delta"] = grid_json(c.delta, true);
    j["time"] = grid_json(c.time, false);
    j["turn_on"] = c.turn_on == TurnOn::simultaneous ? "simultaneous" : "pump_preconditioned";
    j["step"] = c.step;
    j["threads"] = c.threads;
    j["include_fwm"] = c.include_fwm;
    j["flip_axis"] = c.flip_axis;
    if (c.gamma_mhz) j["gamma_mhz"] = *c.gamma_mhz;
    j["lambda"] = {{"gamma_ba", c.lambda_gamma_ba}, {"gamma_bc", c.lambda_gamma_bc}, {"scale_K", c.scale_K}};
    j["n_system"] = {{"A", complex_json(c.n_A)}, {"B", complex_json(c.n_B)}, {"scale_Kprime", c.scale_Kprime}};
    j["f_function"] = {{"x", c.f_x}};
    j["oracle"] = {{"check_scaling", c.oracle_check_scaling}, {"tolerance", c.oracle_tolerance}};
    j["output"] = {{"dir", c.output_dir}, {"format", format_name(c.format)}, {"prefix", c.prefix}};
    return j;
}

} // namespace dtls
