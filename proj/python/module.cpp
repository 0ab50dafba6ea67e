#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dtls/analytic.hpp"
#include "dtls/angular.hpp"
#include "dtls/config.hpp"
#include "dtls/errors.hpp"
#include "dtls/runner.hpp"
#include "dtls/spectra.hpp"

namespace py = pybind11;
using namespace dtls;

namespace {

Polarization to_polarization(const py::object& obj) {
    if (py::isinstance<py::str>(obj)) {
        auto name = obj.cast<std::string>();
        if (name == "sigma+") return Polarization::sigma_plus();
        if (name == "sigma-") return Polarization::sigma_minus();
        if (name == "x") return Polarization::linear_x();
        if (name == "y") return Polarization::linear_y();
        if (name == "z" || name == "pi") return Polarization::linear_z();
        throw std::invalid_argument("unknown polarization '" + name + "'");
    }
    return Polarization::from_cartesian(obj.cast<std::array<cplx, 3>>());
}

Baseline to_baseline(const std::string& s) {
    if (s == "none") return Baseline::none;
    if (s == "edges") return Baseline::edges;
    if (s == "wings") return Baseline::wings;
    throw std::invalid_argument("baseline must be none, edges or wings");
}

Polarity to_polarity(const std::string& s) {
    if (s == "auto") return Polarity::automatic;
    if (s == "peak") return Polarity::peak;
    if (s == "dip") return Polarity::dip;
    throw std::invalid_argument("polarity must be auto, peak or dip");
}

py::dict grid_to_dict(const SpectrumGrid& g) {
    py::dict d;
    d["delta"] = g.deltas;
    d["time"] = g.times;
    d["alpha_S"] = g.alpha_S;
    d["alpha_FWM"] = g.alpha_FWM;
    d["alpha_linear"] = g.alpha_linear;
    d["delta_alpha"] = g.delta_alpha;
    d["step"] = g.step;
    d["warnings"] = g.warnings;
    return d;
}

py::object json_to_py(const nlohmann::json& j) {
    return py::module_::import("json").attr("loads")(j.dump());
}

} // namespace

PYBIND11_MODULE(_dtls, m) {
    m.doc() = "Transient probe absorption of degenerate two-level transitions.";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);

    m.attr("__version__") = code_version();

    m.def("clebsch_gordan",
          py::overload_cast<double, double, double, double, double, double>(&clebsch_gordan),
          py::arg("f1"), py::arg("m1"), py::arg("f2"), py::arg("m2"), py::arg("f"), py::arg("m"));

    m.def("lowering_operators", [](double fg, double fe) {
        auto ops = lowering_operators(AtomicTransition::make(fg, fe));
        std::vector<Eigen::MatrixXcd> out;
        for (const auto& op : ops) out.push_back(op.m);
        return out;
    }, py::arg("Fg"), py::arg("Fe"), "Q^q_ge for q = -1, 0, +1; rows mg, columns me.");

    m.def("f_function", py::vectorize(&analytic::f_function), py::arg("x"), py::arg("y"), py::arg("tau"));

    py::class_<analytic::LambdaParams>(m, "LambdaParams")
        .def(py::init<>())
        .def_readwrite("omega1", &analytic::LambdaParams::omega1)
        .def_readwrite("omega2", &analytic::LambdaParams::omega2)
        .def_readwrite("gamma", &analytic::LambdaParams::gamma)
        .def_readwrite("gamma_ba", &analytic::LambdaParams::gamma_ba)
        .def_readwrite("gamma_bc", &analytic::LambdaParams::gamma_bc)
        .def_readwrite("delta", &analytic::LambdaParams::delta)
        .def_readwrite("scale_K", &analytic::LambdaParams::scale_K)
        .def_property_readonly("beta", &analytic::LambdaParams::beta);

    py::class_<analytic::NParams>(m, "NParams")
        .def(py::init<>())
        .def_readwrite("omega1", &analytic::NParams::omega1)
        .def_readwrite("omega2", &analytic::NParams::omega2)
        .def_readwrite("gamma", &analytic::NParams::gamma)
        .def_readwrite("delta", &analytic::NParams::delta)
        .def_readwrite("A", &analytic::NParams::A)
        .def_readwrite("B", &analytic::NParams::B)
        .def_readwrite("scale_Kprime", &analytic::NParams::scale_Kprime)
        .def_property_readonly("beta", &analytic::NParams::beta)
        .def_property_readonly("beta_prime", &analytic::NParams::beta_prime);

    m.def("lambda_nonlinear_absorption", &analytic::lambda_nonlinear_absorption, py::arg("params"), py::arg("t"));
    m.def("lambda_steady_absorption", [](const analytic::LambdaParams& p) {
        auto s = analytic::lambda_steady_absorption(p);
        return py::make_tuple(s.absorption, s.fwhm_delta);
    }, py::arg("params"));
    m.def("lambda_exact_nonlinear_absorption", [](const analytic::LambdaParams& p, double horizon, double step) {
        auto r = analytic::lambda_exact_nonlinear_absorption(p, horizon, {step, 0.0});
        return py::make_tuple(r.times, r.delta_alpha);
    }, py::arg("params"), py::arg("horizon"), py::arg("step") = 0.0);
    m.def("n_nonlinear_absorption", &analytic::n_nonlinear_absorption, py::arg("params"), py::arg("t"));
    m.def("n_steady_absorption", &analytic::n_steady_absorption, py::arg("params"));

    m.def("scan",
          [](double fg, double fe, cplx pump_rabi, const py::object& pump_pol, double pump_detuning, double turn_on_time,
             cplx probe_rabi, const py::object& probe_pol, std::vector<double> deltas, std::vector<double> times,
             double larmor_g, double larmor_e, bool pump_preconditioned, double step, int threads, bool include_fwm) {
              ScanConfig cfg;
              cfg.transition = AtomicTransition::make(fg, fe);
              cfg.pump = {pump_rabi, to_polarization(pump_pol), pump_detuning, turn_on_time};
              cfg.probe = {probe_rabi, to_polarization(probe_pol), 0.0, 0.0};
              cfg.zeeman = {larmor_g, larmor_e};
              cfg.deltas = std::move(deltas);
              cfg.times = std::move(times);
              cfg.turn_on = pump_preconditioned ? TurnOn::pump_preconditioned : TurnOn::simultaneous;
              cfg.step = step;
              cfg.threads = threads;
              cfg.include_fwm = include_fwm;
              SpectrumGrid g;
              {
                  py::gil_scoped_release release;
                  g = scan(cfg);
              }
              return grid_to_dict(g);
          },
          py::arg("Fg"), py::arg("Fe"), py::kw_only(), py::arg("pump_rabi"), py::arg("pump_pol") = "x",
          py::arg("pump_detuning") = 0.0, py::arg("turn_on_time") = 0.0, py::arg("probe_rabi") = cplx{0.02, 0.0},
          py::arg("probe_pol") = "y", py::arg("deltas"), py::arg("times"), py::arg("larmor_g") = 0.0,
          py::arg("larmor_e") = 0.0, py::arg("pump_preconditioned") = false, py::arg("step") = 0.0,
          py::arg("threads") = 1, py::arg("include_fwm") = false,
          "First-order (delta, t) scan. Arrays are indexed [delta, time].");

    m.def("fwhm",
          [](std::vector<double> delta, std::vector<double> values, const std::string& baseline,
             double expected_width, double wing_factor, const std::string& polarity) {
              FwhmOptions o{to_baseline(baseline), expected_width, wing_factor, to_polarity(polarity)};
              auto r = fwhm(delta, values, o);
              py::dict d;
              d["status"] = to_string(r.status);
              d["peak_value"] = r.peak_value;
              d["peak_delta"] = r.peak_delta;
              d["fwhm"] = r.fwhm;
              d["baseline"] = r.baseline;
              d["lorentzian_score"] = r.lorentzian_score;
              return d;
          },
          py::arg("delta"), py::arg("values"), py::arg("baseline") = "none", py::arg("expected_width") = 0.0,
          py::arg("wing_factor") = 10.0, py::arg("polarity") = "auto");

    m.def("parse_config", [](const std::string& text) { return json_to_py(to_json(parse_config(text))); },
          py::arg("text"), "Validates a YAML/JSON run configuration and returns the normalized echo.");
    m.def("compute", [](const std::string& text) {
        auto cfg = parse_config(text);
        SpectrumGrid g;
        {
            py::gil_scoped_release release;
            g = compute_grid(cfg);
        }
        return grid_to_dict(g);
    }, py::arg("text"), "Computes the grid of a configuration without writing files.");
    m.def("run", [](const std::string& text, bool overwrite) {
        auto cfg = parse_config(text);
        RunManifest man;
        {
            py::gil_scoped_release release;
            man = run(cfg, overwrite);
        }
        return json_to_py(to_json(man));
    }, py::arg("text"), py::arg("overwrite") = false, "Executes a configuration and returns its manifest.");
}
