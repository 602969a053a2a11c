#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "fmopto/dynamics.hpp"
#include "fmopto/errors.hpp"
#include "fmopto/harness/runner.hpp"
#include "fmopto/model.hpp"
#include "fmopto/observables.hpp"
#include "fmopto/sidebands.hpp"
#include "fmopto/stability.hpp"

namespace py = pybind11;
using namespace fmopto;

namespace {

std::string verdict_name(const StabilityVerdict& v) { return std::string(to_string(v.verdict)); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Frequency-modulated linearized optomechanics";
  m.attr("__version__") = harness::version();

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<StepPolicyError>(m, "StepPolicyError", base.ptr());
  py::register_exception<ConvergenceError>(m, "ConvergenceError", base.ptr());
  py::register_exception<DivergenceError>(m, "DivergenceError", base.ptr());
  py::register_exception<SolverError>(m, "SolverError", base.ptr());
  py::register_exception<UnphysicalError>(m, "UnphysicalError", base.ptr());
  py::register_exception<UnsettledError>(m, "UnsettledError", base.ptr());

  py::class_<ReducedParams>(m, "ReducedParams")
      .def(py::init<>())
      .def(py::init([](double delta_c_prime, std::complex<double> G, double kappa, double gamma, double xi, double nu,
                       double n_th) {
             ReducedParams r;
             r.delta_c_prime = delta_c_prime;
             r.set_G(G);
             r.kappa = kappa;
             r.gamma = gamma;
             r.xi = xi;
             r.nu = nu;
             r.n_th = n_th;
             r.validate();
             return r;
           }),
           py::arg("delta_c_prime"), py::arg("G"), py::arg("kappa"), py::arg("gamma"), py::arg("xi") = 0.0,
           py::arg("nu") = 1.0, py::arg("n_th") = 0.0)
      .def_readwrite("delta_c_prime", &ReducedParams::delta_c_prime)
      .def_property("G", &ReducedParams::G, &ReducedParams::set_G)
      .def_readwrite("kappa", &ReducedParams::kappa)
      .def_readwrite("gamma", &ReducedParams::gamma)
      .def_readwrite("xi", &ReducedParams::xi)
      .def_readwrite("nu", &ReducedParams::nu)
      .def_readwrite("n_th", &ReducedParams::n_th)
      .def("validate", &ReducedParams::validate)
      .def("__repr__", [](const ReducedParams& r) { return harness::to_json(r).dump(); });

  m.def("thermal_occupation", &thermal_occupation, py::arg("omega_m"), py::arg("temperature"));
  m.def("bessel_j", &bessel_j, py::arg("k"), py::arg("x"));
  m.def("nearest_resonant_index", &nearest_resonant_index, py::arg("delta_c_prime"), py::arg("nu"));

  m.def("build_drift", &build_drift, py::arg("params"), py::arg("t") = 0.0);
  m.def("build_diffusion", [](const ReducedParams& r) { return Eigen::Vector4d(build_diffusion(r).diag); });
  m.def("initial_covariance", &initial_covariance, py::arg("n_th"));
  m.def(
      "lyapunov_steady",
      [](const ReducedParams& r) { return lyapunov_steady(build_drift(r, 0.0), build_diffusion(r)); },
      py::arg("params"), "steady covariance of the unmodulated model");
  m.def("physicality_margin", &physicality_margin);
  m.def(
      "periodic_steady_state",
      [](const ReducedParams& r) {
        const PeriodicState ps = periodic_steady_state(r);
        return py::make_tuple(ps.times, ps.covariances, ps.floquet_radius);
      },
      py::arg("params"), "one period of the asymptotic periodic covariance");

  m.def("phonon_number", &phonon_number);
  m.def("eta_minus", &eta_minus);
  m.def("log_negativity", &log_negativity);
  m.def("two_mode_squeezed", &two_mode_squeezed, py::arg("r"));

  m.def("rwa_reduce", [](const ReducedParams& r) {
    const RwaModel model = rwa_reduce(r);
    return py::make_tuple(model.params, model.k0, model.weight);
  });

  m.def(
      "routh_hurwitz",
      [](const ReducedParams& r) {
        const auto v = routh_hurwitz(build_drift(r, 0.0));
        return py::make_tuple(verdict_name(v), v.margin);
      },
      py::arg("params"));
  m.def(
      "floquet",
      [](const ReducedParams& r, int steps_per_period) {
        StepPolicy step;
        step.steps_per_period = steps_per_period;
        const FloquetResult f = floquet_multipliers(r, step);
        std::vector<std::complex<double>> mu(f.multipliers.begin(), f.multipliers.end());
        return py::make_tuple(verdict_name(f.verdict), f.verdict.margin, mu);
      },
      py::arg("params"), py::arg("steps_per_period") = 128);
  m.def(
      "divergence_probe",
      [](const ReducedParams& r, double horizon_lifetimes) {
        ProbeOptions o;
        o.horizon_lifetimes = horizon_lifetimes;
        StabilityVerdict v;
        {
          py::gil_scoped_release release;
          v = divergence_probe(r, o);
        }
        return py::make_tuple(verdict_name(v), v.margin);
      },
      py::arg("params"), py::arg("horizon_lifetimes") = 50.0);
  m.def(
      "classify",
      [](const ReducedParams& r) {
        const auto v = classify(r);
        return py::make_tuple(verdict_name(v), v.margin, std::string(to_string(v.method)));
      },
      py::arg("params"));

  m.def(
      "simulate",
      [](const ReducedParams& r, double t_max_periods, int average_periods) {
        harness::SimulationSettings s;
        s.t_max_periods = t_max_periods;
        s.average_periods = average_periods;
        harness::PointResult p;
        {
          py::gil_scoped_release release;
          p = harness::simulate_point(r, s);
        }
        if (!p.error.empty()) throw Error(p.error);
        py::dict d;
        d["diverged"] = p.diverged;
        d["settled"] = p.settled;
        d["phonon_avg"] = p.phonon_avg;
        d["entanglement_avg"] = p.entanglement_avg;
        d["t_ss"] = p.phonon_cutoff.t_ss;
        d["min_physicality"] = p.min_physicality;
        return d;
      },
      py::arg("params"), py::arg("t_max_periods") = 3000.0, py::arg("average_periods") = 10,
      "full modulated run from the thermal state; returns period-averaged observables");

  m.def(
      "run_config",
      [](const std::string& command, const std::filesystem::path& config, const std::filesystem::path& out,
         std::vector<std::string> sweeps, int parallel) {
        harness::RunConfig c = harness::load_config(config);
        std::vector<harness::SweepSpec> specs;
        for (const auto& s : sweeps) specs.push_back(harness::parse_sweep(s));
        if (specs.empty()) specs = c.task.sweeps;
        py::gil_scoped_release release;
        if (command == "simulate") return harness::run_simulate(c, out);
        if (command == "sweep") {
          if (specs.size() != 1) throw ConfigError("sweep", "sweep needs exactly one sweep");
          return harness::run_sweep(c, specs[0], out, parallel);
        }
        if (command == "stability-map") {
          if (specs.size() != 2) throw ConfigError("sweep", "stability-map needs exactly two sweeps");
          return harness::run_stability_map(c, specs[0], specs[1], out, parallel);
        }
        if (command == "rwa-compare") return harness::run_rwa_compare(c, out, parallel);
        throw InvalidArgument("unknown command: " + command);
      },
      py::arg("command"), py::arg("config"), py::arg("out"), py::arg("sweeps") = std::vector<std::string>{},
      py::arg("parallel") = 1, "same as the CLI subcommands; returns the exit code");
}
