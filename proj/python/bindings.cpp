#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "chiralloc/dynamics.hpp"
#include "chiralloc/ensemble.hpp"
#include "chiralloc/error.hpp"
#include "chiralloc/io.hpp"
#include "chiralloc/model.hpp"
#include "chiralloc/observables.hpp"
#include "chiralloc/oracles.hpp"
#include "chiralloc/spectral.hpp"

namespace py = pybind11;
using namespace chiralloc;

namespace {

py::dict trajectory_dict(const Trajectory& t) {
  py::dict d;
  d["times"] = t.times;
  d["amplitudes"] = t.amplitudes;
  d["populations"] = t.populations;
  d["total"] = t.total;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Chiral waveguide QED localization core";
  m.attr("__version__") = tool_version();

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError",
                                         PyExc_ArithmeticError);

  py::enum_<DisorderMode>(m, "DisorderMode")
      .value("PhaseFactor", DisorderMode::PhaseFactor)
      .value("OnsitePotential", DisorderMode::OnsitePotential);

  py::class_<SystemParams>(m, "SystemParams")
      .def(py::init([](int n_sites, double gamma, double directionality,
                       double xi, double w_bar, DisorderMode mode,
                       double gamma_nr, int initial_site) {
             SystemParams p;
             p.n_sites = n_sites;
             p.gamma = gamma;
             p.directionality = directionality;
             p.xi = xi;
             p.disorder_strength = w_bar;
             p.disorder_mode = mode;
             p.gamma_nr = gamma_nr;
             p.initial_site = initial_site;
             p.validate();
             return p;
           }),
           py::arg("n_sites") = 51, py::arg("gamma") = 1.0,
           py::arg("directionality") = 0.0, py::arg("xi") = 0.0,
           py::arg("w_bar") = 0.0,
           py::arg("disorder_mode") = DisorderMode::PhaseFactor,
           py::arg("gamma_nr") = 0.0, py::arg("initial_site") = 0)
      .def_readwrite("n_sites", &SystemParams::n_sites)
      .def_readwrite("gamma", &SystemParams::gamma)
      .def_readwrite("directionality", &SystemParams::directionality)
      .def_readwrite("xi", &SystemParams::xi)
      .def_readwrite("w_bar", &SystemParams::disorder_strength)
      .def_readwrite("disorder_mode", &SystemParams::disorder_mode)
      .def_readwrite("gamma_nr", &SystemParams::gamma_nr)
      .def_readwrite("initial_site", &SystemParams::initial_site)
      .def("start_site", &SystemParams::start_site);

  m.def("sample_disorder",
        [](const SystemParams& p, std::uint64_t seed) {
          return sample_disorder(p, seed).phases;
        },
        py::arg("params"), py::arg("seed"));

  m.def("coupling_matrix",
        [](const SystemParams& p, std::optional<std::vector<double>> phases) {
          DisorderRealization d = zero_disorder(p.n_sites);
          if (phases) d.phases = *phases;
          return build_coupling_matrix(p, d).entries();
        },
        py::arg("params"), py::arg("phases") = py::none(),
        "Dense generator M with da/dt = M a.");

  m.def("propagate",
        [](const SystemParams& p, double horizon, double stride,
           std::optional<std::vector<double>> phases) {
          DisorderRealization d = zero_disorder(p.n_sites);
          if (phases) d.phases = *phases;
          py::gil_scoped_release release;
          auto t = propagate(build_coupling_matrix(p, d), p.start_site(),
                             horizon, stride);
          py::gil_scoped_acquire acquire;
          return trajectory_dict(t);
        },
        py::arg("params"), py::arg("horizon"), py::arg("stride") = 1.0,
        py::arg("phases") = py::none());

  m.def("cascaded_solution",
        [](const SystemParams& p, std::vector<double> times,
           std::optional<std::vector<double>> phases) {
          DisorderRealization d = zero_disorder(p.n_sites);
          if (phases) d.phases = *phases;
          return trajectory_dict(cascaded_solution(p, d, times));
        },
        py::arg("params"), py::arg("times"), py::arg("phases") = py::none());

  m.def("run_ensemble",
        [](const SystemParams& p, int realizations, double horizon,
           double stride, std::uint64_t seed, int workers) {
          EnsembleOptions o;
          o.realizations = realizations;
          o.horizon = horizon;
          o.stride = stride;
          o.base_seed = seed;
          o.workers = workers;
          EnsembleResult r;
          {
            py::gil_scoped_release release;
            r = run_ensemble(p, o);
          }
          py::dict d;
          d["times"] = r.times;
          d["populations"] = r.avg_populations;
          d["total"] = r.avg_total;
          d["entropy_a"] = r.avg_entropy_a;
          d["entropy_b"] = r.avg_entropy_b;
          d["realizations"] = r.realization_count;
          d["seed"] = r.base_seed;
          return d;
        },
        py::arg("params"), py::arg("realizations") = 200,
        py::arg("horizon") = 1500.0, py::arg("stride") = 1.0,
        py::arg("seed") = 1, py::arg("workers") = 0);

  m.def("entropy",
        [](const Eigen::VectorXcd& a, int split) {
          const auto s = entropy_bipartite(a, split);
          return py::make_tuple(s.a, s.b);
        },
        py::arg("amplitudes"), py::arg("split"));

  m.def("entropy_partial_trace",
        [](const Eigen::VectorXcd& a, int split) {
          const auto s = entropy_partial_trace(a, split);
          return py::make_tuple(s.a, s.b);
        },
        py::arg("amplitudes"), py::arg("split"));

  m.def("localization_fit",
        [](std::vector<double> profile, int center) {
          const auto f = localization_fit(profile, center);
          py::dict d;
          d["ok"] = f.ok;
          d["failure"] = f.failure;
          d["n_l"] = f.n_l;
          d["zeta_l"] = f.zeta_l;
          d["r_squared"] = f.r_squared;
          return d;
        },
        py::arg("profile"), py::arg("center"));

  m.def("relative_participation_ratio",
        [](std::vector<double> avg, std::vector<double> ref) {
          return relative_participation_ratio(avg, ref);
        },
        py::arg("avg_profile"), py::arg("ref_profile"));

  m.def("eigenvalues",
        [](const Eigen::MatrixXcd& mat) { return eigenvalues(mat).values; },
        py::arg("matrix"));

  m.def("gap_statistics",
        [](const Eigen::VectorXcd& levels) {
          const auto g = gap_statistics(levels);
          return py::make_tuple(g.r_a, g.v_i);
        },
        py::arg("levels"), "Mean adjacent-gap ratio and its variance.");

  m.def("run_oracles", [] {
    py::list out;
    for (const auto& r : run_oracles()) {
      out.append(py::make_tuple(r.name, r.deviation, r.tolerance, r.pass));
    }
    return out;
  });
}
