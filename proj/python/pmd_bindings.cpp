#include "pmd/convergence.hpp"
#include "pmd/errors.hpp"
#include "pmd/model_store.hpp"
#include "pmd/rom.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <array>
#include <map>
#include <string>

namespace py = pybind11;
using namespace pybind11::literals;

namespace {

pmd::SnapshotMatrix make_snapshots(const Eigen::MatrixXd& data, double dt, double t0) {
  pmd::SnapshotMatrix s;
  s.data = data;
  s.dt = dt;
  s.t0 = t0;
  return s;
}

py::dict rate_to_dict(const pmd::RateEstimate& r) {
  return py::dict("experiment"_a = r.experiment, "sample_sizes"_a = r.sample_sizes,
                  "errors"_a = r.errors, "std_errors"_a = r.std_errors,
                  "fitted_slope"_a = r.fitted_slope, "theoretical_slope"_a = r.theoretical_slope,
                  "slope_ci"_a = r.slope_ci, "band"_a = r.band, "trials"_a = r.trials,
                  "passed"_a = r.pass());
}

}  // namespace

PYBIND11_MODULE(_pmd, m) {
  m.doc() = "Probabilistic manifold decomposition reduced-order models";

  static py::exception<pmd::Error> base(m, "PmdError", PyExc_RuntimeError);
  static std::map<pmd::ErrorKind, py::object> kinds;
  const std::array<std::pair<pmd::ErrorKind, const char*>, 11> names = {{
      {pmd::ErrorKind::Parse, "ParseError"},
      {pmd::ErrorKind::Data, "DataError"},
      {pmd::ErrorKind::Mode, "ModeError"},
      {pmd::ErrorKind::Shape, "ShapeError"},
      {pmd::ErrorKind::Numerical, "NumericalError"},
      {pmd::ErrorKind::Graph, "GraphError"},
      {pmd::ErrorKind::Extrapolation, "ExtrapolationError"},
      {pmd::ErrorKind::Io, "IoError"},
      {pmd::ErrorKind::Checksum, "ChecksumError"},
      {pmd::ErrorKind::Version, "VersionError"},
      {pmd::ErrorKind::Config, "ConfigError"},
  }};
  for (const auto& [kind, name] : names) {
    py::object cls = py::reinterpret_steal<py::object>(
        PyErr_NewException((std::string("pmd._pmd.") + name).c_str(), base.ptr(), nullptr));
    m.attr(name) = cls;
    kinds[kind] = cls;
  }
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const pmd::Error& e) {
      PyErr_SetString(kinds.at(e.kind()).ptr(), e.what());
    }
  });

  py::class_<pmd::PmdModel>(m, "Model")
      .def_readonly("dofs", &pmd::PmdModel::dofs)
      .def_readonly("steps", &pmd::PmdModel::steps)
      .def_readonly("dt", &pmd::PmdModel::dt)
      .def_readonly("t0", &pmd::PmdModel::t0)
      .def_readonly("knn_used", &pmd::PmdModel::knn_used)
      .def_readonly("manifold_degenerate", &pmd::PmdModel::manifold_degenerate)
      .def_property_readonly("linear_rank", &pmd::PmdModel::linear_rank)
      .def_property_readonly("manifold_rank", &pmd::PmdModel::manifold_rank)
      .def_property_readonly("config", [](const pmd::PmdModel& mdl) { return pmd::config_to_map(mdl.config); })
      .def_property_readonly("linear_spectrum", [](const pmd::PmdModel& mdl) { return mdl.linear.full_spectrum; })
      .def_property_readonly("manifold_spectrum",
                             [](const pmd::PmdModel& mdl) { return pmd::manifold_energy_spectrum(mdl.manifold); })
      .def_property_readonly("manifold_coords", [](const pmd::PmdModel& mdl) { return mdl.manifold.coords; })
      .def_property_readonly("input_sha256", [](const pmd::PmdModel& mdl) { return mdl.provenance.input_sha256; })
      .def("reconstruct", &pmd::reconstruct, "index"_a)
      .def("reconstruct_all", &pmd::reconstruct_all)
      .def("pod_reconstruct_all", &pmd::pod_reconstruct_all)
      .def("predict", [](const pmd::PmdModel& mdl, Eigen::Index steps) { return pmd::predict(mdl, steps); },
           "steps"_a)
      .def("pod_predict", &pmd::pod_predict, "steps"_a)
      .def("save", [](const pmd::PmdModel& mdl, const std::filesystem::path& dir) { pmd::save_model(mdl, dir); },
           "directory"_a);

  m.def(
      "fit",
      [](const Eigen::MatrixXd& data, const std::map<std::string, std::string>& config, double dt,
         double t0) { return pmd::fit(make_snapshots(data, dt, t0), pmd::config_from_map(config)); },
      "data"_a, "config"_a = std::map<std::string, std::string>{}, "dt"_a = 1.0, "t0"_a = 0.0,
      "Fit a model to an n x m snapshot matrix; config values use the key = value file names.");
  m.def("load", [](const std::filesystem::path& dir) { return pmd::load_model(dir); }, "directory"_a);
  m.def("default_config", [] { return pmd::config_to_map(pmd::PmdConfig{}); });

  m.def("pod_energy", &pmd::pod_energy, "spectrum"_a, "rank"_a);
  m.def("pmd_energy", &pmd::pmd_energy, "linear"_a, "manifold"_a, "rank"_a);
  m.def(
      "select_rank",
      [](const Eigen::VectorXd& linear, const Eigen::VectorXd& manifold, double target) {
        const pmd::RankSelection s = pmd::select_rank(linear, manifold, target);
        return py::make_tuple(s.rank, s.reached);
      },
      "linear"_a, "manifold"_a, "target"_a = 0.95);
  m.def(
      "relative_error",
      [](const Eigen::MatrixXd& truth, const Eigen::MatrixXd& approx) {
        return pmd::error_report(truth, approx).relative_frobenius;
      },
      "truth"_a, "approx"_a);

  m.def(
      "advecting_pulse",
      [](Eigen::Index n, Eigen::Index steps, double speed, double width, double dt) {
        return pmd::gen_advecting_pulse(n, steps, speed, width, dt).data;
      },
      "n"_a = 128, "m"_a = 160, "speed"_a = 0.01, "width"_a = 0.1, "dt"_a = 1.0);
  m.def(
      "linear_system",
      [](const Eigen::MatrixXd& dynamics, const Eigen::VectorXd& x0, const Eigen::MatrixXd& lift,
         Eigen::Index steps, double noise, std::uint64_t seed) {
        return pmd::gen_linear_system(dynamics, x0, lift, steps, noise, seed).data;
      },
      "dynamics"_a, "x0"_a, "lift"_a, "m"_a, "noise"_a = 0.0, "seed"_a = 0);

  m.def("experiment_names", &pmd::experiment_names);
  m.def(
      "run_experiment",
      [](const std::string& name, std::uint64_t seed) {
        py::list out;
        for (const auto& r : pmd::run_experiment(name, seed)) out.append(rate_to_dict(r));
        return out;
      },
      "name"_a, "seed"_a = 1);

  m.attr("__version__") = pmd::library_version();
}
