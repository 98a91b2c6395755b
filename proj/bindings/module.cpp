#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mmfg/config_io.hpp"
#include "mmfg/errors.hpp"
#include "mmfg/harness.hpp"
#include "mmfg/lq_model.hpp"
#include "mmfg/master_solver.hpp"
#include "mmfg/measures.hpp"
#include "mmfg/nash_solver.hpp"
#include "mmfg/simulator.hpp"

namespace py = pybind11;
using namespace mmfg;

PYBIND11_MODULE(_mmfg, m) {
  m.doc() =
      "Linear-quadratic major/minor mean field games: master and Nash-system "
      "solvers, particle simulation, and verification utilities.";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<BlowUpError>(m, "BlowUpError", PyExc_RuntimeError);

  py::class_<LqSpec>(m, "LqSpec")
      .def(py::init<>())
      .def_readwrite("d", &LqSpec::d)
      .def_readwrite("d0", &LqSpec::d0)
      .def_readwrite("T", &LqSpec::T)
      .def_readwrite("Q", &LqSpec::Q)
      .def_readwrite("A", &LqSpec::A)
      .def_readwrite("B", &LqSpec::B)
      .def_readwrite("b", &LqSpec::b)
      .def_readwrite("Q_T", &LqSpec::Q_T)
      .def_readwrite("A_T", &LqSpec::A_T)
      .def_readwrite("B_T", &LqSpec::B_T)
      .def_readwrite("b_T", &LqSpec::b_T)
      .def_readwrite("Q0", &LqSpec::Q0)
      .def_readwrite("A0", &LqSpec::A0)
      .def_readwrite("b0", &LqSpec::b0)
      .def_readwrite("Q0_T", &LqSpec::Q0_T)
      .def_readwrite("A0_T", &LqSpec::A0_T)
      .def_readwrite("b0_T", &LqSpec::b0_T)
      .def_static("zero", &LqSpec::Zero, py::arg("d"), py::arg("d0"),
                  py::arg("T"))
      .def("validate", &LqSpec::validate)
      .def("f", &LqSpec::f)
      .def("G", &LqSpec::G)
      .def("f0", &LqSpec::f0)
      .def("G0", &LqSpec::G0);

  py::class_<Mu0>(m, "Mu0")
      .def_static("uniform_box", &Mu0::UniformBox, py::arg("low"),
                  py::arg("high"))
      .def_static("gaussian_iso", &Mu0::GaussianIso, py::arg("mean"),
                  py::arg("std"))
      .def("distribution_mean", &Mu0::distribution_mean)
      .def("distribution_cov", &Mu0::distribution_cov);

  py::class_<SimConfig>(m, "SimConfig")
      .def(py::init<>())
      .def_readwrite("dt", &SimConfig::dt)
      .def_readwrite("paths", &SimConfig::paths)
      .def_readwrite("seed", &SimConfig::seed)
      .def_readwrite("mu0", &SimConfig::mu0)
      .def_readwrite("x0_init", &SimConfig::x0_init)
      .def_readwrite("cloud_size", &SimConfig::cloud_size);

  py::class_<EmpiricalMeasure>(m, "EmpiricalMeasure")
      .def(py::init<std::vector<Eigen::VectorXd>>(), py::arg("atoms"))
      .def_property_readonly("dim", &EmpiricalMeasure::dim)
      .def_property_readonly("size", &EmpiricalMeasure::size)
      .def("mean", &EmpiricalMeasure::mean)
      .def("moment", &EmpiricalMeasure::moment, py::arg("k"));

  m.def("wasserstein", &wasserstein, py::arg("a"), py::arg("b"), py::arg("k"),
        "Exact Wasserstein distance d_k between empirical measures.");

  py::class_<MasterEval>(m, "MasterEval")
      .def_readonly("U", &MasterEval::U)
      .def_readonly("U0", &MasterEval::U0)
      .def_readonly("DxU", &MasterEval::DxU)
      .def_readonly("Dx0U", &MasterEval::Dx0U)
      .def_readonly("DzU", &MasterEval::DzU)
      .def_readonly("Dx0U0", &MasterEval::Dx0U0)
      .def_readonly("DzU0", &MasterEval::DzU0);

  py::class_<MasterSolution>(m, "MasterSolution")
      .def_property_readonly("nt", &MasterSolution::nt)
      .def_property_readonly("T", &MasterSolution::T)
      .def("alpha_minor", &MasterSolution::alpha_minor)
      .def("alpha_major", &MasterSolution::alpha_major);

  m.def("solve_master", &solve_master, py::arg("spec"), py::arg("nt"));
  m.def("eval_master", &eval_master, py::arg("sol"), py::arg("t"),
        py::arg("x"), py::arg("x0"), py::arg("z"));
  m.def("master_residual", &master_residual, py::arg("sol"), py::arg("t"),
        py::arg("x"), py::arg("x0"), py::arg("z"));

  py::class_<NashEval>(m, "NashEval")
      .def_readonly("value", &NashEval::value)
      .def_readonly("grad", &NashEval::grad);

  py::class_<NashSolution>(m, "NashSolution")
      .def_property_readonly("N", &NashSolution::N)
      .def_property_readonly("nt", &NashSolution::nt)
      .def_property_readonly("T", &NashSolution::T)
      .def_property_readonly("D", &NashSolution::D);

  m.def("solve_nash", &solve_nash, py::arg("spec"), py::arg("N"),
        py::arg("nt"), py::arg("store_stride") = 1);
  m.def("eval_nash", &eval_nash, py::arg("sol"), py::arg("i"), py::arg("t"),
        py::arg("X"));
  m.def("nash_residual", &nash_residual, py::arg("sol"), py::arg("i"),
        py::arg("t"), py::arg("X"));

  py::class_<CostEstimate>(m, "CostEstimate")
      .def_readonly("mean", &CostEstimate::mean)
      .def_readonly("std_err", &CostEstimate::std_err)
      .def_readonly("paths", &CostEstimate::paths);

  py::class_<PathBundle>(m, "PathBundle")
      .def_readonly("times", &PathBundle::times)
      .def_readonly("columns", &PathBundle::columns)
      .def_readonly("paths", &PathBundle::paths);

  m.def("simulate_equilibrium_flow", &simulate_equilibrium_flow,
        py::arg("sol"), py::arg("cfg"));
  m.def(
      "simulate_coupled_particles",
      [](const NashSolution& sol, const Eigen::VectorXd& X_init,
         const SimConfig& cfg) {
        return simulate_coupled_particles(sol, X_init, cfg);
      },
      py::arg("sol"), py::arg("X_init"), py::arg("cfg"));
  m.def("estimate_minor_cost", &estimate_minor_cost, py::arg("sol"),
        py::arg("alpha"), py::arg("cfg"));
  m.def("estimate_major_cost", &estimate_major_cost, py::arg("sol"),
        py::arg("alpha0"), py::arg("cfg"));
  m.def("expected_minor_value", &expected_minor_value, py::arg("sol"),
        py::arg("cfg"));
  m.def("major_value", &major_value, py::arg("sol"), py::arg("cfg"));

  py::class_<ConvergenceRow>(m, "ConvergenceRow")
      .def_readonly("N", &ConvergenceRow::N)
      .def_readonly("sample_id", &ConvergenceRow::sample_id)
      .def_readonly("e_minor", &ConvergenceRow::e_minor)
      .def_readonly("e_major", &ConvergenceRow::e_major)
      .def_readonly("m1", &ConvergenceRow::m1)
      .def_readonly("e_minor_norm", &ConvergenceRow::e_minor_norm)
      .def_readonly("e_major_norm", &ConvergenceRow::e_major_norm);

  py::class_<ConvergenceTable>(m, "ConvergenceTable")
      .def_readonly("rows", &ConvergenceTable::rows);

  py::class_<RateFit>(m, "RateFit")
      .def_readonly("slope", &RateFit::slope)
      .def_readonly("intercept", &RateFit::intercept)
      .def_readonly("r2", &RateFit::r2)
      .def_readonly("exact", &RateFit::exact);

  m.def("run_convergence", &run_convergence, py::arg("spec"), py::arg("mu0"),
        py::arg("N_list"), py::arg("samples"), py::arg("t0"), py::arg("seed"),
        py::arg("nt") = 2000);
  m.def("fit_rate", &fit_rate, py::arg("table"));

  py::class_<VerifyCheck>(m, "VerifyCheck")
      .def_readonly("name", &VerifyCheck::name)
      .def_readonly("passed", &VerifyCheck::pass)
      .def_readonly("skipped", &VerifyCheck::skipped)
      .def_readonly("measured", &VerifyCheck::measured)
      .def_readonly("threshold", &VerifyCheck::threshold)
      .def_readonly("note", &VerifyCheck::note);

  py::class_<VerifyReport>(m, "VerifyReport")
      .def_readonly("checks", &VerifyReport::checks)
      .def("all_pass", &VerifyReport::all_pass);

  m.def("verify_all", &verify_all, py::arg("spec"), py::arg("cfg"),
        py::arg("nt"), py::arg("N_check"), py::arg("seed"));

  py::class_<LoadedConfig>(m, "LoadedConfig")
      .def_readonly("spec", &LoadedConfig::spec)
      .def_readonly("sim", &LoadedConfig::sim);

  m.def("parse_config", &parse_config, py::arg("json_text"));
  m.def("load_config", &load_config, py::arg("path"));
  m.def("config_to_json", &config_to_json, py::arg("spec"), py::arg("sim"));
}
