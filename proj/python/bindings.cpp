#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mmppctl/config.hpp"
#include "mmppctl/conjugate.hpp"
#include "mmppctl/errors.hpp"
#include "mmppctl/experiments.hpp"
#include "mmppctl/heuristics.hpp"
#include "mmppctl/mdp_solver.hpp"
#include "mmppctl/nhpp.hpp"
#include "mmppctl/structure_checks.hpp"

namespace py = pybind11;
using namespace mmppctl;

namespace {

void bind_errors(py::module_& m) {
  // Base classes first: pybind11 tries the most recently registered translator first.
  static py::exception<Error> error(m, "Error", PyExc_RuntimeError);
  static py::exception<InvalidModel> invalid(m, "InvalidModel", error.ptr());
  static py::exception<ConfigError> config(m, "ConfigError", error.ptr());
  static py::exception<DegeneratePartition> partition(m, "DegeneratePartition", invalid.ptr());
  static py::exception<NumericError> numeric(m, "NumericError", error.ptr());
  static py::exception<SingularSystem> singular(m, "SingularSystem", numeric.ptr());
  static py::exception<NonConvergence> nonconv(m, "NonConvergence", numeric.ptr());
  static py::exception<Unstable> unstable(m, "Unstable", numeric.ptr());
  static py::exception<ReducibleChain> reducible(m, "ReducibleChain", numeric.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const DegeneratePartition& e) {
      partition(e.what());
    } catch (const InvalidModel& e) {
      invalid(e.what());
    } catch (const ConfigError& e) {
      config(e.what());
    } catch (const SingularSystem& e) {
      singular(e.what());
    } catch (const NonConvergence& e) {
      nonconv(e.what());
    } catch (const Unstable& e) {
      unstable(e.what());
    } catch (const ReducibleChain& e) {
      reducible(e.what());
    }
  });
}

void bind_model(py::module_& m) {
  py::class_<PhaseProcess>(m, "PhaseProcess")
      .def(py::init([](Eigen::MatrixXd q, std::vector<double> rates, bool preserve_order) {
             return PhaseProcess(std::move(q), std::move(rates),
                                 preserve_order ? PhaseProcess::Ordering::Preserve
                                                : PhaseProcess::Ordering::SortByRate);
           }),
           py::arg("generator"), py::arg("rates"), py::arg("preserve_order") = false)
      .def_property_readonly("size", &PhaseProcess::size)
      .def_property_readonly("generator", &PhaseProcess::generator)
      .def_property_readonly("rates", &PhaseProcess::rates)
      .def_property_readonly("permutation", &PhaseProcess::permutation)
      .def_property_readonly("max_rate", &PhaseProcess::max_rate);

  py::class_<ExponentialCost>(m, "ExponentialCost").def(py::init<>());
  py::class_<QuadraticCost>(m, "QuadraticCost")
      .def(py::init([](double offset) { return QuadraticCost{offset}; }), py::arg("offset") = 0.0)
      .def_readwrite("offset", &QuadraticCost::offset);
  py::class_<PowerSeriesCost>(m, "PowerSeriesCost")
      .def(py::init([](std::vector<double> c) { return PowerSeriesCost{std::move(c)}; }),
           py::arg("coefficients"))
      .def_readwrite("coefficients", &PowerSeriesCost::coefficients);
  py::class_<LinearHolding>(m, "LinearHolding").def(py::init<>());
  py::class_<ShiftedLinearHolding>(m, "ShiftedLinearHolding")
      .def(py::init([](int shift) { return ShiftedLinearHolding{shift}; }), py::arg("shift"))
      .def_readwrite("shift", &ShiftedLinearHolding::shift);
  py::class_<PowerHolding>(m, "PowerHolding")
      .def(py::init([](double scale, int power) { return PowerHolding{scale, power}; }),
           py::arg("scale") = 1.0, py::arg("power") = 1);

  py::class_<CostModel>(m, "CostModel")
      .def(py::init<ServiceCost, HoldingCost, double>(), py::arg("service"), py::arg("holding"),
           py::arg("u_max"))
      .def_property_readonly("u_max", &CostModel::u_max)
      .def("service_cost", &CostModel::service_cost)
      .def("marginal_service_cost", &CostModel::marginal_service_cost)
      .def("holding_cost", &CostModel::holding_cost);

  py::enum_<Boundary>(m, "Boundary")
      .value("Extrapolate", Boundary::Extrapolate)
      .value("Block", Boundary::Block);

  py::class_<SolverSettings>(m, "SolverSettings")
      .def(py::init<>())
      .def_readwrite("truncation", &SolverSettings::truncation)
      .def_readwrite("alpha", &SolverSettings::alpha)
      .def_readwrite("tolerance", &SolverSettings::tolerance)
      .def_readwrite("uniformization_slack", &SolverSettings::uniformization_slack)
      .def_readwrite("boundary", &SolverSettings::boundary)
      .def_readwrite("max_iterations", &SolverSettings::max_iterations);

  py::class_<Scenario>(m, "Scenario")
      .def(py::init<PhaseProcess, CostModel, SolverSettings>(), py::arg("phase"), py::arg("cost"),
           py::arg("settings") = SolverSettings{})
      .def_property_readonly("phase", &Scenario::phase)
      .def_property_readonly("cost", &Scenario::cost)
      .def_property_readonly("settings", &Scenario::settings)
      .def("with_settings", &Scenario::with_settings);

  py::class_<StabilityReport>(m, "StabilityReport")
      .def_readonly("stable", &StabilityReport::stable)
      .def_readonly("mean_rate", &StabilityReport::mean_rate)
      .def_readonly("u_max", &StabilityReport::u_max);
  py::class_<UniformizedModel>(m, "UniformizedModel")
      .def_readonly("eta_bar", &UniformizedModel::eta_bar)
      .def_readonly("slack", &UniformizedModel::slack)
      .def_readonly("nu", &UniformizedModel::nu)
      .def_readonly("q_bar", &UniformizedModel::q_bar);

  m.def("stationary_distribution", &stationary_distribution);
  m.def("mean_arrival_rate", &mean_arrival_rate);
  m.def("stability_check", &stability_check);
  m.def("uniformize", &uniformize);

  py::class_<ConjugatePair>(m, "ConjugatePair")
      .def(py::init<CostModel>())
      .def("psi", &ConjugatePair::psi)
      .def("phi", &ConjugatePair::phi);
}

void bind_solver(py::module_& m) {
  py::class_<Policy>(m, "Policy")
      .def(py::init<Eigen::MatrixXd>(), py::arg("rates"))
      .def_static("constant", &Policy::constant)
      .def_property_readonly("rates", &Policy::rates);

  py::enum_<Criterion>(m, "Criterion")
      .value("Discounted", Criterion::Discounted)
      .value("Average", Criterion::Average);
  py::class_<ValueFunction>(m, "ValueFunction")
      .def_readonly("values", &ValueFunction::values)
      .def_readonly("criterion", &ValueFunction::criterion)
      .def_readonly("alpha", &ValueFunction::alpha)
      .def_readonly("reference_phase", &ValueFunction::reference_phase);
  py::class_<SolveResult>(m, "SolveResult")
      .def_readonly("value", &SolveResult::value)
      .def_readonly("policy", &SolveResult::policy)
      .def_readonly("gain", &SolveResult::gain)
      .def_readonly("iterations", &SolveResult::iterations)
      .def_readonly("residual", &SolveResult::residual)
      .def_readonly("stability_warning", &SolveResult::stability_warning);

  py::enum_<PolicyEvaluation>(m, "PolicyEvaluation")
      .value("Stationary", PolicyEvaluation::Stationary)
      .value("Relative", PolicyEvaluation::Relative);

  m.def("solve_discounted", &solve_discounted, py::call_guard<py::gil_scoped_release>());
  m.def("solve_average", &solve_average, py::call_guard<py::gil_scoped_release>());
  m.def("first_difference", py::overload_cast<const Eigen::MatrixXd&>(&first_difference));
  m.def("evaluate_policy", &evaluate_policy);
  m.def("policy_occupancy", &policy_occupancy);
  m.def("relative_policy_gain", &relative_policy_gain, py::call_guard<py::gil_scoped_release>());
  m.def("open_loop_gain", &open_loop_gain, py::arg("scenario"), py::arg("mu"),
        py::arg("method") = PolicyEvaluation::Stationary);

  m.def("check_generator_monotone", py::overload_cast<const Eigen::MatrixXd&>(&check_generator_monotone));
  py::class_<MonotonicityViolation>(m, "MonotonicityViolation")
      .def_readonly("n", &MonotonicityViolation::n)
      .def_readonly("s", &MonotonicityViolation::s)
      .def_readonly("value_low", &MonotonicityViolation::value_low)
      .def_readonly("value_high", &MonotonicityViolation::value_high);
  py::class_<MonotonicityReport>(m, "MonotonicityReport")
      .def_readonly("monotone", &MonotonicityReport::monotone)
      .def_readonly("violations", &MonotonicityReport::violations);
  m.def("verify_monotone_in_n", &verify_monotone_in_n);
  m.def("verify_monotone_in_s", &verify_monotone_in_s);
}

void bind_heuristics(py::module_& m) {
  m.def("arm_policy", &arm_policy, py::call_guard<py::gil_scoped_release>());
  m.def("prm_policy", &prm_policy, py::call_guard<py::gil_scoped_release>());
  py::class_<FixedRateResult>(m, "FixedRateResult")
      .def_readonly("mu_star", &FixedRateResult::mu_star)
      .def_readonly("gain", &FixedRateResult::gain);
  m.def("fixed_rate_policy", &fixed_rate_policy, py::arg("scenario"),
        py::arg("method") = PolicyEvaluation::Stationary, py::call_guard<py::gil_scoped_release>());
  m.def(
      "compare_heuristics",
      [](const Scenario& sc, std::string label) {
        ComparisonRow row;
        {
          py::gil_scoped_release release;
          row = compare_heuristics(sc, std::move(label));
        }
        py::dict out;
        out["label"] = row.label;
        out["optimal"] = row.optimal_gain;
        out["fixed_rate"] = row.fixed_rate;
        for (const auto& [name, h] : row.heuristic_gains) {
          out[py::str(name)] = py::make_tuple(h.gain, h.pct_suboptimal);
        }
        return out;
      },
      py::arg("scenario"), py::arg("label") = "");
}

void bind_nhpp(py::module_& m) {
  py::class_<RateFunction>(m, "RateFunction")
      .def_static(
          "piecewise_constant",
          [](std::vector<double> breakpoints, std::vector<double> rates, double period) {
            return RateFunction(PiecewiseConstantRate{std::move(breakpoints), std::move(rates)}, period);
          },
          py::arg("breakpoints"), py::arg("rates"), py::arg("period"))
      .def_static(
          "sinusoid",
          [](double amplitude, double offset, double period) {
            return RateFunction(SinusoidRate{amplitude, offset}, period);
          },
          py::arg("amplitude"), py::arg("offset"), py::arg("period"))
      .def_property_readonly("period", &RateFunction::period)
      .def("rate", &RateFunction::rate)
      .def("integral", &RateFunction::integral)
      .def_property_readonly("mean_rate", &RateFunction::mean_rate)
      .def_property_readonly("max_rate", &RateFunction::max_rate);

  py::class_<NhppSettings>(m, "NhppSettings")
      .def(py::init<>())
      .def_readwrite("truncation", &NhppSettings::truncation)
      .def_readwrite("delta_t", &NhppSettings::delta_t)
      .def_readwrite("tolerance", &NhppSettings::tolerance)
      .def_readwrite("boundary", &NhppSettings::boundary)
      .def_readwrite("damping", &NhppSettings::damping)
      .def_readwrite("max_iterations", &NhppSettings::max_iterations);

  py::class_<NhppScenario>(m, "NhppScenario")
      .def(py::init<RateFunction, CostModel, NhppSettings>(), py::arg("rate"), py::arg("cost"),
           py::arg("settings") = NhppSettings{})
      .def_property_readonly("slots", &NhppScenario::slots)
      .def_property_readonly("nu", &NhppScenario::nu)
      .def_property_readonly("delta_t", &NhppScenario::delta_t);

  py::class_<NhppPolicy>(m, "NhppPolicy")
      .def(py::init<Eigen::MatrixXd>())
      .def_property_readonly("rates", &NhppPolicy::rates);
  py::class_<NhppSolveResult>(m, "NhppSolveResult")
      .def_readonly("policy", &NhppSolveResult::policy)
      .def_readonly("values", &NhppSolveResult::values)
      .def_readonly("gain", &NhppSolveResult::gain)
      .def_readonly("residual", &NhppSolveResult::residual)
      .def_readonly("iterations", &NhppSolveResult::iterations);
  py::class_<NhppApproximation>(m, "NhppApproximation")
      .def_readonly("cut_points", &NhppApproximation::cut_points)
      .def_readonly("phase", &NhppApproximation::phase)
      .def_readonly("mmpp", &NhppApproximation::mmpp)
      .def_readonly("lifted", &NhppApproximation::lifted)
      .def_readonly("lifted_gain", &NhppApproximation::lifted_gain);

  m.def("solve_nhpp_average", &solve_nhpp_average, py::call_guard<py::gil_scoped_release>());
  m.def("evaluate_nhpp_policy", &evaluate_nhpp_policy, py::call_guard<py::gil_scoped_release>());
  m.def("equal_cut_points", &equal_cut_points);
  m.def("build_mmpp_approximation", &build_mmpp_approximation, py::arg("rate"), py::arg("partitions"),
        py::arg("cut_points") = std::nullopt);
  m.def("lift_policy", &lift_policy);
  m.def("approximate_nhpp", &approximate_nhpp, py::arg("scenario"), py::arg("partitions"),
        py::arg("cut_points") = std::nullopt, py::arg("mmpp_settings") = SolverSettings{},
        py::call_guard<py::gil_scoped_release>());
}

void bind_experiments(py::module_& m) {
  m.def("comparison_scenario", &comparison_scenario, py::arg("table"), py::arg("case_number"), py::arg("c"));
  m.def("example31_scenario", &example31_scenario, py::arg("alpha") = 0.0);
  m.def("example32_scenario", &example32_scenario, py::arg("alpha") = 0.0);
  m.def("example43_scenario", &example43_scenario, py::arg("period"));
  m.def("example44_scenario", &example44_scenario, py::arg("period"), py::arg("service_offset") = 0.0);
  m.def("load_scenario", [](const std::string& path) { return load_config(path).scenario(); });
  m.def("load_nhpp_scenario", [](const std::string& path) { return load_config(path).nhpp_scenario(); });
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Service-rate control for MMPP/M/1 and periodic NHPP queues";
  bind_errors(m);
  bind_model(m);
  bind_solver(m);
  bind_heuristics(m);
  bind_nhpp(m);
  bind_experiments(m);
}
