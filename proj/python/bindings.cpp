#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "noontrack/experiments.hpp"
#include "noontrack/scenario.hpp"
#include "noontrack/tracker.hpp"

namespace py = pybind11;
using namespace noontrack;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Two-photon N00N phase tracking: probe physics, count simulation, "
            "Bayesian (phi, V) estimation, bounds and the adaptive tracking loop.";

  // --- optics ---------------------------------------------------------------
  py::class_<ProbeModel>(m, "ProbeModel")
      .def(py::init<>())
      .def_readwrite("photon_number", &ProbeModel::photon_number)
      .def_readwrite("visibility", &ProbeModel::visibility)
      .def_readwrite("efficiency", &ProbeModel::efficiency)
      .def_readwrite("flux_cps", &ProbeModel::flux_cps)
      .def("validate", &ProbeModel::validate);

  py::class_<MeasurementSetting>(m, "MeasurementSetting")
      .def(py::init<double>(), py::arg("theta0"))
      .def_property_readonly("theta0", &MeasurementSetting::theta0)
      .def_property_readonly("angles", &MeasurementSetting::angles);

  py::class_<TwoPhotonState>(m, "TwoPhotonState")
      .def_readonly("amplitude_hv", &TwoPhotonState::amplitude_hv)
      .def_readonly("amplitude_hh", &TwoPhotonState::amplitude_hh)
      .def_readonly("amplitude_vv", &TwoPhotonState::amplitude_vv)
      .def("norm_squared", &TwoPhotonState::norm_squared);

  m.def("noon_state_after_sample", &noon_state_after_sample, py::arg("phi"));
  m.def("fringe_probability", &fringe_probability, py::arg("theta"), py::arg("phi"),
        py::arg("visibility"));
  m.def("setting_probabilities", &setting_probabilities, py::arg("setting"), py::arg("phi"),
        py::arg("visibility"));
  m.def("amplitude_oracle_coincidence", &amplitude_oracle_coincidence, py::arg("theta"),
        py::arg("phi"));
  m.def("single_photon_fringe", &single_photon_fringe, py::arg("theta"), py::arg("phi"));

  // --- kinetics ---------------------------------------------------------------
  py::class_<KineticsModel>(m, "KineticsModel")
      .def(py::init<>())
      .def_readwrite("phi_initial", &KineticsModel::phi_initial)
      .def_readwrite("phi_final", &KineticsModel::phi_final)
      .def_readwrite("tau_s", &KineticsModel::tau_s)
      .def_readwrite("t0_s", &KineticsModel::t0_s)
      .def_readwrite("c_initial_molar", &KineticsModel::c_initial_molar)
      .def_readwrite("inhibition", &KineticsModel::inhibition)
      .def("validate", &KineticsModel::validate)
      .def("rate_per_s", &KineticsModel::rate_per_s)
      .def("phase_at", &KineticsModel::phase_at, py::arg("t"))
      .def("concentration_from_phase", &KineticsModel::concentration_from_phase, py::arg("phi"));

  m.def("inhibition_scenario", &inhibition_scenario, py::arg("label"));

  // --- simulation -------------------------------------------------------------
  py::class_<CountBatch>(m, "CountBatch")
      .def(py::init<>())
      .def_readwrite("t", &CountBatch::t)
      .def_readwrite("setting", &CountBatch::setting)
      .def_readwrite("counts", &CountBatch::counts)
      .def_readwrite("duration_s", &CountBatch::duration_s)
      .def("total", &CountBatch::total);

  py::class_<DriftModel>(m, "DriftModel")
      .def(py::init<>())
      .def_readwrite("v_initial", &DriftModel::v_initial)
      .def_readwrite("v_slope_per_s", &DriftModel::v_slope_per_s)
      .def_readwrite("v_noise_sd", &DriftModel::v_noise_sd)
      .def_readwrite("seed", &DriftModel::seed);

  py::class_<Schedule>(m, "Schedule")
      .def(py::init<>())
      .def_readwrite("t0_s", &Schedule::t0_s)
      .def_readwrite("interval_s", &Schedule::interval_s)
      .def_readwrite("horizon_s", &Schedule::horizon_s)
      .def("batch_count", &Schedule::batch_count);

  m.def("simulate_batch", &simulate_batch, py::arg("setting"), py::arg("phi_true"),
        py::arg("v_true"), py::arg("flux_cps"), py::arg("duration_s"), py::arg("seed"),
        py::arg("t") = 0.0);

  // --- estimation ---------------------------------------------------------------
  py::class_<Estimate>(m, "Estimate")
      .def_readonly("t", &Estimate::t)
      .def_readonly("phi_hat", &Estimate::phi_hat)
      .def_readonly("phi_sd", &Estimate::phi_sd)
      .def_readonly("v_hat", &Estimate::v_hat)
      .def_readonly("v_sd", &Estimate::v_sd)
      .def_readonly("n_events", &Estimate::n_events)
      .def_readonly("theta0", &Estimate::theta0)
      .def_readonly("window_center", &Estimate::window_center)
      .def_readonly("bimodal", &Estimate::bimodal)
      .def_readonly("uninformative", &Estimate::uninformative);

  py::class_<EstimatorConfig>(m, "EstimatorConfig")
      .def(py::init<>())
      .def_readwrite("n_phi", &EstimatorConfig::n_phi)
      .def_readwrite("n_v", &EstimatorConfig::n_v)
      .def_readwrite("n_phi_max", &EstimatorConfig::n_phi_max)
      .def_readwrite("prob_floor", &EstimatorConfig::prob_floor)
      .def_readwrite("refine", &EstimatorConfig::refine)
      .def_readwrite("sequential_prior", &EstimatorConfig::sequential_prior);

  m.def("log_likelihood", &log_likelihood, py::arg("batch"), py::arg("phi"), py::arg("v"),
        py::arg("prob_floor") = 1e-12);
  m.def(
      "estimate_batch",
      [](const CountBatch& batch, double window_center, const EstimatorConfig& config) {
        return estimate_batch(batch, window_center, config).estimate;
      },
      py::arg("batch"), py::arg("window_center") = 0.0,
      py::arg("config") = EstimatorConfig{});
  m.def("fisher_matrix", &fisher_matrix, py::arg("theta0"), py::arg("phi"), py::arg("v"));
  m.def("fisher_optimal_phase_information", &fisher_optimal_phase_information, py::arg("v"));

  py::class_<BoundsReport>(m, "BoundsReport")
      .def_readonly("photon_number", &BoundsReport::photon_number)
      .def_readonly("visibility", &BoundsReport::visibility)
      .def_readonly("efficiency", &BoundsReport::efficiency)
      .def_readonly("events", &BoundsReport::events)
      .def_readonly("bound_heisenberg_product", &BoundsReport::bound_heisenberg_product)
      .def_readonly("bound_classical", &BoundsReport::bound_classical)
      .def_readonly("crb_phase_noon", &BoundsReport::crb_phase_noon)
      .def_readonly("crb_phase_noon_operational", &BoundsReport::crb_phase_noon_operational)
      .def_readonly("crb_phase_fisher", &BoundsReport::crb_phase_fisher)
      .def_readonly("bound_classical_lossy", &BoundsReport::bound_classical_lossy)
      .def_readonly("crb_phase_noon_lossy", &BoundsReport::crb_phase_noon_lossy)
      .def_readonly("v_threshold", &BoundsReport::v_threshold)
      .def_readonly("advantage", &BoundsReport::advantage);

  m.def("bounds_report", &bounds_report, py::arg("probe"), py::arg("events"));

  // --- adaptive tracking ----------------------------------------------------------
  py::enum_<PredictionMode>(m, "PredictionMode")
      .value("none", PredictionMode::none)
      .value("interpolation", PredictionMode::interpolation)
      .value("exponential_fit", PredictionMode::exponential_fit);

  py::class_<FitResult>(m, "FitResult")
      .def_readonly("phi_inf", &FitResult::phi_inf)
      .def_readonly("amplitude", &FitResult::amplitude)
      .def_readonly("tau_hat", &FitResult::tau_hat)
      .def_readonly("residual_rms", &FitResult::residual_rms)
      .def_readonly("converged", &FitResult::converged)
      .def_readonly("tau_sd", &FitResult::tau_sd)
      .def_readonly("rate_sd", &FitResult::rate_sd)
      .def("eval", &FitResult::eval, py::arg("t"));

  m.def(
      "fit_offset_exponential",
      [](const std::vector<double>& t, const std::vector<double>& y, double t_ref) {
        return fit_offset_exponential(t, y, t_ref);
      },
      py::arg("t"), py::arg("y"), py::arg("t_ref") = 0.0);
  m.def(
      "predict_phase",
      [](const std::vector<Estimate>& history, double t_next) {
        const Prediction p = predict_phase(history, t_next);
        return py::make_tuple(p.phi_p, p.mode);
      },
      py::arg("history"), py::arg("t_next"));
  m.def("choose_setting", &choose_setting, py::arg("phi_p"));

  py::class_<TrackPoint>(m, "TrackPoint")
      .def_readonly("estimate", &TrackPoint::estimate)
      .def_readonly("phi_p", &TrackPoint::phi_p)
      .def_readonly("mode", &TrackPoint::mode)
      .def_readonly("c_s", &TrackPoint::c_s)
      .def_readonly("c_s_sd", &TrackPoint::c_s_sd)
      .def_readonly("recentered", &TrackPoint::recentered);

  py::class_<TrackRecord>(m, "TrackRecord")
      .def_readonly("points", &TrackRecord::points)
      .def_readonly("aborted", &TrackRecord::aborted)
      .def_readonly("abort_reason", &TrackRecord::abort_reason);

  // --- scenarios -------------------------------------------------------------------
  py::class_<ScenarioConfig>(m, "ScenarioConfig")
      .def(py::init<>())
      .def_readwrite("name", &ScenarioConfig::name)
      .def_readwrite("seed", &ScenarioConfig::seed)
      .def_readwrite("probe", &ScenarioConfig::probe)
      .def_readwrite("tau_s", &ScenarioConfig::tau_s)
      .def_readwrite("drift", &ScenarioConfig::drift)
      .def_readwrite("schedule", &ScenarioConfig::schedule)
      .def_readwrite("adaptive_enabled", &ScenarioConfig::adaptive_enabled)
      .def("kinetics_model", &ScenarioConfig::kinetics_model)
      .def("validate", &ScenarioConfig::validate);

  m.def("builtin_scenario_names", &builtin_scenario_names);
  m.def("builtin_scenario", &builtin_scenario, py::arg("name"));
  m.def("scenario_from_json", &scenario_from_json, py::arg("text"));
  m.def("scenario_to_json", &scenario_to_json, py::arg("config"));

  m.def(
      "run_scenario",
      [](const ScenarioConfig& config) {
        config.validate();
        const KineticsModel kinetics = config.kinetics_model();
        SimulatedExperiment experiment([kinetics](double t) { return kinetics.phase_at(t); },
                                       config.drift, config.probe, config.schedule, config.seed);
        TrackRecord record = track(experiment, kinetics, config.tracker_config());
        std::vector<double> phi_true, v_true;
        for (const auto& sb : experiment.history()) {
          phi_true.push_back(sb.phi_true);
          v_true.push_back(sb.v_true);
        }
        return py::make_tuple(record, phi_true, v_true);
      },
      py::arg("config"),
      "Run the full simulated tracking loop; returns (record, phi_true, v_true).");
}
