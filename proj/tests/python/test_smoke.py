"""Smoke tests for the noontrack python module."""

import math

import pytest

import noontrack as nt


def test_fringe_probability_basics():
    assert nt.fringe_probability(0.0, 0.0, 1.0) == pytest.approx(0.5, abs=1e-15)
    assert nt.fringe_probability(math.pi / 16, 0.0, 1.0) == pytest.approx(0.25, abs=1e-12)
    assert nt.fringe_probability(0.1, 0.3, 0.0) == pytest.approx(0.25, abs=1e-15)
    with pytest.raises(Exception):
        nt.fringe_probability(0.0, 0.0, 1.5)


def test_setting_probabilities_normalize():
    setting = nt.MeasurementSetting(0.07)
    p = nt.setting_probabilities(setting, 0.4, 0.9)
    assert len(p) == 4
    assert sum(p) == pytest.approx(1.0, abs=1e-12)


def test_oracle_matches_closed_form():
    for theta, phi in [(0.0, 0.0), (0.3, -0.7), (1.1, 2.2), (math.pi / 16, 0.0)]:
        closed = 0.5 * (1.0 + math.cos(8 * theta + 2 * phi))
        assert nt.amplitude_oracle_coincidence(theta, phi) == pytest.approx(closed, abs=1e-12)


def test_noon_state_is_normalized():
    st = nt.noon_state_after_sample(0.35)
    assert st.norm_squared() == pytest.approx(1.0, abs=1e-12)
    assert st.amplitude_hv == pytest.approx(math.cos(0.35))


def test_bounds_report_thresholds():
    probe = nt.ProbeModel()
    probe.photon_number = 2
    probe.efficiency = 0.5
    report = nt.bounds_report(probe, 100)
    assert report.v_threshold == pytest.approx(1.0, abs=1e-14)
    probe.efficiency = 1.0
    report = nt.bounds_report(probe, 100)
    assert report.crb_phase_noon == pytest.approx(0.05)
    assert report.bound_classical == pytest.approx(1.0 / math.sqrt(200.0))


def test_simulate_batch_deterministic():
    setting = nt.MeasurementSetting(0.02)
    a = nt.simulate_batch(setting, 0.3, 0.9, 2000.0, 5.0, 11)
    b = nt.simulate_batch(setting, 0.3, 0.9, 2000.0, 5.0, 11)
    assert a.counts == b.counts
    assert a.total() == sum(a.counts)
    assert a.total() > 0


def test_estimate_recovers_phase():
    phi_true, v_true = 0.27, 0.9
    setting = nt.choose_setting(phi_true)
    batch = nt.simulate_batch(setting, phi_true, v_true, 2000.0, 10.0, 123)
    est = nt.estimate_batch(batch, window_center=phi_true)
    assert abs(est.phi_hat - phi_true) < 4 * est.phi_sd
    assert abs(est.v_hat - v_true) < 5 * est.v_sd
    assert est.phi_sd > 0


def test_choose_setting_on_condition():
    assert nt.choose_setting(math.pi / 8).theta0 == pytest.approx(0.0, abs=1e-15)
    theta0 = nt.choose_setting(0.0).theta0
    assert theta0 == pytest.approx(math.pi / 32)


def test_kinetics_round_trip():
    k = nt.KineticsModel()
    k.phi_initial = 0.35
    k.phi_final = -0.30
    k.tau_s = 600.0
    k.c_initial_molar = 0.8
    assert k.phase_at(0.0) == pytest.approx(0.35)
    c = k.concentration_from_phase(k.phase_at(500.0))
    assert c == pytest.approx(0.8 * math.exp(-500.0 / 600.0), abs=1e-12)
    assert nt.inhibition_scenario("blue_1h") == 0.25


def test_fisher_matrix_positive():
    f = nt.fisher_matrix(0.0, math.pi / 8, 0.9)
    assert f[0][0] > 0
    assert f[0][1] == pytest.approx(f[1][0])
    assert f[0][0] == pytest.approx(nt.fisher_optimal_phase_information(0.9), rel=1e-9)


def test_run_scenario_end_to_end():
    config = nt.builtin_scenario("invertase-10")
    config.schedule.horizon_s = 200.0  # five points
    config.seed = 7
    record, phi_true, v_true = nt.run_scenario(config)
    assert not record.aborted
    assert len(record.points) == 5
    assert len(phi_true) == 5
    for point, truth in zip(record.points, phi_true):
        assert abs(point.estimate.phi_hat - truth) < 6 * point.estimate.phi_sd
    # concentrations decay with the phase
    assert record.points[-1].c_s < record.points[0].c_s


def test_predict_phase_mode_progression():
    config = nt.builtin_scenario("invertase-10")
    config.schedule.horizon_s = 300.0
    config.seed = 3
    record, _, _ = nt.run_scenario(config)
    modes = [p.mode for p in record.points]
    assert modes[0] == nt.PredictionMode.none
    assert all(m == nt.PredictionMode.interpolation for m in modes[1:4])
    assert all(m != nt.PredictionMode.none for m in modes[1:])
