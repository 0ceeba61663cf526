"""Closed-loop runs: policies, plant stepping, ledger billing, resumption."""
import dataclasses
from datetime import datetime, timezone

import numpy as np
import pytest

from greensim.actuators import CostLedger
from greensim.climate import ClimateState, PlausibilityError, pack_model
from greensim.empc import NempcConfig
from greensim.params import ControlInput, ValidationError
from greensim.scenario import NO_CONTROL, ScenarioConfig
from greensim.simulate import (
    CSV_COLUMNS,
    NempcPolicy,
    NoControlPolicy,
    RunCarry,
    StepSeries,
    StepTestPolicy,
    default_initial_state,
    integrate_step,
    make_policy,
    result_document,
    run_scenario,
)

UTC = timezone.utc
DAY_START = datetime(2025, 10, 11, 0, 0, tzinfo=UTC)


def no_control_config(duration=1800.0):
    return ScenarioConfig(latitude=48.15, longitude=17.11, start_time=DAY_START,
                          duration=duration, sample_time=120.0,
                          control=NO_CONTROL)


def mpc_config(duration=1200.0, **cfg_overrides):
    cfg = NempcConfig(horizon_steps=5, control_steps=5, sample_time=120.0,
                      max_iterations=8, **cfg_overrides)
    return ScenarioConfig(latitude=48.15, longitude=17.11, start_time=DAY_START,
                          duration=duration, sample_time=120.0, control=cfg)


@pytest.fixture(scope="module")
def traj_30min(day_series, model, pset):
    return run_scenario(no_control_config(), day_series, model=model, pset=pset)


@pytest.fixture(scope="module")
def traj_mpc(day_series, model, pset, warm_kernels):
    return run_scenario(mpc_config(), day_series, model=model, pset=pset)


# ---------------------------------------------------------------------------
# series container and plant stepping


class TestStepSeries:
    def test_length_mismatch(self, day_series):
        with pytest.raises(ValidationError, match="intensities"):
            StepSeries(conditions=day_series.conditions[:3],
                       intensities=np.array([250.0, 260.0]))

    def test_negative_intensity(self, day_series):
        with pytest.raises(ValidationError, match="intensities"):
            StepSeries(conditions=day_series.conditions[:2],
                       intensities=np.array([250.0, -1.0]))

    def test_len(self, day_series):
        assert len(day_series) == 750  # 720 steps + 30 horizon


class TestIntegrateStep:
    def test_plant_and_control_model_agree(self, model, day_series):
        x = np.array([278.0] * 7 + [0.004, 7.5e-4, 0.75, 0.25])
        u = ControlInput(heater=20.0)
        p = day_series.conditions[0]
        a = integrate_step(x, u, p, 120.0, model, mode="plant")
        b = integrate_step(x, u, p, 120.0, model, mode="control-model")
        rel = np.max(np.abs(a - b) / np.maximum(np.abs(a), 1e-12))
        assert rel < 1e-6

    def test_state_type_preserved(self, model, day_series):
        arr = np.array([278.0] * 7 + [0.004, 7.5e-4, 0.75, 0.25])
        p = day_series.conditions[0]
        out_arr = integrate_step(arr, ControlInput(), p, 120.0, model)
        assert isinstance(out_arr, np.ndarray)
        out_state = integrate_step(ClimateState.from_array(arr), ControlInput(),
                                   p, 120.0, model)
        assert isinstance(out_state, ClimateState)

    def test_unknown_mode(self, model, day_series):
        x = np.array([278.0] * 7 + [0.004, 7.5e-4, 0.75, 0.25])
        with pytest.raises(ValidationError, match="mode"):
            integrate_step(x, ControlInput(), day_series.conditions[0], 120.0,
                           model, mode="magic")

    def test_control_model_accepts_prepacked(self, model, day_series):
        x = np.array([278.0] * 7 + [0.004, 7.5e-4, 0.75, 0.25])
        p = day_series.conditions[0]
        pm = pack_model(model, dt=120.0)
        a = integrate_step(x, ControlInput(fan=50.0), p, 120.0, model,
                           mode="control-model")
        b = integrate_step(x, ControlInput(fan=50.0), p, 120.0, model,
                           mode="control-model", packed=pm)
        assert np.array_equal(a, b)


def test_default_initial_state(model, day_series, pset):
    x0 = default_initial_state(day_series.conditions[0], model, pset.simulation)
    t0 = day_series.conditions[0].T_ext
    assert np.allclose(x0[:7], t0)
    assert x0[9] == pset.simulation.seedling_sdw
    assert x0[10] == pset.simulation.seedling_nsdw
    from greensim.physics import co2_ppm
    assert co2_ppm(x0[8], t0) == pytest.approx(400.0, rel=1e-9)


# ---------------------------------------------------------------------------
# policies


class TestPolicies:
    def test_make_policy_dispatch(self, model, pset):
        assert isinstance(make_policy(no_control_config(), model, pset),
                          NoControlPolicy)
        pol = make_policy(mpc_config(), model, pset)
        assert isinstance(pol, NempcPolicy)
        assert pol.controller.cfg.horizon_steps == 5

    def test_step_test_switches_once(self, day_series, model, pset):
        cfg = no_control_config(duration=960.0)  # 8 steps
        pol = StepTestPolicy(actuator="co2gen", level=100.0, switch_at_step=5)
        traj = run_scenario(cfg, day_series, policy=pol, model=model, pset=pset)
        assert not traj.inputs[:5].any()
        assert np.all(traj.inputs[5:, 3] == 100.0)
        assert not traj.inputs[5:, :3].any()

    def test_step_test_unknown_actuator(self):
        with pytest.raises(ValidationError, match="actuator"):
            StepTestPolicy(actuator="windows")

    def test_mpc_needs_horizon_coverage(self, model, pset, day_series):
        # series exactly as long as the run leaves nothing for the horizon
        short = StepSeries(conditions=day_series.conditions[:10],
                           intensities=day_series.intensities[:10])
        with pytest.raises(ValidationError, match="exogenous data gap"):
            run_scenario(mpc_config(duration=1200.0), short, model=model,
                         pset=pset)


# ---------------------------------------------------------------------------
# baseline run invariants


class TestNoControlRun:
    def test_shapes(self, traj_30min):
        assert traj_30min.n_steps == 15
        assert traj_30min.states.shape == (16, 11)
        assert traj_30min.inputs.shape == (15, 4)
        assert traj_30min.timestamps[0] == 0.0
        assert traj_30min.timestamps[-1] == 1800.0

    def test_inputs_all_zero(self, traj_30min):
        assert not traj_30min.inputs.any()

    def test_ledger_stays_empty(self, traj_30min, model):
        led = traj_30min.ledger
        assert led.total_energy_eur == 0.0
        assert led.total_co2_g == 0.0
        rev = traj_30min.revenue(no_control_config().economics,
                                 model.geometry.cultivated_area)
        assert led.total(rev) == rev

    def test_deterministic(self, day_series, model, pset, traj_30min):
        again = run_scenario(no_control_config(), day_series, model=model,
                             pset=pset)
        assert np.array_equal(again.states, traj_30min.states)

    def test_physical_sanity(self, traj_30min):
        # temperatures stay in the plausible band, densities nonnegative
        assert np.all(traj_30min.states[:, :7] > 173.0)
        assert np.all(traj_30min.states[:, :7] < 373.0)
        assert np.all(traj_30min.states[:, 7:] >= 0.0)

    def test_progress_callback(self, day_series, model, pset):
        seen = []
        run_scenario(no_control_config(duration=600.0), day_series, model=model,
                     pset=pset, progress=seen.append)
        assert len(seen) == 5
        assert seen == sorted(seen)
        assert seen[-1] == pytest.approx(1.0)


def test_zero_duration_run(day_series, model, pset):
    traj = run_scenario(no_control_config(duration=0.0), day_series,
                        model=model, pset=pset)
    assert traj.n_steps == 0
    assert traj.states.shape == (1, 11)
    lines = traj.to_csv().splitlines()
    assert len(lines) == 2  # header + the single state row


def test_empty_series_rejected(model, pset):
    empty = StepSeries(conditions=(), intensities=np.zeros(0))
    with pytest.raises(ValidationError, match="series"):
        run_scenario(no_control_config(duration=0.0), empty, model=model,
                     pset=pset)


# ---------------------------------------------------------------------------
# resumption


class TestResume:
    def test_no_control_split_equals_full(self, day_series, model, pset,
                                          traj_30min):
        cfg = no_control_config()
        first = run_scenario(cfg, day_series, model=model, pset=pset, n_steps=8)
        rest = run_scenario(cfg, day_series, model=model, pset=pset,
                            carry=first.carry())
        assert first.n_steps == 8 and rest.n_steps == 7
        assert np.array_equal(rest.states[-1], traj_30min.states[-1])
        assert rest.timestamps[0] == pytest.approx(8 * 120.0)
        assert rest.ledger.total_energy_eur == traj_30min.ledger.total_energy_eur

    def test_mpc_split_equals_full(self, day_series, model, pset, traj_mpc):
        cfg = mpc_config()
        first = run_scenario(cfg, day_series, model=model, pset=pset, n_steps=6)
        rest = run_scenario(cfg, day_series, model=model, pset=pset,
                            carry=first.carry())
        # the plant path is exactly reproducible: the warm start carries over
        assert np.array_equal(rest.states[-1], traj_mpc.states[-1])
        assert np.array_equal(
            np.vstack([first.inputs, rest.inputs]), traj_mpc.inputs)
        # ledgers agree except for the (wall-time-priced) solver row
        for kind in ("heater", "fan", "humidifier", "co2gen"):
            assert rest.ledger.rows[kind].energy_eur == pytest.approx(
                traj_mpc.ledger.rows[kind].energy_eur, rel=1e-12, abs=1e-15)
        assert abs(rest.ledger.rows["solver"].energy_eur
                   - traj_mpc.ledger.rows["solver"].energy_eur) < 1e-4

    def test_segment_cannot_overrun(self, day_series, model, pset):
        cfg = no_control_config()
        first = run_scenario(cfg, day_series, model=model, pset=pset, n_steps=8)
        with pytest.raises(ValidationError, match="n_steps"):
            run_scenario(cfg, day_series, model=model, pset=pset,
                         carry=first.carry(), n_steps=8)

    def test_plausibility_abort_names_the_step(self, day_series, model, pset):
        bad = np.array([374.0] + [283.0] * 6 + [0.005, 7e-4, 1.0, 0.5])
        carry = RunCarry(step=3, state=bad, ledger=CostLedger(specs=model.actuators),
                         warm_start=None)
        with pytest.raises(PlausibilityError, match="at step 3"):
            run_scenario(no_control_config(), day_series, model=model,
                         pset=pset, carry=carry)


# ---------------------------------------------------------------------------
# controller billing


class TestMpcRun:
    def test_solver_row_billed(self, traj_mpc):
        # every step solved once; the solver row must carry real energy
        assert all(d is not None for d in traj_mpc.diagnostics)
        assert traj_mpc.ledger.rows["solver"].energy_eur > 0.0
        assert traj_mpc.ledger.rows["solver"].co2_g > 0.0

    def test_own_basis_billing_zeroes_social_cost(self, day_series, model,
                                                  pset, warm_kernels):
        cfg = mpc_config(include_social_cost=False)
        traj = run_scenario(cfg, day_series, model=model, pset=pset)
        # grams are still tracked, but this run's books price them at zero
        assert traj.ledger.total_co2_g > 0.0
        assert traj.ledger.total_co2_eur == 0.0

    def test_social_run_pays_for_carbon(self, traj_mpc):
        assert traj_mpc.ledger.total_co2_eur > 0.0


# ---------------------------------------------------------------------------
# exports


class TestCsvExport:
    def test_layout(self, traj_30min):
        lines = traj_30min.to_csv().splitlines()
        assert lines[0] == ",".join(CSV_COLUMNS)
        assert len(lines) == 1 + 15 + 1  # header, steps, final state row

    def test_final_row_has_no_interval_fields(self, traj_30min):
        rows = traj_30min.to_csv().splitlines()
        last = rows[-1].split(",")
        cols = dict(zip(CSV_COLUMNS, last))
        assert cols["u_heater"] == "" and cols["carbon_intensity"] == ""
        assert cols["T_i"] != ""
        assert float(cols["time_s"]) == 1800.0

    def test_interval_rows_fully_populated(self, traj_30min):
        rows = traj_30min.to_csv().splitlines()
        first = rows[1].split(",")
        assert all(field != "" for field in first)


class TestResultDocument:
    def test_summary_and_series_shapes(self, traj_30min, model):
        doc = result_document(traj_30min, no_control_config(), model)
        assert doc["schema"] == "greensim.result.v1"
        assert doc["controller"] == "no-control"
        assert doc["n_steps"] == 15
        assert len(doc["series"]["time_s"]) == 16
        assert len(doc["series"]["states"]["T_i"]) == 16
        assert len(doc["series"]["inputs"]["u_heater"]) == 15
        assert len(doc["series"]["co2_ppm"]) == 16
        assert len(doc["series"]["external"]["poa_total"]) == 15

    def test_cumulative_profit_ends_at_total(self, traj_30min, model):
        doc = result_document(traj_30min, no_control_config(), model)
        assert doc["series"]["cumulative_profit_eur"][-1] == pytest.approx(
            doc["summary"]["total_eur"], rel=1e-9, abs=1e-12)

    def test_summary_rows_mirror_ledger_table(self, traj_30min, model):
        doc = result_document(traj_30min, no_control_config(), model)
        labels = [r["label"] for r in doc["summary"]["rows"]]
        assert labels[0] == "Lettuce profit"
        assert labels[-1] == "Total"
        total_row = doc["summary"]["rows"][-1]["eur"]
        assert total_row == pytest.approx(doc["summary"]["total_eur"], rel=1e-12)

    def test_controller_labels(self, traj_mpc, day_series, model, pset):
        doc = result_document(traj_mpc, mpc_config(), model)
        assert doc["controller"] == "nempc-co2"
        cfg = mpc_config(include_social_cost=False)
        traj = run_scenario(cfg, day_series, model=model, pset=pset)
        assert result_document(traj, cfg, model)["controller"] == "nempc-eur"

    def test_degraded_solves_counted(self, traj_mpc, model):
        doc = result_document(traj_mpc, mpc_config(), model)
        n = sum(1 for d in traj_mpc.diagnostics if d is not None and d.degraded)
        assert doc["summary"]["degraded_solves"] == n
