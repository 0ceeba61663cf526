"""Closed-loop simulation: integrate the climate + crop dynamics over a
scenario under a control policy, keeping the actuation history and the
cost ledger.

The plant advances with an adaptive embedded RK integrator; controller
predictions use the deterministic fixed-step RK4 control model. Both see
the same exogenous series: hourly data interpolated linearly and evaluated
at each sampling-step midpoint, held constant across the step.
"""

from __future__ import annotations

import copy
import csv
import dataclasses
import io
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from greensim import _kernels as K
from greensim.actuators import CostLedger
from greensim.climate import (
    ClimateModel,
    ClimateState,
    ExternalConditions,
    PackedModel,
    PlausibilityError,
    STATE_ORDER,
    T_MAX_PLAUSIBLE,
    T_MIN_PLAUSIBLE,
    pack_model,
    reduce_external,
)
from greensim.empc import NempcController, SolveDiagnostics
from greensim.integrators import integrate_adaptive
from greensim.params import ACTUATOR_ORDER, ControlInput, ValidationError, ZERO_CONTROL
from greensim.physics import co2_ext_density, co2_ppm, saturation_moisture
from greensim.scenario import NO_CONTROL, ParameterSet, ScenarioConfig, default_parameters

CSV_COLUMNS = ("time_s", *STATE_ORDER, "co2_ppm_internal",
               *(f"u_{k}" for k in ACTUATOR_ORDER), "carbon_intensity",
               "cum_energy_eur", "cum_co2_g", "cum_co2_eur")


@dataclass(frozen=True)
class StepSeries:
    """Per-sampling-step exogenous inputs, already midpoint-interpolated.

    `conditions[k]` and `intensities[k]` drive the interval
    [k·Δt, (k+1)·Δt). Must cover the run plus the controller's horizon.
    """

    conditions: tuple[ExternalConditions, ...]
    intensities: np.ndarray   # gCO2eq/kWh

    def __post_init__(self):
        object.__setattr__(self, "intensities",
                           np.asarray(self.intensities, dtype=float))
        if len(self.conditions) != len(self.intensities):
            raise ValidationError("intensities",
                                  "must be as long as the conditions sequence")
        if np.any(self.intensities < 0):
            raise ValidationError("intensities", "must be nonnegative")

    def __len__(self) -> int:
        return len(self.conditions)


def _check_band(x: np.ndarray, step: int | None = None) -> None:
    if np.any(x[:7] < T_MIN_PLAUSIBLE) or np.any(x[:7] > T_MAX_PLAUSIBLE) \
            or not np.all(np.isfinite(x)):
        where = "" if step is None else f" at step {step}"
        raise PlausibilityError(f"temperature outside [173, 373] K{where}")


def integrate_step(x, u: ControlInput, p: ExternalConditions, dt: float,
                   model: ClimateModel, mode: str = "plant",
                   substeps: int = 12, abs_tol: float = 1e-6,
                   rel_tol: float = 1e-6,
                   packed: PackedModel | None = None):
    """Advance one sampling interval; exogenous conditions held constant.

    plant: adaptive embedded RK at the configured tolerances.
    control-model: fixed-step classical RK4 with `substeps` substeps.
    Returns the same type it was given (ClimateState or array).
    """
    if dt <= 0:
        raise ValidationError("dt", "must be strictly positive")
    as_state = isinstance(x, ClimateState)
    x_arr = x.as_array() if as_state else np.asarray(x, dtype=float)
    _check_band(x_arr)
    if packed is None:
        packed = pack_model(model, dt=dt)
    ex = reduce_external(p, model)
    u_arr = np.asarray(u.as_tuple(), dtype=float)
    if mode == "plant":
        def f(y):
            return K.rhs(y, u_arr, ex, *packed.args)
        out = integrate_adaptive(f, x_arr, dt, rtol=rel_tol, atol=abs_tol)
    elif mode == "control-model":
        out, ok = K.integrate_fixed(x_arr, u_arr, ex, dt, substeps, *packed.args)
        if not ok:
            raise PlausibilityError("temperature outside [173, 373] K")
    else:
        raise ValidationError("mode", "must be 'plant' or 'control-model'")
    _check_band(out)
    return ClimateState.from_array(out) if as_state else out


def default_initial_state(first: ExternalConditions, model: ClimateModel,
                          settings) -> np.ndarray:
    """All temperatures at the first outdoor reading, moisture at the
    configured fraction of saturation, CO₂ ambient, seedling crop."""
    cn = model.constants
    t0 = first.T_ext
    c_w = settings.initial_rh / 100.0 * saturation_moisture(t0 - 273.15, cn.rho_air)
    c_c = co2_ext_density(t0, cn.M_c, cn.P_atm, cn.R_gas)
    return np.array([t0] * 7 + [c_w, c_c, settings.seedling_sdw,
                                settings.seedling_nsdw])


# --- policies -------------------------------------------------------------


class NoControlPolicy:
    """u ≡ 0 baseline."""

    def start(self, run) -> None:
        pass

    def step(self, k: int, x: np.ndarray, run) -> tuple[ControlInput, None]:
        return ZERO_CONTROL, None


@dataclass
class StepTestPolicy:
    """One actuator off→maximum at a given step; everything else off."""

    actuator: str
    level: float = 100.0
    switch_at_step: int = 0

    def __post_init__(self):
        if self.actuator not in ACTUATOR_ORDER:
            raise ValidationError("actuator", f"unknown actuator {self.actuator!r}")

    def start(self, run) -> None:
        pass

    def step(self, k: int, x: np.ndarray, run) -> tuple[ControlInput, None]:
        if k < self.switch_at_step:
            return ZERO_CONTROL, None
        return ControlInput(**{a: (self.level if a == self.actuator else 0.0)
                               for a in ACTUATOR_ORDER}), None


@dataclass
class NempcPolicy:
    """Receding-horizon economic MPC over the shared exogenous series."""

    controller: NempcController

    def start(self, run) -> None:
        n = self.controller.cfg.horizon_steps
        need = run.offset + run.n_steps + n
        if len(run.series) < need:
            raise ValidationError(
                "series", f"exogenous data gap: horizon needs {need} steps, "
                          f"series has {len(run.series)}")
        self._reduced = run.reduced_full
        self._intens = run.series.intensities

    def step(self, k: int, x: np.ndarray, run) -> tuple[ControlInput, SolveDiagnostics]:
        n = self.controller.cfg.horizon_steps
        i = run.offset + k
        res = self.controller.solve(x, self._reduced[i:i + n],
                                    self._intens[i:i + n])
        return res.u_first, res.diagnostics


# --- trajectory -------------------------------------------------------------


@dataclass(frozen=True)
class RunCarry:
    """Everything needed to continue a run where it stopped."""

    step: int
    state: np.ndarray
    ledger: CostLedger
    warm_start: np.ndarray | None


@dataclass
class Trajectory:
    """Closed-loop record: n+1 states bracketing n controlled intervals."""

    start_time: datetime
    sample_time: float
    timestamps: np.ndarray          # (n+1,) s since scenario start
    states: np.ndarray              # (n+1, 11)
    inputs: np.ndarray              # (n, 4) percent
    exogenous: np.ndarray           # (n, 20) ExternalConditions vectors
    intensities: np.ndarray         # (n,) gCO2eq/kWh
    ledger: CostLedger
    ledger_snapshots: np.ndarray    # (n, 3) cumulative [energy_eur, co2_g, co2_eur]
    diagnostics: list[SolveDiagnostics | None] = field(default_factory=list)
    warm_start: np.ndarray | None = None

    @property
    def n_steps(self) -> int:
        return self.inputs.shape[0]

    @property
    def final_state(self) -> ClimateState:
        return ClimateState.from_array(self.states[-1])

    def carry(self) -> RunCarry:
        return RunCarry(step=int(round(self.timestamps[-1] / self.sample_time)),
                        state=self.states[-1].copy(),
                        ledger=copy.deepcopy(self.ledger),
                        warm_start=None if self.warm_start is None
                        else self.warm_start.copy())

    def revenue(self, econ, cultivated_area: float) -> float:
        """Biomass-change revenue since the run's own first state, EUR."""
        gain = ((self.states[-1, 9] - self.states[0, 9])
                + (self.states[-1, 10] - self.states[0, 10]))
        return econ.lettuce_price * cultivated_area / econ.dry_weight_fraction * gain

    def to_csv(self) -> str:
        """One row per step plus a final-state row (interval fields blank)."""
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(CSV_COLUMNS)
        n = self.n_steps
        for k in range(n + 1):
            t = self.timestamps[k]
            x = self.states[k]
            row = [f"{t:.1f}"] + [f"{v:.9g}" for v in x]
            row.append(f"{co2_ppm(x[8], x[1]):.4f}")
            if k < n:
                row += [f"{v:.6g}" for v in self.inputs[k]]
                row.append(f"{self.intensities[k]:.6g}")
                row += [f"{v:.9g}" for v in self.ledger_snapshots[k]]
            else:
                row += [""] * (len(ACTUATOR_ORDER) + 4)
            w.writerow(row)
        return buf.getvalue()


class _RunContext:
    """Internal view handed to policies (series access, offsets)."""

    def __init__(self, series: StepSeries, reduced_full: np.ndarray,
                 offset: int, n_steps: int):
        self.series = series
        self.reduced_full = reduced_full
        self.offset = offset
        self.n_steps = n_steps


def make_policy(config: ScenarioConfig, model: ClimateModel,
                pset: ParameterSet | None = None):
    """Policy object for the scenario's configured controller."""
    if config.control == NO_CONTROL:
        return NoControlPolicy()
    controller = NempcController(model=model, econ=config.economics,
                                 cfg=config.control,
                                 substeps=config.simulation.substeps)
    return NempcPolicy(controller=controller)


def run_scenario(config: ScenarioConfig, series: StepSeries, policy=None,
                 model: ClimateModel | None = None,
                 pset: ParameterSet | None = None,
                 carry: RunCarry | None = None,
                 n_steps: int | None = None,
                 progress=None) -> Trajectory:
    """Closed loop: sample exogenous → policy → plant step → ledger.

    `carry` resumes a previous run (state, ledger, warm start, step offset);
    `n_steps` limits this call to a partial segment. Deterministic for fixed
    inputs. Raises with the step index on a plausibility abort and on
    exogenous coverage gaps.
    """
    pset = pset or default_parameters()
    model = model or config.build_model(pset)
    policy = policy or make_policy(config, model, pset)
    sim = config.simulation

    offset = 0 if carry is None else carry.step
    total = config.n_steps
    if n_steps is None:
        n_steps = total - offset
    if offset + n_steps > total:
        raise ValidationError("n_steps", "segment exceeds the scenario duration")
    if carry is None and len(series) == 0:
        raise ValidationError("series", "need at least one exogenous sample")
    if len(series) < offset + n_steps:
        raise ValidationError(
            "series", f"exogenous data gap: run needs {offset + n_steps} steps, "
                      f"series has {len(series)}")

    packed = pack_model(model, dt=config.sample_time)
    reduced_full = np.array([reduce_external(p, model) for p in series.conditions])

    # Bill the ledger on the run's own cost basis: a controller that excludes
    # the social CO2 price is not charged for it in the books either, so
    # cross-run totals compare each strategy under its own economics.
    prices = config.economics
    if config.control != NO_CONTROL and not config.control.include_social_cost:
        prices = dataclasses.replace(prices, co2_price=0.0)

    if carry is None:
        x = default_initial_state(series.conditions[0], model, sim)
        ledger = CostLedger(specs=model.actuators)
    else:
        x = np.asarray(carry.state, dtype=float).copy()
        ledger = copy.deepcopy(carry.ledger)

    run = _RunContext(series, reduced_full, offset, n_steps)
    policy.start(run)
    if carry is not None and carry.warm_start is not None \
            and isinstance(policy, NempcPolicy):
        policy.controller._warm = carry.warm_start.copy()

    dt = config.sample_time
    states = np.zeros((n_steps + 1, 11))
    inputs = np.zeros((n_steps, len(ACTUATOR_ORDER)))
    exo = np.zeros((n_steps, 20))
    snapshots = np.zeros((n_steps, 3))
    diagnostics: list[SolveDiagnostics | None] = []
    states[0] = x
    _check_band(x, offset)

    for k in range(n_steps):
        i = offset + k
        p = series.conditions[i]
        i_co2 = float(series.intensities[i])
        u, diag = policy.step(k, x.copy(), run)
        inputs[k] = u.as_tuple()
        exo[k] = p.as_vector()
        diagnostics.append(diag)

        u_arr = np.asarray(u.as_tuple(), dtype=float)

        def f(y, _u=u_arr, _ex=reduced_full[i]):
            return K.rhs(y, _u, _ex, *packed.args)

        x = integrate_adaptive(f, x, dt, rtol=sim.rel_tol, atol=sim.abs_tol)
        _check_band(x, i)
        states[k + 1] = x

        ledger.step(u, dt, prices, i_co2)
        if diag is not None:
            ledger.add_solver(diag.wall_time, _solver_power(config),
                              prices, i_co2)
        snapshots[k] = (ledger.total_energy_eur, ledger.total_co2_g,
                        ledger.total_co2_eur)
        if progress is not None:
            progress((k + 1) / n_steps)

    warm = None
    if isinstance(policy, NempcPolicy):
        warm = policy.controller._warm

    t0 = offset * dt
    return Trajectory(
        start_time=config.start_time, sample_time=dt,
        timestamps=t0 + dt * np.arange(n_steps + 1),
        states=states, inputs=inputs, exogenous=exo,
        intensities=series.intensities[offset:offset + n_steps].copy(),
        ledger=ledger, ledger_snapshots=snapshots,
        diagnostics=diagnostics, warm_start=warm)


def _solver_power(config: ScenarioConfig) -> float:
    return config.control.solver_power if config.control != NO_CONTROL else 0.0


def result_document(traj: Trajectory, config: ScenarioConfig,
                    model: ClimateModel | None = None) -> dict:
    """Structured run result for the service and UI: summary economics in
    the ledger row layout plus chart-ready series."""
    if model is None:
        model = config.build_model(default_parameters())
    area = model.geometry.cultivated_area
    revenue = traj.revenue(config.economics, area)
    rows = traj.ledger.table_rows(revenue)
    ppm = [co2_ppm(c, t) for c, t in zip(traj.states[:, 8], traj.states[:, 1])]
    cum_profit = []
    rev_coef = (config.economics.lettuce_price * area
                / config.economics.dry_weight_fraction)
    for k in range(traj.n_steps):
        gain = ((traj.states[k + 1, 9] - traj.states[0, 9])
                + (traj.states[k + 1, 10] - traj.states[0, 10]))
        cum_profit.append(rev_coef * gain - traj.ledger_snapshots[k, 0]
                          - traj.ledger_snapshots[k, 2])
    n_degraded = sum(1 for d in traj.diagnostics
                     if d is not None and d.degraded)
    return {
        "schema": "greensim.result.v1",
        "start_time": config.start_time.astimezone(timezone.utc)
                          .isoformat().replace("+00:00", "Z"),
        "sample_time": config.sample_time,
        "n_steps": traj.n_steps,
        "controller": (NO_CONTROL if config.control == NO_CONTROL else
                       ("nempc-co2" if config.control.include_social_cost
                        else "nempc-eur")),
        "summary": {
            "rows": [{"label": lbl, "eur": val} for lbl, val in rows],
            "revenue_eur": revenue,
            "total_eur": traj.ledger.total(revenue),
            "energy_eur": traj.ledger.total_energy_eur,
            "co2_g": traj.ledger.total_co2_g,
            "co2_eur": traj.ledger.total_co2_eur,
            "final_sdw": float(traj.states[-1, 9]),
            "final_nsdw": float(traj.states[-1, 10]),
            "degraded_solves": n_degraded,
        },
        "series": {
            "time_s": traj.timestamps.tolist(),
            "states": {name: traj.states[:, i].tolist()
                       for i, name in enumerate(STATE_ORDER)},
            "co2_ppm": ppm,
            "inputs": {f"u_{k}": traj.inputs[:, i].tolist()
                       for i, k in enumerate(ACTUATOR_ORDER)},
            "carbon_intensity": traj.intensities.tolist(),
            "cumulative_profit_eur": cum_profit,
            "external": {
                "T_ext": traj.exogenous[:, 0].tolist(),
                "v_wind": traj.exogenous[:, 2].tolist(),
                "H_rel": traj.exogenous[:, 3].tolist(),
                "poa_total": np.sum(traj.exogenous[:, 4:20], axis=1).tolist(),
            },
        },
        "ledger_detail_csv": traj.ledger.detail_csv(),
    }
