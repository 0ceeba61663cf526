"""Economic model-predictive control over the greenhouse control model.

Each sampling instant builds a finite-horizon optimal control problem by
direct single shooting — piecewise-constant moves, hold-after-control-horizon
— and solves it with a projected scalar-quasi-Newton (Barzilai–Borwein)
descent under a monotone backtracking line search. Control bounds are hard
(projection); state bounds enter as quadratic penalties. The stage cost is
economic: negative lettuce revenue plus actuation cost, optionally including
the social cost of grid CO₂.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from greensim import _kernels as K
from greensim import actuators as act_mod
from greensim.actuators import ActuatorSpec
from greensim.climate import (
    ClimateModel,
    ClimateState,
    ExternalConditions,
    PackedModel,
    pack_model,
    reduce_external,
)
from greensim.params import ACTUATOR_ORDER, ControlInput, EconomicParams, ValidationError

N_ACT = len(ACTUATOR_ORDER)


@dataclass(frozen=True)
class NempcConfig:
    """Horizon, bounds, flags and solver knobs of the controller."""

    horizon_steps: int = 30
    control_steps: int = 30
    sample_time: float = 120.0
    u_min: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)
    u_max: tuple[float, float, float, float] = (100.0, 100.0, 100.0, 100.0)
    temp_min: float = 273.15        # soft bound, all compartment temperatures
    temp_max: float = 313.15
    co2_ppm_max: float = 1600.0
    include_social_cost: bool = True
    penalty_weight: float = 10.0
    max_iterations: int = 40
    gradient_tol: float = 1e-4
    step_tol: float = 1e-10
    gradient_method: str = "adjoint"   # adjoint | fd
    fd_step: float = 1e-4              # FD step as a fraction of each box range
    solver_power: float = 20.0         # W attributed to the solve itself

    def __post_init__(self):
        if self.horizon_steps < 1:
            raise ValidationError("horizon_steps", "must be >= 1")
        if not 1 <= self.control_steps <= self.horizon_steps:
            raise ValidationError("control_steps", "must lie in [1, horizon_steps]")
        if self.sample_time <= 0:
            raise ValidationError("sample_time", "must be strictly positive")
        lo, hi = np.asarray(self.u_min, float), np.asarray(self.u_max, float)
        if lo.shape != (N_ACT,) or hi.shape != (N_ACT,):
            raise ValidationError("u_min", f"need {N_ACT} per-actuator bounds")
        if np.any(lo > hi):
            raise ValidationError("u_min", "must be elementwise <= u_max")
        if self.temp_min > self.temp_max:
            raise ValidationError("temp_min", "must be <= temp_max")
        if self.gradient_method not in ("adjoint", "fd"):
            raise ValidationError("gradient_method", "must be 'adjoint' or 'fd'")
        for f in ("penalty_weight", "gradient_tol", "step_tol", "fd_step",
                  "solver_power"):
            if getattr(self, f) < 0:
                raise ValidationError(f, "must be nonnegative")
        if self.max_iterations < 1:
            raise ValidationError("max_iterations", "must be >= 1")


@dataclass(frozen=True)
class StageCost:
    """One stage of the economic objective, EUR."""

    revenue: float
    actuation: float

    @property
    def total(self) -> float:
        return -self.revenue + self.actuation


def revenue(x_t: ClimateState, x_0: ClimateState, econ: EconomicParams,
            cultivated_area: float) -> float:
    """Lettuce revenue of the biomass gained since x_0, EUR.

    Fresh-weight price over dry-weight fraction converts the dry-weight
    change (g/m², both pools) to EUR/m².
    """
    gain = (x_t.x_sdw - x_0.x_sdw) + (x_t.x_nsdw - x_0.x_nsdw)
    return econ.lettuce_price * cultivated_area / econ.dry_weight_fraction * gain


def stage_cost(x_t: ClimateState, x_0: ClimateState, u_t: ControlInput, dt: float,
               econ: EconomicParams, i_co2: float,
               specs: dict[str, ActuatorSpec], cultivated_area: float,
               include_social_cost: bool = True) -> StageCost:
    """Stage cost l_t = −R(t) + C_u(t) for one sampling interval."""
    c_u = 0.0
    for kind in ACTUATOR_ORDER:
        u_i = getattr(u_t, kind)
        c_u += act_mod.energy_cost(u_i, dt, econ.energy_price, specs[kind])
        if include_social_cost:
            c_u += act_mod.social_cost(u_i, dt, i_co2, econ.co2_price, specs[kind])
    return StageCost(revenue=revenue(x_t, x_0, econ, cultivated_area), actuation=c_u)


def fd_gradient(fun, u_flat: np.ndarray, h: float) -> np.ndarray:
    """Central-difference gradient of fun at u_flat with absolute step h."""
    g = np.zeros_like(u_flat)
    for i in range(u_flat.size):
        up = u_flat.copy()
        um = u_flat.copy()
        up[i] += h
        um[i] -= h
        g[i] = (fun(up) - fun(um)) / (2.0 * h)
    return g


@dataclass(frozen=True)
class SolveDiagnostics:
    iterations: int
    objective: float
    gradient_norm: float      # infinity norm of the projected gradient
    max_violation: float      # largest per-step state-bound penalty, EUR
    wall_time: float          # s
    degraded: bool            # tolerance not reached within max_iterations
    evaluations: int          # objective evaluations (line search included)


@dataclass(frozen=True)
class SolveResult:
    u_first: ControlInput
    u_sequence: np.ndarray        # (control_steps, 4) percent
    trajectory: np.ndarray        # (N+1, 11) predicted states
    diagnostics: SolveDiagnostics


@dataclass
class NempcController:
    """Receding-horizon wrapper: packs the model once, carries the warm start."""

    model: ClimateModel
    econ: EconomicParams
    cfg: NempcConfig = field(default_factory=NempcConfig)
    substeps: int = 12

    def __post_init__(self):
        cfg = self.cfg
        self._packed: PackedModel = pack_model(
            self.model, dt=cfg.sample_time,
            energy_price=self.econ.energy_price,
            co2_price=self.econ.co2_price if cfg.include_social_cost else 0.0,
            revenue_coefficient=(self.econ.lettuce_price
                                 * self.model.geometry.cultivated_area
                                 / self.econ.dry_weight_fraction),
            penalty_weight=cfg.penalty_weight,
            t_min=cfg.temp_min, t_max=cfg.temp_max,
            co2_ppm_max=cfg.co2_ppm_max)
        self._warm: np.ndarray | None = None

    # -- forecast plumbing ------------------------------------------------

    def reduce_forecast(self, forecast) -> np.ndarray:
        """Accept a list of ExternalConditions or a pre-reduced (N, 6) array."""
        n = self.cfg.horizon_steps
        if isinstance(forecast, np.ndarray):
            if forecast.shape[0] < n or forecast.shape[1] != 6:
                raise ValidationError("forecast", f"need at least {n} reduced rows")
            return np.ascontiguousarray(forecast[:n], dtype=float)
        if len(forecast) < n:
            raise ValidationError("forecast", f"need at least {n} steps")
        return np.array([reduce_external(p, self.model) for p in forecast[:n]])

    def objective(self, x0: np.ndarray, u_seq: np.ndarray, ex_seq: np.ndarray,
                  i_co2_seq: np.ndarray) -> float:
        pm = self._packed
        obj, _, _ = K.shooting_objective(
            x0, np.ascontiguousarray(u_seq, dtype=float), ex_seq, i_co2_seq,
            self.cfg.horizon_steps, self.substeps, pm.pp, pm.caps, pm.pw,
            *pm.args[2:])
        return float(obj)

    def gradient(self, x0: np.ndarray, u_seq: np.ndarray, ex_seq: np.ndarray,
                 i_co2_seq: np.ndarray) -> tuple[float, np.ndarray]:
        """Objective and gradient via the configured method."""
        pm = self._packed
        cfg = self.cfg
        if cfg.gradient_method == "adjoint":
            obj, grad, ok = K.shooting_gradient(
                x0, np.ascontiguousarray(u_seq, dtype=float), ex_seq, i_co2_seq,
                cfg.horizon_steps, self.substeps, pm.pp, pm.caps, pm.pw,
                *pm.args[2:])
            if not ok:
                return K.BIG, np.zeros((cfg.control_steps, N_ACT))
            return float(obj), grad
        shape = (cfg.control_steps, N_ACT)
        h = cfg.fd_step * (np.asarray(cfg.u_max) - np.asarray(cfg.u_min))
        h = np.where(h > 0, h, cfg.fd_step * 100.0)
        obj = self.objective(x0, u_seq, ex_seq, i_co2_seq)
        grad = np.zeros(shape)
        for t in range(shape[0]):
            for j in range(shape[1]):
                up = u_seq.copy()
                um = u_seq.copy()
                up[t, j] += h[j]
                um[t, j] -= h[j]
                grad[t, j] = (self.objective(x0, up, ex_seq, i_co2_seq)
                              - self.objective(x0, um, ex_seq, i_co2_seq)) / (2 * h[j])
        return obj, grad

    # -- the solve ---------------------------------------------------------

    def solve(self, x_now, forecast, i_co2_seq=None,
              warm_start: np.ndarray | None = None) -> SolveResult:
        """One receding-horizon solve; returns the first move.

        The returned objective never exceeds the warm start's or the u ≡ 0
        candidate's. A solve that exhausts max_iterations above tolerance is
        flagged degraded, never raised.
        """
        t_start = time.perf_counter()
        cfg = self.cfg
        pm = self._packed
        if isinstance(x_now, ClimateState):
            x0 = x_now.as_array()
        else:
            x0 = np.asarray(x_now, dtype=float)
        ex_seq = self.reduce_forecast(forecast)
        if i_co2_seq is None:
            i_co2_seq = np.zeros(cfg.horizon_steps)
        else:
            i_co2_seq = np.asarray(i_co2_seq, dtype=float)[:cfg.horizon_steps]

        lo = np.broadcast_to(np.asarray(cfg.u_min, float), (cfg.control_steps, N_ACT))
        hi = np.broadcast_to(np.asarray(cfg.u_max, float), (cfg.control_steps, N_ACT))

        if warm_start is None:
            warm_start = self._warm
        if warm_start is None:
            warm_start = np.zeros((cfg.control_steps, N_ACT))
        u_warm = np.clip(np.asarray(warm_start, float), lo, hi)
        u_zero = np.clip(np.zeros((cfg.control_steps, N_ACT)), lo, hi)

        n_evals = 0

        def f(u):
            nonlocal n_evals
            n_evals += 1
            return self.objective(x0, u, ex_seq, i_co2_seq)

        j_warm = f(u_warm)
        j_zero = f(u_zero)
        if j_zero < j_warm:
            u, j_u = u_zero.copy(), j_zero
        else:
            u, j_u = u_warm.copy(), j_warm

        # projected Barzilai-Borwein descent, monotone Armijo backtracking
        j_u_cur, g = self.gradient(x0, u, ex_seq, i_co2_seq)
        if j_u_cur < K.BIG:
            j_u = j_u_cur
        alpha = None
        iterations = 0
        degraded = True
        pg_norm = np.inf
        for it in range(cfg.max_iterations):
            iterations = it + 1
            pg = u - np.clip(u - g, lo, hi)
            pg_norm = float(np.max(np.abs(pg)))
            if pg_norm <= cfg.gradient_tol:
                degraded = False
                break
            if alpha is None:
                gmax = float(np.max(np.abs(g)))
                alpha = 10.0 / gmax if gmax > 0 else 1.0
            alpha = min(max(alpha, 1e-4), 1e8)
            trial = np.clip(u - alpha * g, lo, hi)
            d = trial - u
            slope = float(np.sum(g * d))
            theta = 1.0
            accepted = False
            for _ in range(40):
                u_new = u + theta * d
                j_new = f(u_new)
                if j_new <= j_u + 1e-4 * theta * slope:
                    accepted = True
                    break
                theta *= 0.5
            if not accepted:
                break  # stalled: keep best iterate, stay degraded
            step = theta * d
            if float(np.max(np.abs(step))) <= cfg.step_tol:
                u, j_u = u_new, j_new
                degraded = False
                break
            j_old_grad = g
            u, j_u = u_new, j_new
            _, g = self.gradient(x0, u, ex_seq, i_co2_seq)
            y = (g - j_old_grad).ravel()
            s = step.ravel()
            sy = float(np.dot(s, y))
            alpha = float(np.dot(s, s)) / sy if sy > 1e-16 else None

        obj, traj, max_viol = K.shooting_objective(
            x0, u, ex_seq, i_co2_seq, cfg.horizon_steps, self.substeps,
            pm.pp, pm.caps, pm.pw, *pm.args[2:])
        wall = time.perf_counter() - t_start
        # shifted warm start for the next instant: drop first, repeat last
        self._warm = np.vstack([u[1:], u[-1:]]) if cfg.control_steps > 1 else u.copy()
        diag = SolveDiagnostics(
            iterations=iterations, objective=float(obj), gradient_norm=pg_norm,
            max_violation=float(max_viol), wall_time=wall, degraded=degraded,
            evaluations=n_evals)
        return SolveResult(
            u_first=ControlInput.from_sequence(u[0]),
            u_sequence=u.copy(), trajectory=traj, diagnostics=diag)

    def reset(self) -> None:
        """Forget the carried warm start (new closed-loop run)."""
        self._warm = None
