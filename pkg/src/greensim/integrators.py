"""Time-stepping utilities: fixed-step classical RK4 and an adaptive
embedded Runge-Kutta wrapper.

The fixed-step path is the control-model integrator (deterministic,
differentiable); the adaptive path is the plant integrator. Both accept a
plain ``f(x) -> dx/dt`` callable so they stay decoupled from the climate
model; the simulator module wires the two together.
"""

from __future__ import annotations

from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp

RhsFn = Callable[[np.ndarray], np.ndarray]


def rk4_step(f: RhsFn, x: np.ndarray, h: float) -> np.ndarray:
    """One classical fourth-order Runge-Kutta step of size h."""
    k1 = f(x)
    k2 = f(x + 0.5 * h * k1)
    k3 = f(x + 0.5 * h * k2)
    k4 = f(x + h * k3)
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate_fixed(f: RhsFn, x: np.ndarray, dt: float, substeps: int = 12) -> np.ndarray:
    """Advance x by dt using `substeps` equal RK4 steps."""
    if substeps < 1:
        raise ValueError(f"substeps must be >= 1, got {substeps}")
    h = dt / substeps
    y = np.asarray(x, dtype=float)
    for _ in range(substeps):
        y = rk4_step(f, y, h)
    return y


def integrate_adaptive(f: RhsFn, x: np.ndarray, dt: float,
                       rtol: float = 1e-6, atol: float = 1e-6) -> np.ndarray:
    """Advance x by dt with an adaptive embedded RK pair (RK45)."""
    sol = solve_ivp(lambda _t, y: f(y), (0.0, dt), np.asarray(x, dtype=float),
                    method="RK45", rtol=rtol, atol=atol, dense_output=False)
    if not sol.success:  # pragma: no cover - solve_ivp failure is pathological here
        raise RuntimeError(f"adaptive integration failed: {sol.message}")
    return sol.y[:, -1]


def convergence_order(f: RhsFn, x0: np.ndarray, dt: float, substeps: int = 4) -> float:
    """Empirical error ratio err(h)/err(h/2) for the fixed RK4 scheme.

    A fourth-order method gives a ratio near 16. The reference solution
    uses 8x the finer resolution, which is accurate enough to attribute
    the remaining error to the coarse grids.
    """
    ref = integrate_fixed(f, x0, dt, substeps * 16)
    coarse = integrate_fixed(f, x0, dt, substeps)
    fine = integrate_fixed(f, x0, dt, substeps * 2)
    scale = np.maximum(np.abs(ref), 1.0)
    e1 = float(np.max(np.abs(coarse - ref) / scale))
    e2 = float(np.max(np.abs(fine - ref) / scale))
    if e2 == 0.0:
        raise ValueError("step size too small to measure convergence order")
    return e1 / e2
