"""Classical explicit RK4 method-of-lines stepping with the fractional CFL rule.

The step size follows dt = cfl_c * dx_min^alpha unless overridden; the final
partial step is shortened so runs land exactly on T, and snapshot times are
hit exactly by the same mechanism.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np


class IntegrationError(RuntimeError):
    """Raised when a stage or state stops being finite."""


@dataclass(frozen=True)
class RunControl:
    t0: float
    T: float
    cfl_c: float = 0.1
    dt_override: Optional[float] = None
    snapshot_times: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if not self.T > self.t0:
            raise ValueError(f"need T > t0, got ({self.t0}, {self.T})")
        if not 0.0 < self.cfl_c < 1.0:
            raise ValueError(f"cfl_c must lie in (0, 1), got {self.cfl_c}")
        if self.dt_override is not None and self.dt_override <= 0:
            raise ValueError("dt_override must be positive")


def erk4_step(rhs: Callable, state: np.ndarray, t: float, dt: float) -> np.ndarray:
    """One classical four-stage RK4 step from t to t + dt."""
    if dt <= 0:
        raise ValueError(f"step size must be positive, got {dt}")
    k1 = rhs(t, state)
    k2 = rhs(t + 0.5 * dt, state + 0.5 * dt * k1)
    k3 = rhs(t + 0.5 * dt, state + 0.5 * dt * k2)
    k4 = rhs(t + dt, state + dt * k3)
    out = state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(out)):
        raise IntegrationError(f"non-finite state after step at t = {t:.6g}, dt = {dt:.3g}")
    return out


def cfl_timestep(control: RunControl, dx_min: float, alpha: float,
                 dt_cap: Optional[float] = None) -> float:
    if control.dt_override is not None:
        return control.dt_override
    dt = control.cfl_c * dx_min**alpha
    if dt_cap is not None:
        dt = min(dt, dt_cap)
    return dt


def integrate(
    rhs: Callable,
    state0: np.ndarray,
    control: RunControl,
    dx_min: float,
    alpha: float,
    observer: Optional[Callable[[float, np.ndarray], None]] = None,
    dt_cap: Optional[float] = None,
):
    """March state0 from t0 to T; returns (state, snapshots, dt, n_steps).

    Snapshot times are landed on exactly by shortening the step; snapshots
    maps each requested time to a copy of the state there.  ``dt_cap``
    bounds the CFL-rule step where the spatial operator's measured spectral
    radius demands it (an explicit override is taken literally).
    """
    dt = cfl_timestep(control, dx_min, alpha, dt_cap)
    if dt <= 0:
        raise IntegrationError("computed time step is not positive")

    events = sorted(t for t in set(control.snapshot_times) if control.t0 < t <= control.T)
    events.append(control.T)

    state = np.array(state0, dtype=float, copy=True)
    t = control.t0
    n_steps = 0
    snapshots = {}
    if observer is not None:
        observer(t, state)

    for target in events:
        while t < target - 1e-13 * max(1.0, abs(target)):
            step = min(dt, target - t)
            state = erk4_step(rhs, state, t, step)
            t += step
            n_steps += 1
            if observer is not None:
                observer(t, state)
        t = target
        if target < control.T or target in control.snapshot_times:
            snapshots[target] = state.copy()
    return state, snapshots, dt, n_steps
