"""Direct integration of the Lorentz force, independent of the first integrals.

The oracle never uses the conserved quantities the quadrature route is
built on; it steps (x, y, vx, vy) with an embedded Runge-Kutta 5(4) pair
and samples the accepted steps by cubic Hermite interpolation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import kernels
from .dynamics import ParticleParams, derive_constants
from .errors import ConfigError, DomainError, IntegrationFailure
from .fields import FieldProfile, GaugeAxis, eval_B
from .trajectory import Method, Trajectory, build_trajectory, hermite_interpolate

__all__ = [
    "OdeSettings",
    "DenseSolution",
    "DeviationReport",
    "acceleration",
    "integrate",
    "integrate_dense",
    "compare",
    "zero_crossing_period",
    "dense_crossing_period",
]

_AXIS_CODE = {GaugeAxis.Y_GAUGE: 0, GaugeAxis.X_GAUGE: 1, GaugeAxis.RADIAL: 2}


@dataclass(frozen=True)
class OdeSettings:
    dt_initial: float = 0.0  # 0 picks a starting step automatically
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_steps: int = 2_000_000

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ConfigError("ODE tolerances must be positive")
        if not (self.dt_initial >= 0 and math.isfinite(self.dt_initial)):
            raise ConfigError("dt_initial must be finite and non-negative")
        if self.max_steps < 1:
            raise ConfigError("max_steps must be at least 1")


def _coordinate(profile: FieldProfile, x, y):
    if profile.axis is GaugeAxis.Y_GAUGE:
        return y
    if profile.axis is GaugeAxis.X_GAUGE:
        return x
    return math.hypot(x, y)


def acceleration(profile: FieldProfile, params: ParticleParams, state):
    """(ax, ay) = (q/m) (vy Bz, -vx Bz)."""
    x, y, vx, vy = (float(v) for v in state)
    bz = float(eval_B(profile, _coordinate(profile, x, y)))
    w = params.qm * bz
    return w * vy, -w * vx


@dataclass
class DenseSolution:
    """Accepted steps of one integration, with Hermite dense output."""

    ts: np.ndarray
    ys: np.ndarray
    fs: np.ndarray
    status: int

    @property
    def t_end(self) -> float:
        return float(self.ts[-1])

    def __call__(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if len(self.ts) == 1:
            return np.repeat(self.ys[:1], len(t), axis=0)
        return hermite_interpolate(self.ts, self.ys, self.fs, t)


def _kernel_args(profile: FieldProfile):
    if profile.kernel is not None:
        code, p0, p1 = profile.kernel
        return int(code), float(p0), float(p1), None
    b0 = profile.b0
    shape = profile.field_shape
    return -1, 0.0, 0.0, lambda u: b0 * float(shape(u))


def integrate_dense(profile: FieldProfile, params: ParticleParams, t_end: float,
                    settings: OdeSettings = OdeSettings()) -> DenseSolution:
    """Integrate to ``t_end``; raise IntegrationFailure (with the partial run) on failure."""
    if not (t_end > 0 and math.isfinite(t_end)):
        raise ConfigError("t_end must be positive and finite")
    state0 = (params.x0, params.y0, params.vx0, params.vy0)
    acceleration(profile, params, state0)  # domain check at the start
    code, p0, p1, bz = _kernel_args(profile)
    ts, ys, fs, status = kernels.dopri5(code, p0, p1, _AXIS_CODE[profile.axis], params.qm,
                                        state0, float(t_end), settings.rel_tol,
                                        settings.abs_tol, settings.dt_initial,
                                        int(settings.max_steps), bz)
    sol = DenseSolution(ts, ys, fs, status)
    if status != kernels.OK:
        raise IntegrationFailure(
            f"ODE oracle stopped at t={sol.t_end:.6g}: {kernels.STATUS_TEXT[status]}",
            partial=sol)
    return sol


def integrate(profile: FieldProfile, params: ParticleParams, t_end: float,
              settings: OdeSettings = OdeSettings(), n_samples: int = 1001,
              t_samples=None) -> Trajectory:
    """Oracle trajectory on a uniform grid (or on ``t_samples``)."""
    if t_samples is None:
        if n_samples < 2:
            raise ConfigError("n_samples must be at least 2")
        t_samples = np.linspace(0.0, t_end, int(n_samples))
    t = np.asarray(t_samples, dtype=float)
    try:
        sol = integrate_dense(profile, params, t_end, settings)
    except IntegrationFailure as exc:
        part = exc.partial
        if part is not None:
            keep = t[t <= part.t_end]
            if len(keep):
                exc.partial = _to_trajectory(part, profile, params, keep, settings)
        raise
    return _to_trajectory(sol, profile, params, t, settings)


def _to_trajectory(sol, profile, params, t, settings):
    ys = sol(t)
    constants = derive_constants(params, profile)
    meta = {"rel_tol": settings.rel_tol, "abs_tol": settings.abs_tol,
            "steps": int(len(sol.ts) - 1), "backend": kernels.BACKEND}
    return build_trajectory(t, ys[:, 0], ys[:, 1], ys[:, 2], ys[:, 3], Method.ODE_ORACLE,
                            profile, params.qm, constants, meta)


@dataclass
class DeviationReport:
    max_position_deviation: float
    rms_position_deviation: float
    max_energy_residual_difference: float
    time_of_max_deviation: float
    n_compared: int

    def as_dict(self):
        return dict(self.__dict__)


def _resample(tr: Trajectory, t):
    if len(tr.t) == len(t) and np.array_equal(tr.t, t):
        return tr.x, tr.y, tr.energy_residual
    return (np.interp(t, tr.t, tr.x), np.interp(t, tr.t, tr.y),
            np.interp(t, tr.t, tr.energy_residual))


def compare(a: Trajectory, b: Trajectory) -> DeviationReport:
    """Position and energy deviations of ``b`` from ``a`` on the overlap.

    Samples of ``a`` inside the common time range are the comparison grid;
    ``b`` is linearly resampled when its grid differs.  Use matching grids
    for accuracy-critical comparisons.
    """
    lo = max(a.t[0], b.t[0])
    hi = min(a.t[-1], b.t[-1])
    if hi < lo:
        raise ConfigError("trajectories have disjoint time ranges")
    mask = (a.t >= lo) & (a.t <= hi)
    t = a.t[mask]
    xb, yb, eb = _resample(b, t)
    dev = np.hypot(a.x[mask] - xb, a.y[mask] - yb)
    k = int(np.argmax(dev))
    return DeviationReport(
        float(dev[k]), float(np.sqrt(np.mean(dev * dev))),
        float(np.max(np.abs(a.energy_residual[mask] - eb))), float(t[k]), int(len(t)))


def zero_crossing_period(t, signal):
    """Mean spacing of upward crossings of the mid-range level of ``signal``.

    Crossing times are located by linear interpolation on the samples; use a
    dense time grid (or a dense solution) for high accuracy.
    """
    t = np.asarray(t, dtype=float)
    s = np.asarray(signal, dtype=float)
    s = s - 0.5 * (s.max() + s.min())
    up = np.nonzero((s[:-1] < 0) & (s[1:] >= 0))[0]
    if len(up) < 2:
        raise DomainError("fewer than two upward crossings: no period detected")
    tc = t[up] - s[up] * (t[up + 1] - t[up]) / (s[up + 1] - s[up])
    return float((tc[-1] - tc[0]) / (len(tc) - 1))


def dense_crossing_period(sol: DenseSolution, component: int = 1, level=None):
    """Period from upward crossings of one state component, refined by brentq on the dense output."""
    vals = sol.ys[:, component]
    if level is None:
        level = 0.5 * (vals.max() + vals.min())
    s = vals - level
    up = np.nonzero((s[:-1] < 0) & (s[1:] >= 0))[0]
    if len(up) < 2:
        raise DomainError("fewer than two upward crossings: no period detected")
    times = []
    for i in up:
        a, b = sol.ts[i], sol.ts[i + 1]
        times.append(brentq(lambda tt: float(sol(tt)[0, component]) - level, a, b,
                            xtol=1e-14, rtol=1e-15))
    times = np.asarray(times)
    return float((times[-1] - times[0]) / (len(times) - 1)), times
