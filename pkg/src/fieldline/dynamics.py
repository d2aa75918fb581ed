"""Planar motion in a Landau-gauge shape-function field by quadrature.

The cyclic coordinate gives a first integral for the companion velocity,

    Y gauge:  vx = k1 + k2 y f(y)          X gauge:  vy = k1 - k2 x f(x)

and energy conservation leaves a one-dimensional problem for the motion
coordinate u (y or x):

    (du/dt)^2 = g(u) = k3 - (k1 + s k2 u f(u))^2,    s = +1 (Y), -1 (X).

Time follows from t(u) = int du / sqrt(g).  Between two simple turning points
a < b we substitute u = c + h cos(phi); the integrand sqrt((u-a)(b-u)/g) is
then smooth and even in phi, so its cosine series integrates term by term and
t(phi) is known spectrally for all phi.  Open motion (zero or one turning
point) is tabulated on Gauss-Legendre panels in s, with u = a + s^2 next to a
turning point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import fft, integrate, optimize

from .errors import (ConfigError, DegenerateTurningPointError, DomainError,
                     ForbiddenStartError, NumericError)
from .fields import FieldProfile, GaugeAxis, ProfileKind
from .trajectory import Method, Trajectory, build_trajectory, motion_invariant

__all__ = [
    "ParticleParams",
    "MotionConstants",
    "ExpClosedFormConstants",
    "TurningPoint",
    "TurningPointReport",
    "OrbitInfo",
    "derive_constants",
    "params_from_constants",
    "rest_coordinate",
    "radicand",
    "turning_points",
    "analyze_orbit",
    "trajectory_quadrature",
    "closed_form_uniform",
    "closed_form_exponential",
    "closed_form_zero_field",
    "closed_form_trajectory",
    "companion_coordinate",
    "exp_closed_form_constants",
]

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)
_GL_NODES_LO, _GL_WEIGHTS_LO = np.polynomial.legendre.leggauss(12)


@dataclass(frozen=True)
class ParticleParams:
    q: float = 1.0
    m: float = 1.0
    x0: float = 0.0
    y0: float = 0.0
    vx0: float = 0.0
    vy0: float = 0.0

    def __post_init__(self):
        for name in ("q", "m", "x0", "y0", "vx0", "vy0"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"particle parameter {name} must be finite")
        if self.m <= 0:
            raise ConfigError("particle mass must be positive")

    @property
    def qm(self) -> float:
        return self.q / self.m


@dataclass(frozen=True)
class MotionConstants:
    """k1 = conserved momentum / m, k2 = q b0 / m, k3 = 2H/m = v^2."""

    k1: float
    k2: float
    k3: float


@dataclass(frozen=True)
class ExpClosedFormConstants:
    alpha2: float
    beta: float
    l: float
    m_aux: float

    @property
    def alpha(self) -> float:
        return math.sqrt(self.alpha2)


@dataclass(frozen=True)
class TurningPoint:
    u: float
    kind: str  # "simple" or "double"


@dataclass
class TurningPointReport:
    roots: list
    flag: Optional[str] = None  # None, "DEGENERATE" or "UNBOUNDED_OR_FORBIDDEN"

    @property
    def values(self):
        return [r.u for r in self.roots]


@dataclass
class OrbitInfo:
    """Shape of the motion-coordinate orbit for given initial data."""

    kind: str  # "periodic", "one_turning_point", "free", "stationary"
    turning_points: tuple
    period: Optional[float] = None
    details: dict = field(default_factory=dict)


def _gauge_sign(profile: FieldProfile) -> int:
    if profile.axis is GaugeAxis.Y_GAUGE:
        return 1
    if profile.axis is GaugeAxis.X_GAUGE:
        return -1
    raise ConfigError("quadrature and closed forms need a Landau gauge (Y_GAUGE or X_GAUGE)")


def derive_constants(params: ParticleParams, profile: FieldProfile) -> MotionConstants:
    """Motion constants from initial data.

    For the radial gauge k1 is the canonical angular momentum per mass.
    """
    k2 = params.qm * profile.b0
    k3 = params.vx0 ** 2 + params.vy0 ** 2
    with np.errstate(all="ignore"):
        k1 = float(motion_invariant(profile, params.qm, params.x0, params.y0,
                                    params.vx0, params.vy0))
    if not math.isfinite(k1):
        raise DomainError(f"{profile.label}: gauge potential is singular at the initial point")
    return MotionConstants(k1, k2, k3)


def radicand(constants: MotionConstants, profile: FieldProfile, u):
    """g(u) = k3 - (k1 + s k2 u f(u))^2, the squared motion-coordinate speed."""
    return _Radicand(constants, profile).g(u)


class _Radicand:
    def __init__(self, constants: MotionConstants, profile: FieldProfile):
        self.c = constants
        self.profile = profile
        self.s = _gauge_sign(profile)
        self.sqk3 = math.sqrt(constants.k3)

    def P(self, u):
        """Companion velocity at motion coordinate u."""
        with np.errstate(all="ignore"):
            return self.c.k1 + self.s * self.c.k2 * np.asarray(self.profile.gauge_potential(u))

    def dP(self, u):
        with np.errstate(all="ignore"):
            return self.s * self.c.k2 * np.asarray(self.profile.gauge_potential_prime(u))

    def factors(self, u):
        p = self.P(u)
        return self.sqk3 - p, self.sqk3 + p

    def g(self, u):
        fp, fm = self.factors(u)
        out = fp * fm
        return float(out) if np.ndim(out) == 0 else out


def params_from_constants(constants: MotionConstants, profile: FieldProfile, u0: float,
                          w0: float = 0.0, direction: int = 1, q: float = 1.0,
                          m: float = 1.0) -> ParticleParams:
    """Initial data reproducing ``constants`` with the motion coordinate at u0.

    ``direction`` picks the sign of the motion-coordinate velocity.  The
    profile's b0 must satisfy q b0 / m = k2.
    """
    s = _gauge_sign(profile)
    if not math.isclose(q * profile.b0 / m, constants.k2, rel_tol=1e-12, abs_tol=1e-300):
        raise ConfigError("profile b0 is inconsistent with k2 = q b0 / m")
    rad = _Radicand(constants, profile)
    g0 = rad.g(u0)
    if not math.isfinite(g0):
        raise DomainError(f"{profile.label}: gauge potential singular at u0={u0}")
    if g0 < -1e-12 * max(constants.k3, 1e-300):
        raise ForbiddenStartError(f"u0={u0} is classically forbidden (g={g0:.3e})")
    vu = math.copysign(math.sqrt(max(g0, 0.0)), direction)
    vw = float(rad.P(u0))
    if s == 1:
        return ParticleParams(q, m, x0=w0, y0=u0, vx0=vw, vy0=vu)
    return ParticleParams(q, m, x0=u0, y0=w0, vx0=vu, vy0=vw)


def rest_coordinate(constants: MotionConstants, profile: FieldProfile, span: float = 50.0) -> float:
    """Motion coordinate where the companion velocity vanishes, nearest to 0.

    The radicand peaks there at k3, so it is always an allowed start.  Falls
    back to 0 when no such point is found in [-span, span] and 0 is allowed.
    """
    rad = _Radicand(constants, profile)
    u = np.linspace(-span, span, 20001)
    with np.errstate(all="ignore"):
        P = np.asarray(rad.P(u), dtype=float)
    ok = np.isfinite(P[:-1]) & np.isfinite(P[1:])
    idx = np.nonzero(ok & (np.sign(P[:-1]) * np.sign(P[1:]) <= 0))[0]
    if len(idx):
        i = idx[np.argmin(np.abs(u[idx]))]
        if P[i] == 0.0:
            return float(u[i])
        return float(optimize.brentq(lambda v: float(rad.P(v)), u[i], u[i + 1], xtol=1e-15))
    with np.errstate(all="ignore"):
        g0 = float(rad.g(0.0))
    if math.isfinite(g0) and g0 >= 0:
        return 0.0
    raise ConfigError("no allowed start found; give the start coordinate explicitly")


def _length_scale(constants: MotionConstants) -> float:
    if constants.k2 != 0.0:
        return max(math.sqrt(constants.k3) / abs(constants.k2), 1e-8)
    return 1.0


def _barriers(profile: FieldProfile):
    """Singular points of u f(u) (where the gauge potential blows up)."""
    out = []
    for s in profile.singularities:
        with np.errstate(all="ignore"):
            val = np.asarray(profile.gauge_potential(np.array([s])))[0]
        if not np.isfinite(val):
            out.append(s)
    return out


def _refine_root(rad: _Radicand, ua: float, ub: float) -> float:
    """Root of g between ua (allowed) and ub (forbidden) on the vanishing factor."""
    fa = rad.factors(ua)
    fb = rad.factors(ub)
    idx = 0 if fb[0] <= 0 else 1
    if fb[idx] == 0.0:
        return ub
    if fa[idx] <= 0.0:
        return ua

    def factor(u):
        return float(rad.factors(u)[idx])

    return optimize.brentq(factor, ua, ub, xtol=1e-300, rtol=4 * np.finfo(float).eps,
                           maxiter=500)


def _check_tangency(rad: _Radicand, u_lo: float, u_hi: float, k3: float):
    """Minimum of g on [u_lo, u_hi]; raise on a double root, return a root if g < 0."""
    res = optimize.minimize_scalar(rad.g, bounds=(min(u_lo, u_hi), max(u_lo, u_hi)),
                                   method="bounded", options={"xatol": 1e-14})
    gmin = float(res.fun)
    if abs(gmin) <= 1e-11 * k3:
        raise DegenerateTurningPointError(
            f"double turning point near u={res.x:.12g}; use the ODE oracle")
    return res.x if gmin < 0 else None


def _scan(rad: _Radicand, u0: float, direction: int, scale: float, max_distance=None):
    """First turning point met moving from u0 in ``direction``; None if unbounded."""
    k3 = rad.c.k3
    barriers = [b for b in _barriers(rad.profile) if (b - u0) * direction > 0]
    barrier = min(barriers, key=lambda b: abs(b - u0)) if barriers else None
    h = 1e-3 * min(scale, 1.0)
    limit = max_distance if max_distance is not None else 1e7 * max(1.0, abs(u0), scale)
    hist = [(u0, rad.g(u0))]
    u_prev = u0
    while abs(u_prev - u0) < limit:
        step = h
        if barrier is not None:
            step = min(step, 0.5 * abs(barrier - u_prev))
            if step < 1e-300:
                return barrier
        u = u_prev + direction * step
        gv = rad.g(u)
        if not math.isfinite(gv) or gv <= 0.0:
            return _refine_root(rad, u_prev, u)
        hist.append((u, gv))
        if len(hist) >= 3:
            (u1, g1), (u2, g2), (u3, g3) = hist[-3:]
            if g2 < g1 and g2 < g3 and g2 < 1e-6 * k3:
                umin = _check_tangency(rad, u1, u3, k3)
                if umin is not None:
                    return _refine_root(rad, u1, umin)
            hist = hist[-2:]
        u_prev = u
        h *= 1.1
    return None


def turning_points(constants: MotionConstants, profile: FieldProfile, bracket,
                   n_grid: int = 4001) -> TurningPointReport:
    """All roots of g in ``bracket``, annotated simple or double."""
    lo, hi = float(bracket[0]), float(bracket[1])
    if not hi > lo:
        raise ConfigError("bracket must be an increasing interval")
    rad = _Radicand(constants, profile)
    u = np.linspace(lo, hi, n_grid)
    for b in _barriers(profile):
        u = u[u != b]
    g = np.asarray(rad.g(u))
    k3 = max(constants.k3, 1e-300)
    roots = []
    finite = np.isfinite(g)
    for i in range(len(u) - 1):
        if not (finite[i] and finite[i + 1]):
            continue
        if g[i] == 0.0:
            roots.append(u[i])
        elif g[i] * g[i + 1] < 0:
            ua, ub = (u[i], u[i + 1]) if g[i] > 0 else (u[i + 1], u[i])
            roots.append(_refine_root(rad, ua, ub))
    if finite[-1] and g[-1] == 0.0:
        roots.append(u[-1])
    result = [TurningPoint(float(r), "simple") for r in roots]
    flag = None
    # touching extrema: local extremum of g close to zero without a sign change
    for i in range(1, len(u) - 1):
        if not finite[i - 1:i + 2].all():
            continue
        is_max = g[i] >= g[i - 1] and g[i] >= g[i + 1] and g[i] <= 0
        is_min = g[i] <= g[i - 1] and g[i] <= g[i + 1] and g[i] >= 0
        if not (is_max or is_min) or abs(g[i]) > 1e-6 * k3:
            continue
        sign = -1.0 if is_max else 1.0
        res = optimize.minimize_scalar(lambda v: sign * rad.g(v), bounds=(u[i - 1], u[i + 1]),
                                       method="bounded", options={"xatol": 1e-14})
        if abs(res.fun) <= 1e-10 * k3:
            if not any(abs(r.u - res.x) < 1e-6 * max(1.0, abs(res.x)) for r in result):
                result.append(TurningPoint(float(res.x), "double"))
            flag = "DEGENERATE"
    result.sort(key=lambda r: r.u)
    if not result:
        flag = "UNBOUNDED_OR_FORBIDDEN"
    return TurningPointReport(result, flag)


# --------------------------------------------------------------------------
# quadrature machinery


def _sine_series(phi, coef):
    """coef[0] phi + sum_k coef[k] sin(k phi) / k."""
    phi = np.asarray(phi, dtype=float)
    k = np.arange(1, len(coef))
    out = coef[0] * phi
    if len(k):
        w = coef[1:] / k
        flat = phi.ravel()
        acc = np.empty_like(flat)
        for start in range(0, len(flat), 256):
            chunk = flat[start:start + 256]
            acc[start:start + 256] = np.sin(np.outer(chunk, k)) @ w
        out = out + acc.reshape(phi.shape)
    return out


def _cosine_series(phi, coef):
    phi = np.asarray(phi, dtype=float)
    k = np.arange(1, len(coef))
    out = np.full(phi.shape, coef[0])
    if len(k):
        flat = phi.ravel()
        acc = np.empty_like(flat)
        for start in range(0, len(flat), 256):
            chunk = flat[start:start + 256]
            acc[start:start + 256] = np.cos(np.outer(chunk, k)) @ coef[1:]
        out = out + acc.reshape(phi.shape)
    return out


def _trim(coef, noise):
    """Drop the trailing coefficients that sit at the noise level."""
    big = np.nonzero(np.abs(coef) > noise)[0]
    n = big[-1] + 1 if len(big) else 1
    return coef[:n].copy()


class _PeriodicOrbit:
    """Bounded motion between simple turning points a < b."""

    def __init__(self, rad: _Radicand, a: float, b: float, tol: float = 1e-13,
                 max_nodes: int = 2 ** 17):
        self.rad, self.a, self.b = rad, a, b
        self.c = 0.5 * (a + b)
        self.h = 0.5 * (b - a)
        n = 64
        prev_tail = math.inf
        while True:
            phi = math.pi * (np.arange(n) + 0.5) / n
            u = self.c + self.h * np.cos(phi)
            fp, fm = rad.factors(u)
            g = fp * fm
            if np.any(~np.isfinite(g)) or np.any(g <= 0):
                raise NumericError("radicand not positive inside the turning-point interval")
            hval = self.h * np.sin(phi) / np.sqrt(g)
            coef = fft.dct(hval, type=2) / n
            coef[0] *= 0.5
            tail = np.max(np.abs(coef[n // 2:]))
            # stop when resolved, or when the tail has flattened onto rounding noise
            if tail <= tol * abs(coef[0]):
                break
            if tail <= 1e-11 * abs(coef[0]) and tail >= 0.25 * prev_tail:
                break
            if n >= max_nodes:
                raise NumericError(
                    f"period integral did not converge with {n} nodes (near-degenerate orbit?)")
            prev_tail = tail
            n *= 2
        self.nodes = n
        self.t_coef = _trim(coef, 10 * tail)
        wcoef = fft.dct(rad.P(u) * hval, type=2) / n
        wcoef[0] *= 0.5
        self.w_coef = _trim(wcoef, 10 * np.max(np.abs(wcoef[n // 2:])))
        self.bound = float(np.sum(np.abs(self.t_coef[1:]) / np.arange(1, len(self.t_coef))))

    @property
    def period(self) -> float:
        return 2.0 * math.pi * self.t_coef[0]

    def time(self, phi):
        return _sine_series(phi, self.t_coef)

    def rate(self, phi):
        return _cosine_series(phi, self.t_coef)

    def companion(self, phi):
        return _sine_series(phi, self.w_coef)

    def phase_of(self, u0: float, direction: int) -> float:
        h = self.h
        if self.b - u0 <= u0 - self.a:
            phi = 2.0 * math.asin(math.sqrt(min(max((self.b - u0) / (2 * h), 0.0), 1.0)))
        else:
            phi = math.pi - 2.0 * math.asin(math.sqrt(min(max((u0 - self.a) / (2 * h), 0.0), 1.0)))
        return -phi if direction > 0 else phi

    def phase_at(self, tau):
        """Solve time(phi) = tau by safeguarded Newton."""
        tau = np.asarray(tau, dtype=float)
        a0 = self.t_coef[0]
        lo = (tau - self.bound) / a0 - 1e-9
        hi = (tau + self.bound) / a0 + 1e-9
        phi = tau / a0
        for _ in range(100):
            resid = self.time(phi) - tau
            lo = np.where(resid < 0, phi, lo)
            hi = np.where(resid > 0, phi, hi)
            new = phi - resid / self.rate(phi)
            bad = ~((new > lo) & (new < hi))
            new = np.where(bad, 0.5 * (lo + hi), new)
            done = np.max(np.abs(new - phi) / np.maximum(1.0, np.abs(phi)), initial=0.0) < 1e-15
            phi = new
            if done:
                break
        return phi

    def sample(self, t, u0, w0, direction):
        phi0 = self.phase_of(u0, direction)
        tau0 = float(self.time(phi0))
        phi = self.phase_at(tau0 + t)
        u = self.c + self.h * np.cos(phi)
        vu = -self.h * np.sin(phi) / self.rate(phi)
        w = w0 + (self.companion(phi) - float(self.companion(phi0)))
        # pin the first sample to the initial data
        u[t == 0] = u0
        w[t == 0] = w0
        return u, vu, w


class _OpenSegment:
    """Monotone branch u = anchor + d s^2 (turning point) or anchor + d s."""

    def __init__(self, rad: _Radicand, anchor: float, d: int, squared: bool, scale: float):
        self.rad, self.anchor, self.d, self.squared = rad, anchor, d, squared
        self.edges = [0.0]
        self.T = [0.0]
        self.W = [0.0]
        self.width = 1e-2 * (math.sqrt(scale) if squared else scale)

    def u_of(self, s):
        s = np.asarray(s, dtype=float)
        return self.anchor + self.d * (s * s if self.squared else s)

    def _rates(self, s):
        u = self.u_of(s)
        fp, fm = self.rad.factors(u)
        g = fp * fm
        du = 2.0 * s if self.squared else np.ones_like(s)
        with np.errstate(all="ignore"):
            dt = du / np.sqrt(g)
        return dt, self.rad.P(u) * dt

    def _panel(self, s0, s1, nodes=_GL_NODES, weights=_GL_WEIGHTS):
        s0 = np.asarray(s0, dtype=float)
        s1 = np.asarray(s1, dtype=float)
        half = 0.5 * (s1 - s0)
        pts = (0.5 * (s1 + s0))[..., None] + half[..., None] * nodes
        dt, dw = self._rates(pts)
        return half * (dt @ weights), half * (dw @ weights)

    def extend(self, tau_needed: float = 0.0, s_needed: float = 0.0):
        while self.T[-1] < tau_needed or self.edges[-1] < s_needed:
            s0 = self.edges[-1]
            w = self.width
            best = None
            for _ in range(200):
                it, iw = self._panel(s0, s0 + w)
                it_lo, _ = self._panel(s0, s0 + w, _GL_NODES_LO, _GL_WEIGHTS_LO)
                err = abs(it - it_lo) / it if np.isfinite(it) and it > 0 else math.inf
                if err <= 1e-13:
                    break
                # next to a turning point g cancels; stop once halving no longer helps
                if best is not None and err <= 1e-9 and err >= 0.5 * best[0]:
                    err, w, it, iw = best
                    break
                if best is None or err < best[0]:
                    best = (err, w, it, iw)
                w *= 0.5
            else:
                raise NumericError("open-branch time integral failed to converge")
            self.edges.append(s0 + w)
            self.T.append(self.T[-1] + float(it))
            self.W.append(self.W[-1] + float(iw))
            self.width = 1.5 * w
            if len(self.edges) > 200000 or self.edges[-1] > 1e15:
                raise NumericError("open branch never reaches the requested time "
                                   "(asymptotic approach to a turning point?)")

    def time_at(self, s):
        s = np.asarray(s, dtype=float)
        self.extend(s_needed=float(np.max(s, initial=0.0)))
        edges = np.asarray(self.edges)
        k = np.clip(np.searchsorted(edges, s, side="right") - 1, 0, len(edges) - 2)
        it, iw = self._panel(edges[k], s)
        return np.asarray(self.T)[k] + it, np.asarray(self.W)[k] + iw

    def s_at(self, tau):
        tau = np.asarray(tau, dtype=float)
        self.extend(tau_needed=float(np.max(tau, initial=0.0)))
        edges = np.asarray(self.edges)
        T = np.asarray(self.T)
        k = np.clip(np.searchsorted(T, tau, side="right") - 1, 0, len(edges) - 2)
        lo, hi = edges[k], edges[k + 1]
        frac = np.where(T[k + 1] > T[k], (tau - T[k]) / (T[k + 1] - T[k]), 0.0)
        base = edges[k]
        s = lo + frac * (hi - lo)
        for _ in range(100):
            it, _ = self._panel(base, s)
            resid = T[k] + it - tau
            lo = np.where(resid < 0, s, lo)
            hi = np.where(resid > 0, s, hi)
            dt, _ = self._rates(s)
            with np.errstate(all="ignore"):
                new = s - resid / dt
            bad = ~((new > lo) & (new < hi))
            new = np.where(bad, 0.5 * (lo + hi), new)
            done = np.max(np.abs(new - s) / np.maximum(1.0, np.abs(s)), initial=0.0) < 1e-15
            s = new
            if done:
                break
        return s

    def velocity(self, s):
        fp, fm = self.rad.factors(self.u_of(s))
        return self.d * np.sqrt(np.maximum(fp * fm, 0.0))


def _split(params: ParticleParams, profile: FieldProfile):
    """(u0, w0, vu0) for the motion coordinate u and the companion w."""
    if _gauge_sign(profile) == 1:
        return params.y0, params.x0, params.vy0
    return params.x0, params.y0, params.vx0


def _orbit(params: ParticleParams, profile: FieldProfile):
    constants = derive_constants(params, profile)
    u0, w0, vu0 = _split(params, profile)
    if constants.k3 == 0.0:
        return constants, OrbitInfo("stationary", (), None), None
    rad = _Radicand(constants, profile)
    scale = _length_scale(constants)
    sqk3 = math.sqrt(constants.k3)
    if abs(vu0) <= 1e-12 * sqk3:
        slope = float(-2.0 * rad.P(u0) * rad.dP(u0))
        if abs(slope) <= 1e-12 * constants.k3 / scale:
            raise DegenerateTurningPointError(
                f"start at a double turning point u={u0}; use the ODE oracle")
        direction = 1 if slope > 0 else -1
        if direction > 0:
            a, b = u0, _scan(rad, u0, 1, scale)
        else:
            a, b = _scan(rad, u0, -1, scale), u0
    else:
        direction = 1 if vu0 > 0 else -1
        a = _scan(rad, u0, -1, scale)
        b = _scan(rad, u0, 1, scale)
    if a is not None and b is not None:
        orbit = _PeriodicOrbit(rad, a, b)
        info = OrbitInfo("periodic", (a, b), orbit.period,
                         {"nodes": orbit.nodes, "direction": direction})
        return constants, info, orbit
    if a is not None or b is not None:
        anchor = a if a is not None else b
        d = 1 if a is not None else -1
        seg = _OpenSegment(rad, anchor, d, True, scale)
        return constants, OrbitInfo("one_turning_point", (anchor,), None,
                                    {"direction": direction}), seg
    seg = _OpenSegment(rad, u0, direction, False, scale)
    return constants, OrbitInfo("free", (), None, {"direction": direction}), seg


def analyze_orbit(params: ParticleParams, profile: FieldProfile) -> OrbitInfo:
    """Turning points and period (if bounded) of the motion coordinate."""
    return _orbit(params, profile)[1]


def _assemble(profile, params, constants, t, u, vu, w, method, extra):
    rad = _Radicand(constants, profile)
    vw = np.asarray(rad.P(u), dtype=float)
    if _gauge_sign(profile) == 1:
        x, y, vx, vy = w, u, vw, vu
    else:
        x, y, vx, vy = u, w, vu, vw
    x = np.asarray(x, dtype=float).copy()
    y = np.asarray(y, dtype=float).copy()
    vx = np.asarray(vx, dtype=float).copy()
    vy = np.asarray(vy, dtype=float).copy()
    first = t == 0
    x[first], y[first], vx[first], vy[first] = params.x0, params.y0, params.vx0, params.vy0
    return build_trajectory(t, x, y, vx, vy, method, profile, params.qm, constants, extra)


def trajectory_quadrature(params: ParticleParams, profile: FieldProfile, t_end: float,
                          n_samples: int, *, quad_tol: float = 1e-10) -> Trajectory:
    """Trajectory from the quadrature integral, sampled uniformly on [0, t_end]."""
    if not (t_end > 0 and n_samples >= 2):
        raise ConfigError("need t_end > 0 and n_samples >= 2")
    t = np.linspace(0.0, t_end, int(n_samples))
    constants, info, orbit = _orbit(params, profile)
    meta = {"orbit": info.kind, "turning_points": list(info.turning_points),
            "period": info.period, "quad_tol": quad_tol}
    u0, w0, vu0 = _split(params, profile)
    if info.kind == "stationary":
        n = len(t)
        u, vu, w = np.full(n, u0), np.zeros(n), np.full(n, w0)
    elif info.kind == "periodic":
        u, vu, w = orbit.sample(t, u0, w0, info.details["direction"])
    elif info.kind == "one_turning_point":
        seg: _OpenSegment = orbit
        direction = info.details["direction"]
        s0 = math.sqrt(abs(u0 - seg.anchor))
        tau0, wref = (float(v) for v in seg.time_at(s0))
        sigma = tau0 + t if direction == seg.d else t - tau0
        s = seg.s_at(np.abs(sigma))
        u = seg.u_of(s)
        vu = np.sign(sigma) * seg.velocity(s)
        _, wabs = seg.time_at(s)
        sigma0_sign = 1.0 if direction == seg.d else -1.0
        w = w0 + np.sign(sigma) * wabs - sigma0_sign * wref
    else:
        seg = orbit
        s = seg.s_at(t)
        u = seg.u_of(s)
        vu = seg.velocity(s)
        _, wabs = seg.time_at(s)
        w = w0 + wabs
    return _assemble(profile, params, constants, t, u, vu, w, Method.QUADRATURE, meta)


def companion_coordinate(t, u, constants: MotionConstants, profile: FieldProfile,
                         w0: float = 0.0):
    """Cumulative Simpson integral of the companion velocity along sampled u(t)."""
    rate = np.asarray(_Radicand(constants, profile).P(np.asarray(u, dtype=float)))
    return w0 + integrate.cumulative_simpson(rate, x=np.asarray(t, dtype=float), initial=0.0)


# --------------------------------------------------------------------------
# closed forms


def closed_form_uniform(constants: MotionConstants, t):
    """Circle x = R sin(k2 t), y = R cos(k2 t) - k1/k2 with R = sqrt(k3)/k2."""
    if constants.k2 == 0.0:
        raise NumericError("k2 = 0: use the zero-field closed form")
    t = np.asarray(t, dtype=float)
    radius = math.sqrt(constants.k3) / constants.k2
    return radius * np.sin(constants.k2 * t), radius * np.cos(constants.k2 * t) - constants.k1 / constants.k2


def closed_form_zero_field(constants: MotionConstants, t, sign: int = 1):
    """Straight line x = (k1 + k2) t, y = +-sqrt(k3 - (k1 + k2)^2) t."""
    t = np.asarray(t, dtype=float)
    b = constants.k1 + constants.k2
    a2 = constants.k3 - b * b
    if a2 < -1e-12 * max(constants.k3, 1e-300):
        raise ForbiddenStartError("k3 < (k1 + k2)^2: no real motion for the zero-field shape")
    return b * t, sign * math.sqrt(max(a2, 0.0)) * t


def exp_closed_form_constants(constants: MotionConstants) -> ExpClosedFormConstants:
    k1, k2, k3 = constants.k1, constants.k2, constants.k3
    big_k = k1 + k2
    alpha2 = big_k * big_k - k3
    if not alpha2 > 0:
        raise NumericError(
            f"(k1+k2)^2 - k3 = {alpha2:.6g} <= 0: exponential closed form unavailable "
            "(unbounded motion); use quadrature")
    beta = 2 * k1 * k2 + 2 * k2 * k2
    return ExpClosedFormConstants(alpha2, beta, math.sqrt(k3) * k2 / alpha2, beta / (2 * alpha2))


def _unwrapped_arctan(big_k, sqk3, alpha, t, sign):
    theta = 0.5 * alpha * np.asarray(t, dtype=float)
    n = np.floor(theta / math.pi + 0.5)
    reduced = theta - n * math.pi
    return np.arctan((big_k * np.tan(reduced) + sign * sqk3) / alpha) + math.copysign(math.pi, big_k) * n


def closed_form_exponential(constants: MotionConstants, t, sign: int = 1):
    """y = log(l sin(+-alpha t) + m_aux), x from the arctan antiderivative.

    The arctan is continued across the poles of tan(alpha t / 2) so x(t) is
    continuous.  For k3 = 0 the particle sits at y = log(m_aux), x = 0.
    """
    t = np.asarray(t, dtype=float)
    ec = exp_closed_form_constants(constants)
    if constants.k3 == 0.0:
        if ec.m_aux <= 0:
            raise DomainError("log argument m_aux <= 0")
        return np.zeros_like(t), np.full_like(t, math.log(ec.m_aux))
    alpha = ec.alpha
    arg = ec.l * np.sin(sign * alpha * t) + ec.m_aux
    if np.any(arg <= 0):
        raise DomainError("log argument l sin(alpha t) + m_aux is not positive")
    big_k = constants.k1 + constants.k2
    x = big_k * t - 2.0 * _unwrapped_arctan(big_k, math.sqrt(constants.k3), alpha, t, sign)
    return x, np.log(arg)


def _closed_form_y_gauge(kind, c_value, constants, params_yg, t):
    """Closed form for Y-gauge initial data; returns (x, y, vx, vy)."""
    k1, k2, k3 = constants.k1, constants.k2, constants.k3
    x0, y0, vx0, vy0 = params_yg
    n = len(t)
    if k3 == 0.0:
        return np.full(n, x0), np.full(n, y0), np.zeros(n), np.zeros(n)
    if kind is ProfileKind.ZERO_FIELD:
        xs, ys = closed_form_zero_field(constants, t, 1)
        big_k = k1 + k2
        return x0 + xs, y0 + vy0 * t, np.full(n, big_k), np.full(n, vy0)
    if kind in (ProfileKind.UNIFORM, ProfileKind.CONSTANT):
        kk = k2 * c_value
        if kk == 0.0:
            return x0 + vx0 * t, y0 + vy0 * t, np.full(n, vx0), np.full(n, vy0)
        eff = MotionConstants(k1, kk, k3)
        t_star = math.atan2(-vy0, vx0) / kk
        xs, ys = closed_form_uniform(eff, t + t_star)
        xr, _ = closed_form_uniform(eff, np.array([t_star]))
        sq = math.sqrt(k3)
        vx = sq * np.cos(kk * (t + t_star))
        vy = -sq * np.sin(kk * (t + t_star))
        return x0 + xs - xr[0], ys, vx, vy
    if kind in (ProfileKind.EXP_DECAY, ProfileKind.RADIAL_EXP):
        ec = exp_closed_form_constants(constants)
        alpha = ec.alpha
        ey0 = math.exp(y0)
        sl = math.copysign(1.0, ec.l)
        theta0 = math.atan2(sl * (ey0 - ec.m_aux) * alpha, sl * vy0 * ey0)
        t_star = theta0 / alpha
        xs, ys = closed_form_exponential(constants, t + t_star, 1)
        xr, _ = closed_form_exponential(constants, np.array([t_star]), 1)
        arg = np.exp(ys)
        big_k = k1 + k2
        vy = ec.l * alpha * np.cos(alpha * (t + t_star)) / arg
        vx = big_k - k2 / arg
        return x0 + xs - xr[0], ys, vx, vy
    raise NumericError(f"no closed form registered for profile {kind}")


def closed_form_trajectory(params: ParticleParams, profile: FieldProfile, t_end: float,
                           n_samples: int) -> Trajectory:
    """Closed-form trajectory matched to the initial data (Landau gauges)."""
    s = _gauge_sign(profile)
    if profile.kind is None:
        raise NumericError(f"no closed form for custom profile {profile.label}")
    t = np.linspace(0.0, t_end, int(n_samples))
    constants = derive_constants(params, profile)
    c_value = profile.params.get("value", 1.0)
    if s == 1:
        x, y, vx, vy = _closed_form_y_gauge(profile.kind, c_value, constants,
                                            (params.x0, params.y0, params.vx0, params.vy0), t)
    else:
        # rotate (x, y) -> (X, Y) = (-y, x): the X-gauge problem becomes a
        # Y-gauge problem with k1 -> -k1
        rot = MotionConstants(-constants.k1, constants.k2, constants.k3)
        xr, yr, vxr, vyr = _closed_form_y_gauge(
            profile.kind, c_value, rot, (-params.y0, params.x0, -params.vy0, params.vx0), t)
        x, y, vx, vy = yr, -xr, vyr, -vxr
    x[0], y[0], vx[0], vy[0] = params.x0, params.y0, params.vx0, params.vy0
    return build_trajectory(t, x, y, vx, vy, Method.CLOSED_FORM, profile, params.qm,
                            constants, {"orbit": "closed-form"})
