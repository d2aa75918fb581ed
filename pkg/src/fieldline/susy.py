"""Zero modes, normalizability and semiclassical levels for the radial Pauli problem.

Conventions: B is the field scale, f the radial shape function, m the
angular quantum number and p = |m| + 1/2.  The zero mode is

    psi0(r) = r^p exp(-S(r)),   S(r) = B int_0^r s f(s) ds,

normalised so that S vanishes at the profile's reference radius (0 unless
the action is logarithmically singular there).  Everything quantum is done
with log(psi0) to stay clear of overflow.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate, optimize
from scipy.special import logsumexp

from .errors import ConfigError, DomainError, MultiWellError, NumericError
from .fields import FieldProfile, GaugeAxis

__all__ = [
    "SpinBranch",
    "Verdict",
    "SusyProblem",
    "ZeroMode",
    "NormalizabilityVerdict",
    "SpectrumResult",
    "effective_potential",
    "annihilation_operator_coefficients",
    "zero_mode",
    "normalizability",
    "superpotential",
    "swkb_integral",
    "swkb_levels",
    "ladder",
]

OUT_OF_REGIME = "OUT_OF_FACTORIZATION_REGIME"


class SpinBranch(enum.Enum):
    LOWER = "lower"  # sigma_z = -1
    UPPER = "upper"  # sigma_z = +1


class Verdict(enum.Enum):
    NORMALIZABLE = "NORMALIZABLE"
    NOT_NORMALIZABLE = "NOT_NORMALIZABLE"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class SusyProblem:
    profile: FieldProfile
    b0: Optional[float] = None  # defaults to profile.b0
    m_quantum: int = 0
    spin_branch: SpinBranch = SpinBranch.LOWER
    hbar: float = 1.0
    mass: float = 1.0

    def __post_init__(self):
        if self.profile.axis is not GaugeAxis.RADIAL:
            raise ConfigError("SUSY analysis needs a profile on the RADIAL axis")
        if int(self.m_quantum) != self.m_quantum:
            raise ConfigError("m_quantum must be an integer")
        if not (self.hbar > 0 and self.mass > 0):
            raise ConfigError("hbar and mass must be positive")
        if not isinstance(self.spin_branch, SpinBranch):
            object.__setattr__(self, "spin_branch", SpinBranch(str(self.spin_branch).lower()))
        if self.b0 is not None and not math.isfinite(self.b0):
            raise ConfigError("b0 must be finite")

    @property
    def B(self) -> float:
        return float(self.profile.b0 if self.b0 is None else self.b0)

    @property
    def p(self) -> float:
        return abs(int(self.m_quantum)) + 0.5

    @property
    def flags(self) -> tuple:
        """Flags for inputs outside the lower-branch, m <= 0 factorization."""
        if self.spin_branch is SpinBranch.LOWER and self.m_quantum <= 0:
            return ()
        return (OUT_OF_REGIME,)


def _radius(r):
    r_arr = np.asarray(r, dtype=float)
    if np.any(~(r_arr > 0)):
        raise DomainError("radius must be positive")
    return r_arr


def _out(r, val):
    return float(val) if np.ndim(r) == 0 else val


def effective_potential(problem: SusyProblem, r):
    """Radial potential of the spin-resolved problem, in units of hbar^2 / 2 mass.

    Lower branch: B^2 r^2 f^2 - 2Bf + 2Bmf - Brf' + (m^2 - 1/4)/r^2.  The
    upper branch adds 2 (2Bf + Brf').
    """
    r = _radius(r)
    B, m = problem.B, problem.m_quantum
    f = np.asarray(problem.profile.f(r), dtype=float)
    fp = np.asarray(problem.profile.f_prime(r), dtype=float)
    v = B * B * r * r * f * f - 2 * B * f + 2 * B * m * f - B * r * fp + (m * m - 0.25) / (r * r)
    if problem.spin_branch is SpinBranch.UPPER:
        v = v + 2 * (2 * B * f + B * r * fp)
    return _out(r, v)


def annihilation_operator_coefficients(problem: SusyProblem, r):
    """Non-derivative part of the annihilation operator: B r f(r) - p/r."""
    r = _radius(r)
    f = np.asarray(problem.profile.f(r), dtype=float)
    return _out(r, problem.B * r * f - problem.p / r)


@dataclass
class ZeroMode:
    p: float
    S: Callable
    dS: Callable
    r_ref: float = 0.0
    label: str = ""

    def log_psi(self, r):
        r = _radius(r)
        return _out(r, self.p * np.log(r) - np.asarray(self.S(r), dtype=float))

    def dlog_psi(self, r):
        r = _radius(r)
        return _out(r, self.p / r - np.asarray(self.dS(r), dtype=float))


def _quad_action(profile: FieldProfile, B: float):
    f = profile.f

    def integrand(s):
        return s * float(f(s))

    def scalar(r):
        val, _err = integrate.quad(integrand, 0.0, r, limit=200)
        if not math.isfinite(val):
            raise DomainError(f"{profile.label}: radial action diverges below r={r}")
        return B * val

    def S(r):
        r_arr = np.asarray(r, dtype=float)
        out = np.vectorize(scalar, otypes=[float])(r_arr)
        return float(out) if out.ndim == 0 else out

    return S


def zero_mode(problem: SusyProblem) -> ZeroMode:
    """log psi0 = p log r - S(r) with S from the registered closed form or quadrature."""
    prof, B = problem.profile, problem.B
    if prof.radial_action is not None:
        act = prof.radial_action

        def S(r):
            return B * np.asarray(act(r), dtype=float)

        ref = prof.action_ref
    else:
        S = _quad_action(prof, B)
        ref = 0.0

    def dS(r):
        r_arr = np.asarray(r, dtype=float)
        return B * r_arr * np.asarray(prof.f(r_arr), dtype=float)

    return ZeroMode(problem.p, S, dS, ref, prof.label)


def superpotential(zm: ZeroMode, problem: SusyProblem) -> Callable:
    """W(r) = (hbar / sqrt(2 mass)) (S'(r) - p/r)."""
    scale = problem.hbar / math.sqrt(2.0 * problem.mass)

    def W(r):
        return _out(r, scale * -np.asarray(zm.dlog_psi(r), dtype=float))

    return W


# --------------------------------------------------------------------------
# normalizability

@dataclass
class NormalizabilityVerdict:
    verdict: Verdict
    norm_value: Optional[float]
    tail_exponent_report: str
    ladder: list = field(default_factory=list)  # (R, log of truncated integral)
    details: dict = field(default_factory=dict)


_GL16 = np.polynomial.legendre.leggauss(16)
_GL8 = np.polynomial.legendre.leggauss(8)


def _log_panel(logf, a, b, rule):
    x, w = rule
    h = 0.5 * (b - a)
    rho = a + h * (x + 1.0)
    vals = logf(rho)
    return float(logsumexp(vals, b=w * h)) if np.all(np.isfinite(vals) | (vals == -np.inf)) \
        else math.nan


def _log_integral(logf, a, b, ref_log, depth=0):
    """log int_a^b exp(logf(rho)) drho, adaptive Gauss-Legendre in log space.

    A panel is accepted once its 16- and 8-point values agree to 1e-14 of
    exp(ref_log) (the running scale of the whole integral).
    """
    hi = _log_panel(logf, a, b, _GL16)
    lo = _log_panel(logf, a, b, _GL8)
    if not (math.isfinite(hi) or hi == -math.inf):
        raise NumericError("log integrand not finite")
    if hi == -math.inf and lo == -math.inf:
        return hi
    scale = max(hi, ref_log)
    err = abs(math.exp(hi - scale) - math.exp(lo - scale))
    if err <= 1e-14 or depth >= 40:
        return hi
    mid = 0.5 * (a + b)
    left = _log_integral(logf, a, mid, max(ref_log, hi), depth + 1)
    right = _log_integral(logf, mid, b, max(ref_log, hi), depth + 1)
    return float(np.logaddexp(left, right))


def ladder(base: float = 2.0, r_max: float = 2.0 ** 16, r_first: float = 3.0):
    """Truncation radii base^j, j >= 1, between ``r_first`` and ``r_max``."""
    if not base > 1:
        raise ConfigError("ladder base must exceed 1")
    out, j = [], 1
    while base ** j <= r_max * (1 + 1e-12):
        if base ** j >= r_first:
            out.append(float(base ** j))
        j += 1
    if len(out) < 3:
        raise ConfigError("ladder needs at least three radii")
    return out


def _log_slope(zm: ZeroMode, r: float) -> float:
    """r d(2 log psi)/dr."""
    return float(2.0 * r * zm.dlog_psi(r))


def normalizability(zm: ZeroMode, base: float = 2.0, r_max: float = 2.0 ** 16,
                    cauchy_tol: float = 1e-10, delta: float = 0.1) -> NormalizabilityVerdict:
    """Square-integrability of psi0 from a ladder of truncated integrals.

    The truncated integral over [1/R, R] is accumulated shell by shell in
    rho = log r.  The piece below 1/R is added analytically for the local
    power law, eps psi0(eps)^2 / (e + 1) with e = r d(2 log psi)/dr at eps,
    which is exact for a pure power and keeps the ladder free of the slow
    r^(2p+1) creep that would otherwise swamp the Cauchy test.
    """
    radii = ladder(base, r_max)

    def logf(rho):
        r = np.exp(rho)
        with np.errstate(all="ignore"):
            return 2.0 * np.asarray(zm.log_psi(r), dtype=float) + rho

    def lower_piece(eps):
        e = _log_slope(zm, eps)
        if not e > -1.0:
            return math.inf
        return math.log(eps) + 2.0 * zm.log_psi(eps) - math.log(e + 1.0)

    entries = []
    r_prev = radii[0]
    core = _log_integral(logf, -math.log(r_prev), math.log(r_prev), -math.inf)
    for k, R in enumerate(radii):
        if k > 0:
            lo = _log_integral(logf, -math.log(R), -math.log(r_prev), core)
            hi = _log_integral(logf, math.log(r_prev), math.log(R), core)
            core = float(logsumexp([core, lo, hi]))
            r_prev = R
        entries.append((R, float(np.logaddexp(core, lower_piece(1.0 / R)))))

    origin_e = _log_slope(zm, 1.0 / radii[-1])
    tail_e = _log_slope(zm, radii[-1])
    tail_slope = float(2.0 * zm.dlog_psi(radii[-1]))
    logs = np.array([v for _, v in entries])
    with np.errstate(invalid="ignore"):
        steps = np.diff(logs)
    with np.errstate(over="ignore", invalid="ignore"):
        rel = np.expm1(np.abs(steps[-2:]))
    details = {
        "origin_log_slope": origin_e,
        "tail_log_slope": tail_e,
        "tail_slope": tail_slope,
        "last_relative_increments": [float(v) for v in rel],
        "ladder_base": base,
    }
    if abs(tail_e) > 50.0:  # far steeper than any plausible power
        trend = "decay" if tail_slope < 0 else "growth"
        kind = f"exponential {trend}: d(2 log psi)/dr = {tail_slope:.6g} at r = {radii[-1]:g}"
    else:
        kind = f"power-law behaviour: 2 log psi ~ {tail_e:.6g} log r at r = {radii[-1]:g}"
    report = (f"{kind}; near the origin 2 log psi ~ {origin_e:.6g} log r")

    if origin_e <= -1.0 or (tail_e >= -1.0 and np.all(steps[-3:] > 0)):
        return NormalizabilityVerdict(Verdict.NOT_NORMALIZABLE, None, report, entries, details)
    if tail_e < -(1.0 + delta) and origin_e > -1.0 and np.all(rel <= cauchy_tol):
        return NormalizabilityVerdict(Verdict.NORMALIZABLE, float(math.exp(logs[-1])), report,
                                      entries, details)
    return NormalizabilityVerdict(Verdict.INCONCLUSIVE, None, report, entries, details)


# --------------------------------------------------------------------------
# SWKB

@dataclass
class SpectrumResult:
    levels: list  # (n, E_n, residual)
    convention: str = "n+1/2"
    details: dict = field(default_factory=dict)

    @property
    def energies(self):
        return [e for _, e, _ in self.levels]


class _Well:
    """W^2 on a log grid: minimum, asymptote and single-well check."""

    def __init__(self, problem: SusyProblem):
        self.problem = problem
        zm = zero_mode(problem)
        self.W = superpotential(zm, problem)
        r_star = math.sqrt(problem.p / abs(problem.B)) if problem.B != 0 else 1.0
        self.rho_lo = math.log(r_star) - 30.0
        self.rho_hi = math.log(r_star) + 30.0
        rho = np.linspace(self.rho_lo, self.rho_hi, 6001)
        with np.errstate(all="ignore"):
            w2 = self.w2(np.exp(rho))
        if not np.all(np.isfinite(w2)):
            raise NumericError("superpotential not finite on the scan range")
        d = np.diff(w2)
        tol = 1e-12 * np.maximum(np.abs(w2[:-1]), np.abs(w2[1:]))
        sgn = np.sign(np.where(np.abs(d) <= tol, 0.0, d))
        sgn = sgn[sgn != 0]
        minima = int(np.sum((sgn[:-1] < 0) & (sgn[1:] > 0)))
        if minima != 1:
            raise MultiWellError(
                f"W^2 has {minima} local minima on the scan range; SWKB needs a single well")
        k = int(np.argmin(w2))
        res = optimize.minimize_scalar(lambda x: float(self.w2(math.exp(x))),
                                       bracket=(rho[max(k - 1, 0)], rho[k], rho[min(k + 1, len(rho) - 1)]),
                                       tol=1e-12)
        self.rho_min = float(res.x) if res.fun <= w2[k] else float(rho[k])
        wv = float(self.W(math.exp(self.rho_min)))
        # exact zero of W when it changes sign
        wl, wr = float(self.W(math.exp(rho[max(k - 1, 0)]))), float(self.W(math.exp(rho[min(k + 1, len(rho) - 1)])))
        if wl * wr < 0:
            self.rho_min = optimize.brentq(lambda x: float(self.W(math.exp(x))),
                                           rho[max(k - 1, 0)], rho[min(k + 1, len(rho) - 1)],
                                           xtol=1e-15)
            wv = 0.0
        self.e_min = wv * wv
        # energies above this have no right turning point inside the scan
        self.e_cap = float(min(w2[0], w2[-1]))

    def w2(self, r):
        w = np.asarray(self.W(r), dtype=float)
        return w * w

    def turning_points(self, E):
        def h(x):
            return float(self.w2(math.exp(x))) - E

        if h(self.rho_lo) <= 0:
            raise NumericError("left turning point outside the scan range")
        left = optimize.brentq(h, self.rho_lo, self.rho_min, xtol=1e-15, rtol=4 * np.finfo(float).eps)
        if h(self.rho_hi) <= 0:
            return left, None
        right = optimize.brentq(h, self.rho_min, self.rho_hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
        return left, right


def _swkb_quadrature(well: _Well, E, a, b, tol=1e-13):
    """int sqrt(2 mass (E - W^2)) dr over [e^a, e^b] with rho = c + h cos(phi).

    In phi the integrand vanishes like sin^2 at both ends and is smooth and
    periodic, so the midpoint rule converges geometrically.
    """
    mass = well.problem.mass
    c, h = 0.5 * (a + b), 0.5 * (b - a)
    prev = None
    n = 32
    while n <= 2 ** 20:
        phi = math.pi * (np.arange(n) + 0.5) / n
        rho = c + h * np.cos(phi)
        r = np.exp(rho)
        gap = np.maximum(E - well.w2(r), 0.0)
        val = float(np.sum(np.sqrt(2.0 * mass * gap) * r * h * np.sin(phi)) * math.pi / n)
        if prev is not None and abs(val - prev) <= tol * max(abs(val), 1e-300):
            return val
        prev = val
        n *= 2
    raise NumericError("SWKB integral did not converge")


def swkb_integral(problem: SusyProblem, E: float, _well: Optional[_Well] = None) -> float:
    """I(E) = int sqrt(2 mass (E - W^2)) dr between the two turning points.

    Returns 0 below the well bottom and inf when the well is open on the
    right at this energy.
    """
    well = _well or _Well(problem)
    if E <= well.e_min:
        return 0.0
    a, b = well.turning_points(E)
    if b is None:
        return math.inf
    return _swkb_quadrature(well, E, a, b)


def swkb_levels(problem: SusyProblem, n_max: int, convention: str = "n+1/2",
                tol: float = 1e-8) -> SpectrumResult:
    """Levels n = 0..n_max of I(E_n) = (n + 1/2) pi hbar (or n pi hbar)."""
    if convention not in ("n+1/2", "n"):
        raise ConfigError("convention must be 'n+1/2' or 'n'")
    if n_max < 0:
        raise ConfigError("n_max must be non-negative")
    well = _Well(problem)
    hb = problem.hbar
    shift = 0.5 if convention == "n+1/2" else 0.0

    def I(E):
        return swkb_integral(problem, E, well)

    levels = []
    e_lo = well.e_min
    e_cap = well.e_cap * (1.0 - 1e-12)
    span = max(abs(well.e_min), 1.0)
    for n in range(n_max + 1):
        target = (n + shift) * math.pi * hb
        if target == 0.0:
            levels.append((n, well.e_min, 0.0))
            continue
        # walk the upper bracket up; near the top of an open well close the
        # remaining gap geometrically, since E - W^2 loses digits there
        e_hi = e_lo
        while True:
            e_hi = e_hi + span if e_hi + span < 0.5 * (e_hi + e_cap) else 0.5 * (e_hi + e_cap)
            if I(e_hi) > target:
                break
            if e_cap - e_hi <= 1e-9 * max(abs(e_cap), 1.0):
                raise NumericError(f"level {n} lies above the top of the well (E ~ {e_cap:.6g})")
            span *= 2.0
        E = optimize.brentq(lambda e: I(e) - target, e_lo, e_hi, xtol=1e-15,
                            rtol=4 * np.finfo(float).eps, maxiter=400)
        res = abs(I(E) - target)
        if res > tol:
            raise NumericError(f"level {n}: quantization residual {res:.3g} above {tol}")
        levels.append((n, E, res))
        e_lo = E
    return SpectrumResult(levels, convention, {"well_bottom": well.e_min, "flags": list(problem.flags)})
