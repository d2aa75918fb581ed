"""Gauge shape functions and the magnetic fields they generate.

A profile stores a dimensionless shape function ``f`` that enters the vector
potential in one of three gauges:

* ``Y_GAUGE``:  A = (-u B f(u), 0) with u = y
* ``X_GAUGE``:  A = (0, u B f(u)) with u = x
* ``RADIAL``:   A = B f(r) (-y, x) with r = sqrt(x^2 + y^2)

The Landau gauges give B_z = B (u f)'.  The radial gauge gives
B_z = B (2 f + r f'), the full curl of the rotational potential.
"""

from __future__ import annotations

import csv
import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate
from scipy.interpolate import PchipInterpolator

from .errors import ConfigError, DomainError, NumericError

__all__ = [
    "GaugeAxis",
    "ProfileKind",
    "FieldProfile",
    "make_builtin",
    "eval_B",
    "profile_from_field",
    "profile_from_table",
    "profile_from_field_table",
    "profile_from_name",
    "exp_shape",
    "exp_shape_prime",
]

#: below this |u| the (1 - e^-u)/u shape is evaluated by its Taylor series
SERIES_EPS = 1e-4
# f' has a u^2 cancellation, so its series branch reaches further out
_SERIES_EPS_PRIME = 5e-2


class GaugeAxis(enum.Enum):
    Y_GAUGE = "y"
    X_GAUGE = "x"
    RADIAL = "radial"

    @classmethod
    def parse(cls, value) -> "GaugeAxis":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {"y": cls.Y_GAUGE, "y_gauge": cls.Y_GAUGE,
                   "x": cls.X_GAUGE, "x_gauge": cls.X_GAUGE,
                   "r": cls.RADIAL, "radial": cls.RADIAL}
        try:
            return aliases[key]
        except KeyError:
            raise ConfigError(f"unknown gauge axis {value!r}") from None


class ProfileKind(enum.Enum):
    UNIFORM = "uniform"
    ZERO_FIELD = "zero_field"
    EXP_DECAY = "exp_decay"
    RADIAL_EXP = "radial_exp"
    RATIONAL_AB = "rational_ab"
    CONSTANT = "constant"


def _as_output(u, values):
    if np.ndim(u) == 0:
        return float(values)
    return values


def exp_shape(u):
    """(1 - e^-u)/u with the removable singularity at 0 filled in."""
    u_arr = np.asarray(u, dtype=float)
    out = np.empty_like(u_arr)
    small = np.abs(u_arr) < SERIES_EPS
    big = ~small
    with np.errstate(divide="ignore", invalid="ignore"):
        out[big] = -np.expm1(-u_arr[big]) / u_arr[big]
    us = u_arr[small]
    out[small] = 1.0 - us / 2.0 + us * us / 6.0 - us ** 3 / 24.0
    return _as_output(u, out)


# f'(u) = sum_{n>=1} (-1)^n n u^(n-1) / (n+1)!
_PRIME_COEFFS = [(-1) ** n * n / math.factorial(n + 1) for n in range(1, 14)]


def exp_shape_prime(u):
    """Derivative of :func:`exp_shape`."""
    u_arr = np.asarray(u, dtype=float)
    out = np.empty_like(u_arr)
    small = np.abs(u_arr) < _SERIES_EPS_PRIME
    big = ~small
    ub = u_arr[big]
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        out[big] = (ub * np.exp(-ub) + np.expm1(-ub)) / (ub * ub)
    us = u_arr[small]
    acc = np.zeros_like(us)
    for c in reversed(_PRIME_COEFFS):
        acc = acc * us + c
    out[small] = acc
    return _as_output(u, out)


@dataclass(frozen=True)
class FieldProfile:
    """One member of the shape-function field class.

    ``uf`` and ``duf`` are u f(u) and its derivative.  They are supplied
    separately because u f(u) is often regular where f is not (the zero-field
    shape 1/u).  ``kernel`` is an optional ``(code, p0, p1)`` triple the
    compiled integrator uses to evaluate B_z without calling back into Python.
    """

    axis: GaugeAxis
    b0: float
    f: Callable
    f_prime: Callable
    label: str
    uf: Optional[Callable] = None
    duf: Optional[Callable] = None
    radial_action: Optional[Callable] = None
    action_ref: float = 0.0
    singularities: tuple = ()
    kernel: Optional[tuple] = None
    kind: Optional[ProfileKind] = None
    params: dict = field(default_factory=dict)

    def gauge_potential(self, u):
        """u f(u), the shape of the single non-zero potential component."""
        if self.uf is not None:
            return self.uf(u)
        return np.asarray(u) * self.f(u)

    def gauge_potential_prime(self, u):
        """d/du [u f(u)] = u f'(u) + f(u)."""
        if self.duf is not None:
            return self.duf(u)
        return np.asarray(u) * self.f_prime(u) + self.f(u)

    def field_shape(self, u):
        """B_z / b0 without domain checks (used by the integrators)."""
        if self.axis is GaugeAxis.RADIAL:
            return self.f(u) + self.gauge_potential_prime(u)
        return self.gauge_potential_prime(u)

    def check_domain(self, u) -> None:
        if not self.singularities:
            return
        u_arr = np.atleast_1d(np.asarray(u, dtype=float))
        for s in self.singularities:
            if np.any(u_arr == s):
                raise DomainError(f"{self.label}: shape function is singular at u={s}")


def _const(value):
    def fn(u):
        return _as_output(u, np.full(np.shape(u), value, dtype=float))
    return fn


def make_builtin(kind, b0: float = 1.0, axis=None, *, a: float = None, b: float = None,
                 value: float = None) -> FieldProfile:
    """Build one of the named profiles.

    ``RATIONAL_AB`` takes ``a`` and ``b`` for f(u) = (u-a)(u-b)/u^2;
    ``CONSTANT`` takes ``value`` for f(u) = value.  The default axis is
    ``RADIAL`` for ``RADIAL_EXP`` and ``RATIONAL_AB``, ``Y_GAUGE`` otherwise.
    """
    if isinstance(kind, str):
        try:
            kind = ProfileKind(kind.strip().lower())
        except ValueError:
            raise ConfigError(f"unknown profile kind {kind!r}") from None
    if not isinstance(kind, ProfileKind):
        raise ConfigError(f"unknown profile kind {kind!r}")
    b0 = float(b0)
    if not math.isfinite(b0):
        raise ConfigError("b0 must be finite")
    if axis is None:
        axis = GaugeAxis.RADIAL if kind in (ProfileKind.RADIAL_EXP, ProfileKind.RATIONAL_AB) \
            else GaugeAxis.Y_GAUGE
    axis = GaugeAxis.parse(axis)
    radial = axis is GaugeAxis.RADIAL

    if kind in (ProfileKind.UNIFORM, ProfileKind.CONSTANT):
        c = 1.0 if kind is ProfileKind.UNIFORM else value
        if c is None or not math.isfinite(float(c)):
            raise ConfigError("CONSTANT profile needs a finite 'value'")
        c = float(c)
        label = "uniform" if kind is ProfileKind.UNIFORM else f"constant({c:g})"
        return FieldProfile(
            axis=axis, b0=b0, f=_const(c), f_prime=_const(0.0), label=label,
            uf=lambda u: _as_output(u, c * np.asarray(u, dtype=float)),
            duf=_const(c),
            radial_action=lambda r: 0.5 * c * np.asarray(r, dtype=float) ** 2,
            kernel=(0, (2.0 if radial else 1.0) * b0 * c, 0.0),
            kind=kind, params={"value": c},
        )

    if kind is ProfileKind.ZERO_FIELD:
        def f(u):
            u_arr = np.asarray(u, dtype=float)
            with np.errstate(divide="ignore"):
                return _as_output(u, 1.0 / u_arr)

        def fp(u):
            u_arr = np.asarray(u, dtype=float)
            with np.errstate(divide="ignore"):
                return _as_output(u, -1.0 / (u_arr * u_arr))

        return FieldProfile(
            axis=axis, b0=b0, f=f, f_prime=fp, label="zero_field",
            uf=_const(1.0), duf=_const(0.0),
            radial_action=lambda r: np.asarray(r, dtype=float) * 1.0,
            singularities=(0.0,),
            kernel=(4, 0.0, b0) if radial else (0, 0.0, 0.0),
            kind=kind,
        )

    if kind in (ProfileKind.EXP_DECAY, ProfileKind.RADIAL_EXP):
        return FieldProfile(
            axis=axis, b0=b0, f=exp_shape, f_prime=exp_shape_prime, label=kind.value,
            uf=lambda u: _as_output(u, -np.expm1(-np.asarray(u, dtype=float))),
            duf=lambda u: _as_output(u, np.exp(-np.asarray(u, dtype=float))),
            radial_action=lambda r: np.asarray(r, dtype=float) + np.expm1(-np.asarray(r, dtype=float)),
            kernel=(3, b0, 0.0) if radial else (1, b0, 0.0),
            kind=kind,
        )

    if kind is ProfileKind.RATIONAL_AB:
        if a is None or b is None or not (math.isfinite(a) and math.isfinite(b)):
            raise ConfigError("RATIONAL_AB needs finite 'a' and 'b'")
        a, b = float(a), float(b)
        s, p = a + b, a * b

        def f(u):
            u_arr = np.asarray(u, dtype=float)
            with np.errstate(divide="ignore", invalid="ignore"):
                return _as_output(u, (u_arr - a) * (u_arr - b) / (u_arr * u_arr))

        def fp(u):
            u_arr = np.asarray(u, dtype=float)
            with np.errstate(divide="ignore", invalid="ignore"):
                return _as_output(u, s / u_arr ** 2 - 2.0 * p / u_arr ** 3)

        def uf(u):
            u_arr = np.asarray(u, dtype=float)
            with np.errstate(divide="ignore", invalid="ignore"):
                return _as_output(u, u_arr - s + p / u_arr)

        def duf(u):
            u_arr = np.asarray(u, dtype=float)
            with np.errstate(divide="ignore"):
                return _as_output(u, 1.0 - p / (u_arr * u_arr))

        ref = 1.0 if p != 0.0 else 0.0

        def action(r):
            r_arr = np.asarray(r, dtype=float)
            val = 0.5 * (r_arr ** 2 - ref ** 2) - s * (r_arr - ref)
            if p != 0.0:
                val = val + p * np.log(r_arr)
            return val

        if radial:
            kernel = (4, 2.0 * b0, -s * b0)
        else:
            kernel = (2, b0, -p * b0)
        return FieldProfile(
            axis=axis, b0=b0, f=f, f_prime=fp, label=f"rational_ab(a={a:g},b={b:g})",
            uf=uf, duf=duf, radial_action=action, action_ref=ref,
            singularities=(0.0,) if (p != 0.0 or s != 0.0) else (),
            kernel=kernel, kind=kind, params={"a": a, "b": b},
        )

    raise ConfigError(f"unknown profile kind {kind!r}")  # pragma: no cover


def eval_B(profile: FieldProfile, u):
    """Physical field B_z at gauge coordinate ``u`` (y, x or r)."""
    profile.check_domain(u)
    if profile.axis is GaugeAxis.RADIAL and np.any(np.asarray(u) < 0):
        raise DomainError("radial coordinate must be non-negative")
    val = profile.b0 * np.asarray(profile.field_shape(u), dtype=float)
    if not np.all(np.isfinite(val)):
        raise DomainError(f"{profile.label}: field is not finite at u={u}")
    return _as_output(u, val)


def _vectorize(scalar_fn):
    def fn(u):
        if np.ndim(u) == 0:
            return float(scalar_fn(float(u)))
        u_arr = np.asarray(u, dtype=float)
        return np.array([scalar_fn(float(v)) for v in u_arr.ravel()]).reshape(u_arr.shape)
    return fn


def profile_from_field(b: Callable[[float], float], c: float = 0.0, axis=GaugeAxis.Y_GAUGE, *,
                       b0: float = 1.0, lower: float = 0.0, primitive: Callable = None,
                       b_prime: Callable = None, label: str = "inverted") -> FieldProfile:
    """Invert a dimensionless field shape ``b`` back to a gauge shape ``f``.

    Landau gauges solve u f' + f = b, i.e. f(u) = (P(u) + c)/u with
    P(u) = int_lower^u b.  The radial gauge solves r f' + 2 f = b, i.e.
    f(r) = (Q(r) + c)/r^2 with Q(r) = int_lower^r s b(s) ds.  ``primitive``
    replaces the quadrature by a closed form of P (or Q) and ``b_prime``
    the central difference of ``b`` used at the origin.  With the default
    ``lower = 0`` and ``c = 0`` the result is finite at the origin.
    """
    axis = GaugeAxis.parse(axis)
    radial = axis is GaugeAxis.RADIAL
    power = 2 if radial else 1
    c = float(c)
    lower = float(lower)

    def integrand(s):
        return s * b(s) if radial else b(s)

    def prim(u):
        if primitive is not None:
            return float(primitive(u))
        with warnings.catch_warnings():
            warnings.simplefilter("error", integrate.IntegrationWarning)
            try:
                val, _ = integrate.quad(integrand, lower, u, epsabs=1e-14, epsrel=1e-13, limit=200)
            except integrate.IntegrationWarning as exc:
                raise NumericError(
                    f"field shape is not integrable on [{lower}, {u}]: {exc}") from None
        if not math.isfinite(val):
            raise NumericError(f"field shape integral diverges on [{lower}, {u}]")
        return val

    def mean_value(u):
        # (1/u^k) int_0^u s^(k-1) b(s) ds written as an average to avoid 0/0
        if primitive is not None:
            return prim(u) / u ** power
        w = (lambda t: t * b(u * t)) if radial else (lambda t: b(u * t))
        val, _ = integrate.quad(w, 0.0, 1.0, epsabs=1e-15, epsrel=1e-13)
        return val

    eps = SERIES_EPS

    def f_scalar(u):
        if u == 0.0 and (c != 0.0 or lower != 0.0):
            raise DomainError(f"{label}: f is singular at 0 for c={c}, lower={lower}")
        if lower == 0.0 and abs(u) < 1.0:
            base = mean_value(u) if u != 0.0 else (b(0.0) / power)
            return base + (c / u ** power if c != 0.0 else 0.0)
        return (prim(u) + c) / u ** power

    def fp_scalar(u):
        if abs(u) >= eps or c != 0.0 or lower != 0.0:
            if u == 0.0:
                raise DomainError(f"{label}: f' is singular at 0")
            return (b(u) - power * f_scalar(u)) / u
        # removable point: f'(0) = b'(0)/(power + 1)
        if b_prime is not None:
            return float(b_prime(u)) / (power + 1)
        h = 1e-5
        db = (b(u + h) - b(u - h)) / (2 * h)
        return db / (power + 1)

    f_fn = _vectorize(f_scalar)
    fp_fn = _vectorize(fp_scalar)
    sing = (0.0,) if (c != 0.0 or lower != 0.0) else ()
    return FieldProfile(axis=axis, b0=float(b0), f=f_fn, f_prime=fp_fn, label=label,
                        singularities=sing, params={"c": c, "lower": lower})


def profile_from_table(path, axis=GaugeAxis.Y_GAUGE, *, b0: float = 1.0,
                       label: str = None) -> FieldProfile:
    """Custom shape from a CSV table with columns ``u,f`` (monotone cubic)."""
    u_arr, f_arr = _read_columns(path, ("u", "f"))
    interp = PchipInterpolator(u_arr, f_arr, extrapolate=False)
    dinterp = interp.derivative()
    lo, hi = u_arr[0], u_arr[-1]

    def checked(fn):
        def wrapped(u):
            u_a = np.asarray(u, dtype=float)
            if np.any((u_a < lo) | (u_a > hi)):
                raise DomainError(f"u outside tabulated range [{lo}, {hi}]")
            return _as_output(u, fn(u_a))
        return wrapped

    return FieldProfile(axis=GaugeAxis.parse(axis), b0=float(b0), f=checked(interp),
                        f_prime=checked(dinterp), label=label or f"table:{path}",
                        params={"table": str(path)})


def _read_columns(path, names):
    cols = {n: [] for n in names}
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or not set(names) <= set(reader.fieldnames):
                raise ConfigError(f"{path}: table needs columns {', '.join(names)}")
            for row in reader:
                for n in names:
                    cols[n].append(float(row[n]))
    except OSError as exc:
        raise ConfigError(f"cannot read table {path}: {exc}") from None
    except ValueError as exc:
        raise ConfigError(f"{path}: bad number in table: {exc}") from None
    u = np.asarray(cols[names[0]])
    order = np.argsort(u)
    out = [np.asarray(cols[n])[order] for n in names]
    if len(u) < 3 or np.any(np.diff(out[0]) <= 0):
        raise ConfigError(f"{path}: need at least 3 strictly increasing u values")
    return out


def profile_from_field_table(path, axis=GaugeAxis.Y_GAUGE, *, b0: float = 1.0) -> FieldProfile:
    """Invert a tabulated field (CSV columns ``u,B``) to a gauge shape.

    B is interpolated by a monotone cubic and divided by ``b0``; the
    integration starts at 0 when the table covers it, else at its first row.
    """
    u, bz = _read_columns(path, ("u", "B"))
    if b0 == 0:
        raise ConfigError("field table inversion needs b0 != 0")
    interp = PchipInterpolator(u, bz / b0, extrapolate=False)
    dinterp = interp.derivative()
    lo, hi = u[0], u[-1]

    def shape(s):
        if not lo <= s <= hi:
            raise DomainError(f"u={s} outside tabulated range [{lo}, {hi}]")
        return float(interp(s))

    lower = 0.0 if lo <= 0.0 <= hi else float(lo)
    # exact piecewise-polynomial primitives; int s b ds = s A1 - A2 by parts
    a1, a2 = interp.antiderivative(1), interp.antiderivative(2)
    radial = GaugeAxis.parse(axis) is GaugeAxis.RADIAL

    def primitive(s):
        if not lo <= s <= hi:
            raise DomainError(f"u={s} outside tabulated range [{lo}, {hi}]")
        if radial:
            return (s * a1(s) - a2(s)) - (lower * a1(lower) - a2(lower))
        return a1(s) - a1(lower)

    def slope(s):
        if not lo <= s <= hi:
            raise DomainError(f"u={s} outside tabulated range [{lo}, {hi}]")
        return float(dinterp(s))

    return profile_from_field(shape, 0.0, axis, b0=b0, lower=lower, primitive=primitive,
                              b_prime=slope, label=f"field_table:{path}")


def profile_from_name(name: str, b0: float = 1.0, axis=None, **params) -> FieldProfile:
    """Config-facing constructor: builtin by name, ``table`` (u,f) or ``field_table`` (u,B)."""
    key = name.strip().lower()
    if key in ("table", "field_table"):
        if "path" not in params:
            raise ConfigError(f"{key} profile needs 'path'")
        build = profile_from_table if key == "table" else profile_from_field_table
        return build(params["path"], axis or GaugeAxis.Y_GAUGE, b0=b0)
    allowed = {"a", "b", "value"}
    unknown = set(params) - allowed
    if unknown:
        raise ConfigError(f"unknown profile parameters {sorted(unknown)}")
    return make_builtin(key, b0, axis, **params)
