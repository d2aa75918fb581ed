"""Sampled trajectories, conservation diagnostics and file formats."""

from __future__ import annotations

import csv
import enum
import io
import json
import os
import tempfile
from dataclasses import dataclass, field

import numpy as np

from .fields import FieldProfile, GaugeAxis

CSV_COLUMNS = ("t", "x", "y", "vx", "vy", "energy_residual", "momentum_residual")


class Method(enum.Enum):
    QUADRATURE = "quadrature"
    CLOSED_FORM = "closed-form"
    ODE_ORACLE = "ode"


def motion_invariant(profile: FieldProfile, qm: float, x, y, vx, vy):
    """Per-mass canonical momentum conjugate to the cyclic coordinate.

    Y gauge: vx - k2 y f(y).  X gauge: vy + k2 x f(x).  Radial gauge:
    x vy - y vx + k2 r^2 f(r) (canonical angular momentum).  Here
    k2 = q b0 / m.
    """
    k2 = qm * profile.b0
    if profile.axis is GaugeAxis.Y_GAUGE:
        return vx - k2 * np.asarray(profile.gauge_potential(y))
    if profile.axis is GaugeAxis.X_GAUGE:
        return vy + k2 * np.asarray(profile.gauge_potential(x))
    r = np.hypot(x, y)
    return x * vy - y * vx + k2 * r * np.asarray(profile.gauge_potential(r))


def residuals(profile, qm, k1, k3, x, y, vx, vy):
    """Energy residual (relative) and momentum residual (absolute)."""
    energy = np.abs(vx * vx + vy * vy - k3) / max(k3, 1e-12)
    momentum = np.abs(motion_invariant(profile, qm, x, y, vx, vy) - k1)
    return energy, momentum


@dataclass
class Trajectory:
    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    vx: np.ndarray
    vy: np.ndarray
    method: Method
    energy_residual: np.ndarray
    momentum_residual: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.t)

    @property
    def samples(self) -> np.ndarray:
        """(n, 5) array of (t, x, y, vx, vy)."""
        return np.column_stack([self.t, self.x, self.y, self.vx, self.vy])

    @property
    def max_energy_residual(self) -> float:
        return float(np.max(self.energy_residual)) if len(self.t) else 0.0

    @property
    def max_momentum_residual(self) -> float:
        return float(np.max(self.momentum_residual)) if len(self.t) else 0.0

    def columns(self):
        return (self.t, self.x, self.y, self.vx, self.vy,
                self.energy_residual, self.momentum_residual)

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(CSV_COLUMNS) + "\n")
        for row in zip(*self.columns()):
            buf.write(",".join(f"{v:.17g}" for v in row) + "\n")
        return buf.getvalue()

    def to_json_text(self) -> str:
        doc = {
            "metadata": dict(self.metadata, method=self.method.value),
            "data": {name: [float(v) for v in col]
                     for name, col in zip(CSV_COLUMNS, self.columns())},
        }
        return json.dumps(doc, indent=1, sort_keys=True) + "\n"

    def to_csv(self, path):
        write_atomic(path, self.to_csv_text())

    def to_json(self, path):
        write_atomic(path, self.to_json_text())

    @classmethod
    def from_csv(cls, path, method=Method.QUADRATURE, metadata=None) -> "Trajectory":
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        cols = {name: np.array([float(r[name]) for r in rows]) for name in CSV_COLUMNS}
        return cls(cols["t"], cols["x"], cols["y"], cols["vx"], cols["vy"], method,
                   cols["energy_residual"], cols["momentum_residual"], dict(metadata or {}))


def build_trajectory(t, x, y, vx, vy, method, profile, qm, constants, metadata=None):
    energy, momentum = residuals(profile, qm, constants.k1, constants.k3, x, y, vx, vy)
    meta = {
        "profile": profile.label,
        "axis": profile.axis.value,
        "b0": profile.b0,
        "k1": constants.k1,
        "k2": constants.k2,
        "k3": constants.k3,
    }
    meta.update(metadata or {})
    return Trajectory(np.asarray(t, float), np.asarray(x, float), np.asarray(y, float),
                      np.asarray(vx, float), np.asarray(vy, float), method, energy, momentum,
                      meta)


def hermite_interpolate(ts, ys, fs, tq):
    """Cubic Hermite interpolation of step data (values ``ys``, slopes ``fs``)."""
    ts = np.asarray(ts)
    tq = np.atleast_1d(np.asarray(tq, dtype=float))
    idx = np.clip(np.searchsorted(ts, tq, side="right") - 1, 0, len(ts) - 2)
    t0, t1 = ts[idx], ts[idx + 1]
    h = (t1 - t0)[:, None]
    s = ((tq - t0) / (t1 - t0))[:, None]
    y0, y1, f0, f1 = ys[idx], ys[idx + 1], fs[idx], fs[idx + 1]
    h10 = s * (1 - s) ** 2
    h01 = s * s * (3 - 2 * s)
    h11 = s * s * (s - 1)
    # increment form (h00 = 1 - h01) reproduces constant data exactly
    return y0 + h01 * (y1 - y0) + h10 * h * f0 + h11 * h * f1


def write_atomic(path, text: str) -> None:
    """Write ``text`` to ``path`` through a temporary file and rename."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
