"""Command-line entry point: ``fieldline trajectory|field|susy|compare``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 conserved-quantity breach in a produced trajectory.
"""

from __future__ import annotations

import argparse
import io
import itertools
import json
import logging
import math
import os
import sys

import numpy as np

from . import susy as sq
from .config import RunConfig, load_config
from .dynamics import (MotionConstants, ParticleParams, closed_form_trajectory,
                       derive_constants, params_from_constants, rest_coordinate,
                       trajectory_quadrature)
from .errors import ConfigError, DomainError, FieldlineError, InvariantViolation, NumericError
from .fields import GaugeAxis, ProfileKind, eval_B, profile_from_name
from .figures import adjudicate_decay_curves
from .oracle import OdeSettings, compare, integrate
from .svg import polyline_svg
from .trajectory import write_atomic

log = logging.getLogger("fieldline")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_INVARIANT = 0, 2, 3, 4

# verdicts asserted in the literature for the registered radial profiles
REFERENCE_CLAIMS = {
    ProfileKind.UNIFORM: sq.Verdict.NORMALIZABLE,
    ProfileKind.RADIAL_EXP: sq.Verdict.NOT_NORMALIZABLE,
    ProfileKind.RATIONAL_AB: sq.Verdict.NORMALIZABLE,
}


class StageError(NumericError):
    def __init__(self, stage, exc):
        super().__init__(f"{stage}: {exc}")
        self.stage = stage


def _dumps(doc) -> str:
    return json.dumps(doc, indent=1, sort_keys=True, allow_nan=False,
                      default=_json_default) + "\n"


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def _finite_or_none(v):
    return v if v is None or math.isfinite(v) else None


# --------------------------------------------------------------------------
# config -> objects

def build_profile(cfg: RunConfig):
    spec = cfg.profile
    b0 = spec.b0
    if b0 is None:
        b0 = cfg.constants.k2 if cfg.constants is not None else 1.0
    params = {k: getattr(spec, k) for k in ("a", "b", "value", "path") if getattr(spec, k) is not None}
    return profile_from_name(spec.name, b0, spec.axis, **params)


def build_particle(cfg: RunConfig, profile) -> ParticleParams:
    if cfg.constants is not None:
        c = cfg.constants
        constants = MotionConstants(c.k1, c.k2, c.k3)
        u0 = c.u0 if c.u0 is not None else rest_coordinate(constants, profile)
        return params_from_constants(constants, profile, u0, c.w0, c.direction)
    p = cfg.particle
    if p is None:
        raise ConfigError("config needs a 'particle' or a 'constants' section")
    return ParticleParams(p.q, p.m, p.x0, p.y0, p.vx0, p.vy0)


def ode_settings(cfg: RunConfig) -> OdeSettings:
    t = cfg.tolerances
    return OdeSettings(t.ode_dt_initial, t.ode_rel_tol, t.ode_abs_tol, t.ode_max_steps)


def _method_list(cfg: RunConfig, override=None):
    method = override or cfg.method
    if method == "all":
        return ["quadrature", "closed-form", "ode"]
    return [method]


def run_method(method, cfg, profile, params):
    t_end, n = cfg.time.t_end, cfg.time.n_samples
    try:
        if method == "quadrature":
            return trajectory_quadrature(params, profile, t_end, n, quad_tol=cfg.tolerances.quad_tol)
        if method == "closed-form":
            return closed_form_trajectory(params, profile, t_end, n)
        return integrate(profile, params, t_end, ode_settings(cfg), n)
    except ConfigError as exc:
        raise ConfigError(f"{method} stage: {exc}") from exc
    except (NumericError, DomainError) as exc:
        raise StageError(f"{method} stage", exc) from exc


def _check_invariants(tr, cfg, k3, method):
    tol = cfg.tolerances
    energy, momentum = tol.energy_check, tol.momentum_check
    if method == "ode":
        # the oracle only promises drift proportional to its step tolerance
        floor = 100 * tol.ode_rel_tol * max(1.0, cfg.time.t_end)
        energy, momentum = max(energy, floor), max(momentum, floor)
    bad = []
    if tr.max_energy_residual >= energy:
        bad.append(f"energy residual {tr.max_energy_residual:.3g} >= {energy:.3g}")
    limit = momentum * math.sqrt(k3) if k3 > 0 else momentum
    if tr.max_momentum_residual >= limit:
        bad.append(f"momentum residual {tr.max_momentum_residual:.3g} >= {limit:.3g}")
    return bad


def _stem(cfg, default):
    return cfg.output.stem or default


def _write_trajectory(tr, out_dir, stem, cfg, plot):
    written = []
    tag = tr.method.value.replace("-", "_")
    base = os.path.join(out_dir, f"{stem}_{tag}")
    if "csv" in cfg.output.formats:
        write_atomic(base + ".csv", tr.to_csv_text())
        written.append(base + ".csv")
    if "json" in cfg.output.formats:
        write_atomic(base + ".json", tr.to_json_text())
        written.append(base + ".json")
    if plot:
        title = f"{tr.metadata.get('profile', '')} {tr.method.value}"
        write_atomic(base + ".svg", polyline_svg(tr.x, tr.y, title=title))
        written.append(base + ".svg")
    return written


def _pair_report(trajs):
    pairs = []
    for (ma, a), (mb, b) in itertools.combinations(trajs.items(), 2):
        rep = compare(a, b).as_dict()
        rep.update({"a": ma, "b": mb})
        pairs.append(rep)
    residuals = {m: {"max_energy_residual": t.max_energy_residual,
                     "max_momentum_residual": t.max_momentum_residual}
                 for m, t in trajs.items()}
    return {"pairs": pairs, "residuals": residuals}


# --------------------------------------------------------------------------
# subcommands

def cmd_trajectory(cfg: RunConfig, out_dir: str, plot: bool = False, method=None) -> int:
    profile = build_profile(cfg)
    params = build_particle(cfg, profile)
    k3 = derive_constants(params, profile).k3
    stem = _stem(cfg, "trajectory")
    trajs, skipped = {}, {}
    methods = _method_list(cfg, method)
    for m in methods:
        try:
            trajs[m] = run_method(m, cfg, profile, params)
        except (StageError, ConfigError) as exc:
            if len(methods) == 1:
                raise
            log.warning("skipping %s: %s", m, exc)
            skipped[m] = str(exc)
    if not trajs:
        raise NumericError("no method produced a trajectory: " + "; ".join(skipped.values()))
    violations = []
    for m, tr in trajs.items():
        for path in _write_trajectory(tr, out_dir, stem, cfg, plot or cfg.output.plot):
            log.info("wrote %s", path)
        violations += [f"{m}: {v}" for v in _check_invariants(tr, cfg, k3, m)]
    if len(methods) > 1:
        report = _pair_report(trajs)
        report["skipped"] = skipped
        write_atomic(os.path.join(out_dir, f"{stem}_comparison.json"), _dumps(report))
    if violations:
        raise InvariantViolation("; ".join(violations))
    return EXIT_OK


def cmd_field(cfg: RunConfig, out_dir: str) -> int:
    g = cfg.grid
    if g.n < 2 or not g.u_max > g.u_min:
        raise ConfigError("grid needs n >= 2 and u_max > u_min")
    profile = build_profile(cfg)
    u = np.linspace(g.u_min, g.u_max, g.n)
    try:
        B = eval_B(profile, u)
        f = np.asarray(profile.f(u), dtype=float)
        fp = np.asarray(profile.f_prime(u), dtype=float)
    except DomainError as exc:
        raise ConfigError(f"bad grid for {profile.label}: {exc}") from None
    buf = io.StringIO()
    buf.write("u,f,f_prime,B\n")
    for row in zip(u, f, fp, B):
        buf.write(",".join(f"{v:.17g}" for v in row) + "\n")
    write_atomic(os.path.join(out_dir, f"{_stem(cfg, 'field')}.csv"), buf.getvalue())
    return EXIT_OK


def susy_problem(cfg: RunConfig) -> sq.SusyProblem:
    profile = build_profile(cfg)
    if profile.axis is not GaugeAxis.RADIAL:
        raise ConfigError("susy needs a profile on the radial axis (profile.axis = 'radial')")
    s = cfg.susy
    try:
        branch = sq.SpinBranch(s.spin_branch.lower())
    except ValueError:
        raise ConfigError("susy.spin_branch must be 'lower' or 'upper'") from None
    return sq.SusyProblem(profile, None, s.m_quantum, branch, s.hbar, s.mass)


def cmd_susy(cfg: RunConfig, out_dir: str) -> int:
    problem = susy_problem(cfg)
    s = cfg.susy
    if problem.flags:
        raise NumericError(f"{', '.join(problem.flags)}: lower spin branch with m <= 0 required "
                           f"(got {problem.spin_branch.value}, m={problem.m_quantum})")
    stem = _stem(cfg, "susy")
    if not (0 < s.r_min < s.r_max and s.n_table >= 2):
        raise ConfigError("susy table needs 0 < r_min < r_max and n_table >= 2")
    zm = sq.zero_mode(problem)
    W = sq.superpotential(zm, problem)
    r = np.linspace(s.r_min, s.r_max, s.n_table)
    lp, wv = zm.log_psi(r), W(r)
    buf = io.StringIO()
    buf.write("r,log_psi,W\n")
    for row in zip(r, lp, wv):
        buf.write(",".join(f"{v:.17g}" for v in row) + "\n")
    write_atomic(os.path.join(out_dir, f"{stem}_zero_mode.csv"), buf.getvalue())

    verdict = sq.normalizability(zm, base=s.ladder_base)
    claim = REFERENCE_CLAIMS.get(problem.profile.kind)
    doc = {
        "profile": problem.profile.label,
        "B": problem.B,
        "m_quantum": problem.m_quantum,
        "verdict": verdict.verdict.value,
        "susy": {sq.Verdict.NORMALIZABLE: "unbroken",
                 sq.Verdict.NOT_NORMALIZABLE: "broken"}.get(verdict.verdict, "undetermined"),
        "norm_value": _finite_or_none(verdict.norm_value),
        "tail_report": verdict.tail_exponent_report,
        "reference_claim": claim.value if claim else None,
        "paper_claim_agrees": None if claim is None else claim is verdict.verdict,
        "ladder": [{"R": R, "log_integral": _finite_or_none(v)} for R, v in verdict.ladder],
        "details": {k: (_finite_or_none(v) if isinstance(v, float) else v)
                    for k, v in verdict.details.items()},
    }
    doc["details"]["last_relative_increments"] = [
        _finite_or_none(v) for v in verdict.details["last_relative_increments"]]
    write_atomic(os.path.join(out_dir, f"{stem}_verdict.json"), _dumps(doc))

    try:
        spec = sq.swkb_levels(problem, s.n_max, s.convention)
    except NumericError as exc:
        raise StageError("swkb stage", exc) from exc
    buf = io.StringIO()
    buf.write("n,E_n,residual\n")
    for n, e, res in spec.levels:
        buf.write(f"{n},{e:.17g},{res:.17g}\n")
    write_atomic(os.path.join(out_dir, f"{stem}_spectrum.csv"), buf.getvalue())
    return EXIT_OK


def cmd_compare(cfg: RunConfig, out_dir: str, method=None) -> int:
    methods = list(cfg.methods) or _method_list(cfg, method)
    if method and method != "all" and method not in methods:
        methods.append(method)
    if len(set(methods)) < 2:
        raise ConfigError("compare needs at least two methods (methods = [...] or method = 'all')")
    profile = build_profile(cfg)
    params = build_particle(cfg, profile)
    trajs = {m: run_method(m, cfg, profile, params) for m in dict.fromkeys(methods)}
    report = _pair_report(trajs)
    constants = derive_constants(params, profile)
    report["constants"] = {"k1": constants.k1, "k2": constants.k2, "k3": constants.k3}
    if (profile.kind is ProfileKind.EXP_DECAY and profile.axis is GaugeAxis.Y_GAUGE
            and constants.k3 > 0 and (constants.k1 + constants.k2) ** 2 > constants.k3):
        adj = adjudicate_decay_curves(constants, cfg.time.t_end)
        report["decay_curve_adjudication"] = {
            "verdict": adj["verdict"],
            "derived": adj["derived"].as_dict(),
            "printed": adj["printed"].as_dict(),
        }
    write_atomic(os.path.join(out_dir, f"{_stem(cfg, 'compare')}_report.json"), _dumps(report))
    return EXIT_OK


# --------------------------------------------------------------------------

def _parser():
    p = argparse.ArgumentParser(prog="fieldline",
                                description="Charged-particle trajectories in shaped magnetic fields")
    sub = p.add_subparsers(dest="command", required=True)
    for name, helptext in (("trajectory", "compute a trajectory"),
                           ("field", "tabulate the field profile"),
                           ("susy", "zero mode, normalizability and SWKB levels"),
                           ("compare", "cross-validate trajectory methods")):
        sp = sub.add_parser(name, help=helptext)
        sp.add_argument("--config", required=True, help="JSON run configuration")
        sp.add_argument("--out", default=None, help="output directory (overrides output.dir)")
        sp.add_argument("--method", default=None,
                        choices=["quadrature", "closed-form", "ode", "all"])
        sp.add_argument("--plot", action="store_true", help="also write an SVG of (x, y)")
        sp.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="KEY=VALUE", help="flat override, e.g. time.t_end=20")
    return p


def _setup_logging():
    level = os.environ.get("FIELDLINE_LOG", "WARNING").upper()
    if level.isdigit():
        level = int(level)
    logging.basicConfig(level=level if isinstance(level, int) else getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def main(argv=None) -> int:
    _setup_logging()
    args = _parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.overrides)
        out_dir = args.out or cfg.output.dir
        if args.command == "trajectory":
            return cmd_trajectory(cfg, out_dir, args.plot, args.method)
        if args.command == "field":
            return cmd_field(cfg, out_dir)
        if args.command == "susy":
            return cmd_susy(cfg, out_dir)
        return cmd_compare(cfg, out_dir, args.method)
    except ConfigError as exc:
        print(f"fieldline: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvariantViolation as exc:
        print(f"fieldline: invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (NumericError, DomainError, FieldlineError) as exc:
        print(f"fieldline: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
