"""Command-line interface: ``lagrange-stability <command> [options]``.

Exit codes: 0 on success (for ``classify``: spectrally stable), 2 when
``classify`` finds the point spectrally unstable, 1 on any error. Output is
JSON (reports, tables) or CSV (sweeps, trajectories) with 17 significant
digits so identical inputs give byte-identical output.
"""
from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_UNSTABLE = 2

# Mass ratios of the two systems and the order caps used for their reports.
SYSTEMS = {
    "sun_jupiter": {"mu": 9.538753e-4, "max_order": 48},
    "earth_moon": {"mu": 0.0121506, "max_order": 21},
}
M3_REGULARIZATION = 1e-12


class CliError(Exception):
    """User-facing error; printed as JSON to stderr, exit code 1."""


# -- formatting -----------------------------------------------------------------

def _to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _Float(float(obj))
    return obj


class _Float(float):
    pass


def dumps(obj) -> str:
    """JSON with every float written to 17 significant digits (``null`` if not finite)."""
    def enc(o, indent=0):
        pad = "  " * (indent + 1)
        end = "  " * indent
        if isinstance(o, dict):
            if not o:
                return "{}"
            items = [f"{pad}{json.dumps(k)}: {enc(v, indent + 1)}" for k, v in o.items()]
            return "{\n" + ",\n".join(items) + "\n" + end + "}"
        if isinstance(o, list):
            if not o:
                return "[]"
            if all(not isinstance(v, (dict, list)) for v in o):
                return "[" + ", ".join(enc(v, indent + 1) for v in o) + "]"
            return "[\n" + ",\n".join(pad + enc(v, indent + 1) for v in o) + "\n" + end + "]"
        if isinstance(o, _Float):
            return format(o, ".17g") if math.isfinite(o) else "null"
        return json.dumps(o)
    return enc(_to_jsonable(obj))


def _emit(obj, out=None) -> None:
    text = dumps(obj) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- argument plumbing ------------------------------------------------------------

def _mass_args(p):
    g = p.add_argument_group("mass point (give --masses or both --beta and --m1)")
    g.add_argument("--masses", type=float, nargs=3, metavar=("M1", "M2", "M3"))
    g.add_argument("--beta", type=float)
    g.add_argument("--m1", type=float)


def _mass_point(args):
    from .hamiltonian import mass_parameters, mass_parameters_from_beta_m1

    if args.masses is not None:
        if args.beta is not None or args.m1 is not None:
            raise CliError("give either --masses or --beta/--m1, not both")
        m = np.asarray(args.masses, dtype=float)
        if np.any(~np.isfinite(m)) or np.any(m <= 0):
            raise CliError("masses must be positive and finite")
        return mass_parameters(m / m.sum())
    if args.beta is None or args.m1 is None:
        raise CliError("a mass point needs --masses or both --beta and --m1")
    try:
        return mass_parameters_from_beta_m1(args.beta, args.m1)
    except ValueError as exc:
        raise CliError(str(exc)) from exc


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lagrange-stability",
                                description="Stability of the Lagrange equilateral three-body equilibrium.")
    p.add_argument("--config", help="JSON file of option defaults; command-line flags win")
    p.add_argument("--seed", type=int, default=0, help="seed for sampling-based self-checks")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("classify", help="full stability report for one mass point")
    _mass_args(c)
    c.add_argument("--order", type=int, default=4, help="resonance order cap")
    c.add_argument("--verify", action="store_true", help="also run the homological normalizer")
    c.add_argument("--dioph-c", type=float, default=1e-6)
    c.add_argument("--dioph-upsilon", type=float, default=7.0)
    c.add_argument("--out")

    s = sub.add_parser("sweep", help="grid sweep over the mass space (CSV)")
    s.add_argument("--chart", choices=("beta-m1", "mu-y", "band"), default="band")
    s.add_argument("--n1", type=int, default=200)
    s.add_argument("--n2", type=int, default=200)
    s.add_argument("--range1", type=float, nargs=2, default=(1e-4, 0.0385))
    s.add_argument("--range2", type=float, nargs=2, default=(0.005, 1.0))
    s.add_argument("--columns", nargs="+", help="subset of output columns")
    s.add_argument("--contours", help="write f_deg and f_isodeg zero-locus polylines (JSON) here")
    s.add_argument("--workers", type=int, help="overrides the worker-count environment variable")
    s.add_argument("--out")

    n = sub.add_parser("normalform", help="table of normal-form coefficients omega_jk")
    _mass_args(n)
    n.add_argument("--verify", action="store_true", help="compare with the homological normalizer")
    n.add_argument("--out")

    i = sub.add_parser("integrate", help="integrate the reduced equations from a perturbed equilibrium")
    _mass_args(i)
    i.add_argument("--perturb", nargs=2, action="append", metavar=("COMPONENT", "VALUE"),
                   help="initial offset, e.g. --perturb z5 1e-4 (repeatable)")
    i.add_argument("--periods", type=float, default=100.0, help="duration in units of 2 pi / omega")
    i.add_argument("--n-out", type=int, default=1000)
    i.add_argument("--rtol", type=float, default=1e-12)
    i.add_argument("--atol", type=float, default=1e-14)
    i.add_argument("--csv", help="write the trajectory here")
    i.add_argument("--out")

    r = sub.add_parser("resonances", help="resonance relations at a beta, or the nearest resonant beta")
    r.add_argument("--beta", type=float, required=True)
    r.add_argument("--order", type=int, default=4)
    r.add_argument("--nearest", action="store_true", help="report the closest resonant beta of order <= ORDER")
    r.add_argument("--out")

    rs = sub.add_parser("report-systems", help="Sun-Jupiter and Earth-Moon report (restricted-limit estimate)")
    rs.add_argument("--m3", type=float, default=M3_REGULARIZATION, help="regularizing third mass")
    rs.add_argument("--out")
    return p


def _apply_config(parser, argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    try:
        with open(known.config) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read config {known.config!r}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise CliError("config file must hold a JSON object")
    cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
    parser.set_defaults(**cfg)
    for action in parser._subparsers._group_actions:
        for sp in action.choices.values():
            sp.set_defaults(**cfg)


# -- commands ---------------------------------------------------------------------

def cmd_classify(args) -> int:
    from .classify import stability_report, steepness_check

    mp = _mass_point(args)
    rep = stability_report(mp, max_order=args.order, verify=args.verify,
                           dioph_c=args.dioph_c, dioph_upsilon=args.dioph_upsilon)
    d = rep.as_dict()
    if rep.steepness_radius is not None:
        sc = steepness_check(mp, n_samples=200, seed=args.seed)
        d["steepness_check"] = {"holds": sc.holds, "critical_norm": sc.critical_norm,
                                "min_gradient_norm": sc.min_gradient_norm}
    _emit(d, args.out)
    return EXIT_OK if rep.spectral["spectrally_stable"] else EXIT_UNSTABLE


def cmd_sweep(args) -> int:
    from .sweep import COLUMNS, SweepSpec, run_sweep, sweep_csv, zero_locus_polylines

    cols = tuple(args.columns) if args.columns else COLUMNS
    try:
        spec = SweepSpec(args.chart, args.n1, args.n2, tuple(args.range1), tuple(args.range2), cols)
        res = run_sweep(spec, workers=args.workers)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    text = sweep_csv(res, cols)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.contours:
        _emit({name: [line.tolist() for line in zero_locus_polylines(res, name)]
               for name in ("f_deg", "f_isodeg")} | {"chart": args.chart}, args.contours)
    return EXIT_OK


def cmd_normalform(args) -> int:
    from .birkhoff import ResonanceError, birkhoff_normal_form, closed_form_omegas
    from .classify import resonances_up_to
    from .hamiltonian import FrequencyCollisionError, frequencies

    mp = _mass_point(args)
    try:
        fs = frequencies(mp)
    except FrequencyCollisionError as exc:
        raise CliError(str(exc)) from exc
    hits = resonances_up_to(fs, 4)
    if hits:
        raise CliError({"error": "resonant frequencies: normal form through degree 4 does not exist",
                        "resonances": [h.as_dict() for h in hits]})
    try:
        nf = closed_form_omegas(mp)
    except ResonanceError as exc:
        raise CliError({"error": str(exc), "relation": list(exc.relation)}) from exc
    out = {"beta": mp.beta, "m1": mp.m1, "masses": mp.masses, "closed_form": nf.to_dict()}
    if args.verify:
        res = birkhoff_normal_form(mp)
        W = res.normal_form.omega
        out["homological"] = res.normal_form.to_dict()
        out["max_rel_dev"] = float(np.max(np.abs(W - nf.omega)) / np.max(np.abs(nf.omega)))
        out["residual3"] = res.residual3
        out["residual4"] = res.residual4
    _emit(out, args.out)
    return EXIT_OK


def cmd_integrate(args) -> int:
    from .dynamics import ReducedState, integrate

    mp = _mass_point(args)
    s0 = ReducedState()
    for comp, val in args.perturb or []:
        if comp not in ("z5", "z6", "Z5", "Z6", "r", "Upsilon"):
            raise CliError(f"unknown state component {comp!r}")
        setattr(s0, comp, float(val))
    omega = mp.beta ** 0.75 if mp.beta > 0 else 1.0
    T = args.periods * 2 * math.pi / omega
    traj = integrate(s0, mp, T, n_out=args.n_out, rtol=args.rtol, atol=args.atol, on_exit="stop")
    if args.csv:
        traj.to_csv(args.csv)
    d = traj.displacement()
    _emit({"beta": mp.beta, "m1": mp.m1, "omega": traj.omega, "T": T, "status": traj.status,
           "t_end": traj.times[-1], "initial_displacement": d[0], "max_displacement": d.max(),
           "energy_drift": traj.energy_drift, "momentum_drift": traj.momentum_drift,
           "rhs_evaluations": traj.nfev}, args.out)
    return EXIT_OK


def cmd_resonances(args) -> int:
    from .classify import OutOfRegionError, nearest_resonant_beta, resonances_up_to
    from .hamiltonian import frequencies_from_beta

    if not 0 < args.beta < 1 / 27:
        raise CliError("beta must lie in (0, 1/27)")
    if args.nearest:
        try:
            b, hit = nearest_resonant_beta(args.beta, args.order)
        except (OutOfRegionError, ValueError) as exc:
            raise CliError(str(exc)) from exc
        _emit({"beta": args.beta, "max_order": args.order, "nearest_beta": b, "relation": hit.as_dict()}, args.out)
        return EXIT_OK
    hits = resonances_up_to(frequencies_from_beta(args.beta), args.order)
    _emit({"beta": args.beta, "max_order": args.order, "resonances": [h.as_dict() for h in hits]}, args.out)
    return EXIT_OK


def system_masses(mu: float, m3: float = M3_REGULARIZATION) -> np.ndarray:
    """Primary ``1 - mu``, secondary ``mu - m3`` and a vanishing third mass."""
    if not 0 < m3 < mu:
        raise CliError("the regularizing mass must lie in (0, mu)")
    return np.array([1.0 - mu, mu - m3, m3])


def report_systems(m3: float = M3_REGULARIZATION) -> dict:
    from .birkhoff import closed_form_omegas
    from .classify import convexity_class, nearest_resonant_beta, steepness_radius_value
    from .hamiltonian import mass_parameters

    out = {}
    for name, cfg in SYSTEMS.items():
        mp = mass_parameters(system_masses(cfg["mu"], m3))
        b, hit = nearest_resonant_beta(mp.beta, cfg["max_order"])
        cls = convexity_class(closed_form_omegas(mp))
        out[name] = {
            "label": "limit estimate",
            "mu": cfg["mu"], "m3_regularization": m3, "masses": mp.masses, "beta": mp.beta,
            "max_order": cfg["max_order"], "nearest_resonant_beta": b, "resonance": hit.as_dict(),
            "convexity": cls.value,
            "directionally_quasi_convex": cls.value in ("convex", "quasi_convex", "directionally_quasi_convex"),
            "steepness_radius": float(steepness_radius_value(mp.beta, mp.m1)),
        }
    return out


def cmd_report_systems(args) -> int:
    _emit(report_systems(args.m3), args.out)
    return EXIT_OK


COMMANDS = {
    "classify": cmd_classify,
    "sweep": cmd_sweep,
    "normalform": cmd_normalform,
    "integrate": cmd_integrate,
    "resonances": cmd_resonances,
    "report-systems": cmd_report_systems,
}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:
            # argparse exits 2 on bad usage; 2 is reserved for "unstable"
            return EXIT_OK if exc.code == 0 else EXIT_ERROR
        np.random.seed(args.seed)
        return COMMANDS[args.command](args)
    except CliError as exc:
        msg = exc.args[0] if exc.args else "error"
        sys.stderr.write(dumps(msg if isinstance(msg, dict) else {"error": str(msg)}) + "\n")
        return EXIT_ERROR
    except (ValueError, ArithmeticError, RuntimeError) as exc:
        sys.stderr.write(dumps({"error": f"{type(exc).__name__}: {exc}"}) + "\n")
        return EXIT_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
