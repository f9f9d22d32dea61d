"""Command-line frontend for the five workflows.

    qgres <eigs|resonances|fgr|track|quasimode>
          (--graph G.json | --fixture NAME) [--perturbation P.json]
          [--window a,b,c,d] [--tmax T] [--steps N] [--gamma G]
          [--tol E] [--seed S] [--out DIR]

Tables go to stdout, or to fixed file names under --out DIR (eigs.csv,
resonances.csv, fgr.json, trajectory.csv, quasimode.json).  Files are
written to a temporary name and renamed, so a failing run never leaves a
partial table behind.  Exit codes: 0 success, 2 malformed input, 3 solver
failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile

import numpy as np

from .errors import InputError, SolverError
from .fgr import fgr_coefficients
from .fixtures import fixture
from .graph import MetricGraph, PerturbationFamily, adot, lengths_at, validate_graph
from .quasimode import build_shifted_quasimode, check_resonance_proximity
from .secular import KIND_EMBEDDED, eigenfunction, find_spectral_points
from .tracker import track

_DEFAULT_WINDOW = "0.5,10.5,-3,0"


def _read_json(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc


def _load_graph(args) -> MetricGraph:
    if args.fixture and args.graph:
        raise InputError("--graph and --fixture are mutually exclusive")
    if args.fixture:
        return fixture(args.fixture)
    if args.graph:
        return validate_graph(_read_json(args.graph))
    raise InputError("one of --graph or --fixture is required")


def _load_family(args, g: MetricGraph) -> PerturbationFamily:
    if not args.perturbation:
        raise InputError(f"{args.command} needs --perturbation")
    p = PerturbationFamily.from_json_dict(_read_json(args.perturbation))
    adot(p, g)  # validates the family against this graph
    return p


def _parse_window(text: str):
    parts = text.split(",")
    if len(parts) != 4:
        raise InputError("--window takes four comma-separated numbers re0,re1,im0,im1")
    try:
        re0, re1, im0, im1 = (float(s) for s in parts)
    except ValueError as exc:
        raise InputError(f"bad --window entry: {exc}") from exc
    if not (re0 < re1 and im0 < im1):
        raise InputError(f"window {text!r} is empty")
    return re0, re1, im0, im1


def _emit(out_dir, name: str, text: str) -> None:
    if out_dir is None:
        sys.stdout.write(text)
        return
    os.makedirs(out_dir, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=out_dir, prefix=name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, os.path.join(out_dir, name))
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _embedded(g: MetricGraph, args):
    pts = find_spectral_points(g, args.window, tol=args.tol, seed=args.seed)
    return [q for q in pts if q.kind == KIND_EMBEDDED]


def _lowest_embedded(g: MetricGraph, args):
    pts = _embedded(g, args)
    if not pts:
        raise InputError(f"no embedded eigenvalue in window {args.window}")
    return min(pts, key=lambda q: q.lam.real)


def cmd_eigs(args) -> None:
    g = _load_graph(args)
    pts = sorted(_embedded(g, args), key=lambda q: q.lam.real)
    lines = ["lambda,multiplicity"]
    lines += [f"{q.lam.real:.17g},{q.multiplicity}" for q in pts]
    _emit(args.out, "eigs.csv", "\n".join(lines) + "\n")


def cmd_resonances(args) -> None:
    g = _load_graph(args)
    pts = sorted(find_spectral_points(g, args.window, tol=args.tol, seed=args.seed),
                 key=lambda q: (q.lam.real, q.lam.imag))
    lines = ["re_lambda,im_lambda,multiplicity"]
    lines += [f"{q.lam.real:.17g},{q.lam.imag:.17g},{q.multiplicity}" for q in pts]
    _emit(args.out, "resonances.csv", "\n".join(lines) + "\n")


def cmd_fgr(args) -> None:
    g = _load_graph(args)
    p = _load_family(args, g)
    sp = _lowest_embedded(g, args)
    u = eigenfunction(g, sp)
    rep = fgr_coefficients(g, sp.lam.real, u, adot(p, g))
    _emit(args.out, "fgr.json", _json_text(rep.to_json_dict()))


def cmd_track(args) -> None:
    g = _load_graph(args)
    p = _load_family(args, g)
    sp = _lowest_embedded(g, args)
    u = eigenfunction(g, sp)
    rep = fgr_coefficients(g, sp.lam.real, u, adot(p, g))
    grid = np.linspace(-args.tmax, args.tmax, 2 * args.steps + 1)
    traj = track(g, p, sp, grid, report=rep)
    _emit(args.out, "trajectory.csv", traj.to_csv())


def cmd_quasimode(args) -> None:
    g = _load_graph(args)
    p = _load_family(args, g)
    sp = _lowest_embedded(g, args)
    lam0 = sp.lam.real
    u0 = eigenfunction(g, sp)
    samples = []
    for j in range(1, args.steps + 1):
        t = args.tmax * j / args.steps
        q = build_shifted_quasimode(g, p, t, (lam0, u0))
        prox = check_resonance_proximity(lengths_at(p, g, t), lam0, q.epsilon,
                                         gamma=args.gamma, tol=args.tol)
        dist = prox["distance"]
        samples.append({
            "lambda0": lam0,
            "t": t,
            "epsilon": q.epsilon,
            "gamma": args.gamma,
            "distance": dist if np.isfinite(dist) else None,
            "holds": bool(prox["holds"]),
            "C_observed": q.epsilon / t,
        })
    _emit(args.out, "quasimode.json", _json_text(samples))


_COMMANDS = {
    "eigs": (cmd_eigs, "embedded eigenvalues in a window, as CSV"),
    "resonances": (cmd_resonances, "all spectral points in a window, as CSV"),
    "fgr": (cmd_fgr, "golden-rule decay report for the lowest embedded "
                     "eigenvalue in the window, as JSON"),
    "track": (cmd_track, "resonance trajectory from the lowest embedded "
                         "eigenvalue over t in [-tmax, tmax], as CSV"),
    "quasimode": (cmd_quasimode, "shifted-eigenfunction quasimode quality and "
                                 "resonance proximity per t sample, as JSON"),
}


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--graph", metavar="FILE", help="graph JSON document")
    common.add_argument("--fixture", metavar="NAME",
                        help="built-in graph: double-edge | five-edge | halfline | cycle:K")
    common.add_argument("--perturbation", metavar="FILE",
                        help="edge-length family JSON document")
    common.add_argument("--window", default=_DEFAULT_WINDOW, metavar="a,b,c,d",
                        help="search window Re in [a,b], Im in [c,d] "
                             f"(default {_DEFAULT_WINDOW})")
    common.add_argument("--tmax", type=float, default=None,
                        help="largest |t| sampled (default: track 0.05, quasimode 0.01)")
    common.add_argument("--steps", type=int, default=None,
                        help="t samples per direction, at least 4 "
                             "(default: track 8, quasimode 4)")
    common.add_argument("--gamma", type=float, default=0.9,
                        help="proximity exponent in (0, 1) (default 0.9)")
    common.add_argument("--tol", type=float, default=1e-10,
                        help="root localization tolerance (default 1e-10)")
    common.add_argument("--seed", type=int, default=0,
                        help="seed for search retries (default 0)")
    common.add_argument("--out", metavar="DIR",
                        help="write results under DIR instead of stdout")

    ap = argparse.ArgumentParser(
        prog="qgres",
        description="Spectra, resonances, decay rates, and quasimodes of "
                    "metric graphs with leads.")
    sub = ap.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name, (func, help_text) in _COMMANDS.items():
        sp = sub.add_parser(name, parents=[common], help=help_text)
        sp.set_defaults(func=func)
    return ap


def _resolve_defaults(args) -> None:
    if args.tmax is None:
        args.tmax = 0.05 if args.command == "track" else 0.01
    if args.steps is None:
        args.steps = 8 if args.command == "track" else 4
    if args.tmax <= 0:
        raise InputError("--tmax must be positive")
    if args.steps < 4:
        raise InputError("--steps must be at least 4")
    if not 0.0 < args.gamma < 1.0:
        raise InputError("--gamma must lie in (0, 1)")
    if args.tol <= 0:
        raise InputError("--tol must be positive")


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        _resolve_defaults(args)
        args.window = _parse_window(args.window)
        args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
