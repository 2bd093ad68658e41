"""Command-line front end.

Every data-producing command writes a CSV (or JSON) dataset plus a
``<stem>.manifest.json`` naming the exact configuration. Data files carry no
timestamps, so an identical configuration reproduces them byte for byte.
"""

from __future__ import annotations

import argparse
import platform
import sys
import time
from datetime import datetime, timezone
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .checks import run_all
from .couplings import (
    BLOCK_SIZE,
    G_CRITICAL,
    Coupling,
    effective_size,
    flow,
    flow_derivatives,
)
from .dynamics import check_resolution, concurrence_closed_form, envelope
from .errors import FlowOverflowError, NumericalError, QRGError, ValidationError
from .output import csv_text, emit, json_text, parse_config_file, resolve_output, sha256_text, sidecar
from .scaling import (
    collapse,
    concurrence_vs_g,
    derivative_curve,
    dTmax_dg,
    find_minimum,
    first_peak_in_g,
    scaling_pipeline,
    t_max_analytic,
)

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 1, 2
MAX_POINTS = 10**7


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def float_range(text: str) -> Tuple[float, float]:
    """``"0.5..1.1"`` -> (0.5, 1.1); a single number gives a degenerate range."""
    parts = str(text).split("..")
    try:
        if len(parts) == 1:
            v = float(parts[0])
            return v, v
        if len(parts) == 2:
            lo, hi = float(parts[0]), float(parts[1])
            if lo > hi:
                raise ValueError
            return lo, hi
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(f"expected a number or 'lo..hi', got {text!r}")


def int_range(text: str) -> List[int]:
    """``"3..8"`` -> [3, 4, 5, 6, 7, 8] (inclusive); ``"5"`` -> [5]."""
    parts = str(text).split("..")
    try:
        if len(parts) == 1:
            return [int(parts[0])]
        if len(parts) == 2:
            lo, hi = int(parts[0]), int(parts[1])
            if lo <= hi:
                return list(range(lo, hi + 1))
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(f"expected an integer or 'lo..hi', got {text!r}")


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    v = str(text).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off", ""):
        return False
    raise ValidationError(f"expected a boolean, got {text!r}")


def _check_points(points: int) -> int:
    if not 2 <= points <= MAX_POINTS:
        raise ValidationError(f"points must lie in [2, {MAX_POINTS}], got {points}")
    return points


def _steps(args) -> List[int]:
    ns = args.n if args.n is not None else args.n_range
    if any(n < 0 for n in ns):
        raise ValidationError("RG steps must be >= 0")
    return ns


# -- commands ---------------------------------------------------------------


def cmd_flow(args) -> dict:
    if args.g is None:
        raise ValidationError("flow needs a bare field --g")
    lo, hi = args.g
    if lo != hi:
        raise ValidationError("flow takes a single bare --g value")
    bare = Coupling(args.J, lo)
    n_max = args.steps if args.steps is not None else max(_steps(args))
    rows, truncated = [], 0
    for n in range(n_max + 1):
        try:
            c = flow(bare, n).final
            d = flow_derivatives(bare, n)
        except FlowOverflowError:
            truncated = n_max + 1 - n
            break
        rows.append((n, effective_size(n), c.J, c.g, d.dJn_dg, d.dgn_dg))
    data = csv_text(["n", "N", "J_n", "g_n", "dJn_dg", "dgn_dg"], rows)
    warnings = {"overflow_truncated_rows": truncated} if truncated else {}
    return {"data": data, "ext": ".csv", "warnings": warnings}


def cmd_dynamics(args) -> dict:
    ns = _steps(args)
    points = _check_points(args.points)
    if args.t is not None:
        # g sweep at fixed time
        g_lo, g_hi = args.g if args.g is not None else (0.0, 3.0)
        if not g_lo < g_hi:
            raise ValidationError("fixed-time mode needs a g range lo..hi")
        gs = np.linspace(g_lo, g_hi, points)
        rows, first_peak = [], {}
        for n in ns:
            vals = concurrence_vs_g(args.t, n, gs, args.J, args.rescale_time)
            rows.extend((g, n, v) for g, v in zip(gs, vals))
            try:
                first_peak[str(n)] = first_peak_in_g(args.t, n, gs, args.J, args.rescale_time)
            except QRGError:
                first_peak[str(n)] = None
        summary = {"mode": "fixed_t", "t": args.t, "first_peak_g": first_peak}
        return {"data": csv_text(["g", "n", "C"], rows), "ext": ".csv", "summary": summary}

    if args.g is None or args.g[0] != args.g[1]:
        raise ValidationError("dynamics needs either --t (sweep g) or a single --g (sweep t)")
    bare = Coupling(args.J, args.g[0])
    t_lo, t_hi = args.t_range
    if t_lo != 0.0:
        raise ValidationError("time grids start at t = 0")
    rows, max_c = [], {}
    for n in ns:
        c = flow(bare, n).final
        check_resolution(c, t_hi, points)
        ts = np.linspace(0.0, t_hi, points)
        vals = concurrence_closed_form(c, ts)
        max_c[str(n)] = {"sampled": float(np.max(vals)), "envelope": envelope(c.g), "J_n": c.J, "g_n": c.g}
        if args.rescale_time:
            rows.extend((t, n, v, t * c.J) for t, v in zip(ts, vals))
        else:
            rows.extend((t, n, v) for t, v in zip(ts, vals))
    header = ["t", "n", "C"] + (["t_rescaled"] if args.rescale_time else [])
    summary = {"mode": "fixed_g", "g": bare.g, "max_C": max_c}
    return {"data": csv_text(header, rows), "ext": ".csv", "summary": summary}


def _g_grid(args, default: Tuple[float, float]) -> np.ndarray:
    lo, hi = args.g if args.g is not None else default
    if lo == hi:
        return np.array([lo])
    return np.linspace(lo, hi, _check_points(args.points))


def cmd_peaks(args) -> dict:
    rows = []
    for n in _steps(args):
        for g in _g_grid(args, (0.5, 1.1)):
            rec = t_max_analytic(Coupling(args.J, g), n, args.k, rescaled=not args.bare_time)
            rows.append((rec.n, rec.N, rec.g, rec.k, rec.t_max, rec.c_max))
    return {"data": csv_text(["n", "N", "g", "k", "t_max", "c_max"], rows), "ext": ".csv"}


def cmd_derivative(args) -> dict:
    g_lo, g_hi = args.g if args.g is not None else (0.5, 1.1)
    rescaled = not args.bare_time
    rows, minima = [], {}
    for n in _steps(args):
        if args.method == "exact":
            curve = derivative_curve(args.J, (g_lo, g_hi), args.points, n, args.k, rescaled)
            gs, vals = curve.g, curve.dT_dg
            try:
                g_m, v_m = find_minimum(curve)
                minima[str(n)] = {"g_m": g_m, "value": v_m}
            except ValidationError as exc:
                minima[str(n)] = {"error": str(exc)}
        else:
            gs = np.linspace(g_lo, g_hi, _check_points(args.points))
            vals = [dTmax_dg(g, n, args.k, "fd", args.J, rescaled) for g in gs]
        N = effective_size(n)
        rows.extend((n, N, g, v) for g, v in zip(gs, vals))
    summary = {"method": args.method, "minima": minima}
    return {"data": csv_text(["n", "N", "g", "dT_dg"], rows), "ext": ".csv", "summary": summary}


def cmd_scaling(args) -> dict:
    g_range = args.g if args.g is not None else (0.5, 1.1)
    ns = _steps(args)
    res = scaling_pipeline(ns, g_range, args.points, args.k, args.J, rescaled=not args.bare_time)
    samples = [
        {"n": n, "N": effective_size(n), "g_m": gm, "dT_dg_at_g_m": v}
        for n, (gm, v) in zip(res.n_values, res.minima)
    ]
    payload = {
        "theta_fit": res.theta_fit.as_dict(),
        "gm_drift_fit": res.gm_drift_fit.as_dict(),
        "samples": samples,
    }
    return {"data": json_text(payload), "ext": ".json"}


def cmd_collapse(args) -> dict:
    g_range = args.g if args.g is not None else (0.5, 1.1)
    rescaled = not args.bare_time
    curves = [derivative_curve(args.J, g_range, args.points, n, args.k, rescaled) for n in _steps(args)]
    minima = [find_minimum(c) for c in curves]
    groups, metric = collapse(curves, minima, y_exponent=args.y_exponent)
    rows = [(p.N, p.x, p.y) for group in groups for p in group]
    summary = {
        "collapse_metric": metric,
        "y_exponent": args.y_exponent,
        "compared_sizes": sorted(c.N for c in curves)[-2:],
        "minima": [{"N": c.N, "g_m": gm, "value": v} for c, (gm, v) in zip(curves, minima)],
    }
    return {"data": csv_text(["N", "x", "y"], rows), "ext": ".csv", "summary": summary}


def cmd_verify(args) -> dict:
    start = time.perf_counter()
    results = run_all(args.grid_points)
    lines = [f"{'suite':<26} {'max_residual':>14} {'tolerance':>10}  status"]
    for r in results:
        lines.append(f"{r.name:<26} {r.max_residual:>14.3e} {r.tolerance:>10.0e}  {'PASS' if r.passed else 'FAIL'}")
    lines.append(f"elapsed {time.perf_counter() - start:.2f}s")
    print("\n".join(lines), file=sys.stderr if args.out else sys.stdout)
    rows = [(r.name, r.max_residual, r.tolerance, "pass" if r.passed else "fail") for r in results]
    failed = [r.name for r in results if not r.passed]
    return {
        "data": csv_text(["suite", "max_residual", "tolerance", "status"], rows),
        "ext": ".csv",
        "exit": EXIT_NUMERICAL if failed else EXIT_OK,
        "stdout": False,
        "warnings": {"failed_suites": failed} if failed else {},
    }


COMMANDS = {
    "flow": cmd_flow,
    "dynamics": cmd_dynamics,
    "peaks": cmd_peaks,
    "derivative": cmd_derivative,
    "scaling": cmd_scaling,
    "collapse": cmd_collapse,
    "verify": cmd_verify,
}

# per-command defaults for the step selection
_N_DEFAULTS = {
    "flow": "0..8",
    "dynamics": "0..4",
    "peaks": "0..8",
    "derivative": "0..8",
    "scaling": "3..8",
    "collapse": "5..8",
}


def build_parser() -> Tuple[argparse.ArgumentParser, Dict[str, argparse.ArgumentParser]]:
    parser = _Parser(prog="qrgdyn", description="RG entanglement dynamics of the transverse-field Ising chain")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    subs = {}

    def add(name, help_text, physics=True):
        # arguments are added per subparser: argparse parents share Action
        # objects, so per-command defaults would leak between commands
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="flat key=value file (or a run manifest); CLI flags win")
        p.add_argument("--out", help="dataset path; defaults to $QRGDYN_OUTPUT_DIR/<command>.csv, else stdout")
        p.add_argument("--J", type=float, default=1.0, help="bare exchange coupling (default 1)")
        if physics:
            p.add_argument("--g", "--g-range", dest="g", type=float_range, default=None, help="bare field or lo..hi")
            p.add_argument("--n", dest="n", type=int_range, default=None, help="RG step or lo..hi")
            p.add_argument("--n-range", dest="n_range", type=int_range, default=int_range(_N_DEFAULTS[name]))
            p.add_argument("--k", type=int, default=1, help="peak order (1 = first maximum)")
        subs[name] = p
        return p

    p = add("flow", "RG trajectory of (J, g) and its derivatives", physics=True)
    p.add_argument("--steps", type=int, default=None, help="number of RG steps (alias for --n max)")

    p = add("dynamics", "concurrence vs g at fixed t, or vs t at fixed g", physics=True)
    p.add_argument("--t", type=float, default=None, help="fixed time: sweep g instead of t")
    p.add_argument("--t-range", type=float_range, default=(0.0, 10.0), help="0..t_end for the time sweep")
    p.add_argument("--points", type=int, default=4001)
    p.add_argument("--rescale-time", action="store_true", help="time in units of 1/J_n")

    for name, help_text, points in (
        ("peaks", "times and heights of the k-th concurrence maximum", 121),
        ("derivative", "dT_max/dg against the bare field", 2001),
        ("scaling", "fits of the dip depth and position against N", 2001),
        ("collapse", "finite-size data collapse of dT_max/dg", 2001),
    ):
        p = add(name, help_text, physics=True)
        p.add_argument("--points", type=int, default=points)
        p.add_argument("--bare-time", action="store_true", help="measure T_max in bare time units instead of 1/J_n")
        if name == "derivative":
            p.add_argument("--method", choices=("exact", "fd"), default="exact")
        if name == "collapse":
            p.add_argument("--y-exponent", type=float, default=0.0, help="scale y by N**(-y_exponent)")

    p = add("verify", "run the oracle-equivalence suites", physics=False)
    p.add_argument("--grid-points", type=int, default=50)

    return parser, subs


_BOOL_KEYS = {"rescale_time", "bare_time"}


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    parser, subs = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = parser.parse_args(argv)
    if args.config:
        cfg = parse_config_file(args.config)
        sp = subs[args.command]
        known = {a.dest for a in sp._actions}
        unknown = sorted(set(cfg) - known - {"command"})
        if unknown:
            raise ValidationError(f"unknown config keys for '{args.command}': {', '.join(unknown)}")
        defaults = {}
        for key, value in cfg.items():
            if key in ("command", "config"):
                continue
            if key in _BOOL_KEYS:
                defaults[key] = _bool(value)
            elif isinstance(value, list):
                # manifests store ranges as lists
                defaults[key] = f"{value[0]}..{value[-1]}" if value else None
            else:
                defaults[key] = str(value)
        sp.set_defaults(**defaults)
        args = parser.parse_args(argv)
    return args


def resolved_config(args) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k not in ("config", "out")}
    for key, value in cfg.items():
        if isinstance(value, tuple):
            cfg[key] = list(value)
    return cfg


def write_outputs(args, result: dict, started: float, started_wall: str) -> None:
    path = resolve_output(args.out, args.command, result["ext"])
    if path is None:
        if result.get("stdout", True):
            emit(result["data"], None)
        return
    emit(result["data"], path)
    outputs = {path.name: sha256_text(result["data"])}
    if "summary" in result:
        summary_path = sidecar(path, ".json")
        text = json_text(result["summary"])
        emit(text, summary_path)
        outputs[summary_path.name] = sha256_text(text)
    manifest = {
        "tool": "qrgdyn",
        "version": __version__,
        "command": args.command,
        "config": resolved_config(args),
        "derived_constants": {"g_c": G_CRITICAL, "block_size": BLOCK_SIZE},
        "outputs": outputs,
        "warnings": result.get("warnings", {}),
        "python": platform.python_version(),
        "numpy": np.__version__,
        "started_at": started_wall,
        "duration_seconds": time.perf_counter() - started,
    }
    emit(json_text(manifest), sidecar(path, ".manifest.json"))


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        try:
            args = parse_args(argv)
        except SystemExit as exc:
            # argparse exits on bad flags and on --help/--version
            return exc.code if isinstance(exc.code, int) else EXIT_VALIDATION
        started = time.perf_counter()
        started_wall = datetime.now(timezone.utc).isoformat(timespec="seconds")
        result = COMMANDS[args.command](args)
        write_outputs(args, result, started, started_wall)
        for key, value in result.get("warnings", {}).items():
            print(f"warning: {key} = {value}", file=sys.stderr)
        return result.get("exit", EXIT_OK)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (NumericalError, FloatingPointError, OverflowError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
