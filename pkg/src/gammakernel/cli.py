"""Command-line front end: every computation as a reproducible run.

Each subcommand resolves its options into a single configuration mapping,
echoes that mapping into the output header (a ``#``-prefixed comment block
atop CSV, or the first object of a JSON-lines file), and emits rows whose
floating-point cells carry 17 significant digits, so re-running the echoed
configuration reproduces the numeric columns bit for bit.

Exit codes: 0 success; 2 invalid parameters or arguments; 3 numerical
non-convergence.  Failures print a machine-readable JSON object to stderr
naming the failed precondition.  Half-integers are always written "n/2";
permutation words are JSON arrays.  The environment variable GK_THREADS caps
the threads numerical libraries may use.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
from dataclasses import dataclass
from typing import Iterable

__all__ = ["CliError", "main"]

_EXIT_INVALID = 2
_EXIT_NONCONVERGED = 3


class CliError(Exception):
    """Invalid arguments or parameters; carries the failing precondition."""

    def __init__(self, name: str, message: str):
        super().__init__(message)
        self.name = name


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would sys.exit(2) on its own
        raise CliError("argv", message)


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".17g")
    if isinstance(v, complex):
        return f"{v.real:.17g}{v.imag:+.17g}j"
    return str(v)


# ---------------------------------------------------------------------------
# Argument parsing helpers
# ---------------------------------------------------------------------------

def _parse_complex(text: str, flag: str) -> complex:
    try:
        value = complex(text.replace(" ", ""))
    except ValueError:
        raise CliError(flag, f"{flag}: cannot parse {text!r} as a number")
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        raise CliError(flag, f"{flag}: value must be finite")
    return value


_HALF_RE = re.compile(r"\s*(-?\d+)\s*/\s*2\s*\Z")


def _parse_half(text: str):
    from .lattice import HalfInt

    m = _HALF_RE.match(text)
    if not m:
        raise CliError(
            "half_integer_format",
            f"half-integers must be written 'n/2' with odd n, got {text!r}",
        )
    n = int(m.group(1))
    if n % 2 == 0:
        raise CliError(
            "half_integer_format", f"{text!r} is not a half-integer (even numerator)"
        )
    return HalfInt(n)


def _parse_half_list(text: str) -> tuple:
    text = text.strip()
    if not text:
        return ()
    return tuple(_parse_half(part) for part in text.split(","))


def _parse_partition(text: str):
    from .lattice import Partition

    text = text.strip()
    rows: list[int] = []
    if text:
        try:
            rows = [int(part) for part in text.split(",")]
        except ValueError:
            raise CliError("partition_format", f"cannot parse partition {text!r}")
    try:
        return Partition(rows)
    except ValueError as e:
        raise CliError("partition_rows", str(e))


def _parse_word(text: str) -> tuple[int, ...]:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError:
        raise CliError("word_format", f"word must be a JSON array, got {text!r}")
    if not isinstance(raw, list) or not all(
        isinstance(k, int) and not isinstance(k, bool) for k in raw
    ):
        raise CliError("word_format", f"word must be a JSON array of integers, got {text!r}")
    return tuple(raw)


def _parse_sweep(text: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(part) for part in text.split(","))
    except ValueError:
        raise CliError("sweep_format", f"cannot parse sweep {text!r}")
    if not vals or not all(0.0 < v < 1.0 for v in vals):
        raise CliError("sweep_range", "sweep values must lie in (0, 1)")
    return vals


def _build_params(args):
    from .zmeasure import Params

    z = _parse_complex(args.z, "z")
    if args.zp.strip().lower() == "conj":
        zp = z.conjugate()
    else:
        zp = _parse_complex(args.zp, "zp")
    try:
        return Params(z, zp)
    except ValueError as e:
        raise CliError("params_admissible", str(e))


def _xi_value(args, required: bool):
    xi = getattr(args, "xi", None)
    if xi is None:
        if required:
            raise CliError("xi_required", "this computation needs --xi in (0, 1)")
        return None
    if not (0.0 < xi < 1.0):
        raise CliError("xi_range", f"xi must lie in (0, 1), got {xi}")
    return xi


def _xi_params(args):
    from .zmeasure import XiParams

    return XiParams(_build_params(args), _xi_value(args, required=True))


def _quadrature(args):
    from .kernels import QuadratureConfig

    overrides = {}
    if getattr(args, "nodes", None) is not None:
        overrides["nodes"] = args.nodes
    if getattr(args, "tol", None) is not None:
        overrides["tol"] = args.tol
    if getattr(args, "max_nodes", None) is not None:
        overrides["max_nodes"] = args.max_nodes
    if not overrides:
        return None
    try:
        return QuadratureConfig(**overrides)
    except ValueError as e:
        raise CliError("quadrature_config", str(e))


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------

@dataclass
class RunConfig:
    """A fully resolved run: the command, its options, and the output plan."""

    command: str
    options: dict
    fmt: str
    output: str

    def echo(self) -> dict:
        return {"command": self.command, **self.options}


def _write_output(cfg: RunConfig, header: list[str], rows: list[list]) -> None:
    from . import __version__

    if cfg.output == "-":
        _write_stream(cfg, header, rows, sys.stdout, __version__)
    else:
        with open(cfg.output, "w", encoding="utf-8", newline="") as fh:
            _write_stream(cfg, header, rows, fh, __version__)


def _write_stream(cfg, header, rows, fh, version) -> None:
    if cfg.fmt == "csv":
        fh.write(f"# gammakernel {version}\n")
        fh.write(f"# config: {json.dumps(cfg.echo(), sort_keys=True)}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    else:
        fh.write(
            json.dumps({"gammakernel": version, "config": cfg.echo()}, sort_keys=True)
            + "\n"
        )
        for row in rows:
            obj = {key: (_fmt(v) if isinstance(v, (float, complex)) else v)
                   for key, v in zip(header, row)}
            fh.write(json.dumps(obj) + "\n")


def _emit_error(name: str, code: int, message: str) -> None:
    sys.stderr.write(
        json.dumps({"error": {"name": name, "exit_code": code, "message": message}})
        + "\n"
    )


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _cmd_weight(args) -> tuple[RunConfig, list[str], list[list]]:
    from .lattice import FiniteConfig
    from .zmeasure import log_weight_config, log_weight_partition

    p = _xi_params(args)
    if (args.partition is None) == (args.config is None):
        raise CliError("weight_input", "give exactly one of --lambda or --config")
    if args.partition is not None:
        lam = _parse_partition(args.partition)
        label, kind = str(lam) or "(empty)", "partition"
        logw = log_weight_partition(lam, p)
    else:
        pts = _parse_half_list(args.config)
        config = FiniteConfig(pts)
        if len(config.positives) != len(config.negatives):
            raise CliError(
                "config_balanced",
                "--config must be balanced (equal counts on both sides of 0)",
            )
        label, kind = ",".join(str(x) for x in config.points) or "(empty)", "config"
        logw = log_weight_config(config, p)
    cfg = _run_config(args, {
        "z": _fmt(p.base.z), "zp": _fmt(p.base.z_prime), "xi": args.xi,
        "object": label, "kind": kind,
    })
    return cfg, ["kind", "object", "log_weight", "weight"], [
        [kind, label, logw, math.exp(logw)]
    ]


_METHODS = ("integrable", "contour-limit", "contour-prelimit", "spectral")


def _kernel_grid(args) -> tuple[tuple, tuple]:
    from .kernels import window_points

    if args.x is None and args.window is None:
        raise CliError("kernel_grid", "give --x (and optionally --y) or --window")
    if args.x is not None:
        xs = _parse_half_list(args.x)
        ys = _parse_half_list(args.y) if args.y is not None else xs
        if not xs or not ys:
            raise CliError("kernel_grid", "empty point list")
        return xs, ys
    pts = window_points(args.window)
    return pts, pts


def _cmd_kernel(args) -> tuple[RunConfig, list[str], list[list]]:
    from . import kernels as kr
    from .zmeasure import XiParams

    if args.method not in _METHODS:
        raise CliError("kernel_method", f"--method must be one of {_METHODS}")
    xs, ys = _kernel_grid(args)
    base = _build_params(args)
    q = _quadrature(args)
    needs_xi = args.method in ("contour-prelimit", "spectral")
    xi = _xi_value(args, required=needs_xi)
    if not needs_xi and xi is not None:
        raise CliError("xi_forbidden", f"--xi does not apply to method {args.method}")

    rows: list[list] = []
    if args.method == "spectral":
        # The fixed-window diagonalization is interior-accurate only, so pad
        # until the requested entries stabilize (--tol sets the residual).
        N = max(4, args.window or 0,
                max((abs(t.twice) + 1) // 2 for t in (*xs, *ys)))
        wk = kr.underline_prelimit_window(
            N, XiParams(base, xi), tol=args.tol if args.tol is not None else 1e-9
        )
        for x in xs:
            for y in ys:
                rows.append([str(x), str(y), wk.entry(x, y)])
    else:
        for x in xs:
            for y in ys:
                if args.method == "integrable":
                    v = kr.underline_limit_integrable(x, y, base)
                elif args.method == "contour-limit":
                    v = kr.underline_limit_contour(x, y, base, q)
                else:
                    v = kr.underline_prelimit_contour(x, y, XiParams(base, xi), q)
                rows.append([str(x), str(y), v])
    cfg = _run_config(args, {
        "method": args.method, "z": _fmt(base.z), "zp": _fmt(base.z_prime),
        "xi": xi, "x": [str(t) for t in xs], "y": [str(t) for t in ys],
        "nodes": getattr(args, "nodes", None), "tol": getattr(args, "tol", None),
        "max_nodes": getattr(args, "max_nodes", None),
    })
    return cfg, ["x", "y", "value"], rows


def _cmd_correlate(args) -> tuple[RunConfig, list[str], list[list]]:
    from itertools import combinations

    from . import kernels as kr
    from .zmeasure import correlation_oracle

    p = _xi_params(args)
    if args.order < 1 or args.order > 3:
        raise CliError("correlate_order", "--order must be 1, 2, or 3")
    under = kr.underline_prelimit_window(args.window, p)
    wk = under if args.process == "maya" else kr.j_transform(under)
    rows: list[list] = []
    worst = 0.0
    for size in range(1, args.order + 1):
        for pts in combinations(wk.points, size):
            oracle = correlation_oracle(pts, p, args.max_size, process=args.process)
            minor = wk.minor(pts)
            diff = abs(oracle.value - minor)
            worst = max(worst, diff - oracle.tail_mass)
            rows.append([
                ";".join(str(t) for t in pts), oracle.value, oracle.tail_mass,
                minor, diff, diff <= oracle.tail_mass + 1e-7,
            ])
    cfg = _run_config(args, {
        "z": _fmt(p.base.z), "zp": _fmt(p.base.z_prime), "xi": args.xi,
        "window": args.window, "order": args.order, "max_size": args.max_size,
        "process": args.process,
    })
    return cfg, ["points", "oracle", "tail_mass", "minor", "abs_diff", "passed"], rows


def _parse_test_function(args):
    from .fredholm import InverseDecay, TestFunction

    try:
        mapping = json.loads(args.f)
    except json.JSONDecodeError:
        raise CliError("f_format", f"--f must be a JSON object, got {args.f!r}")
    if not isinstance(mapping, dict) or not mapping:
        raise CliError("f_format", "--f must be a non-empty JSON object")
    values = {}
    for key, v in mapping.items():
        values[_parse_half(key)] = float(v)
    tail = InverseDecay(args.tail_c) if args.tail_c is not None else None
    try:
        return TestFunction.from_map(values, tail=tail)
    except ValueError as e:
        raise CliError("f_values", str(e))


def _cmd_fredholm(args) -> tuple[RunConfig, list[str], list[list]]:
    from . import kernels as kr
    from .fredholm import ZeroTail, expectation_det, expectation_sum

    p = _xi_params(args)
    f = _parse_test_function(args)
    s = expectation_sum(f, p, max_size=args.max_size)
    wk = kr.j_transform(kr.underline_prelimit_window(args.window, p))
    d = expectation_det(f, wk, tol=args.det_tol, full_output=True)
    exact = isinstance(f.tail, ZeroTail) and d.windows[-1] >= f.window_radius
    det_err = 0.0 if exact else (abs(d.increments[-1]) if d.increments else 0.0)
    diff = abs(s.value - d.value)
    combined = s.error + max(args.det_tol, det_err) + 1e-10
    rows = [
        ["sum", s.value, s.error],
        ["det", d.value, det_err],
        ["difference", diff, combined],
    ]
    cfg = _run_config(args, {
        "z": _fmt(p.base.z), "zp": _fmt(p.base.z_prime), "xi": args.xi,
        "f": {str(x): v for x, v in f.values}, "tail_c": args.tail_c,
        "window": args.window, "max_size": args.max_size, "det_tol": args.det_tol,
    })
    return cfg, ["route", "value", "error"], rows


def _rn_config(args):
    from .lattice import FiniteConfig

    pts = _parse_half_list(args.config)
    config = FiniteConfig(pts)
    if len(config.positives) != len(config.negatives):
        raise CliError(
            "config_balanced",
            "--config must be balanced (equal counts on both sides of 0)",
        )
    return config


def _cmd_rn(args) -> tuple[RunConfig, list[str], list[list]]:
    from .rn import rn_compose, rn_exact, rn_limit, word_window
    from .zmeasure import XiParams

    word = _parse_word(args.word)
    config = _rn_config(args)
    base = _build_params(args)
    xi = _xi_value(args, required=False)
    pts_n = max(((abs(x.twice) + 1) // 2 for x in config.points), default=0)
    N = args.window if args.window is not None else max(word_window(word), pts_n, 1)
    if N < word_window(word):
        raise CliError("rn_window", f"--window must be >= {word_window(word)} for this word")
    try:
        expr = rn_compose(word, config.restrict(N), base, N=N, radius=args.radius)
    except ValueError as e:
        raise CliError("rn_expression", str(e))
    rows: list[list] = []
    if xi is not None:
        rows.append(["exact", xi, rn_exact(word, config, XiParams(base, xi)), 0.0])
        rows.append(["closed_form", xi, expr.evaluate(config, xi=xi), 0.0])
    limit = rn_limit(expr, config)
    rows.append(["limit", 1.0, limit.value, limit.bound])
    cfg = _run_config(args, {
        "z": _fmt(base.z), "zp": _fmt(base.z_prime), "xi": xi,
        "word": list(word), "config": [str(x) for x in config.points],
        "window": N, "radius": args.radius,
    })
    return cfg, ["route", "xi", "value", "bound"], rows


def _cylinder(args):
    from .rn import CylinderFunction

    if (args.f_contains is None) == (args.f_const is None):
        raise CliError("transport_f", "give exactly one of --f-contains or --f-const")
    if args.f_const is not None:
        return CylinderFunction.constant(args.f_const), f"const:{_fmt(args.f_const)}"
    pts = _parse_half_list(args.f_contains)
    if not pts:
        raise CliError("transport_f", "--f-contains needs at least one point")
    F = CylinderFunction.contains(pts[0])
    for t in pts[1:]:
        F = F.times(CylinderFunction.contains(t))
    return F, "contains:" + ",".join(str(t) for t in pts)


def _cmd_transport(args) -> tuple[RunConfig, list[str], list[list]]:
    from .rn import verify_limit_transport, verify_transport
    from .zmeasure import XiParams

    word = _parse_word(args.word)
    base = _build_params(args)
    F, f_label = _cylinder(args)
    xi = _xi_value(args, required=False)
    header = ["mode", "lhs", "rhs", "difference", "tolerance", "passed"]
    common = {
        "z": _fmt(base.z), "zp": _fmt(base.z_prime), "xi": xi,
        "word": list(word), "F": f_label,
    }
    if xi is not None:
        rep = verify_transport(word, F, XiParams(base, xi), max_size=args.max_size)
        rows = [["prelimit", rep.lhs, rep.rhs, rep.difference, rep.bound, rep.passed]]
        cfg = _run_config(args, {**common, "max_size": args.max_size})
    else:
        rep = verify_limit_transport(
            word, F, base, kernel_window=args.window, atol=args.atol
        )
        rows = [["limit", rep.lhs, rep.rhs, rep.difference, rep.tolerance, rep.passed]]
        cfg = _run_config(args, {**common, "window": args.window, "atol": args.atol})
    return cfg, header, rows


def _cmd_converge(args) -> tuple[RunConfig, list[str], list[list]]:
    from . import kernels as kr
    from .fredholm import TestFunction, expectation_det
    from .zmeasure import XiParams

    base = _build_params(args)
    sweep = _parse_sweep(args.sweep)
    N = args.window
    rows: list[list] = []

    def stab_tol(xi: float) -> float:
        # Window stabilization floor scaled to the pre-limit correlation
        # scale 1/(1-xi); the padding ladder would otherwise outgrow desk
        # memory near xi = 1 chasing accuracy far below the xi-gap itself.
        return max(args.tol, 2.0 * (1.0 - xi))

    if args.report == "kernel":
        limit = kr.underline_limit_window(N, base)
        header = ["xi", "max_abs_gap"]
        for xi in sweep:
            pre = kr.underline_prelimit_window(N, XiParams(base, xi), tol=stab_tol(xi))
            rows.append([xi, float(abs(pre.values - limit.values).max())])
    elif args.report == "blocknorms":
        bl_limit = kr.weighted_blocks(kr.j_transform(kr.underline_limit_window(N, base)))
        header = ["xi", "trace_pp", "trace_gap", "hs_pm", "hs_gap"]
        for xi in sweep:
            bl = kr.weighted_blocks(
                kr.j_transform(kr.underline_prelimit_window(N, XiParams(base, xi), tol=stab_tol(xi)))
            )
            rows.append([
                xi, bl.trace_pp, abs(bl.trace_pp - bl_limit.trace_pp),
                bl.hs_pm, abs(bl.hs_pm - bl_limit.hs_pm),
            ])
    elif args.report == "blockcauchy":
        header = ["N", "trace_pp", "trace_increment", "hs_pm", "hs_increment"]
        prev = None
        n = 16
        while n <= N:
            bl = kr.weighted_blocks(kr.j_transform(kr.underline_limit_window(n, base)))
            if prev is None:
                rows.append([n, bl.trace_pp, 0.0, bl.hs_pm, 0.0])
            else:
                rows.append([
                    n, bl.trace_pp, abs(bl.trace_pp - prev.trace_pp),
                    bl.hs_pm, abs(bl.hs_pm - prev.hs_pm),
                ])
            prev = bl
            n *= 2
    elif args.report == "expectation":
        f = TestFunction.from_callable(lambda t: -0.3 / abs(t), 4)
        kernel_n = max(8, 2 * math.ceil(f.window_radius))
        limit_val = expectation_det(
            f, kr.j_transform(kr.underline_limit_window(kernel_n, base))
        )
        header = ["xi", "value", "limit_value", "gap"]
        for xi in sweep:
            wk = kr.j_transform(
                kr.underline_prelimit_window(kernel_n, XiParams(base, xi), tol=stab_tol(xi))
            )
            v = expectation_det(f, wk)
            rows.append([xi, v, limit_val, abs(v - limit_val)])
    else:
        raise CliError(
            "converge_report",
            "--report must be kernel, blocknorms, blockcauchy, or expectation",
        )
    cfg = _run_config(args, {
        "z": _fmt(base.z), "zp": _fmt(base.z_prime), "sweep": list(sweep),
        "report": args.report, "window": N, "tol": args.tol,
    })
    return cfg, header, rows


def _cmd_sample(args) -> tuple[RunConfig, list[str], list[list]]:
    from . import kernels as kr
    from .sampler import jsonl_lines, sample_underline_then_involute, sample_window
    from .zmeasure import XiParams

    base = _build_params(args)
    xi = _xi_value(args, required=False)
    if xi is None:
        under = kr.underline_limit_window(args.window, base)
    else:
        under = kr.underline_prelimit_window(args.window, XiParams(base, xi))
    sample = sample_underline_then_involute if args.involute else sample_window
    batch = sample(under, args.count, args.seed, workers=args.workers)
    exact = kr.j_transform(under) if args.involute else under
    cfg = _run_config(args, {
        "z": _fmt(base.z), "zp": _fmt(base.z_prime), "xi": xi,
        "window": args.window, "count": args.count, "seed": args.seed,
        "involute": bool(args.involute), "workers": args.workers,
        "kind": batch.kind, "algorithm": batch.algorithm, "rng": batch.rng,
        "max_clamp": batch.max_clamp,
    })
    if cfg.fmt == "jsonl":
        # One configuration per line, as the sorted "n/2" strings.
        rows = [[line] for line in jsonl_lines(batch)]
        return cfg, ["__raw__"], rows
    header = ["point", "estimate", "se", "exact"]
    rows = [
        [str(x), est.value, est.se, exact.entry(x, x)] for x, est in batch.diagonal
    ]
    return cfg, header, rows


# ---------------------------------------------------------------------------
# Parser assembly and entry point
# ---------------------------------------------------------------------------

def _run_config(args, options: dict) -> RunConfig:
    return RunConfig(args.command, options, args.format, args.output)


def _add_common(sub: argparse.ArgumentParser, xi_help: str = "pre-limit parameter in (0, 1)"):
    sub.add_argument("--z", default="0.5", help="parameter z, e.g. 0.5 or 0.3+0.5j")
    sub.add_argument("--zp", default="conj", help="parameter z', a number or 'conj'")
    sub.add_argument("--xi", type=float, default=None, help=xi_help)
    sub.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    sub.add_argument("--output", default="-", help="output path, '-' for stdout")


def _build_parser() -> _Parser:
    parser = _Parser(prog="gammakernel", description=__doc__.splitlines()[0])
    subs = parser.add_subparsers(dest="command", required=True)

    w = subs.add_parser("weight", help="z-measure weight of a partition or configuration")
    _add_common(w)
    w.add_argument("--lambda", dest="partition", default=None,
                   help="partition rows, e.g. '3,1,1' ('' = empty)")
    w.add_argument("--config", default=None,
                   help="balanced config; use --config='-1/2,1/2' (leading dash)")

    k = subs.add_parser("kernel", help="kernel values by one of four methods")
    _add_common(k)
    k.add_argument("--method", required=True, help="|".join(_METHODS))
    k.add_argument("--x", default=None, help="comma list of 'n/2' points")
    k.add_argument("--y", default=None, help="comma list of 'n/2' points (default: --x)")
    k.add_argument("--window", type=int, default=None, help="use all points of [-N, N]")
    k.add_argument("--nodes", type=int, default=None, help="quadrature starting nodes")
    k.add_argument("--tol", type=float, default=None, help="quadrature or window-stabilization tolerance")
    k.add_argument("--max-nodes", type=int, default=None, help="quadrature node cap")

    c = subs.add_parser("correlate", help="enumeration oracle vs kernel minors")
    _add_common(c)
    c.add_argument("--window", type=int, default=4)
    c.add_argument("--order", type=int, default=3, help="largest correlation order")
    c.add_argument("--max-size", type=int, default=18, help="oracle partition cap")
    c.add_argument("--process", choices=("maya", "config"), default="maya")

    f = subs.add_parser("fredholm", help="expectation of Phi_f by both routes")
    _add_common(f)
    f.add_argument("--f", required=True, help='JSON map, e.g. \'{"1/2": -0.5}\'')
    f.add_argument("--tail-c", type=float, default=None,
                   help="inverse-decay constant beyond the tabulated points")
    f.add_argument("--window", type=int, default=64, help="kernel window for the det route")
    f.add_argument("--max-size", type=int, default=16, help="partition cap for the sum route")
    f.add_argument("--det-tol", type=float, default=1e-8)

    r = subs.add_parser("rn", help="permutation density: exact, closed form, limit")
    _add_common(r)
    r.add_argument("--word", required=True, help="JSON array, leftmost factor first")
    r.add_argument("--config", default="",
                   help="balanced config; use --config='-1/2,1/2' (leading dash)")
    r.add_argument("--window", type=int, default=None)
    r.add_argument("--radius", type=int, default=None, help="tail tabulation radius")

    t = subs.add_parser("transport", help="transport identity verification report")
    _add_common(t, xi_help="verify the pre-limit measure at this xi (omit for the limit)")
    t.add_argument("--word", required=True, help="JSON array, leftmost factor first")
    t.add_argument("--f-contains", default=None,
                   help="cylinder F = indicator these 'n/2' points are all present")
    t.add_argument("--f-const", type=float, default=None, help="cylinder F = constant")
    t.add_argument("--max-size", type=int, default=16, help="pre-limit partition cap")
    t.add_argument("--window", type=int, default=256, help="limit-kernel window")
    t.add_argument("--atol", type=float, default=1e-5, help="limit agreement floor")

    g = subs.add_parser("converge", help="xi-sweep and window-doubling tables")
    _add_common(g)
    g.add_argument("--sweep", default="0.9,0.99,0.999", help="comma list of xi values")
    g.add_argument("--report", default="blocknorms",
                   help="kernel | blocknorms | blockcauchy | expectation")
    g.add_argument("--window", type=int, default=64)
    g.add_argument("--tol", type=float, default=1e-7, help="pre-limit window stabilization")

    s = subs.add_parser("sample", help="exact determinantal window samples")
    _add_common(s)
    s.add_argument("--window", type=int, default=4)
    s.add_argument("--count", type=int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--involute", action="store_true",
                   help="flip occupancy on the negative half (J-side configs)")
    return parser


_DISPATCH = {
    "weight": _cmd_weight,
    "kernel": _cmd_kernel,
    "correlate": _cmd_correlate,
    "fredholm": _cmd_fredholm,
    "rn": _cmd_rn,
    "transport": _cmd_transport,
    "converge": _cmd_converge,
    "sample": _cmd_sample,
}


def _write_sample_jsonl(cfg: RunConfig, rows: list[list]) -> None:
    from . import __version__

    def emit(fh):
        fh.write(
            json.dumps({"gammakernel": __version__, "config": cfg.echo()}, sort_keys=True)
            + "\n"
        )
        for (line,) in rows:
            fh.write(line + "\n")

    if cfg.output == "-":
        emit(sys.stdout)
    else:
        with open(cfg.output, "w", encoding="utf-8") as fh:
            emit(fh)


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        cfg, header, rows = _DISPATCH[args.command](args)
        if header == ["__raw__"]:
            _write_sample_jsonl(cfg, rows)
        else:
            _write_output(cfg, header, rows)
        return 0
    except CliError as e:
        _emit_error(e.name, _EXIT_INVALID, str(e))
        return _EXIT_INVALID
    except ValueError as e:
        _emit_error("value", _EXIT_INVALID, str(e))
        return _EXIT_INVALID
    except Exception as e:  # numerical non-convergence from any module
        from .kernels import NonConvergenceError

        if isinstance(e, (NonConvergenceError, OverflowError)):
            name = getattr(e, "op", "overflow")
            _emit_error(f"non_convergence:{name}", _EXIT_NONCONVERGED, str(e))
            return _EXIT_NONCONVERGED
        raise


if __name__ == "__main__":
    sys.exit(main())
