"""Command-line entry point: ``cantor-frame <command> [flags]``.

Exit codes: 0 success, 1 invariant failure, 2 usage, 3 size cap,
4 eigensolver failure, 5 secular bracket failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from . import operators as ops
from .errors import BracketFailure, CertificationError, NonConvergence, SizeLimitError
from .moments import moments_recursive
from .secular import solve_top_eigenvalue
from .selfcheck import format_table, run_selfcheck
from .spectral import cluster_eigenvalues, eigh, schatten_partial_sum

EXIT_OK, EXIT_INVARIANT, EXIT_USAGE, EXIT_SIZE, EXIT_SOLVER, EXIT_BRACKET = range(6)

MAX_M = 10
MAX_M_TRUNC = 12
MAX_M_TRUNC_HALF = 30
ALPHA_WARN = 0.95
MAX_N = {"float": 64, "rational": 32}

ASSEMBLERS = {
    "km-closed": ops.assemble_km_closed,
    "km-gram": ops.assemble_km_gram_oracle,
    "km-filtration": ops.assemble_km_filtration,
    "kinf": ops.assemble_kinf_truncated,
}


class UsageError(Exception):
    pass


def parse_p(text: str):
    """'num/den' gives an exact Fraction, anything else a float."""
    try:
        p = Fraction(text) if "/" in text else float(text)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"cannot parse p from {text!r}")
    if not 0 < p < 1:
        raise UsageError(f"p must lie in (0, 1), got {text}")
    return p


def parse_grid(text: str) -> list[Fraction]:
    try:
        start, stop, step = (Fraction(x) for x in text.split(":"))
    except ValueError:
        raise UsageError(f"grid must look like start:stop:step, got {text!r}")
    if step <= 0 or not 0 < start <= stop < 1:
        raise UsageError("grid needs 0 < start <= stop < 1 and step > 0")
    out, x = [], start
    while x <= stop:
        out.append(x)
        x += step
    return out


def _is_half(p) -> bool:
    return p == Fraction(1, 2)


@dataclass(frozen=True)
class RunConfig:
    p: object
    m: int = 6
    M: int = 12
    mode: str = "float"
    fmt: str = "json"
    output: Optional[str] = None

    def validate(self):
        if not 0 <= self.m <= MAX_M:
            raise UsageError(f"m must lie in [0, {MAX_M}]")
        if self.M < self.m or self.M > MAX_M_TRUNC_HALF:
            raise UsageError(f"M must lie in [m, {MAX_M_TRUNC_HALF}]")
        if self.M > MAX_M_TRUNC and not _is_half(self.p):
            raise SizeLimitError(f"M > {MAX_M_TRUNC} needs the closed-form spectrum (p = 1/2)")


def _p_out(p):
    return ops.format_p(p) if isinstance(p, Fraction) else float(p)


def write_output(text: str, path: Optional[str]):
    """Write to ``path`` atomically (temp file then rename), or to stdout."""
    if path is None:
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".cantor-frame-")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def cmd_matrix(cfg: RunConfig, which: str) -> str:
    mat = ASSEMBLERS[which](cfg.p, cfg.m)
    if cfg.fmt == "csv":
        return mat.to_csv()
    return json.dumps({"p": _p_out(cfg.p), "depth": mat.depth, "provenance": mat.provenance.value,
                       "operator": mat.operator, "entries": mat.entries.tolist()}) + "\n"


def cmd_spectrum(cfg: RunConfig, which: str) -> str:
    if which == "kinf":
        sd = eigh(ops.assemble_kinf_truncated(cfg.p, cfg.m), keep_vectors=False)
    else:
        sd = eigh(ops.assemble_km_closed(cfg.p, cfg.m), keep_vectors=False)
    groups = cluster_eigenvalues(sd.eigenvalues)
    if cfg.fmt == "csv":
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["eigenvalue", "multiplicity"])
        for g in groups:
            w.writerow([repr(g.value), g.multiplicity])
        return out.getvalue()
    return json.dumps({
        "p": _p_out(cfg.p), "depth": cfg.m, "operator": "K_inf" if which == "kinf" else "K_m",
        "eigenvalues": [float(x) for x in sd.eigenvalues],
        "rooted_weights": [float(x) for x in sd.rooted_weights],
        "clusters": [{"value": g.value, "multiplicity": g.multiplicity} for g in groups],
        "trace": float(np.sum(sd.eigenvalues)),
        "frobenius_squared": schatten_partial_sum(sd, 2),
        "tail_bound": sd.tail_bound,
    }) + "\n"


def cmd_moments(cfg: RunConfig, n: int) -> str:
    if cfg.mode == "rational" and not isinstance(cfg.p, Fraction):
        raise UsageError("rational mode needs p given as num/den")
    if not 0 <= n <= MAX_N[cfg.mode]:
        raise SizeLimitError(f"{cfg.mode} mode supports N <= {MAX_N[cfg.mode]}")
    seq = moments_recursive(cfg.p, n, cfg.mode)
    d = seq.to_json_dict()
    if cfg.fmt == "csv":
        return "n,mu\n" + "".join(f"{k},{v}\n" for k, v in enumerate(d["mu"]))
    return json.dumps(d) + "\n"


def topeig_report(p, M: int) -> dict:
    s = solve_top_eigenvalue(p, M)
    lower = ops.compression_2x2(p)[1]
    d = json.loads(s.to_json())
    d.update({"p": _p_out(p), "M": M, "lower_bound_2x2": lower,
              "agree": abs(s.lambda_star - s.direct_lambda) <= s.combined_tolerance,
              "certified_interval": list(s.certified_interval), "tail_bound": s.tail_bound})
    return d


def cmd_topeig(cfg: RunConfig) -> str:
    return json.dumps(topeig_report(cfg.p, cfg.M)) + "\n"


SWEEP_COLUMNS = ["p", "lambda_direct", "lambda_scalar", "lower_bound_2x2", "mu1", "mu2", "mu3", "tail_bound"]


def _sweep_row(p: Fraction, M: int) -> list:
    pv = p if _is_half(p) else float(p)
    s = solve_top_eigenvalue(pv, M)
    mu = moments_recursive(float(p), 3).values
    return [float(p), s.direct_lambda, s.lambda_star, ops.compression_2x2(pv)[1],
            mu[1], mu[2], mu[3], s.tail_bound]


def cmd_sweep(cfg: RunConfig, grid: list[Fraction]) -> str:
    for p in grid:
        RunConfig(p, cfg.m, cfg.M).validate()
    workers = max(1, int(os.environ.get("CANTOR_FRAME_THREADS", os.cpu_count() or 1)))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        rows = list(pool.map(lambda p: _sweep_row(p, cfg.M), grid))
    rows.sort(key=lambda r: r[0])
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for r in rows:
        w.writerow([repr(float(x)) for x in r])
    return out.getvalue()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cantor-frame",
                                     description="Cylinder frame operators on the Bernoulli Cantor measure")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, fmt_default="json"):
        sp.add_argument("--p", required=True, help="branch weight, num/den or decimal")
        sp.add_argument("--m", type=int, default=6, help="depth of K_m (default 6)")
        sp.add_argument("--M", type=int, default=12, help="truncation depth for K_inf (default 12)")
        sp.add_argument("--format", choices=["json", "csv"], default=fmt_default)
        sp.add_argument("--output", help="output file (default stdout)")

    sp = sub.add_parser("matrix", help="assemble K_m or a K_inf compression")
    common(sp, "csv")
    sp.add_argument("--which", choices=sorted(ASSEMBLERS), default="km-closed")
    sp = sub.add_parser("spectrum", help="eigenvalues, trace and Frobenius norm")
    common(sp)
    sp.add_argument("--which", choices=["km", "kinf"], default="km")
    sp = sub.add_parser("moments", help="moments of the rooted spectral measure")
    common(sp)
    sp.add_argument("--n", type=int, default=3)
    sp.add_argument("--mode", choices=["float", "rational"], default="float")
    sp = sub.add_parser("topeig", help="top eigenvalue from the secular equation")
    common(sp)
    sp = sub.add_parser("selfcheck", help="run the invariant suite")
    sp.add_argument("--m", type=int, default=6)
    sp.add_argument("--M", type=int, default=12)
    sp.add_argument("--perturb", help=argparse.SUPPRESS)
    sp = sub.add_parser("sweep", help="top eigenvalue and moments across a p grid (CSV)")
    sp.add_argument("--grid", required=True, help="start:stop:step")
    sp.add_argument("--m", type=int, default=6)
    sp.add_argument("--M", type=int, default=12)
    sp.add_argument("--output")
    return parser


def run(args) -> tuple[int, str]:
    if args.command == "selfcheck":
        RunConfig(Fraction(1, 2), args.m, args.M).validate()
        results = run_selfcheck(args.m, args.M, perturb=args.perturb)
        failed = [r.key for r in results if not r.passed]
        text = format_table(results) + "\n"
        if failed:
            text += "FAILED: " + ", ".join(failed) + "\n"
        return (EXIT_INVARIANT if failed else EXIT_OK), text
    if args.command == "sweep":
        cfg = RunConfig(Fraction(1, 2), args.m, args.M, output=args.output)
        cfg.validate()
        return EXIT_OK, cmd_sweep(cfg, parse_grid(args.grid))
    cfg = RunConfig(parse_p(args.p), args.m, args.M, getattr(args, "mode", "float"),
                    args.format, args.output)
    cfg.validate()
    if float(max(cfg.p, 1 - cfg.p)) > ALPHA_WARN:
        print(f"warning: alpha = {float(max(cfg.p, 1 - cfg.p))} > {ALPHA_WARN}; truncation tails "
              "decay slowly at this p", file=sys.stderr)
    if args.command == "matrix":
        return EXIT_OK, cmd_matrix(cfg, args.which)
    if args.command == "spectrum":
        return EXIT_OK, cmd_spectrum(cfg, args.which)
    if args.command == "moments":
        return EXIT_OK, cmd_moments(cfg, args.n)
    return EXIT_OK, cmd_topeig(cfg)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        code, text = run(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SizeLimitError as exc:
        print(f"error: size cap: {exc}", file=sys.stderr)
        return EXIT_SIZE
    except NonConvergence as exc:
        print(f"error: eigensolver: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except BracketFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BRACKET
    except CertificationError as exc:
        print(f"error: invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    write_output(text, getattr(args, "output", None))
    return code


if __name__ == "__main__":
    sys.exit(main())
