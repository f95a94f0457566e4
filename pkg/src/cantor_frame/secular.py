"""Top eigenvalue of K_inf from the scalar secular equation m(l/p) + m(l/(1-p)) = 1.

Above alpha * ||K_inf|| the eigenvalues of K_inf are exactly the roots of this
equation, and the largest root is the norm. The secular function is strictly
decreasing there, so bisection is well-posed. Everything is evaluated on a
depth-M truncation; the resolvent error radii turn the computed root into a
certified interval for the true one.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import BracketFailure, CertificationError
from .operators import format_p
from .spectral import SpectralData, kinf_spectral_data, resolvent_value
from .words import as_weights

DELTA = 1e-6
SAMPLES = 32
MAX_BISECT = 200


@dataclass(frozen=True)
class SecularSolve:
    p: object
    lambda_star: float
    bracket: tuple[float, float]
    residual: float
    direct_lambda: float
    combined_tolerance: float
    certified_interval: tuple[float, float]
    tail_bound: float
    simple: bool

    def to_json(self) -> str:
        return json.dumps({
            "p": format_p(self.p) if not isinstance(self.p, float) else self.p,
            "lambda_scalar": self.lambda_star,
            "lambda_direct": self.direct_lambda,
            "tolerance": self.combined_tolerance,
            "simple": self.simple,
        })


def secular_value(lam: float, sd: SpectralData, p) -> tuple[float, float]:
    pf = float(as_weights(p).p)
    a, ra = resolvent_value(lam / pf, sd)
    b, rb = resolvent_value(lam / (1.0 - pf), sd)
    return a + b - 1.0, ra + rb


def _bisect(pred, good: float, bad: float, width: float) -> float:
    """Move ``good`` (where pred holds) towards ``bad`` until they are ``width`` apart."""
    for _ in range(MAX_BISECT):
        if abs(bad - good) <= width:
            break
        mid = 0.5 * (good + bad)
        if pred(mid):
            good = mid
        else:
            bad = mid
    return good


def simplicity_report(sd: SpectralData) -> tuple[float, bool]:
    """Gap between the top two eigenvalues and whether it exceeds twice the tail."""
    lam = sd.expanded_eigenvalues()
    if len(lam) < 2:
        return math.inf, True
    gap = float(lam[-1] - lam[-2])
    tail = sd.tail_bound
    return gap, bool(not math.isnan(tail) and gap > 2.0 * tail)


def solve_top_eigenvalue(p, M: int, tol: float = 1e-12) -> SecularSolve:
    if M < 4:
        raise ValueError("M must be at least 4")
    if tol < 1e-12:
        raise ValueError("tol must be >= 1e-12")
    bw = as_weights(p)
    alpha = float(bw.alpha)
    sd = kinf_spectral_data(p, M)
    top, tau = sd.lambda_max, sd.tail_bound
    lo = alpha * (top + tau) + DELTA
    hi = top + tau + 1.0

    def f(x):
        return secular_value(x, sd, p)

    grid = np.linspace(lo, hi, SAMPLES)
    vals = [f(x) for x in grid]
    signs = np.sign([v for v, _ in vals])
    changes = int(np.count_nonzero(signs[1:] != signs[:-1]))
    if signs[0] <= 0 or signs[-1] >= 0 or changes != 1:
        raise BracketFailure(f"secular function has {changes} sign changes on [{lo:.6g}, {hi:.6g}] "
                             f"for p={p}, M={M}; raise M")

    lam = _bisect(lambda x: f(x)[0] > 0, lo, hi, tol)
    residual, _ = f(lam)

    # certified bracket for the exact root: f - r > 0 below it, f + r < 0 above it
    below = [x for x, (v, r) in zip(grid, vals) if x < lam and v - r > 0]
    above = [x for x, (v, r) in zip(grid, vals) if x > lam and v + r < 0]
    a = _bisect(lambda x: f(x)[0] - f(x)[1] > 0, below[-1], lam, tol) if below else top
    b = _bisect(lambda x: f(x)[0] + f(x)[1] < 0, above[0], lam, tol) if above else top + tau
    # the compression never exceeds K_inf, and K_inf exceeds it by at most tau
    a, b = max(a, top), min(b, top + tau)
    combined = tau + max(lam - a, b - lam, 0.0)
    if not abs(lam - top) <= combined + tol:
        raise CertificationError(f"scalar root {lam} and direct {top} differ beyond {combined}")
    _, simple = simplicity_report(sd)
    return SecularSolve(bw.p, float(lam), (float(lo), float(hi)), float(residual), float(top),
                        float(combined), (float(a), float(b)), float(tau), simple)
