"""Invariant suite behind ``cantor-frame selfcheck``.

Each check compares two independent routes to the same quantity and is keyed
by a short descriptive name. ``perturb`` names one check whose input gets a
deliberate 1e-6 nudge; it exists so the failure path can be tested. Checks
whose certified tolerance is wider than the nudge (truncation bound, 2x2
lower bound, renormalization) absorb it and still pass.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from .errors import CantorFrameError
from .moments import moments_closed, moments_operator_oracle, moments_recursive, renormalization_residual
from .operators import (assemble_kinf_truncated, assemble_km_closed, assemble_km_filtration,
                        assemble_km_gram_oracle, compression_2x2, schatten_symmetric_closed,
                        symmetric_closed_spectrum, truncation_error_bound)
from .secular import simplicity_report, solve_top_eigenvalue
from .selfsim import block_form_residual, cuntz_check, neumann_partial_sum, psi_apply
from .spectral import cluster_eigenvalues, eigh, kinf_spectral_data, schatten_partial_sum, symmetric_spectral_data
from .haar import word_at
from .words import comparable

P_GRID = (0.2, 0.35, 0.5, 0.65, 0.8)
HALF = Fraction(1, 2)
PERTURBATION = 1e-6


@dataclass(frozen=True)
class CheckResult:
    key: str
    passed: bool
    detail: str


def _nudge(a: np.ndarray, active: bool, at=(0, 0)) -> np.ndarray:
    a = np.array(a)
    if active:
        a[at] += PERTURBATION
    return a


def _max_diff(a, b) -> float:
    return float(np.abs(np.asarray(a) - np.asarray(b)).max())


def _incomparable_max(a: np.ndarray) -> float:
    worst = 0.0
    n = a.shape[0]
    for i in range(1, n):
        for j in range(i + 1, n):
            if not comparable(word_at(i), word_at(j)):
                worst = max(worst, abs(a[i, j]))
    return worst


def run_selfcheck(m: int = 6, M: int = 12, perturb: Optional[str] = None) -> list[CheckResult]:
    checks: list[tuple[str, Callable[[bool], tuple[bool, str]]]] = []

    def check(key):
        def register(fn):
            checks.append((key, fn))
            return fn
        return register

    @check("symmetric-closed-spectrum")
    def _(nudge):
        k = _nudge(assemble_km_closed(HALF, m).entries, nudge)
        got = cluster_eigenvalues(eigh(k).eigenvalues)
        want = symmetric_closed_spectrum(m)
        ok = (len(got) == len(want) and all(
            abs(g.value - w.value) <= 1e-10 and g.multiplicity == w.multiplicity
            for g, w in zip(got, sorted(want, key=lambda g: -g.value))))
        return ok, f"{len(got)} eigenvalue groups at m={m}"

    @check("gram-assembly")
    def _(nudge):
        err = max(_max_diff(assemble_km_closed(p, m).entries,
                            _nudge(assemble_km_gram_oracle(p, m).entries, nudge)) for p in P_GRID)
        return err <= 1e-10, f"max entry gap {err:.2e}"

    @check("filtration-assembly")
    def _(nudge):
        err = max(_max_diff(assemble_km_closed(p, m).entries,
                            _nudge(assemble_km_filtration(p, m).entries, nudge)) for p in P_GRID)
        return err <= 1e-10, f"max entry gap {err:.2e}"

    @check("trace-identity")
    def _(nudge):
        err = max(abs(np.trace(_nudge(assemble_km_closed(p, n).entries, nudge)) - (n + 1))
                  for p in P_GRID for n in range(m + 1))
        return err <= 1e-10, f"max |trace - (m+1)| {err:.2e}"

    @check("tree-sparsity")
    def _(nudge):
        worst = max(max(_incomparable_max(assemble_km_closed(p, m).entries),
                        _incomparable_max(assemble_kinf_truncated(p, m).entries)) for p in P_GRID)
        k = _nudge(assemble_km_closed(HALF, m).entries, nudge, at=(0, 1))
        off = float(np.abs(k - np.diag(np.diag(k))).max())
        return worst == 0.0 and off == 0.0, f"incomparable max {worst}, p=1/2 off-diagonal {off}"

    @check("truncation-bound")
    def _(nudge):
        ok, worst = True, 0.0
        for p in P_GRID:
            base = assemble_km_closed(p, m).entries
            for k in range(1, 3):
                deep = _nudge(assemble_km_closed(p, m + k).entries, nudge)
                gap = float(np.linalg.eigvalsh(deep - np.pad(base, (0, deep.shape[0] - base.shape[0])))[-1])
                ratio = gap / truncation_error_bound(p, m)
                worst = max(worst, ratio)
                ok &= ratio <= 1.0
        return ok, f"largest ||K_(m+k) - K_m|| / bound = {worst:.3f}"

    @check("compression-lower-bound")
    def _(nudge):
        ok = True
        for p in P_GRID:
            top = eigh(_nudge(assemble_kinf_truncated(p, m).entries, nudge), keep_vectors=False).lambda_max
            ok &= top >= compression_2x2(p)[1] - 1e-12
        return ok, "2x2 compression below every deeper compression"

    @check("cuntz-relations")
    def _(nudge):
        worst = max(cuntz_check(p, m).max_residual for p in P_GRID) + (PERTURBATION if nudge else 0.0)
        return worst <= 1e-12, f"max residual {worst:.2e}"

    @check("psi-recursion")
    def _(nudge):
        err = max(_max_diff(psi_apply(_nudge(assemble_km_closed(p, n).entries, nudge), p).entries,
                            assemble_km_closed(p, n + 1).entries) for p in P_GRID for n in range(m + 1))
        return err <= 1e-12, f"max entry gap {err:.2e}"

    @check("neumann-series")
    def _(nudge):
        err = max(_max_diff(_nudge(neumann_partial_sum(p, n).entries, nudge),
                            assemble_km_closed(p, n).entries) for p in P_GRID for n in range(m + 1))
        return err <= 1e-12, f"max entry gap {err:.2e}"

    @check("block-form")
    def _(nudge):
        err = max(block_form_residual(p, n) for p in P_GRID for n in range(2, m + 1))
        err += PERTURBATION if nudge else 0.0
        return err <= 1e-10, f"max residual {err:.2e}"

    @check("renormalization-identity")
    def _(nudge):
        rows = []
        for p in (0.3, HALF):
            for z in (6.0, 8.0):
                res, tol = renormalization_residual(p, z, M)
                rows.append(res + (PERTURBATION if nudge else 0.0) <= tol)
        res, _ = renormalization_residual(HALF, 6.0, 25)
        return all(rows) and res <= 1e-10, f"{sum(rows)}/{len(rows)} within certified tolerance"

    @check("moment-closed-forms")
    def _(nudge):
        ok = True
        for p in (HALF, Fraction(1, 3), Fraction(2, 5), Fraction(7, 10)):
            mu = moments_recursive(p, 3, "rational").values
            ok &= tuple(mu[1:]) == moments_closed(p)
        mu = moments_recursive(HALF, 3, "rational").values
        ok &= tuple(mu) == (1, 2, 4, 8 + (PERTURBATION if nudge else 0))
        return ok, "exact rational agreement"

    @check("moment-operator-oracle")
    def _(nudge):
        ok = True
        for p in (0.3, 0.5, 0.7):
            mu = moments_recursive(p, 5).values
            for n, (val, bound) in enumerate(moments_operator_oracle(p, min(M, 8), 5)):
                ok &= abs(mu[n] + (PERTURBATION * 1e6 if nudge else 0.0) - val) <= bound
        return ok, "recursion within operator error bound, n <= 5"

    @check("secular-top-eigenvalue")
    def _(nudge):
        half = solve_top_eigenvalue(HALF, 20)
        s = solve_top_eigenvalue(0.3, M)
        ok = abs(half.lambda_star - 2.0) <= 1e-8 and abs(s.lambda_star - s.direct_lambda) <= s.combined_tolerance
        ok &= s.lambda_star >= compression_2x2(0.3)[1] - s.combined_tolerance
        if nudge:
            ok = ok and abs(half.lambda_star + PERTURBATION - 2.0) <= 1e-8
        return ok, f"p=0.3: {s.lambda_star:.10f} vs direct {s.direct_lambda:.10f}"

    @check("top-simplicity")
    def _(nudge):
        ok = True
        for p in (0.3, HALF):
            sd = kinf_spectral_data(p, M)
            gap, simple = simplicity_report(sd)
            ok &= simple and gap > 2 * sd.tail_bound + (10.0 if nudge else 0.0)
        return ok, "top gap exceeds twice the tail"

    @check("schatten-symmetric")
    def _(nudge):
        s2 = schatten_partial_sum(symmetric_spectral_data(25, "K_inf"), 2) + (1.0 if nudge else 0.0)
        trace = schatten_partial_sum(symmetric_spectral_data(m, "K_m"), 1)
        ok = abs(s2 - schatten_symmetric_closed(2)) <= 1e-6 and abs(trace - (m + 1)) <= 1e-10
        ok &= math.isinf(schatten_symmetric_closed(1))
        return ok, f"r=2 sum {s2:.8f}, r=1 partial sum {trace:.1f}"

    keys = [k for k, _ in checks]
    if perturb is not None and perturb not in keys:
        raise ValueError(f"unknown check {perturb!r}")
    results = []
    for key, fn in checks:
        try:
            ok, detail = fn(key == perturb)
        except (CantorFrameError, ValueError) as exc:
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append(CheckResult(key, bool(ok), detail))
    return results


def format_table(results: list[CheckResult]) -> str:
    width = max(len(r.key) for r in results)
    lines = [f"{r.key:<{width}}  {'PASS' if r.passed else 'FAIL'}  {r.detail}" for r in results]
    return "\n".join(lines)
