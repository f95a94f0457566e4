"""Dense symmetric eigendecomposition and spectral functionals at the root vector.

``eigh`` runs cyclic Jacobi rotations (compiled with numba when available)
for matrices up to dimension 1024. Larger inputs, which only arise for
truncation depths above 10, are handed to LAPACK.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional

import numpy as np

from .errors import NonConvergence
from .operators import (EigenvalueGroup, SymMatrix, assemble_kinf_truncated, format_p,
                        truncation_error_bound)

JACOBI_MAX_DIM = 1024
JACOBI_TOL = 1e-13
JACOBI_MAX_SWEEPS = 100
ZERO_WEIGHT = 1e-14
CLUSTER_GAP = 1e-8


def _jacobi_loops(a, vt, tol, max_sweeps):
    """Cyclic-by-row Jacobi on ``a`` in place; ``vt`` accumulates V transposed.

    Returns the number of completed sweeps, or -1 if ``max_sweeps`` ran out.
    """
    n = a.shape[0]
    for sweep in range(max_sweeps + 1):
        off = 0.0
        for i in range(n):
            for j in range(i + 1, n):
                x = abs(a[i, j])
                if x > off:
                    off = x
        if off < tol:
            return sweep
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                app = a[p, p]
                aqq = a[q, q]
                theta = (aqq - app) / (2.0 * apq)
                t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                for k in range(n):
                    x = a[p, k]
                    y = a[q, k]
                    a[p, k] = c * x - s * y
                    a[q, k] = s * x + c * y
                for k in range(n):
                    a[k, p] = a[p, k]
                    a[k, q] = a[q, k]
                a[p, p] = app - t * apq
                a[q, q] = aqq + t * apq
                a[p, q] = 0.0
                a[q, p] = 0.0
                for k in range(n):
                    x = vt[p, k]
                    y = vt[q, k]
                    vt[p, k] = c * x - s * y
                    vt[q, k] = s * x + c * y
    return -1


def _jacobi_numpy(a, vt, tol, max_sweeps):
    """Same rotation schedule as :func:`_jacobi_loops`, with numpy row updates."""
    n = a.shape[0]
    iu = np.triu_indices(n, 1)
    for sweep in range(max_sweeps + 1):
        if n < 2 or np.abs(a[iu]).max() < tol:
            return sweep
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                app = a[p, p]
                aqq = a[q, q]
                theta = (aqq - app) / (2.0 * apq)
                t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                x = a[p].copy()
                y = a[q].copy()
                a[p] = c * x - s * y
                a[q] = s * x + c * y
                a[:, p] = a[p]
                a[:, q] = a[q]
                a[p, p] = app - t * apq
                a[q, q] = aqq + t * apq
                a[p, q] = a[q, p] = 0.0
                x = vt[p].copy()
                y = vt[q].copy()
                vt[p] = c * x - s * y
                vt[q] = s * x + c * y
    return -1


try:
    from numba import njit

    _jacobi_kernel = njit(cache=True)(_jacobi_loops)
except ImportError:  # pragma: no cover - exercised only without numba
    _jacobi_kernel = _jacobi_numpy


def jacobi_eigh(a: np.ndarray, tol: float = JACOBI_TOL,
                max_sweeps: int = JACOBI_MAX_SWEEPS, kernel=None) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and orthonormal eigenvectors (columns) by cyclic Jacobi.

    The stopping threshold is ``tol`` times the largest absolute entry (at
    least 1), so it is absolute for the O(1)-scaled operators used here.
    """
    a = np.array(a, dtype=float)
    n = a.shape[0]
    vt = np.eye(n)
    thresh = tol * max(1.0, float(np.abs(a).max()) if n else 1.0)
    sweeps = (kernel or _jacobi_kernel)(a, vt, thresh, max_sweeps)
    if sweeps < 0:
        raise NonConvergence(f"Jacobi did not converge in {max_sweeps} sweeps (n={n})")
    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    return w[order], vt[order].T.copy()


@dataclass(frozen=True, eq=False)
class SpectralData:
    """Eigenvalues (ascending), rooted weights |<phi, v_j>|**2 and provenance.

    ``multiplicities`` lets closed-form spectra list each distinct value once;
    for dense solves every entry is 1. ``eigenvectors`` is optional and only
    kept for dense solves that ask for it.
    """

    eigenvalues: np.ndarray
    rooted_weights: np.ndarray
    tail_bound: float
    source: str
    p: object = None
    depth: Optional[int] = None
    eigenvectors: Optional[np.ndarray] = None
    multiplicities: Optional[np.ndarray] = None

    def __post_init__(self):
        lam = np.asarray(self.eigenvalues, dtype=float)
        w = np.asarray(self.rooted_weights, dtype=float)
        mult = (np.ones(len(lam), dtype=np.int64) if self.multiplicities is None
                else np.asarray(self.multiplicities, dtype=np.int64))
        if not (len(lam) == len(w) == len(mult)):
            raise ValueError("eigenvalues, weights and multiplicities must align")
        for arr in (lam, w, mult):
            arr.setflags(write=False)
        object.__setattr__(self, "eigenvalues", lam)
        object.__setattr__(self, "rooted_weights", w)
        object.__setattr__(self, "multiplicities", mult)

    @property
    def lambda_max(self) -> float:
        return float(self.eigenvalues[-1])

    @property
    def dim(self) -> int:
        return int(self.multiplicities.sum())

    def expanded_eigenvalues(self) -> np.ndarray:
        return np.repeat(self.eigenvalues, self.multiplicities)

    def to_json(self) -> str:
        return json.dumps({
            "p": format_p(self.p) if isinstance(self.p, Fraction) else self.p,
            "depth": self.depth,
            "eigenvalues": [float(x) for x in self.expanded_eigenvalues()],
            "rooted_weights": [float(x) for x in np.repeat(
                self.rooted_weights / self.multiplicities, self.multiplicities)],
            "tail_bound": self.tail_bound,
        })


@dataclass(frozen=True)
class RootedMeasure:
    atoms: tuple[tuple[float, float], ...]

    @property
    def total_mass(self) -> float:
        return math.fsum(w for _, w in self.atoms)

    def moment(self, n: int) -> float:
        return math.fsum(w * lam ** n for lam, w in self.atoms)


def eigh(mat, method: str = "auto", keep_vectors: bool = True) -> SpectralData:
    """Full eigendecomposition of a :class:`SymMatrix` (or plain symmetric array).

    ``method`` is "jacobi", "lapack", or "auto" (Jacobi up to dimension 1024).
    """
    if isinstance(mat, SymMatrix):
        a, tail, source, p, depth = (mat.entries, mat.tail_bound,
                                     mat.provenance.value, mat.p, mat.depth)
    else:
        a, tail, source, p, depth = np.asarray(mat, dtype=float), math.nan, "array", None, None
    n = a.shape[0]
    if method == "auto":
        method = "jacobi" if n <= JACOBI_MAX_DIM else "lapack"
    if method == "jacobi":
        if n > JACOBI_MAX_DIM:
            raise ValueError(f"Jacobi path is limited to dim <= {JACOBI_MAX_DIM}")
        lam, vec = jacobi_eigh(a)
    elif method == "lapack":
        lam, vec = np.linalg.eigh(a)
    else:
        raise ValueError(f"unknown method {method!r}")
    return SpectralData(lam, vec[0] ** 2, tail, source, p, depth,
                        eigenvectors=vec if keep_vectors else None)


def symmetric_spectral_data(depth: int, operator: str = "K_inf") -> SpectralData:
    """Closed-form spectral data at p = 1/2 without any dense solve.

    ``operator="K_inf"`` gives the depth-M compression of K_inf (diagonal:
    2 at the root, 2**-l with multiplicity 2**l for l < M); ``"K_m"`` gives K_m.
    The root vector is an eigenvector in both cases, so all rooted weight sits
    on the top eigenvalue.
    """
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    if operator == "K_inf":
        values = [2.0 ** -l for l in range(depth)][::-1] + [2.0]
        mult = [1 << l for l in range(depth)][::-1] + [1]
    elif operator == "K_m":
        values = [2.0 ** -(n - 1) * (1.0 - 2.0 ** -(depth - n + 1)) for n in range(depth, 0, -1)]
        mult = [1 << (n - 1) for n in range(depth, 0, -1)]
        values.append(2.0 - 2.0 ** -depth)
        mult.append(1)
    else:
        raise ValueError(f"unknown operator {operator!r}")
    weights = np.zeros(len(values))
    weights[-1] = 1.0
    return SpectralData(np.array(values), weights, truncation_error_bound(0.5, depth),
                        "ClosedForm", Fraction(1, 2), depth, multiplicities=np.array(mult))


def _is_half(p) -> bool:
    return p == Fraction(1, 2)


@lru_cache(maxsize=16)
def kinf_spectral_data(p, M: int) -> SpectralData:
    """Spectral data of the depth-M compression of K_inf (cached, vectors dropped).

    At p = 1/2 the closed-form spectrum is used, which allows depths far
    beyond what a dense solve can reach.
    """
    if _is_half(p):
        return symmetric_spectral_data(M, "K_inf")
    return eigh(assemble_kinf_truncated(p, M), keep_vectors=False)


def resolvent_value(z: float, sd: SpectralData) -> tuple[float, float]:
    """Rooted resolvent sum_j w_j / (z - lambda_j) and a certified error radius.

    The radius bounds the distance to the exact <phi, (z - K_inf)^-1 phi> via
    the second resolvent identity, using ||K_inf - truncation|| <= tail_bound.
    """
    top = sd.lambda_max
    tail = sd.tail_bound
    if not z > top + tail:
        raise ValueError(f"z = {z} is not beyond the certified spectral bound {top + tail}")
    value = math.fsum(w / (z - lam) for lam, w in zip(sd.eigenvalues, sd.rooted_weights) if w > 0)
    radius = tail / ((z - top) * (z - top - tail))
    return value, radius


def rooted_spectral_measure(sd: SpectralData) -> RootedMeasure:
    return RootedMeasure(tuple((float(lam), float(w))
                               for lam, w in zip(sd.eigenvalues, sd.rooted_weights)
                               if w >= ZERO_WEIGHT))


def schatten_partial_sum(sd: SpectralData, r: float) -> float:
    """sum_j lambda_j**r over the (clipped nonnegative) eigenvalues."""
    if r < 1:
        raise ValueError("Schatten exponent must be >= 1")
    lam = np.clip(sd.eigenvalues, 0.0, None)
    return math.fsum(m * x ** r for x, m in zip(lam, sd.multiplicities))


def cluster_eigenvalues(values, rel_gap: float = CLUSTER_GAP, multiplicities=None) -> list[EigenvalueGroup]:
    """Group nearly equal eigenvalues for reporting, largest first."""
    values = np.asarray(values, dtype=float)
    mult = np.ones(len(values), dtype=int) if multiplicities is None else np.asarray(multiplicities)
    order = np.argsort(values)[::-1]
    groups: list[list] = []
    for i in order:
        x = float(values[i])
        if groups and groups[-1][0] - x <= rel_gap * max(1.0, abs(x)):
            groups[-1][1].append(x)
            groups[-1][2] += int(mult[i])
        else:
            groups.append([x, [x], int(mult[i])])
    return [EigenvalueGroup(math.fsum(xs) / len(xs), k) for _, xs, k in groups]
