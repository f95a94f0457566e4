"""Branch isometries, the Cuntz relations, and the fixed-point map for K_inf.

U_0 and U_2 push a function on the whole Cantor set into the left or right
cylinder. Between Haar frames they lift depth m to depth m + 1:

    U_0 e_w = e_{0w},   U_0 phi = sqrt(p) phi + sqrt(1-p) e_empty
    U_2 e_w = e_{2w},   U_2 phi = sqrt(1-p) phi - sqrt(p) e_empty

Diff(0w) keeps the bits of w, so it sits at 2**(|w|+1) + bits(w); Diff(2w)
sits 2**|w| further along.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .operators import Provenance, SymMatrix, assemble_kinf_truncated, truncation_error_bound
from .words import as_weights


@dataclass(frozen=True, eq=False)
class BranchMap:
    branch: int
    source_depth: int
    matrix: np.ndarray


@dataclass(frozen=True)
class CuntzReport:
    depth: int
    isometry_0: float
    isometry_2: float
    orthogonality: float
    completeness: float

    @property
    def max_residual(self) -> float:
        return max(self.isometry_0, self.isometry_2, self.orthogonality, self.completeness)


def branch_isometry(branch: int, p, m: int) -> BranchMap:
    if branch not in (0, 2):
        raise ValueError("branch must be 0 or 2")
    if m < 0:
        raise ValueError("m must be nonnegative")
    pf = float(as_weights(p).p)
    u = np.zeros((1 << (m + 1), 1 << m))
    if branch == 0:
        u[0, 0], u[1, 0] = math.sqrt(pf), math.sqrt(1.0 - pf)
    else:
        u[0, 0], u[1, 0] = math.sqrt(1.0 - pf), -math.sqrt(pf)
    for pos in range(1, 1 << m):
        length = pos.bit_length() - 1
        target = pos + (1 << length)
        if branch == 2:
            target += 1 << length
        u[target, pos] = 1.0
    return BranchMap(branch, m, u)


def _pair(p, m: int) -> tuple[np.ndarray, np.ndarray]:
    return branch_isometry(0, p, m).matrix, branch_isometry(2, p, m).matrix


def cuntz_check(p, m: int) -> CuntzReport:
    if m < 1:
        raise ValueError("m must be at least 1")
    u0, u2 = _pair(p, m)
    eye_m = np.eye(1 << m)
    return CuntzReport(
        depth=m,
        isometry_0=float(np.abs(u0.T @ u0 - eye_m).max()),
        isometry_2=float(np.abs(u2.T @ u2 - eye_m).max()),
        orthogonality=float(np.abs(u0.T @ u2).max()),
        completeness=float(np.abs(u0 @ u0.T + u2 @ u2.T - np.eye(1 << (m + 1))).max()),
    )


def _depth_of(t: np.ndarray) -> int:
    n = t.shape[0]
    if n < 1 or n & (n - 1):
        raise ValueError(f"dimension {n} is not a power of two")
    return n.bit_length() - 1


def phi_apply(t, p) -> np.ndarray:
    """Linear part p U_0 T U_0* + (1-p) U_2 T U_2*, lifting one depth level."""
    t = np.asarray(t, dtype=float)
    m = _depth_of(t)
    pf = float(as_weights(p).p)
    u0, u2 = _pair(p, m)
    return pf * (u0 @ t @ u0.T) + (1.0 - pf) * (u2 @ t @ u2.T)


def root_projection(m: int) -> np.ndarray:
    out = np.zeros((1 << m, 1 << m))
    out[0, 0] = 1.0
    return out


def psi_apply(t, p) -> SymMatrix:
    """Affine fixed-point map P_phi + Phi(T); K_{m+1} = Psi(K_m) exactly."""
    out = phi_apply(t, p)
    out[0, 0] += 1.0
    m = _depth_of(out)
    return SymMatrix(out, m, as_weights(p).p, Provenance.PSI_ITERATION,
                     tail_bound=truncation_error_bound(p, m))


def neumann_partial_sum(p, n: int) -> SymMatrix:
    """sum_{k<=N} Phi^k(P_phi), each summand lifted to the depth-N frame."""
    if n < 0:
        raise ValueError("N must be nonnegative")
    term = root_projection(0)
    total = term.copy()
    for k in range(1, n + 1):
        term = phi_apply(term, p)
        lifted = np.zeros_like(term)
        lifted[:total.shape[0], :total.shape[1]] = total
        total = lifted + term
    return SymMatrix(total, n, as_weights(p).p, Provenance.NEUMANN_SUM,
                     tail_bound=truncation_error_bound(p, n))


def block_matrix(p, k_prev) -> np.ndarray:
    """[[p K' + p P, c P], [c P, (1-p) K' + (1-p) P]] with c = sqrt(p(1-p))."""
    k_prev = np.asarray(k_prev, dtype=float)
    pf = float(as_weights(p).p)
    n = k_prev.shape[0]
    proj = root_projection(_depth_of(k_prev))
    c = math.sqrt(pf * (1.0 - pf))
    out = np.empty((2 * n, 2 * n))
    out[:n, :n] = pf * (k_prev + proj)
    out[:n, n:] = c * proj
    out[n:, :n] = c * proj
    out[n:, n:] = (1.0 - pf) * (k_prev + proj)
    return out


def unitary_w(p, M: int) -> np.ndarray:
    """W = [U_0 | U_2] from two depth-(M-1) frames onto the depth-M frame."""
    u0, u2 = _pair(p, M - 1)
    return np.hstack([u0, u2])


def block_form_residual(p, M: int) -> float:
    """max-entry distance between W* K W and the branch block matrix of K'."""
    if M < 2:
        raise ValueError("M must be at least 2")
    w = unitary_w(p, M)
    k = assemble_kinf_truncated(p, M).entries
    k_prev = assemble_kinf_truncated(p, M - 1).entries
    return float(np.abs(w.T @ k @ w - block_matrix(p, k_prev)).max())
