"""Cylinder frame operators K_m and compressions of their norm limit K_inf.

K_m is assembled three independent ways:

* ``assemble_km_closed``: the closed-form tree-banded entries in the Haar frame;
* ``assemble_km_gram_oracle``: from the raw indicator Gram matrix
  ``G[u][v] = mu_p(C_u ∩ C_v)``, no Haar formulas involved;
* ``assemble_km_filtration``: as ``sum_n D_n E_n`` with conditional
  expectations and level-mass multipliers in atom coordinates.

All three return a :class:`SymMatrix` in Haar coordinates.
"""
from __future__ import annotations

import enum
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .errors import SizeLimitError
from .haar import HaarFrame, atom_change_of_basis, diff_position, word_at
from .words import BranchWeights, Word, as_weights, enumerate_words, intersection_mass, mass

GRAM_MAX_DEPTH = 8
FILTRATION_MAX_DEPTH = 10


class Provenance(enum.Enum):
    CLOSED_FORM = "ClosedForm"
    GRAM_ORACLE = "GramOracle"
    FILTRATION = "Filtration"
    PSI_ITERATION = "PsiIteration"
    NEUMANN_SUM = "NeumannSum"


@dataclass(frozen=True, eq=False)
class SymMatrix:
    """Dense real symmetric matrix tagged with where it came from.

    ``tail_bound`` is a certified bound on the operator-norm distance between
    the stored operator and K_inf (zero-padded to the full space).
    """

    entries: np.ndarray
    depth: int
    p: object
    provenance: Provenance
    basis: str = "haar"
    tail_bound: float = math.nan
    operator: str = "K_m"

    def __post_init__(self):
        a = np.array(self.entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("SymMatrix needs a square array")
        # exact symmetry as stored
        a = np.triu(a) + np.triu(a, 1).T
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)

    def to_csv(self) -> str:
        return matrix_to_csv(self)


@dataclass(frozen=True)
class EigenvalueGroup:
    value: float
    multiplicity: int


def _weights(p) -> BranchWeights:
    return as_weights(p)


def truncation_error_bound(p, m: int) -> float:
    """Certified bound alpha**(m+1) / (1 - alpha) on ||K_inf - K_m||."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    a = float(_weights(p).alpha)
    return a ** (m + 1) / (1.0 - a)


def _tree_banded(frame: HaarFrame,
                 root_root: float,
                 root_diff: Callable[[Word], float],
                 diag: Callable[[Word], float],
                 chain: Callable[[Word, Word], float]) -> np.ndarray:
    """Fill a Haar-frame matrix touching only comparable index pairs.

    ``chain(u, v)`` gives the entry for u a proper prefix of v. Incomparable
    pairs are never written and stay exactly 0.0.
    """
    k = np.zeros((frame.size, frame.size))
    k[0, 0] = root_root
    for pos in range(1, frame.size):
        v = word_at(pos)
        k[0, pos] = k[pos, 0] = root_diff(v)
        k[pos, pos] = diag(v)
        for n in range(v.length):
            u = v.prefix(n)
            j = diff_position(u)
            k[j, pos] = k[pos, j] = chain(u, v)
    return k


def assemble_km_closed(p, m: int) -> SymMatrix:
    """K_m in the Haar frame from the closed-form entry formulas."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    bw = _weights(p)
    frame = HaarFrame(m, bw)
    pf = float(bw.p)
    qf = float(bw.q)
    c = 2.0 * pf - 1.0
    spq = math.sqrt(pf * (1.0 - pf))

    def geo(terms: int) -> float:
        return sum(qf ** j for j in range(terms))

    def r(w: Word) -> float:
        return math.sqrt(float(mass(w, bw)))

    def g(w: Word) -> float:
        return geo(m - w.length)

    def chain(u: Word, v: Word) -> float:
        sigma = (1.0 - pf) if v.symbol_at(u.length) == 0 else -pf
        return sigma * c * r(v) ** 3 / r(u) * g(v)

    k = _tree_banded(
        frame,
        root_root=geo(m + 1),
        root_diff=lambda v: c * spq * r(v) ** 3 * g(v),
        diag=lambda v: 2.0 * pf * (1.0 - pf) * r(v) ** 2 * g(v),
        chain=chain,
    )
    return SymMatrix(k, m, bw.p, Provenance.CLOSED_FORM,
                     tail_bound=truncation_error_bound(bw, m))


def indicator_gram(p, m: int) -> tuple[list[Word], np.ndarray]:
    """Raw Gram matrix mu_p(C_u ∩ C_v) over all words of length <= m."""
    bw = _weights(p)
    words = enumerate_words(m)
    n = len(words)
    g = np.zeros((n, n))
    for i, u in enumerate(words):
        for j in range(i, n):
            g[i, j] = g[j, i] = float(intersection_mass(u, words[j], bw))
    return words, g


def assemble_km_gram_oracle(p, m: int) -> SymMatrix:
    """K_m as the frame operator of the indicator family, built from the Gram kernel.

    Atom coordinates of each indicator are read off the Gram matrix itself
    (``<1_u, 1_a> / sqrt(<1_a, 1_a>)`` for level-m atoms a), the frame operator
    is formed there and conjugated into the Haar frame.
    """
    if m > GRAM_MAX_DEPTH:
        raise SizeLimitError(f"Gram oracle is capped at m <= {GRAM_MAX_DEPTH}, got {m}")
    if m < 0:
        raise ValueError("m must be nonnegative")
    bw = _weights(p)
    words, g = indicator_gram(bw, m)
    atoms = slice(len(words) - (1 << m), len(words))
    synth = g[atoms, :] / np.sqrt(np.diag(g)[atoms])[:, None]
    k_atoms = synth @ synth.T
    q = atom_change_of_basis(HaarFrame(m, bw))
    return SymMatrix(q.T @ k_atoms @ q, m, bw.p, Provenance.GRAM_ORACLE,
                     tail_bound=truncation_error_bound(bw, m))


def conditional_expectation(frame: HaarFrame, n: int) -> np.ndarray:
    """E_n in atom coordinates: projection onto functions constant on level-n cylinders."""
    if not 0 <= n <= frame.depth:
        raise ValueError("level must lie in [0, depth]")
    block = 1 << (frame.depth - n)
    root = np.sqrt(frame.atom_masses)
    e = np.zeros((frame.size, frame.size))
    for start in range(0, frame.size, block):
        b = root[start:start + block]
        b = b / math.sqrt(b @ b)
        e[start:start + block, start:start + block] = np.outer(b, b)
    return e


def mass_operator(frame: HaarFrame, n: int) -> np.ndarray:
    """D_n in atom coordinates: multiplication by the level-n cylinder mass."""
    if not 0 <= n <= frame.depth:
        raise ValueError("level must lie in [0, depth]")
    p = float(frame.weights.p)
    ancestors = np.arange(frame.size) >> (frame.depth - n)
    n2 = np.array([int(a).bit_count() for a in ancestors])
    return np.diag(p ** (n - n2) * (1.0 - p) ** n2)


def assemble_km_filtration(p, m: int) -> SymMatrix:
    """K_m = sum_{n<=m} D_n E_n, assembled in atom coordinates and moved to Haar."""
    if m > FILTRATION_MAX_DEPTH:
        raise SizeLimitError(f"filtration assembly is capped at m <= {FILTRATION_MAX_DEPTH}, got {m}")
    if m < 0:
        raise ValueError("m must be nonnegative")
    bw = _weights(p)
    frame = HaarFrame(m, bw)
    k_atoms = np.zeros((frame.size, frame.size))
    for n in range(m + 1):
        # D_n is diagonal: scale rows instead of a dense product
        k_atoms += np.diag(mass_operator(frame, n))[:, None] * conditional_expectation(frame, n)
    q = atom_change_of_basis(frame)
    return SymMatrix(q.T @ k_atoms @ q, m, bw.p, Provenance.FILTRATION,
                     tail_bound=truncation_error_bound(bw, m))


def assemble_kinf_truncated(p, M: int) -> SymMatrix:
    """Compression of K_inf to the depth-M Haar frame (limit entry formulas).

    Its distance to K_inf is at most the same tail as K_M: both
    K_inf - K_M and its compression are positive with norm <= tail.
    """
    if M < 0:
        raise ValueError("M must be nonnegative")
    bw = _weights(p)
    frame = HaarFrame(M, bw)
    pf = float(bw.p)
    c = 2.0 * pf - 1.0

    def r3(w: Word) -> float:
        return float(mass(w, bw)) ** 1.5

    def chain(u: Word, v: Word) -> float:
        if v.symbol_at(u.length) == 0:
            coef = c / (2.0 * pf)
        else:
            coef = -c / (2.0 * (1.0 - pf))
        return coef * r3(v) / math.sqrt(float(mass(u, bw)))

    k = _tree_banded(
        frame,
        root_root=1.0 / (1.0 - float(bw.q)),
        root_diff=lambda v: c / (2.0 * math.sqrt(pf * (1.0 - pf))) * r3(v),
        diag=lambda v: float(mass(v, bw)),
        chain=chain,
    )
    return SymMatrix(k, M, bw.p, Provenance.CLOSED_FORM,
                     tail_bound=truncation_error_bound(bw, M), operator="K_inf")


def embed(a, size: int) -> np.ndarray:
    """Zero-pad a Haar-frame matrix into a deeper frame (initial-segment inclusion)."""
    a = np.asarray(a)
    out = np.zeros((size, size))
    out[:a.shape[0], :a.shape[1]] = a
    return out


def symmetric_closed_spectrum(m: int) -> list[EigenvalueGroup]:
    """Nonzero spectrum of K_m at p = 1/2 with multiplicities (sums to 2**m)."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    groups = [EigenvalueGroup(2.0 - 2.0 ** -m, 1)]
    for n in range(1, m + 1):
        groups.append(EigenvalueGroup(2.0 ** -(n - 1) * (1.0 - 2.0 ** -(m - n + 1)), 1 << (n - 1)))
    return groups


def symmetric_kinf_spectrum(n_max: int) -> list[EigenvalueGroup]:
    """Eigenvalue 2 (simple) and 2**-(n-1) with multiplicity 2**(n-1), n = 1..n_max."""
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    return [EigenvalueGroup(2.0, 1)] + [EigenvalueGroup(2.0 ** -(n - 1), 1 << (n - 1))
                                        for n in range(1, n_max + 1)]


def compression_2x2(p) -> tuple[np.ndarray, float]:
    """Compression of K_inf to span{phi, e_empty} and its closed-form top eigenvalue."""
    bw = _weights(p)
    pf = float(bw.p)
    d = 1.0 - float(bw.q)
    a = 1.0 / d
    b = (2.0 * pf - 1.0) * math.sqrt(pf * (1.0 - pf)) / d
    mat = np.array([[a, b], [b, 1.0]])
    lam = 0.5 * (a + 1.0) + 0.5 * math.sqrt(
        (a - 1.0) ** 2 + 4.0 * (2.0 * pf - 1.0) ** 2 * pf * (1.0 - pf) / d ** 2)
    return mat, lam


def schatten_symmetric_closed(r: float) -> float:
    """sum_j s_j(K_inf)**r at p = 1/2; ``math.inf`` when the series diverges (r = 1)."""
    if r < 1:
        raise ValueError("Schatten exponent must be >= 1")
    if r == 1:
        return math.inf
    return 2.0 ** r + 1.0 / (1.0 - 2.0 ** (1.0 - r))


def format_p(p) -> str:
    if isinstance(p, Fraction):
        return f"{p.numerator}/{p.denominator}"
    return repr(float(p))


def matrix_to_csv(mat: SymMatrix) -> str:
    """Coordinate CSV: header line, then ``row,col,value`` for nonzeros with row <= col."""
    out = io.StringIO()
    out.write(f"# basis={mat.basis} depth={mat.depth} p={format_p(mat.p)} "
              f"provenance={mat.provenance.value}\n")
    rows, cols = np.nonzero(np.triu(mat.entries))
    for i, j in zip(rows, cols):
        out.write(f"{i},{j},{float(mat.entries[i, j])!r}\n")
    return out.getvalue()


def matrix_from_csv(text: str) -> tuple[dict, np.ndarray]:
    """Parse :func:`matrix_to_csv` output back into (header fields, dense matrix)."""
    lines = text.splitlines()
    if not lines or not lines[0].startswith("#"):
        raise ValueError("missing header line")
    header = dict(item.split("=", 1) for item in lines[0][1:].split())
    size = 1 << int(header["depth"])
    a = np.zeros((size, size))
    for line in lines[1:]:
        if not line:
            continue
        i, j, v = line.split(",")
        a[int(i), int(j)] = a[int(j), int(i)] = float(v)
    return header, a
