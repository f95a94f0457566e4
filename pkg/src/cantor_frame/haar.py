"""Weighted Haar orthonormal basis of the depth-m cylinder space.

The basis of the depth-m space is the constant function (``Root``, always
index 0) followed by the normalized weighted sibling differences
``e_w = ((1-p) 1_{w0} - p 1_{w2}) / sqrt(p (1-p) mass(w))`` for |w| <= m-1 in
canonical word order. Diff(w) sits at index ``2**|w| + bits(w)``, i.e. heap
order on the binary tree.

"Atom coordinates" are coefficients against the normalized level-m atoms
``1_{C_a} / sqrt(mass(a))``, |a| = m, ordered by ``bits(a)``. Inner products
there are plain Euclidean ones, which makes them the reference coordinates for
every oracle in the package.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np

from .words import EMPTY_LABEL, BranchWeights, Word, as_weights, mass

DIFF_EMPTY_LABEL = "*"


@dataclass(frozen=True)
class BasisIndex:
    """Either the root vector (``word is None``) or the difference vector at ``word``."""

    word: Optional[Word] = None

    @property
    def is_root(self) -> bool:
        return self.word is None

    @property
    def label(self) -> str:
        if self.word is None:
            return EMPTY_LABEL
        if self.word.length == 0:
            return DIFF_EMPTY_LABEL
        return str(self.word)

    @classmethod
    def from_label(cls, text: str) -> "BasisIndex":
        if text == EMPTY_LABEL:
            return ROOT
        if text == DIFF_EMPTY_LABEL:
            return cls(Word())
        return cls(Word.parse(text))

    def position(self) -> int:
        if self.word is None:
            return 0
        return (1 << self.word.length) + self.word.bits


ROOT = BasisIndex()


def basis_size(m: int) -> int:
    if m < 0:
        raise ValueError("depth must be nonnegative")
    return 1 << m


def diff_position(w: Word) -> int:
    return (1 << w.length) + w.bits


def word_at(position: int) -> Optional[Word]:
    """Inverse of :func:`diff_position`; ``None`` for the root slot."""
    if position == 0:
        return None
    length = position.bit_length() - 1
    return Word(position - (1 << length), length)


@dataclass(frozen=True)
class HaarFrame:
    depth: int
    weights: BranchWeights

    def __post_init__(self):
        if self.depth < 0:
            raise ValueError("depth must be nonnegative")
        object.__setattr__(self, "weights", as_weights(self.weights))

    @property
    def size(self) -> int:
        return basis_size(self.depth)

    @property
    def p(self):
        return self.weights.p

    @cached_property
    def index_list(self) -> tuple[BasisIndex, ...]:
        return tuple(BasisIndex(word_at(i)) for i in range(self.size))

    def index(self, item) -> int:
        """Position of a BasisIndex (or of Diff(w) when given a Word)."""
        if isinstance(item, Word):
            item = BasisIndex(item)
        if item.word is not None and item.word.length > self.depth - 1:
            raise ValueError(f"Diff({item.word}) is not in the depth-{self.depth} frame")
        return item.position()

    def norm(self, w: Word) -> float:
        """Length of the unnormalized difference h_w, sqrt(p (1-p) mass(w))."""
        bw = self.weights
        return math.sqrt(float(bw.p * bw.one_minus_p * mass(w, bw)))

    @cached_property
    def atom_masses(self) -> np.ndarray:
        p = float(self.weights.p)
        bits = np.arange(self.size)
        n2 = np.array([int(b).bit_count() for b in bits])
        return p ** (self.depth - n2) * (1.0 - p) ** n2


def indicator_to_haar(u: Word, frame: HaarFrame) -> np.ndarray:
    """Haar coefficients of the cylinder indicator 1_{C_u}.

    Walks down the prefixes of ``u`` using 1_{w0} = h_w + p 1_w and
    1_{w2} = (1-p) 1_w - h_w, starting from 1_C = phi.
    """
    if u.length > frame.depth:
        raise ValueError(f"|u| = {u.length} exceeds frame depth {frame.depth}")
    p = float(frame.weights.p)
    c = np.zeros(frame.size)
    c[0] = 1.0
    for i in range(u.length):
        w = u.prefix(i)
        nw = frame.norm(w)
        if u.symbol_at(i) == 0:
            c *= p
            c[diff_position(w)] += nw
        else:
            c *= 1.0 - p
            c[diff_position(w)] -= nw
    return c


def indicator_atoms(u: Word, frame: HaarFrame) -> np.ndarray:
    """Atom coordinates of 1_{C_u}: sqrt(mass(a)) on every atom a extending u."""
    if u.length > frame.depth:
        raise ValueError(f"|u| = {u.length} exceeds frame depth {frame.depth}")
    shift = frame.depth - u.length
    x = np.zeros(frame.size)
    lo, hi = u.bits << shift, (u.bits + 1) << shift
    x[lo:hi] = np.sqrt(frame.atom_masses[lo:hi])
    return x


def atom_change_of_basis(frame: HaarFrame) -> np.ndarray:
    """Orthogonal Q whose columns are the Haar vectors in atom coordinates."""
    m = frame.depth
    p = float(frame.weights.p)
    root = np.sqrt(frame.atom_masses)
    q = np.zeros((frame.size, frame.size))
    q[:, 0] = root
    for pos in range(1, frame.size):
        w = word_at(pos)
        shift = m - w.length
        lo = w.bits << shift
        mid = lo + (1 << (shift - 1))
        hi = (w.bits + 1) << shift
        nw = frame.norm(w)
        q[lo:mid, pos] = (1.0 - p) * root[lo:mid] / nw
        q[mid:hi, pos] = -p * root[mid:hi] / nw
    return q
