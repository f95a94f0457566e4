"""Word combinatorics and cylinder masses on the binary Cantor tree.

Words are finite addresses over the alphabet {0, 2}. They are stored
bit-packed (symbol 0 -> bit 0, symbol 2 -> bit 1, first symbol most
significant) together with an explicit length, so "0" and "00" stay
distinct. With that packing the integer order of ``bits`` at fixed length is
the lexicographic order with 0 < 2.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Union

Scalar = Union[float, Fraction]

EMPTY_LABEL = "-"


@dataclass(frozen=True)
class Word:
    bits: int = 0
    length: int = 0

    def __post_init__(self):
        if self.length < 0:
            raise ValueError("word length must be nonnegative")
        if self.bits < 0 or self.bits >> self.length:
            raise ValueError(f"bits {self.bits} do not fit in length {self.length}")

    @classmethod
    def parse(cls, text: str) -> "Word":
        """Build a word from its string form ("02", "", or "-" for the empty word)."""
        if text == EMPTY_LABEL:
            text = ""
        bits = 0
        for ch in text:
            if ch not in "02":
                raise ValueError(f"invalid symbol {ch!r} in word {text!r}")
            bits = (bits << 1) | (ch == "2")
        return cls(bits, len(text))

    @classmethod
    def from_symbols(cls, symbols) -> "Word":
        return cls.parse("".join(str(s) for s in symbols))

    @property
    def symbols(self) -> tuple[int, ...]:
        return tuple(2 if (self.bits >> (self.length - 1 - i)) & 1 else 0
                     for i in range(self.length))

    @property
    def n2(self) -> int:
        return self.bits.bit_count()

    @property
    def n0(self) -> int:
        return self.length - self.n2

    def __len__(self) -> int:
        return self.length

    def __str__(self) -> str:
        if self.length == 0:
            return EMPTY_LABEL
        return "".join(str(s) for s in self.symbols)

    def __repr__(self) -> str:
        return f"Word({str(self)!r})"

    def child(self, symbol: int) -> "Word":
        """Append one symbol at the end (w -> w0 or w2)."""
        return Word((self.bits << 1) | _bit(symbol), self.length + 1)

    def prepend(self, symbol: int) -> "Word":
        """Put one symbol in front (w -> 0w or 2w)."""
        return Word(self.bits | (_bit(symbol) << self.length), self.length + 1)

    def prefix(self, n: int) -> "Word":
        if not 0 <= n <= self.length:
            raise ValueError("prefix length out of range")
        return Word(self.bits >> (self.length - n), n)

    def symbol_at(self, i: int) -> int:
        return 2 if (self.bits >> (self.length - 1 - i)) & 1 else 0

    def sort_key(self) -> tuple[int, int]:
        return (self.length, self.bits)


EMPTY = Word()


def _bit(symbol: int) -> int:
    if symbol == 0:
        return 0
    if symbol == 2:
        return 1
    raise ValueError(f"symbol must be 0 or 2, got {symbol!r}")


@dataclass(frozen=True)
class BranchWeights:
    """Branch probabilities p (left) and 1 - p (right), with derived constants.

    ``p`` may be a float or a :class:`fractions.Fraction`; every derived field
    is computed in the same scalar type.
    """

    p: Scalar
    one_minus_p: Scalar = field(init=False)
    alpha: Scalar = field(init=False)
    q: Scalar = field(init=False)

    def __post_init__(self):
        p = self.p
        if not 0 < p < 1:
            raise ValueError(f"p must lie in (0, 1), got {p}")
        omp = 1 - p
        object.__setattr__(self, "one_minus_p", omp)
        object.__setattr__(self, "alpha", max(p, omp))
        object.__setattr__(self, "q", p * p + omp * omp)

    @property
    def exact(self) -> bool:
        return isinstance(self.p, Fraction)


def as_weights(p) -> BranchWeights:
    return p if isinstance(p, BranchWeights) else BranchWeights(p)


def mass(w: Word, bw) -> Scalar:
    """Cylinder measure p**N0(w) * (1-p)**N2(w)."""
    bw = as_weights(bw)
    return bw.p ** w.n0 * bw.one_minus_p ** w.n2


class Relation(enum.Enum):
    EQUAL = "Equal"
    PREFIX_OF = "PrefixOf"
    EXTENSION_OF = "ExtensionOf"
    INCOMPARABLE = "Incomparable"


def relation(u: Word, v: Word) -> Relation:
    """Tree relation of ``u`` to ``v``; PREFIX_OF means u is a proper prefix of v."""
    if u.length == v.length:
        return Relation.EQUAL if u.bits == v.bits else Relation.INCOMPARABLE
    if u.length < v.length:
        if v.bits >> (v.length - u.length) == u.bits:
            return Relation.PREFIX_OF
        return Relation.INCOMPARABLE
    if u.bits >> (u.length - v.length) == v.bits:
        return Relation.EXTENSION_OF
    return Relation.INCOMPARABLE


def comparable(u: Word, v: Word) -> bool:
    return relation(u, v) is not Relation.INCOMPARABLE


def intersection_mass(u: Word, v: Word, bw) -> Scalar:
    """mu_p(C_u ∩ C_v): the smaller cylinder's mass if nested, else zero."""
    rel = relation(u, v)
    if rel is Relation.INCOMPARABLE:
        return 0 * as_weights(bw).p
    return mass(v if rel is Relation.PREFIX_OF else u, bw)


def words_of_length(n: int) -> Iterator[Word]:
    for bits in range(1 << n):
        yield Word(bits, n)


def enumerate_words(max_len: int) -> list[Word]:
    """All words of length <= max_len in canonical (length, lexicographic) order."""
    if max_len < 0:
        raise ValueError("max_len must be nonnegative")
    return [w for n in range(max_len + 1) for w in words_of_length(n)]


def descendants(z: Word, n: int) -> Iterator[Word]:
    """The 2**n words extending ``z`` by exactly ``n`` symbols."""
    for tail in range(1 << n):
        yield Word((z.bits << n) | tail, z.length + n)


def descendant_square_sum(z: Word, n: int, bw) -> Scalar:
    """Sum of squared masses over depth-n descendants: mass(z)**2 * q**n."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    bw = as_weights(bw)
    return mass(z, bw) ** 2 * bw.q ** n
