"""Truncated formal series  c_0 + c_1/z + ... + c_N/z**N  in float or exact rational mode.

The constant term ``unit`` is kept apart from the tail so expressions such as
1/(1 - a), where ``a`` has no constant term, stay inside truncated arithmetic.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

FLOAT = "float"
RATIONAL = "rational"
MODES = (FLOAT, RATIONAL)


def _coerce(x, mode: str):
    if mode == RATIONAL:
        if isinstance(x, float):
            raise TypeError("rational mode does not accept floats")
        return Fraction(x)
    return float(x)


@dataclass(frozen=True)
class LaurentTail:
    coeffs: tuple
    mode: str = FLOAT
    unit: object = 0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        object.__setattr__(self, "coeffs", tuple(_coerce(c, self.mode) for c in self.coeffs))
        object.__setattr__(self, "unit", _coerce(self.unit, self.mode))

    @classmethod
    def zero(cls, order: int, mode: str = FLOAT) -> "LaurentTail":
        return cls((0,) * order, mode)

    @classmethod
    def monomial(cls, k: int, order: int, mode: str = FLOAT, value=1) -> "LaurentTail":
        """value * z**-k (k = 0 puts it in the unit)."""
        if k == 0:
            return cls((0,) * order, mode, value)
        c = [0] * order
        c[k - 1] = value
        return cls(tuple(c), mode)

    @property
    def order(self) -> int:
        return len(self.coeffs)

    def coefficient(self, k: int):
        return self.unit if k == 0 else self.coeffs[k - 1]

    def _check(self, other: "LaurentTail"):
        if self.mode != other.mode:
            raise ValueError(f"mode mismatch: {self.mode} vs {other.mode}")
        if self.order != other.order:
            raise ValueError(f"order mismatch: {self.order} vs {other.order}")

    def _full(self) -> list:
        return [self.unit, *self.coeffs]

    def __add__(self, other: "LaurentTail") -> "LaurentTail":
        self._check(other)
        return LaurentTail(tuple(x + y for x, y in zip(self.coeffs, other.coeffs)),
                           self.mode, self.unit + other.unit)

    def __neg__(self) -> "LaurentTail":
        return LaurentTail(tuple(-x for x in self.coeffs), self.mode, -self.unit)

    def __sub__(self, other: "LaurentTail") -> "LaurentTail":
        return self + (-other)

    def __mul__(self, other: "LaurentTail") -> "LaurentTail":
        """Truncated Cauchy product; coefficient k uses only input coefficients <= k."""
        self._check(other)
        x, y = self._full(), other._full()
        zero = _coerce(0, self.mode)
        out = []
        for k in range(self.order + 1):
            s = zero
            for i in range(k + 1):
                s += x[i] * y[k - i]
            out.append(s)
        return LaurentTail(tuple(out[1:]), self.mode, out[0])

    def scale(self, c) -> "LaurentTail":
        c = _coerce(c, self.mode)
        return LaurentTail(tuple(c * x for x in self.coeffs), self.mode, c * self.unit)

    def inv_one_minus(self) -> "LaurentTail":
        """1 / (1 - a) = sum_k a**k, truncated; needs a zero constant term."""
        if self.unit != 0:
            raise ValueError("inv_one_minus needs a series without constant term")
        # r = 1 + a r, solved coefficient by coefficient
        r = [_coerce(1, self.mode)]
        a = self._full()
        for k in range(1, self.order + 1):
            r.append(sum((a[i] * r[k - i] for i in range(1, k + 1)), _coerce(0, self.mode)))
        return LaurentTail(tuple(r[1:]), self.mode, r[0])
