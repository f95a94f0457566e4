"""Moments mu_n = <phi, K_inf**n phi> and the scalar renormalization identity.

The rooted resolvent m(z) = sum_n mu_n z**-(n+1) satisfies

    m(z) = a / (1 - a) + b / ((1 - a)(1 - a - b)),
    a = m(z/p),  b = m(z/(1-p)),

for |z| large. Comparing z**-(n+1) coefficients gives mu_n in terms of
mu_0..mu_{n-1}: the only place mu_n enters is linearly through a and b, with
weight p**(n+1) + (1-p)**(n+1).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import CertificationError
from .operators import assemble_km_closed, truncation_error_bound
from .series import FLOAT, RATIONAL, LaurentTail
from .spectral import eigh, kinf_spectral_data, resolvent_value
from .words import as_weights

ORACLE_MAX_N = 8
ORACLE_MAX_M = 10
BOUND_DEPTH = 8


@dataclass(frozen=True)
class MomentSequence:
    p: object
    values: tuple
    mode: str = FLOAT

    def to_json_dict(self) -> dict:
        if self.mode == RATIONAL:
            p = f"{self.p.numerator}/{self.p.denominator}"
            mu = [f"{v.numerator}/{v.denominator}" if v.denominator != 1 else str(v.numerator)
                  for v in self.values]
        else:
            p, mu = float(self.p), [float(v) for v in self.values]
        return {"p": p, "mode": self.mode, "mu": mu}


def renormalization_rhs(a, b):
    """a/(1-a) + b/((1-a)(1-a-b)); increasing in a and b while 1 - a - b > 0."""
    return a / (1 - a) + b / ((1 - a) * (1 - a - b))


def _scalar_p(p, mode: str):
    if mode == RATIONAL:
        if not isinstance(p, (Fraction, int)) or isinstance(p, bool):
            raise ValueError("rational mode needs p as a Fraction")
        p = Fraction(p)
    elif mode == FLOAT:
        p = float(p)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    if not 0 < p < 1:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    return p


def moments_recursive(p, n: int, mode: str = FLOAT) -> MomentSequence:
    if n < 0:
        raise ValueError("N must be nonnegative")
    p = _scalar_p(p, mode)
    omp = 1 - p
    mu = [p ** 0]
    for k in range(1, n + 1):
        order = k + 1
        known = mu + [0 * p]  # mu_k slot zeroed
        a = LaurentTail(tuple(known[j - 1] * p ** j for j in range(1, order + 1)), mode)
        b = LaurentTail(tuple(known[j - 1] * omp ** j for j in range(1, order + 1)), mode)
        ia = a.inv_one_minus()
        rhs = a * ia + b * ia * (a + b).inv_one_minus()
        q_k = rhs.coefficient(k + 1)
        mu.append(q_k / (1 - p ** (k + 1) - omp ** (k + 1)))
    return MomentSequence(p, tuple(mu), mode)


def moments_closed(p) -> tuple:
    """First three moments in closed form, in the scalar type of ``p``."""
    omp = 1 - p
    s = p * omp
    mu1 = 1 / (2 * s)
    mu2 = (p * p - p + 1) / (3 * s * s)
    mu3 = ((12 * p ** 4 - 24 * p ** 3 + 38 * p ** 2 - 26 * p + 11)
           / (24 * s ** 3 * (p * p - p + 2)))
    return mu1, mu2, mu3


def norm_upper_bound(p, depth: int = BOUND_DEPTH) -> float:
    """lambda_max(K_d) + tail(d): an upper bound on ||K_inf||, hence on every ||K_m||."""
    sd = eigh(assemble_km_closed(p, depth), keep_vectors=False)
    return sd.lambda_max + truncation_error_bound(p, depth)


def moments_operator_oracle(p, M: int, n: int) -> list[tuple[float, float]]:
    """<phi, K_M**k phi> for k <= N with bound k B**(k-1) tail(M) on the gap to mu_k."""
    if n > ORACLE_MAX_N or M > ORACLE_MAX_M:
        raise ValueError(f"oracle limited to N <= {ORACLE_MAX_N}, M <= {ORACLE_MAX_M}")
    k_m = assemble_km_closed(p, M).entries
    tau = truncation_error_bound(p, M)
    bound = norm_upper_bound(p, min(M, BOUND_DEPTH))
    v = np.zeros(k_m.shape[0])
    v[0] = 1.0
    out = [(1.0, 0.0)]
    for k in range(1, n + 1):
        v = k_m @ v
        out.append((float(v[0]), k * bound ** (k - 1) * tau))
    return out


def renormalization_residual(p, z: float, M: int) -> tuple[float, float]:
    """|m(z) - RHS(m(z/p), m(z/(1-p)))| on the depth-M truncation, with certified tolerance."""
    pf = float(as_weights(p).p)
    sd = kinf_spectral_data(p, M)
    top = sd.lambda_max + sd.tail_bound
    if not z > top + 1.0:
        raise ValueError(f"z = {z} must exceed the norm bound plus one ({top + 1.0})")
    m0, r0 = resolvent_value(z, sd)
    a, ra = resolvent_value(z / pf, sd)
    b, rb = resolvent_value(z / (1.0 - pf), sd)
    if not (a + ra) + (b + rb) < 1.0:
        raise ValueError("resolvent values too large to certify the identity at this z")
    residual = float(abs(m0 - renormalization_rhs(a, b)))
    hi = renormalization_rhs(a + ra, b + rb)
    lo = renormalization_rhs(a - ra, b - rb)
    # four roundings of size ~eps per evaluation
    tolerance = float(r0 + (hi - lo) + 8 * np.finfo(float).eps)
    if not residual <= tolerance:
        raise CertificationError(f"residual {residual:.3e} exceeds certified {tolerance:.3e}")
    return residual, tolerance
