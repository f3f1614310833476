"""Fractal strings: scaling-ratio measures on the line, their zeta
functions, and an exact tube-volume oracle.

A string is stored in scaling-ratio space: the sequence of interval
lengths is normalized by the largest one, and the inradius g of the
largest interval is carried separately.  This makes the zeta function
independent of the embedding.
"""

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import BudgetError, NotRealizableError, PoleError

_POLE_TOL = 1e-12
_BUCKET_BUDGET = 10_000_000


def multinomial(exponents) -> int:
    """Number of words with the given letter-count vector (exact integer)."""
    out, total = 1, 0
    for m in exponents:
        total += m
        out *= math.comb(total, m)
    return out


def scale_buckets(ratios: Sequence[float], threshold: float, budget: int = _BUCKET_BUDGET):
    """Distinct word products u = prod r_j^{m_j} with u > threshold.

    Returns (values, counts): values sorted descending, exact integer
    multiplicities.  Equal products reached through different exponent
    vectors (the lattice case) are merged at relative tolerance 1e-12,
    so the number of buckets grows polynomially for few-ratio systems
    even though the word count grows exponentially.
    """
    if threshold <= 0:
        raise ValueError("threshold must be positive (the tail is infinite)")
    logs = [math.log(1.0 / r) for r in ratios]
    cap = math.log(1.0 / threshold)
    raw = []

    def rec(j, log_u, mvec):
        if j == len(ratios):
            raw.append((math.exp(-log_u), multinomial(mvec)))
            if len(raw) > budget:
                raise BudgetError("depth budget: bucket enumeration exceeded the cap")
            return
        m = 0
        while log_u + m * logs[j] < cap:
            rec(j + 1, log_u + m * logs[j], mvec + [m])
            m += 1

    rec(0, 0.0, [])
    raw.sort(key=lambda t: -t[0])
    values, counts = [], []
    for u, c in raw:
        if values and abs(u - values[-1]) <= 1e-12 * values[-1]:
            counts[-1] += c
        else:
            values.append(u)
            counts.append(c)
    return np.array(values), counts


@dataclass(frozen=True)
class FractalString:
    """Scaling ratios with multiplicities, nonincreasing, first ratio 1.

    atoms   -- explicit (ratio, multiplicity) pairs; empty for lazily
               generated self-similar strings
    g       -- inradius of the largest interval (None for a pure scaling
               measure with no geometric realization chosen)
    ratios  -- self-similar generator ratios r_1..r_J, or None for an
               explicit string
    """

    atoms: tuple = ()
    g: Optional[float] = None
    ratios: Optional[tuple] = None

    def __post_init__(self):
        if self.ratios is not None:
            rs = tuple(sorted((float(r) for r in self.ratios), reverse=True))
            if len(rs) < 2:
                raise ValueError("a self-similar string needs at least two ratios")
            if any(not 0.0 < r < 1.0 for r in rs):
                raise ValueError("self-similar ratios must lie in (0, 1)")
            object.__setattr__(self, "ratios", rs)
        else:
            if not self.atoms:
                raise ValueError("an explicit string needs at least one atom")
            pairs = [(float(r), int(m)) for r, m in self.atoms]
            pairs.sort(key=lambda t: -t[0])
            if abs(pairs[0][0] - 1.0) > 1e-12:
                raise ValueError("the largest scaling ratio must be 1")
            if any(r <= 0 or r > 1 for r, _ in pairs):
                raise ValueError("scaling ratios must lie in (0, 1]")
            if any(m < 1 for _, m in pairs):
                raise ValueError("multiplicities must be positive integers")
            object.__setattr__(self, "atoms", tuple(pairs))
        if self.g is not None and self.g <= 0:
            raise ValueError("the largest inradius g must be positive")

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_lengths(cls, lengths: Sequence[float]) -> "FractalString":
        """Build an explicit string from raw interval lengths."""
        ls = sorted((float(x) for x in lengths), reverse=True)
        if not ls or ls[0] <= 0:
            raise ValueError("lengths must be positive")
        top = ls[0]
        atoms = []
        for l in ls:
            r = l / top
            if atoms and abs(r - atoms[-1][0]) <= 1e-12:
                atoms[-1][1] += 1
            else:
                atoms.append([r, 1])
        return cls(atoms=tuple((r, m) for r, m in atoms), g=top / 2.0)

    @classmethod
    def self_similar(cls, ratios: Sequence[float], g: Optional[float] = None) -> "FractalString":
        return cls(atoms=(), g=g, ratios=tuple(ratios))

    # -- basic structure ---------------------------------------------------

    @property
    def is_self_similar(self) -> bool:
        return self.ratios is not None

    def dimension(self) -> float:
        """Similarity dimension: the unique real root of sum r_j^D = 1.

        Explicit finite strings have dimension 0.
        """
        if not self.is_self_similar:
            return 0.0
        from .spectrum import moran_dimension

        return moran_dimension(self.ratios)

    @property
    def measure_only(self) -> bool:
        """True when no bounded open subset of the line realizes the string."""
        return self.is_self_similar and self.dimension() >= 1.0

    def total_length(self) -> float:
        if self.g is None:
            raise NotRealizableError("string carries no inradius; it is a scaling measure only")
        if self.is_self_similar:
            if self.measure_only:
                raise NotRealizableError(
                    "not realizable as a bounded open subset of the line (D >= 1)"
                )
            return 2.0 * self.g / (1.0 - sum(self.ratios))
        return 2.0 * self.g * sum(r * m for r, m in self.atoms)

    def buckets(self, threshold: float):
        """Distinct scaling ratios > threshold with multiplicities."""
        if self.is_self_similar:
            return scale_buckets(self.ratios, threshold)
        vals = [r for r, _ in self.atoms if r > threshold]
        return np.array(vals), [m for r, m in self.atoms if r > threshold]

    # -- zeta functions ----------------------------------------------------

    def scaling_zeta(self, s: complex) -> complex:
        return scaling_zeta(self, s)

    def dirichlet_zeta(self, s: complex, depth: int):
        """Truncated Dirichlet sum with a geometric tail bound.

        The sum runs over all words of length <= depth.  For Re s above
        the similarity dimension, rho = sum r_j^{Re s} < 1 and the
        discarded tail is bounded by rho^{depth+1} / (1 - rho).  For an
        explicit string the finite sum is exact and the bound is 0.
        """
        if not self.is_self_similar:
            return sum(m * r ** s for r, m in self.atoms), 0.0
        total = 0j
        level = {0.0: 1}  # log(1/u) -> count, per word length
        logs = [math.log(1.0 / r) for r in self.ratios]
        for _ in range(depth + 1):
            total += sum(c * np.exp(-lu * s) for lu, c in level.items())
            nxt = {}
            for lu, c in level.items():
                for lg in logs:
                    key = lu + lg
                    for existing in list(nxt):
                        if abs(existing - key) <= 1e-12 * max(1.0, key):
                            key = existing
                            break
                    nxt[key] = nxt.get(key, 0) + c
            level = nxt
        sigma = np.real(s)
        rho = sum(r ** sigma for r in self.ratios)
        bound = rho ** (depth + 1) / (1.0 - rho) if rho < 1 else np.inf
        return total, bound


def scaling_zeta(string: FractalString, s: complex) -> complex:
    """Mellin transform of the reciprocal-scale measure.

    Self-similar strings use the closed form 1 / (1 - sum_j r_j^s);
    explicit strings evaluate the exact finite sum  sum m_n ratio_n^s.
    """
    s = complex(s)
    if string.is_self_similar:
        denom = 1.0 - sum(np.power(complex(r), s) for r in string.ratios)
        if abs(denom) < _POLE_TOL:
            raise PoleError(f"pole of the scaling zeta function at s = {s}")
        return 1.0 / denom
    return complex(sum(m * np.power(complex(r), s) for r, m in string.atoms))


def geometric_zeta_string(string: FractalString, eps: float, s: complex) -> complex:
    """zeta_s(s) * (2 eps)^(1-s) / (s (1-s)), on the principal branch."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    s = complex(s)
    if abs(s) < _POLE_TOL or abs(s - 1.0) < _POLE_TOL:
        raise PoleError("structural pole: the factor 1/(s(1-s)) is singular at s in {0, 1}")
    zs = scaling_zeta(string, s)
    return zs * np.power(2.0 * eps, 1.0 - s) / (s * (1.0 - s))


def string_tube_oracle(string: FractalString, eps: float) -> float:
    """Exact inner tube volume V(eps) of a geometric realization.

    Each interval of length l contributes min(2 eps, l).  The infinitely
    many saturated intervals are summed in closed form through
    zeta_s(1), so the result carries no truncation error.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if string.g is None:
        raise NotRealizableError("string carries no inradius; it is a scaling measure only")
    g = string.g
    if string.is_self_similar:
        if string.measure_only:
            raise NotRealizableError(
                "not realizable as a bounded open subset of the line (D >= 1)"
            )
        total = string.total_length()
        if eps >= g:
            return total
        values, counts = string.buckets(eps / g)
        head_count = sum(counts)
        head_length = 2.0 * g * float(np.dot(values, np.array(counts, dtype=float)))
        return 2.0 * eps * head_count + (total - head_length)
    return sum(m * min(2.0 * eps, 2.0 * g * r) for r, m in string.atoms)
