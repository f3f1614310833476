"""Complex dimensions of self-similar scaling measures.

The scaling zeta function of a self-similar system is
1 / (1 - sum_j r_j^s).  Its poles are located either exactly (lattice
case: polynomial root ladders with a fixed vertical period) or by an
argument-principle search over a window (nonlattice case), and every
claimed root is verified against |1 - sum_j r_j^omega| < 1e-10.
"""

import cmath
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import BudgetError, FractubeError, PoleError

ROOT_TOL = 1e-10
ROOT_BUDGET = 100_000
BOX_FLOOR = 1e-6


def moran_dimension(ratios: Sequence[float]) -> float:
    """Unique real D >= 0 with sum_j r_j^D = 1 (may exceed 1 for tilings).

    Bisection brackets the root of the strictly decreasing map
    D -> sum r_j^D, then Newton polishes to |sum r_j^D - 1| < 1e-14.
    """
    rs = [float(r) for r in ratios]
    if len(rs) < 2:
        raise ValueError("need at least two ratios")
    if any(not 0.0 < r < 1.0 for r in rs):
        raise ValueError("ratios must lie in (0, 1)")

    def f(d):
        return sum(r ** d for r in rs) - 1.0

    lo, hi = 0.0, 1.0
    while f(hi) > 0:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-13:
            break
    d = 0.5 * (lo + hi)
    for _ in range(8):
        fd = f(d)
        if abs(fd) < 1e-15:
            break
        d -= fd / sum(r ** d * math.log(r) for r in rs)
    if abs(f(d)) > 1e-14:
        raise FractubeError(f"Moran solve stalled at residual {f(d):.2e}")
    return d


@dataclass(frozen=True)
class LatticeClassification:
    kind: str                      # "lattice" | "nonlattice"
    r: Optional[float] = None      # generator ratio (lattice)
    exponents: Optional[tuple] = None  # k_j with r_j = r^{k_j}, ratios sorted descending
    period: Optional[float] = None     # 2 pi / log(1/r)
    certainty: str = "exact"       # "exact" | "tolerance-certified"
    max_error: float = 0.0


def classify_lattice(
    ratios: Sequence[float], max_denominator: int = 64, tol: float = 1e-12
) -> LatticeClassification:
    """Lattice test: are all log r_j / log r_1 rational with a small
    common denominator?

    Floating-point input cannot certify irrationality, so a detection
    right at the tolerance boundary is flagged "tolerance-certified"
    together with the achieved error.
    """
    rs = sorted((float(r) for r in ratios), reverse=True)
    logs = [math.log(r) for r in rs]
    fracs, errs = [], []
    for lg in logs:
        x = lg / logs[0]
        fr = Fraction(x).limit_denominator(max_denominator)
        err = abs(x - float(fr))
        if err > tol:
            return LatticeClassification(kind="nonlattice", max_error=err)
        fracs.append(fr)
        errs.append(err)
    q = 1
    for fr in fracs:
        q = q * fr.denominator // math.gcd(q, fr.denominator)
    if q > max_denominator:
        return LatticeClassification(kind="nonlattice", max_error=max(errs))
    ks = [fr.numerator * (q // fr.denominator) for fr in fracs]
    shrink = 0
    for k in ks:
        shrink = math.gcd(shrink, k)
    ks = [k // shrink for k in ks]
    r = rs[0] ** (shrink / q)
    achieved = max(abs(r ** k - rj) / rj for k, rj in zip(ks, rs))
    certainty = "exact" if achieved < 1e-14 and max(errs) < tol / 10 else "tolerance-certified"
    return LatticeClassification(
        kind="lattice",
        r=r,
        exponents=tuple(ks),
        period=2.0 * math.pi / math.log(1.0 / r),
        certainty=certainty,
        max_error=max(max(errs), achieved),
    )


@dataclass(frozen=True)
class Window:
    """Vertical-line screen at Re s = sigma_min, capped at |Im s| <= t_max.

    t_max = None resolves to 10 oscillatory periods at analysis time.
    """

    sigma_min: float = -1.0
    t_max: Optional[float] = None


@dataclass(frozen=True)
class ComplexDimension:
    omega: complex
    residue: complex


@dataclass(frozen=True)
class ComplexDimensionSet:
    kind: str
    D: float
    window: Window
    roots: tuple                       # ComplexDimension, sorted by (Re, Im)
    lattice: Optional[LatticeClassification] = None
    base_roots: tuple = ()             # one ladder seed per polynomial root (lattice)
    census: Optional[int] = None       # argument-principle count (nonlattice, upper box)

    @property
    def period(self) -> Optional[float]:
        return self.lattice.period if self.lattice and self.lattice.kind == "lattice" else None

    def ladder(self, n_max: int):
        """(base root, period) ladders extended to |n| <= n_max; lattice only."""
        if self.kind != "lattice":
            raise FractubeError("ladders exist only for lattice systems")
        p = self.lattice.period
        out = []
        for b in self.base_roots:
            ns = np.arange(-n_max, n_max + 1)
            out.append(b + 1j * ns * p)
        return out


def residue_scaling_zeta(ratios: Sequence[float], omega: complex) -> complex:
    """Residue of 1/(1 - sum r_j^s) at a simple root omega:
    1 / sum_j r_j^omega log(1/r_j)."""
    omega = complex(omega)
    deriv = sum(np.power(complex(r), omega) * math.log(1.0 / r) for r in ratios)
    if abs(deriv) < 1e-10:
        raise PoleError("multiple pole: formula requires simple poles")
    return 1.0 / deriv


def _zeta_denominator(ratios):
    def f(s):
        return 1.0 - sum(np.power(complex(r), s) for r in ratios)

    def fp(s):
        return sum(np.power(complex(r), s) * math.log(1.0 / r) for r in ratios)

    return f, fp


def complex_dimensions(ratios: Sequence[float], window: Window = Window()) -> ComplexDimensionSet:
    """All poles of the scaling zeta function inside the window.

    Lattice systems substitute z = r^s and solve the polynomial
    1 - sum z^{k_j} (companion-matrix roots polished by Newton), lifting
    each root to a vertical ladder with exact spacing 2 pi / log(1/r).
    Nonlattice systems run an argument-principle box subdivision whose
    final census must match the number of roots found.
    """
    rs = sorted((float(r) for r in ratios), reverse=True)
    D = moran_dimension(rs)
    cls = classify_lattice(rs)
    if window.t_max is None:
        proxy = cls.period if cls.kind == "lattice" else 2.0 * math.pi / math.log(1.0 / rs[0])
        window = replace(window, t_max=10.0 * proxy)
    if window.sigma_min >= D:
        raise ValueError("window screen must lie left of the similarity dimension")

    if cls.kind == "lattice":
        return _lattice_dimensions(rs, D, cls, window)
    return _nonlattice_dimensions(rs, D, cls, window)


def _lattice_dimensions(rs, D, cls, window):
    ks = cls.exponents
    r, p = cls.r, cls.period
    logr = math.log(r)
    coeffs = np.zeros(max(ks) + 1)
    coeffs[0] = 1.0
    for k in ks:
        coeffs[k] -= 1.0
    zroots = np.roots(coeffs[::-1])

    def f(z):
        return 1.0 - sum(z ** k for k in ks)

    def fp(z):
        return -sum(k * z ** (k - 1) for k in ks)

    polished = []
    for z in zroots:
        z = complex(z)
        for _ in range(100):
            d = fp(z)
            if abs(d) < 1e-300:
                break
            step = f(z) / d
            z -= step
            if abs(step) < 1e-13 * max(1.0, abs(z)):
                break
        for seen in polished:
            if abs(z - seen) < 1e-10 * max(1.0, abs(seen)):
                raise PoleError("multiple pole: formula requires simple poles")
        polished.append(z)

    sigma_min = window.sigma_min
    bases = []
    for z in polished:
        sigma = math.log(abs(z)) / logr
        if sigma < sigma_min - 1e-12:
            continue
        im0 = math.remainder(cmath.phase(z) / logr, p)
        bases.append(complex(sigma, im0))
    # keep the screen clear of the ladders
    while any(abs(b.real - sigma_min) < 1e-8 for b in bases):
        sigma_min -= 1e-6
    window = replace(window, sigma_min=sigma_min)

    est = sum(2 * window.t_max / p + 1 for _ in bases)
    if est > ROOT_BUDGET:
        raise BudgetError(f"window too large: about {est:.0f} roots exceeds the budget")

    fden, _ = _zeta_denominator(rs)
    roots = []
    for b in bases:
        n_lo = math.ceil((-window.t_max - b.imag) / p - 1e-12)
        n_hi = math.floor((window.t_max - b.imag) / p + 1e-12)
        for n in range(n_lo, n_hi + 1):
            w = complex(b.real, b.imag + n * p)
            if abs(fden(w)) > ROOT_TOL:
                raise FractubeError(f"ladder point {w} failed verification: |f| = {abs(fden(w)):.2e}")
            roots.append(w)
    roots.sort(key=lambda w: (w.real, w.imag))
    dims = tuple(ComplexDimension(w, residue_scaling_zeta(rs, w)) for w in roots)
    return ComplexDimensionSet(
        kind="lattice", D=D, window=window, roots=dims, lattice=cls, base_roots=tuple(bases)
    )


def _nonlattice_dimensions(rs, D, cls, window):
    f, fp = _zeta_denominator(rs)
    # |f'| on the box is at most sum lambda_j r_j^sigma_min; size the edge
    # sampling so a step cannot alias a full phase turn between samples
    rate = sum(math.log(1.0 / r) * r ** window.sigma_min for r in rs)
    base_step = min(0.5, 1.0 / rate)

    def arg_walk(za, fa, zb, fb, depth=0):
        d = cmath.phase(fb / fa)
        if abs(d) < 1.2 or depth > 48:
            return d
        zm = 0.5 * (za + zb)
        fm = f(zm)
        return arg_walk(za, fa, zm, fm, depth + 1) + arg_walk(zm, fm, zb, fb, depth + 1)

    def winding(x0, x1, y0, y1):
        corners = [complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1), complex(x0, y0)]
        total = 0.0
        for a, b in zip(corners[:-1], corners[1:]):
            n0 = max(9, int(math.ceil(abs(b - a) / base_step)) + 1)
            ts = np.linspace(0.0, 1.0, n0)
            pts = [a + (b - a) * t for t in ts]
            vals = [f(z) for z in pts]
            if min(abs(v) for v in vals) < 1e-13:
                raise FractubeError("screen passes through a root")
            for i in range(len(pts) - 1):
                total += arg_walk(pts[i], vals[i], pts[i + 1], vals[i + 1])
        w = total / (2.0 * math.pi)
        n = round(w)
        if abs(w - n) > 0.25:
            raise FractubeError(f"winding integral did not settle: {w}")
        return int(n)

    def newton(z):
        z0 = z
        for _ in range(80):
            d = fp(z)
            if abs(d) < 1e-14:
                z += 1e-6 * (1 + 1j)
                continue
            step = f(z) / d
            if abs(step) > 1.0:
                step /= abs(step)
            z -= step
            if abs(z - z0) > 10.0:
                return None
            if abs(step) < 1e-13:
                return z
        return None

    found = []

    def search(x0, x1, y0, y1):
        n = winding(x0, x1, y0, y1)
        if n == 0:
            return
        if len(found) + n > ROOT_BUDGET:
            raise BudgetError("window too large: root budget exceeded")
        if n == 1:
            z = newton(complex(0.5 * (x0 + x1), 0.5 * (y0 + y1)))
            if z is not None and x0 - 1e-12 <= z.real <= x1 + 1e-12 \
                    and y0 - 1e-12 <= z.imag <= y1 + 1e-12 and abs(f(z)) < ROOT_TOL:
                found.append(z)
                return
        if max(x1 - x0, y1 - y0) < BOX_FLOOR:
            raise FractubeError("root cluster below the box-subdivision floor (multiple pole?)")
        jit = 1e-9
        if (x1 - x0) > (y1 - y0):
            xm = 0.5 * (x0 + x1) + jit
            search(x0, xm, y0, y1)
            search(xm, x1, y0, y1)
        else:
            ym = 0.5 * (y0 + y1) + jit
            search(x0, x1, y0, ym)
            search(x0, x1, ym, y1)

    sigma_min = window.sigma_min
    y_eps = 1e-7
    attempts = 0
    while True:
        try:
            found.clear()
            census = winding(sigma_min, D + 0.1, y_eps, window.t_max)
            search(sigma_min, D + 0.1, y_eps, window.t_max)
            break
        except FractubeError:
            attempts += 1
            if attempts > 8:
                raise
            sigma_min -= 1e-6 * attempts
            y_eps *= 1.37
    window = replace(window, sigma_min=sigma_min)
    if len(found) != census:
        raise FractubeError(
            f"argument-principle census mismatch: winding {census}, found {len(found)}"
        )
    roots = [complex(D)] + found + [w.conjugate() for w in found]
    for w in roots:
        if abs(f(w)) > ROOT_TOL:
            raise FractubeError(f"root {w} failed verification")
    roots.sort(key=lambda w: (w.real, w.imag))
    dims = tuple(ComplexDimension(w, residue_scaling_zeta(rs, w)) for w in roots)
    return ComplexDimensionSet(
        kind="nonlattice", D=D, window=window, roots=dims, lattice=cls, census=census
    )
