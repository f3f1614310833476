"""Residue-sum tube formulas for strings, sprays and tilings.

The inner tube volume of a self-similar spray with generator data J(s)
(see Generator.mellin) and scaling zeta function zeta_s is recovered as

    V(eps) = sum_{omega} res(zeta_s; omega) eps^{d-omega} J(omega)
           + sum_{i=0}^{d-1} kappa_i zeta_s(i) eps^{d-i},

summed over the scaling poles omega and the integer poles i of J; the
pole at s = d lies right of the inversion contour and never enters.
Lattice pole ladders are truncated at |n| <= N_max with a computed tail
bound; the exact per-tile oracles arbitrate every printed constant.
"""

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import FractubeError, PoleError
from .spectrum import ComplexDimensionSet, Window, complex_dimensions, residue_scaling_zeta
from .strings import FractalString, scaling_zeta
from .tiling import Generator, SelfSimilarTiling, interval_generator

LEDGER_RUNGS = 8


@dataclass
class TubeEvaluation:
    """V(eps) samples with the residue bookkeeping that produced them."""

    eps: np.ndarray
    values: np.ndarray
    n_max: int
    tail_bounds: np.ndarray
    max_imag: float
    pole_contributions: dict = field(default_factory=dict)

    def max_relative_error(self, reference: np.ndarray) -> float:
        ref = np.asarray(reference, dtype=float)
        return float(np.max(np.abs(self.values - ref) / np.abs(ref)))


def _zeta_at_integer(ratios, i):
    denom = 1.0 - sum(r ** i for r in ratios)
    if abs(denom) < 1e-10:
        raise PoleError(
            f"pole collision at s = {i}: formula hypothesis violated (non-simple structural collision)"
        )
    return 1.0 / denom


def _tail_constants(gen: Generator, sigma: float):
    """Constants C2, C3 with |J(sigma + iT)| <= C2/T^2 + C3/T^3.

    The 1/T coefficients cancel breakpoint by breakpoint because the
    generator tube is continuous, which is what makes the pole series
    absolutely convergent.
    """
    d = gen.dim
    kaps = [kap for (_, _, kap) in gen.pieces]
    kaps.append(tuple(0.0 for _ in range(d)) + (gen.volume,))
    breaks = [hi for (_, hi, _) in gen.pieces]
    c2 = 0.0
    c3 = 0.0
    for m, e in enumerate(breaks):
        delta = [kaps[m][i] - kaps[m + 1][i] for i in range(d + 1)]
        c2 += e ** sigma * abs(sum(i * delta[i] * e ** (-i) for i in range(d + 1)))
        c3 += e ** sigma * sum(i * i * abs(delta[i]) * e ** (-i) for i in range(d + 1))
    return c2, c3


def _spray_formula(
    ratios,
    generators: Sequence[Generator],
    dims: ComplexDimensionSet,
    eps_grid,
    n_max: int,
):
    """Shared residue engine for strings (d=1) and tilings (d=2)."""
    eps = np.asarray(eps_grid, dtype=float)
    if np.any(eps <= 0):
        raise ValueError("eps grid must be positive")
    d = generators[0].dim
    zeta_int = [_zeta_at_integer(ratios, i) for i in range(d + 1)]

    total = np.zeros(len(eps), dtype=complex)
    tails = np.zeros(len(eps))
    ledger = {}

    if dims.kind == "lattice":
        p = dims.lattice.period
        ladders = [(b, residue_scaling_zeta(ratios, b)) for b in dims.base_roots]
        pole_sets = []
        for b, res in ladders:
            ns = np.arange(-n_max, n_max + 1)
            pole_sets.append((b + 1j * ns * p, res, ns))
    else:
        scaling = [(cd.omega, cd.residue) for cd in dims.roots]
        pole_sets = [(np.array([w for w, _ in scaling]),
                      np.array([r for _, r in scaling]), None)]

    for gen in generators:
        sat = eps >= gen.inradius
        sat_value = gen.volume * zeta_int[d].real
        unsat = ~sat
        gen_total = np.where(sat, sat_value, 0.0).astype(complex)
        if np.any(unsat):
            e_u = eps[unsat]
            acc = np.zeros(len(e_u), dtype=complex)
            for omegas, res, ns in pole_sets:
                J = gen.mellin(omegas)
                terms = res * np.power.outer(e_u, d - omegas) * J
                acc += terms.sum(axis=1)
                if ns is not None:
                    central = np.abs(ns) <= LEDGER_RUNGS
                    for k in np.nonzero(central)[0]:
                        w = complex(omegas[k])
                        entry = ledger.setdefault(w, np.zeros(len(eps), dtype=complex))
                        entry[unsat] += terms[:, k]
                    rest = terms[:, ~central].sum(axis=1)
                    key = f"ladder Re={omegas[0].real:+.6f} |n|>{LEDGER_RUNGS}"
                    entry = ledger.setdefault(key, np.zeros(len(eps), dtype=complex))
                    entry[unsat] += rest
                else:
                    for k, w in enumerate(omegas):
                        entry = ledger.setdefault(complex(w), np.zeros(len(eps), dtype=complex))
                        entry[unsat] += terms[:, k]
            for i in range(d):
                kap = gen.mellin_integer_residue(i)
                if kap == 0.0:
                    continue
                term = kap * zeta_int[i] * e_u ** (d - i)
                acc += term
                entry = ledger.setdefault(complex(i), np.zeros(len(eps), dtype=complex))
                entry[unsat] += term
            gen_total[unsat] = acc
            tails[unsat] += _tail_estimate(gen, dims, ratios, e_u, n_max, d)
        total += gen_total

    values = total.real
    max_imag = float(np.max(np.abs(total.imag)))
    return TubeEvaluation(
        eps=eps,
        values=values,
        n_max=n_max,
        tail_bounds=tails,
        max_imag=max_imag,
        pole_contributions=ledger,
    )


def _tail_estimate(gen, dims, ratios, eps, n_max, d):
    if dims.kind == "lattice":
        p = dims.lattice.period
        out = np.zeros(len(eps))
        for b in dims.base_roots:
            res = abs(residue_scaling_zeta(ratios, b))
            c2, c3 = _tail_constants(gen, b.real)
            out += 2.0 * res * eps ** (d - b.real) * (
                c2 / (p * p * n_max) + c3 / (2.0 * p ** 3 * n_max * n_max)
            )
        return out
    # nonlattice: poles beyond the window are missing; estimate their weight
    # from the in-window density and the 1/T^2 decay of the terms.
    t_max = dims.window.t_max
    upper = [cd for cd in dims.roots if cd.omega.imag > 0]
    if not upper:
        return np.zeros(len(eps))
    density = len(upper) / t_max
    res_max = max(abs(cd.residue) for cd in upper)
    c2a, c3a = _tail_constants(gen, dims.D)
    c2b, c3b = _tail_constants(gen, dims.window.sigma_min)
    c2, c3 = max(c2a, c2b), max(c3a, c3b)
    return 2.0 * density * res_max * eps ** (d - dims.D) * (c2 / t_max + c3 / (2 * t_max ** 2))


def string_tube_formula(
    string: FractalString,
    dims: Optional[ComplexDimensionSet] = None,
    eps_grid: Sequence[float] = (),
    n_max: int = 2000,
) -> TubeEvaluation:
    """Tube formula for a fractal string by residue summation.

    Self-similar strings sum the scaling-pole ladders plus the structural
    term 2 eps zeta_s(0) (the residue at s = 0, present whenever 0 is not
    itself a scaling pole).  Explicit finite strings have an entire
    scaling zeta function: the formula degenerates to the exact
    interval-by-interval Steiner form, valid in both regimes.
    """
    if string.g is None:
        raise FractubeError("string has no inradius; choose a geometric realization")
    gen = interval_generator(2.0 * string.g)
    eps = np.asarray(eps_grid, dtype=float)
    if not string.is_self_similar:
        values = np.array(
            [sum(m * gen.tube(e / r) * r for r, m in string.atoms) for e in eps]
        )
        return TubeEvaluation(eps=eps, values=values, n_max=0,
                              tail_bounds=np.zeros(len(eps)), max_imag=0.0)
    if dims is None:
        dims = complex_dimensions(string.ratios)
    return _spray_formula(string.ratios, [gen], dims, eps, n_max)


def tiling_tube_formula(
    tiling: SelfSimilarTiling,
    dims: Optional[ComplexDimensionSet] = None,
    eps_grid: Sequence[float] = (),
    n_max: int = 2000,
) -> TubeEvaluation:
    """Tube formula for a self-similar tiling (sum of one spray per
    generator, all driven by the same scaling zeta function).

    Valid for eps up to each generator's inradius; a spray whose
    generator is saturated contributes its exact total tile volume.
    """
    if dims is None:
        dims = complex_dimensions(tiling.ratios)
    return _spray_formula(tiling.ratios, tiling.generators, dims, eps_grid, n_max)


def spray_geometric_zeta(tiling: SelfSimilarTiling, q: int, eps: float, s: complex) -> complex:
    """Geometric zeta function of the q-th generator spray:
    eps^{d-s} zeta_s(s) J_q(s)."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    gen = tiling.generators[q]
    zs = scaling_zeta(tiling.string, s)
    return np.power(complex(eps), gen.dim - complex(s)) * zs * gen.mellin(s)


def finite_spray_degeneration(copies: Sequence[tuple], eps: float) -> float:
    """Tube volume of finitely many scaled generator copies.

    With a finite scaling measure the zeta function has no poles, the
    residue sum is empty, and only the integer terms survive: the result
    is the exact Steiner-type sum over the copies, piece by piece.
    """
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    total = 0.0
    for ratio, gen in copies:
        if ratio <= 0:
            raise ValueError("copy ratios must be positive")
        total += ratio ** gen.dim * gen.tube(eps / ratio)
    return total
