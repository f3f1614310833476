"""Direct tube-formula machinery for the Koch snowflake curve.

The snowflake's inner neighbourhood volume has the form
V(eps) = G_1(eps) eps^{2-D} + G_2(eps) eps^2 with multiplicatively
3-periodic G_i built from explicit coefficient series and the Fourier
coefficients g_alpha of a partial-block counting function h(eps).  The
function h is not known in closed form, so h enters through a pluggable
model and only structural properties of V are checkable; the explicit
series and the preliminary area are evaluated here with tail bounds.
"""

import math
from dataclasses import dataclass

import numpy as np

D_KOCH = math.log(4) / math.log(3)
PERIOD_KOCH = 2.0 * math.pi / math.log(3)  # snowflake period (curve, not tiling)


def _split_x(eps: float):
    if not 0.0 < eps < 3 ** -0.5:
        raise ValueError("eps must lie in (0, 1/sqrt(3)) so that x > 0")
    x = -math.log(eps * math.sqrt(3.0)) / math.log(3.0)
    n = math.floor(x)
    return x, n, x - n


def koch_bracket(frac: float) -> float:
    """Coefficient of eps^{2-D} in the preliminary area, as a function of
    the fractional part {x}; invariant under x -> x + 1 by construction."""
    return 4.0 ** -frac * (
        (3.0 * math.sqrt(3.0) / 40.0) * 9.0 ** frac
        + (math.sqrt(3.0) / 2.0) * 3.0 ** frac
        + (math.pi / 3.0 - math.sqrt(3.0)) / 6.0
    )


def koch_preliminary_area(eps: float) -> float:
    """Approximate area of the inner eps-neighbourhood of the Koch curve
    before error-block corrections:

        V~(eps) = eps^{2-D} 4^{-{x}} ( (3 sqrt3/40) 9^{x} + (sqrt3/2) 3^{x}
                  + (pi/3 - sqrt3)/6 )  -  (eps^2/3)(pi/3 + 2 sqrt3),

    with x = -log_3(eps sqrt3) split into integer and fractional parts.
    """
    _, _, frac = _split_x(eps)
    return eps ** (2.0 - D_KOCH) * koch_bracket(frac) - (eps ** 2 / 3.0) * (
        math.pi / 3.0 + 2.0 * math.sqrt(3.0)
    )


@dataclass(frozen=True)
class KochCoefficients:
    """One index of the snowflake coefficient series, with tail bounds
    for the truncated m-sums."""

    n: int
    a: complex
    b: complex
    sigma: complex
    tau: complex
    b_tail: float
    tau_tail: float


def _series_term_b(m: int, n: int) -> complex:
    num = math.comb(2 * m, m) * (3.0 ** (2 * m + 1) - 4.0)
    den = 4.0 ** (2 * m + 1) * (4 * m * m - 1) * (3.0 ** (2 * m + 1) - 2.0)
    return num / den / (D_KOCH - 2 * m - 1 + 1j * n * PERIOD_KOCH)


def _series_term_tau(m: int, n: int) -> complex:
    num = math.comb(2 * m, m) * (3.0 ** (2 * m + 1) - 1.0)
    den = 4.0 ** (2 * m - 1) * (4 * m * m - 1) * (3.0 ** (2 * m + 1) - 2.0)
    return num / den / (-2 * m - 1 + 1j * n * PERIOD_KOCH)


def koch_coefficient_series(n: int, M: int = 40) -> KochCoefficients:
    """Partial sums to m = M of the snowflake coefficient series.

    Successive terms shrink by a factor of at least ~4, so the discarded
    tails are bounded by 4/3 of the first omitted term.
    """
    if M < 1:
        raise ValueError("M must be at least 1")
    b = sum(_series_term_b(m, n) for m in range(1, M + 1))
    tau = sum(_series_term_tau(m, n) for m in range(1, M + 1))
    b_tail = abs(_series_term_b(M + 1, n)) * 4.0 / 3.0
    tau_tail = abs(_series_term_tau(M + 1, n)) * 4.0 / 3.0
    inp = 1j * n * PERIOD_KOCH
    a = (
        (math.pi - 3.0 ** 1.5) / (8.0 * (D_KOCH + inp))
        + 3.0 ** 1.5 / (8.0 * (D_KOCH - 1.0 + inp))
        - 3.0 ** 2.5 / (32.0 * (D_KOCH - 2.0 + inp))
        + 0.5 * b
    )
    sigma = -tau
    if n == 0:
        sigma = sigma - math.log(3.0) * (math.pi / 3.0 + 2.0 * math.sqrt(3.0))
    return KochCoefficients(n=n, a=a, b=b, sigma=sigma, tau=tau, b_tail=b_tail, tau_tail=tau_tail)


class HModel:
    """Fourier data of a multiplicatively 3-periodic partial-block model."""

    def fourier(self, alpha: int) -> complex:
        raise NotImplementedError


class ConstantH(HModel):
    """h == value: only the mean Fourier coefficient is nonzero."""

    def __init__(self, value: float = 0.0):
        self.value = float(value)

    def fourier(self, alpha: int) -> complex:
        return complex(self.value) if alpha == 0 else 0.0j


class SawtoothH(HModel):
    """h~(eps) = amplitude * {x}: the pictured sawtooth approximation."""

    def __init__(self, amplitude: float = 1.0):
        self.amplitude = float(amplitude)

    def fourier(self, alpha: int) -> complex:
        if alpha == 0:
            return complex(self.amplitude / 2.0)
        return self.amplitude * 1j / (2.0 * math.pi * alpha)


def snowflake_tube(
    eps: float,
    h_model: HModel = ConstantH(0.0),
    n_range: int = 32,
    alpha_range: int = 32,
    M: int = 40,
) -> float:
    """Structural evaluation of the full snowflake tube formula
    V = G_1 eps^{2-D} + G_2 eps^2 under a chosen h model.

    Without the true Fourier coefficients of h this cannot be validated
    against geometry; it exists to study the periodic amplitudes.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    coeffs = {n: koch_coefficient_series(n, M=M) for n in range(-n_range - alpha_range, n_range + alpha_range + 1)}
    g = {alpha: h_model.fourier(alpha) for alpha in range(-2 * max(n_range, alpha_range), 2 * max(n_range, alpha_range) + 1)}
    g1 = 0.0j
    g2 = 0.0j
    for n in range(-n_range, n_range + 1):
        conv_b = sum(coeffs[alpha].b * g.get(n - alpha, 0.0j) for alpha in range(-alpha_range, alpha_range + 1))
        conv_tau = sum(coeffs[alpha].tau * g.get(n - alpha, 0.0j) for alpha in range(-alpha_range, alpha_range + 1))
        phase = (-1.0) ** n * np.power(complex(eps), -1j * n * PERIOD_KOCH)
        g1 += (coeffs[n].a + conv_b) * phase
        g2 += (coeffs[n].sigma + conv_tau) * phase
    g1 /= math.log(3.0)
    g2 /= math.log(3.0)
    value = g1 * eps ** (2.0 - D_KOCH) + g2 * eps ** 2
    return float(value.real)
