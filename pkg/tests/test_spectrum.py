import cmath
import math
import time

import numpy as np
import pytest

from fractube import (
    PoleError,
    Window,
    classify_lattice,
    complex_dimensions,
    moran_dimension,
    residue_scaling_zeta,
)

NONLATTICE_XI = 0.55 + 0.22j
NONLATTICE_RATIOS = (abs(NONLATTICE_XI), abs(1 - NONLATTICE_XI))


def test_moran_reference_values():
    assert abs(moran_dimension([1 / 3, 1 / 3]) - math.log(2) / math.log(3)) < 1e-12
    assert abs(moran_dimension([0.5, 0.5, 0.5]) - math.log(3) / math.log(2)) < 1e-12
    assert abs(moran_dimension([3**-0.5, 3**-0.5]) - math.log(4) / math.log(3)) < 1e-12


def test_moran_residual_and_speed():
    for ratios in ([1 / 3, 1 / 3], [0.5, 0.5, 0.5], NONLATTICE_RATIOS):
        D = moran_dimension(ratios)
        assert abs(sum(r**D for r in ratios) - 1.0) < 1e-14
    t0 = time.perf_counter()
    for _ in range(100):
        moran_dimension([0.5, 0.5, 0.5])
    assert (time.perf_counter() - t0) / 100 < 1e-3  # under a millisecond each


def test_moran_exceeds_one_for_tilings():
    assert moran_dimension([0.5, 0.5, 0.5]) > 1.0  # no cap at 1


def test_classify_equal_ratios():
    cls = classify_lattice([1 / 3, 1 / 3])
    assert cls.kind == "lattice"
    assert abs(cls.r - 1 / 3) < 1e-15
    assert cls.exponents == (1, 1)
    assert abs(cls.period - 2 * math.pi / math.log(3)) < 1e-12


def test_classify_power_ratios():
    cls = classify_lattice([1 / 4, 1 / 2])
    assert cls.kind == "lattice"
    assert abs(cls.r - 0.5) < 1e-15
    assert cls.exponents == (1, 2)  # ratios sorted descending: 1/2 = r, 1/4 = r^2
    cls = classify_lattice([1 / 8, 1 / 4])
    assert cls.r == pytest.approx(0.5)
    assert cls.exponents == (2, 3)


def test_classify_nonlattice_koch():
    # independent oracle: continued-fraction convergents of the log ratio
    # show no denominator <= 64 approximates it to 1e-12
    x = math.log(NONLATTICE_RATIOS[1]) / math.log(NONLATTICE_RATIOS[0])
    a, frac = [], x
    for _ in range(12):
        a.append(math.floor(frac))
        frac = 1.0 / (frac - a[-1])
    h0, h1, k0, k1 = 1, a[0], 0, 1
    close_small_denominator = False
    for ai in a[1:]:
        h0, h1 = h1, ai * h1 + h0
        k0, k1 = k1, ai * k1 + k0
        if k1 <= 64 and abs(x - h1 / k1) < 1e-12:
            close_small_denominator = True
    assert not close_small_denominator
    cls = classify_lattice(NONLATTICE_RATIOS)
    assert cls.kind == "nonlattice"


def test_cantor_ladder():
    dims = complex_dimensions([1 / 3, 1 / 3], Window(sigma_min=-1.0, t_max=20.0))
    p = 2 * math.pi / math.log(3)
    assert dims.kind == "lattice"
    assert abs(dims.period - p) < 1e-12
    D = math.log(2) / math.log(3)
    expected = [complex(D, n * p) for n in range(-3, 4)]
    got = sorted((cd.omega for cd in dims.roots), key=lambda w: w.imag)
    assert len(got) == 7
    for e, g in zip(expected, got):
        assert abs(e - g) < 1e-10


def test_koch_tiling_ladder_period():
    dims = complex_dimensions([3**-0.5, 3**-0.5])
    assert abs(dims.D - math.log(4) / math.log(3)) < 1e-12
    assert abs(dims.period - 4 * math.pi / math.log(3)) < 1e-9


def test_ladder_structure_invariants():
    dims = complex_dimensions([0.5, 0.25], Window(sigma_min=-2.0, t_max=40.0))
    res = {round(cd.omega.real, 9) for cd in dims.roots}
    assert len(res) == 2  # golden string: two vertical lines
    p = dims.period
    roots = {cd.omega for cd in dims.roots}
    f = lambda s: 1 - 0.5**s - 0.25**s
    for w in roots:
        assert abs(f(w)) < 1e-10
        assert abs(f(w + 1j * p)) < 1e-10  # vertical translate is again a root
    # conjugate closure
    for w in roots:
        assert any(abs(w.conjugate() - v) < 1e-10 for v in roots)


def test_residue_cantor_with_finite_difference():
    D = math.log(2) / math.log(3)
    res = residue_scaling_zeta([1 / 3, 1 / 3], D)
    assert abs(res - 1 / math.log(3)) < 1e-12
    # oracle: finite difference of the denominator 1 - 2*3^{-s} at D
    h = 1e-6
    fd = ((1 - 2 * 3 ** -(D + h)) - (1 - 2 * 3 ** -(D - h))) / (2 * h)
    assert abs(res - 1 / fd) < 1e-8


def test_residue_gasket_constant_along_ladder():
    p = 2 * math.pi / math.log(2)
    D = math.log(3) / math.log(2)
    for n in range(-5, 6):
        res = residue_scaling_zeta([0.5, 0.5, 0.5], complex(D, n * p))
        assert abs(res - 1 / math.log(2)) < 1e-12


def test_residue_conjugate_symmetry():
    dims = complex_dimensions([1 / 3, 1 / 3], Window(t_max=30.0))
    table = {cd.omega: cd.residue for cd in dims.roots}
    for w, r in table.items():
        assert abs(table[w.conjugate()] - r.conjugate()) < 1e-13


def test_residue_rejects_zero_derivative():
    # solve sum r_j^s log(1/r_j) = 0 for two distinct ratios: the scaling
    # zeta derivative vanishes there, so no simple-pole residue exists
    r1, r2 = 0.3, 0.6
    l1, l2 = math.log(1 / r1), math.log(1 / r2)
    s = cmath.log(complex(-l2 / l1)) / math.log(r1 / r2)
    assert abs(r1**s * l1 + r2**s * l2) < 1e-10
    with pytest.raises(PoleError):
        residue_scaling_zeta([r1, r2], s)


def test_nonlattice_window_census():
    dims = complex_dimensions(NONLATTICE_RATIOS, Window(sigma_min=-1.0, t_max=60.0))
    assert dims.kind == "nonlattice"
    upper = [cd for cd in dims.roots if cd.omega.imag > 0]
    assert dims.census == len(upper)
    f = lambda s: 1 - sum(r**s for r in NONLATTICE_RATIOS)
    for cd in dims.roots:
        assert abs(f(cd.omega)) < 1e-10
    # unique real root equals the Moran dimension
    real = [cd.omega for cd in dims.roots if abs(cd.omega.imag) < 1e-9]
    assert len(real) == 1
    assert abs(real[0].real - moran_dimension(NONLATTICE_RATIOS)) < 1e-10
    # strict contraction of the real parts away from D
    for cd in dims.roots:
        if abs(cd.omega.imag) > 1e-9:
            assert cd.omega.real < dims.D


def test_nonlattice_census_against_independent_winding():
    # independent oracle: dense wrapped-phase accumulation around a box
    # whose bottom edge sits at Im = 0.5, clear of the real root
    dims = complex_dimensions(NONLATTICE_RATIOS, Window(sigma_min=-1.0, t_max=60.0))
    r1, r2 = NONLATTICE_RATIOS

    def f(s):
        return 1 - r1**s - r2**s

    x0, x1, y0, y1 = dims.window.sigma_min, dims.D + 0.1, 0.5, 60.0
    corners = [complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1), complex(x0, y0)]
    total = 0.0
    for a, b in zip(corners[:-1], corners[1:]):
        n = max(20000, int(abs(b - a) * 4000))
        zs = a + (b - a) * np.linspace(0, 1, n)
        args = np.angle(f(zs))
        jumps = np.diff(args)
        jumps = (jumps + np.pi) % (2 * np.pi) - np.pi
        assert np.max(np.abs(jumps)) < np.pi / 2  # dense enough, no aliasing
        total += jumps.sum()
    count = total / (2 * math.pi)
    assert abs(count - round(count)) < 1e-6
    upper = [cd for cd in dims.roots if cd.omega.imag > 0.5]
    assert round(count) == dims.census == len(upper)


def test_mixed_ratio_box_census():
    dims = complex_dimensions([0.5, 1 / 3], Window(sigma_min=-1.0, t_max=100.0))
    upper = [cd for cd in dims.roots if cd.omega.imag > 0]
    assert dims.census == len(upper)
    assert all(abs(1 - 0.5**cd.omega - (1 / 3) ** cd.omega) < 1e-10 for cd in dims.roots)


def test_window_screen_avoids_roots():
    # place the screen exactly on a ladder line; it must auto-reposition
    dims = complex_dimensions([0.5, 0.25], Window(sigma_min=-2.0, t_max=40.0))
    ladder_re = sorted({cd.omega.real for cd in dims.roots})[0]
    dims2 = complex_dimensions([0.5, 0.25], Window(sigma_min=ladder_re, t_max=40.0))
    assert all(abs(cd.omega.real - dims2.window.sigma_min) > 1e-8 for cd in dims2.roots)
    assert len(dims2.roots) == len(dims.roots)
