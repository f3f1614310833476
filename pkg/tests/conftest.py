import math

import numpy as np
import pytest

from fractube import SelfSimilarSystem, Similitude

SQRT3 = math.sqrt(3.0)


@pytest.fixture(scope="session")
def gasket_system():
    return SelfSimilarSystem(
        maps=(
            Similitude(0.5, translation=(0.0, 0.0)),
            Similitude(0.5, translation=(0.5, 0.0)),
            Similitude(0.5, translation=(0.25, SQRT3 / 4.0)),
        ),
        dim=2,
    )


@pytest.fixture(scope="session")
def koch_system():
    xi = 0.5 + 0.5j / SQRT3
    return SelfSimilarSystem(
        maps=(
            Similitude(abs(xi), rotation=np.angle(xi), reflect=True, translation=(0.0, 0.0)),
            Similitude(
                abs(1 - xi), rotation=np.angle(1 - xi), reflect=True, translation=(xi.real, xi.imag)
            ),
        ),
        dim=2,
    )


@pytest.fixture(scope="session")
def cantor_system():
    third = 1.0 / 3.0
    return SelfSimilarSystem(
        maps=(
            Similitude(third, translation=(0.0,), dim=1),
            Similitude(third, translation=(2.0 / 3.0,), dim=1),
        ),
        dim=1,
    )


@pytest.fixture(scope="session")
def pentagasket_system():
    r = (3.0 - math.sqrt(5.0)) / 2.0
    R = 1.0 / (2.0 * math.sin(math.pi / 5.0))
    maps = []
    for j in range(5):
        a = math.pi / 2.0 + 2.0 * math.pi * j / 5.0
        c = np.array([R * math.cos(a), R * math.sin(a)])
        maps.append(Similitude(r, translation=(1.0 - r) * c))
    return SelfSimilarSystem(maps=tuple(maps), dim=2)


@pytest.fixture(scope="session")
def gasket_tiling(gasket_system):
    from fractube import build_tiling

    return build_tiling(gasket_system)


@pytest.fixture(scope="session")
def koch_tiling(koch_system):
    from fractube import build_tiling

    return build_tiling(koch_system)
