"""fractube: tube formulas for self-similar fractal strings and tilings.

The library computes inner eps-neighbourhood volumes V(eps) two ways:
exactly, by summing tiles or intervals (the oracles), and analytically,
by summing residues of zeta functions over complex dimensions.  The
oracles arbitrate every analytic constant.
"""

from .errors import (
    BudgetError,
    ConfigError,
    FractubeError,
    GeometryError,
    NotRealizableError,
    PoleError,
    TilesetError,
)
from .geom2d import (
    Polygon,
    SelfSimilarSystem,
    Similitude,
    SteinerCoefficients,
    apply_word,
    attractor_interval,
    attractor_point_cloud,
    convex_hull_of_attractor,
    inner_tube_polygon,
    inradius,
    intrinsic_volumes,
    polygon_difference_components,
    steiner_outer_tube,
)
from .strings import FractalString, geometric_zeta_string, scaling_zeta, string_tube_oracle
from .spectrum import (
    ComplexDimension,
    ComplexDimensionSet,
    LatticeClassification,
    Window,
    classify_lattice,
    complex_dimensions,
    moran_dimension,
    residue_scaling_zeta,
)
from .tiling import (
    Generator,
    SelfSimilarTiling,
    build_tiling,
    check_hull_boundary_condition,
    check_tileset_condition,
    export_tiling_svg,
    fit_generator,
    interval_generator,
    tiling_tube_oracle,
)
from .tube import (
    TubeEvaluation,
    finite_spray_degeneration,
    spray_geometric_zeta,
    string_tube_formula,
    tiling_tube_formula,
)
from .snowflake import (
    ConstantH,
    KochCoefficients,
    SawtoothH,
    koch_bracket,
    koch_coefficient_series,
    koch_preliminary_area,
    snowflake_tube,
)
from .decomposition import DecompositionReport, exterior_decomposition_check
from .config import SystemConfig, load_config, parse_config, serialize_config

__version__ = "0.1.0"
