"""Planar geometry kernel: similitudes, convex polygons, inradii, and
inner/outer parallel-body volumes.

Everything here is a pure function of immutable inputs.  Angles are in
radians; lengths are in the coordinate units of the input system.
"""

from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy.optimize import linprog

from .errors import GeometryError, TilesetError

_REFLECT = np.array([[1.0, 0.0], [0.0, -1.0]])


@dataclass(frozen=True)
class Similitude:
    """A contraction similitude x -> ratio * R(rotation) * (reflect? x~ : x) + translation.

    The reflection (conjugation) is applied before the rotation.  In one
    dimension the rotation must be 0 and the translation is a scalar.
    """

    ratio: float
    rotation: float = 0.0
    reflect: bool = False
    translation: Sequence[float] = (0.0, 0.0)
    dim: int = 2

    def __post_init__(self):
        if not 0.0 < self.ratio < 1.0:
            raise ValueError(f"contraction requires 0 < ratio < 1, got {self.ratio}")
        if self.dim not in (1, 2):
            raise ValueError("only dimensions 1 and 2 are supported")
        t = np.atleast_1d(np.asarray(self.translation, dtype=float))
        if t.shape != (self.dim,):
            raise ValueError(f"translation must have {self.dim} component(s)")
        if self.dim == 1 and self.rotation != 0.0:
            raise ValueError("rotation is meaningless in dimension 1")
        object.__setattr__(self, "translation", tuple(t))

    @property
    def matrix(self) -> np.ndarray:
        if self.dim == 1:
            return np.array([[-self.ratio if self.reflect else self.ratio]])
        c, s = np.cos(self.rotation), np.sin(self.rotation)
        m = self.ratio * np.array([[c, -s], [s, c]])
        if self.reflect:
            m = m @ _REFLECT
        return m

    @property
    def offset(self) -> np.ndarray:
        return np.asarray(self.translation, dtype=float)

    def __call__(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return pts @ self.matrix.T + self.offset

    def fixed_point(self) -> np.ndarray:
        """Solve x = M x + t; unique since ratio < 1."""
        m = self.matrix
        return np.linalg.solve(np.eye(self.dim) - m, self.offset)


@dataclass(frozen=True)
class SelfSimilarSystem:
    """A finite family of contraction similitudes acting on R^1 or R^2."""

    maps: tuple
    dim: int = 2

    def __post_init__(self):
        if len(self.maps) < 1:
            raise ValueError("a system needs at least one map")
        if any(m.dim != self.dim for m in self.maps):
            raise ValueError("all maps must act in the system dimension")
        object.__setattr__(self, "maps", tuple(self.maps))

    @property
    def ratios(self) -> tuple:
        return tuple(m.ratio for m in self.maps)

    @property
    def J(self) -> int:
        return len(self.maps)

    def fixed_points(self) -> np.ndarray:
        return np.array([m.fixed_point() for m in self.maps])


def word_transform(system: SelfSimilarSystem, word: Sequence[int]):
    """Affine data (M, t) of the composition indexed by `word`.

    Letters are 1-based; the first letter acts first.  The empty word
    yields the identity.
    """
    m = np.eye(system.dim)
    t = np.zeros(system.dim)
    for letter in word:
        if not 1 <= letter <= system.J:
            raise ValueError(f"word letter {letter} outside 1..{system.J}")
        phi = system.maps[letter - 1]
        m = phi.matrix @ m
        t = phi.matrix @ t + phi.offset
    return m, t


def word_ratio(system: SelfSimilarSystem, word: Sequence[int]) -> float:
    r = 1.0
    for letter in word:
        r *= system.maps[letter - 1].ratio
    return r


def apply_word(system: SelfSimilarSystem, word: Sequence[int], points: np.ndarray) -> np.ndarray:
    """Image of a point set under the composite map of `word`."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if len(word) == 0:
        return pts.copy()
    m, t = word_transform(system, word)
    return pts @ m.T + t


# ---------------------------------------------------------------------------
# polygons


def _prune_ring(vertices, tol):
    """Drop duplicate and collinear vertices from a closed ring."""
    pts = [np.asarray(p, dtype=float) for p in vertices]
    scale = max(1.0, max(abs(float(c)) for p in pts for c in p))
    out = []
    for p in pts:
        if not out or np.max(np.abs(p - out[-1])) > tol * scale:
            out.append(p)
    if len(out) > 1 and np.max(np.abs(out[0] - out[-1])) <= tol * scale:
        out.pop()
    changed = True
    while changed and len(out) > 2:
        changed = False
        for i in range(len(out)):
            a, b, c = out[i - 1], out[i], out[(i + 1) % len(out)]
            cross = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])
            if abs(cross) <= tol * scale * scale:
                out.pop(i)
                changed = True
                break
    return np.array(out)


class Polygon:
    """A simple polygon stored with counterclockwise vertices.

    Collinear vertices are pruned on construction and the orientation is
    normalized, so `signed area > 0` always holds.  Convexity is detected
    and exposed via `is_convex`; the convex-only operations check it.
    """

    __slots__ = ("vertices", "is_convex")

    def __init__(self, vertices, tol: float = 1e-12):
        ring = _prune_ring(vertices, tol)
        if len(ring) < 3:
            raise GeometryError("degenerate polygon: fewer than 3 distinct vertices")
        area2 = _signed_area2(ring)
        if area2 < 0:
            ring = ring[::-1]
            area2 = -area2
        if area2 <= tol * max(1.0, float(np.max(np.abs(ring)))) ** 2:
            raise GeometryError("degenerate polygon: zero area")
        self.vertices = ring
        self.vertices.setflags(write=False)
        crosses = _edge_crosses(ring)
        self.is_convex = bool(np.all(crosses > 0))

    def __len__(self):
        return len(self.vertices)

    def __repr__(self):
        kind = "convex" if self.is_convex else "simple"
        return f"Polygon({kind}, {len(self.vertices)} vertices, area={self.area:.6g})"

    @property
    def area(self) -> float:
        return 0.5 * _signed_area2(self.vertices)

    @property
    def perimeter(self) -> float:
        d = np.diff(np.vstack([self.vertices, self.vertices[:1]]), axis=0)
        return float(np.sum(np.hypot(d[:, 0], d[:, 1])))

    def interior_angles(self) -> np.ndarray:
        v = self.vertices
        prev = np.roll(v, 1, axis=0) - v
        nxt = np.roll(v, -1, axis=0) - v
        ang = np.arctan2(_cross2(nxt, prev), np.einsum("ij,ij->i", nxt, prev))
        return np.where(ang < 0, ang + 2 * np.pi, ang)

    def edges(self):
        v = self.vertices
        return zip(v, np.roll(v, -1, axis=0))

    def transformed(self, matrix: np.ndarray, offset: np.ndarray) -> "Polygon":
        return Polygon(np.asarray(self.vertices) @ np.asarray(matrix).T + offset)

    def contains_point(self, p, tol=1e-12) -> bool:
        x, y = float(p[0]), float(p[1])
        v = self.vertices
        inside = False
        for (ax, ay), (bx, by) in self.edges():
            if (ay > y) != (by > y):
                t = (y - ay) / (by - ay)
                if x < ax + t * (bx - ax):
                    inside = not inside
        return inside


def _cross2(u, v):
    return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]


def _signed_area2(ring: np.ndarray) -> float:
    x, y = ring[:, 0], ring[:, 1]
    return float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def _edge_crosses(ring: np.ndarray) -> np.ndarray:
    e = np.roll(ring, -1, axis=0) - ring
    return _cross2(e, np.roll(e, -1, axis=0))


def convex_hull(points: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Monotone-chain hull returning CCW vertices, collinear points dropped."""
    pts = np.unique(np.round(np.atleast_2d(np.asarray(points, float)), 15), axis=0)
    pts = pts[np.lexsort((pts[:, 1], pts[:, 0]))]
    if len(pts) < 3:
        return pts
    scale = max(1.0, float(np.max(np.abs(pts))))

    def build(seq):
        chain = []
        for p in seq:
            while len(chain) > 1:
                cross = _cross2(chain[-1] - chain[-2], p - chain[-2])
                if cross <= tol * scale * scale:
                    chain.pop()
                else:
                    break
            chain.append(p)
        return chain

    lower = build(pts)
    upper = build(pts[::-1])
    return np.array(lower[:-1] + upper[:-1])


class SteinerCoefficients(NamedTuple):
    """Renormalized intrinsic volumes (mu_0, ..., mu_d) of a convex body."""

    mu: tuple

    @property
    def dim(self):
        return len(self.mu) - 1


def intrinsic_volumes(poly: Polygon) -> SteinerCoefficients:
    """(mu_0, mu_1, mu_2) = (Euler characteristic, perimeter/2, area)."""
    if not poly.is_convex:
        raise GeometryError("intrinsic volumes via the Steiner table need a convex polygon")
    return SteinerCoefficients((1.0, poly.perimeter / 2.0, poly.area))


# ---------------------------------------------------------------------------
# inradius and parallel bodies


def _edge_halfplanes(poly: Polygon):
    """Outward unit normals n and offsets c with interior = {n.x <= c}."""
    normals, offsets = [], []
    for a, b in poly.edges():
        e = b - a
        n = np.array([e[1], -e[0]])  # outward for CCW
        n = n / np.hypot(n[0], n[1])
        normals.append(n)
        offsets.append(float(n @ a))
    return np.array(normals), np.array(offsets)


def inradius(poly: Polygon) -> float:
    """Radius of the largest inscribed disk.

    Triangles use area / semiperimeter exactly; other convex polygons
    solve the Chebyshev-center linear program; non-convex polygons fall
    back to bisection on inner-offset emptiness.
    """
    if len(poly) == 3:
        return 2.0 * poly.area / poly.perimeter
    if poly.is_convex:
        n, c = _edge_halfplanes(poly)
        # maximize t  s.t.  n.x + t <= c
        res = linprog(
            c=[0.0, 0.0, -1.0],
            A_ub=np.hstack([n, np.ones((len(n), 1))]),
            b_ub=c,
            bounds=[(None, None), (None, None), (0, None)],
            method="highs",
        )
        if not res.success:
            raise GeometryError(f"inradius LP failed: {res.message}")
        return float(res.x[2])
    # non-convex: largest eps with nonempty inner offset
    import shapely

    sp = shapely.geometry.Polygon(poly.vertices)
    lo, hi = 0.0, 0.5 * max(np.ptp(poly.vertices[:, 0]), np.ptp(poly.vertices[:, 1]))
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if sp.buffer(-mid).is_empty:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _clip_halfplane(pts, n, c):
    """Sutherland-Hodgman clip of a polygon ring against {n.x <= c}."""
    out = []
    m = len(pts)
    d = pts @ n - c
    for i in range(m):
        a, b = pts[i], pts[(i + 1) % m]
        da, db = d[i], d[(i + 1) % m]
        if da <= 0:
            out.append(a)
            if db > 0:
                out.append(a + (b - a) * (da / (da - db)))
        elif db <= 0:
            out.append(a + (b - a) * (da / (da - db)))
    return np.array(out) if len(out) >= 3 else None


def inner_offset_polygon(poly: Polygon, eps: float) -> Optional[np.ndarray]:
    """Vertices of {x in poly : dist(x, boundary) >= eps}, or None if empty.

    Convex polygons only; the offset body is again a convex polygon.
    """
    if not poly.is_convex:
        raise GeometryError("inner_offset_polygon requires a convex polygon")
    normals, offsets = _edge_halfplanes(poly)
    pts = np.asarray(poly.vertices)
    for n, c in zip(normals, offsets):
        pts = _clip_halfplane(pts, n, c - eps)
        if pts is None:
            return None
    if abs(_signed_area2(pts)) <= 0.0:
        return None
    return pts


def inner_tube_polygon(poly: Polygon, eps: float) -> float:
    """Area of the inner eps-collar {x in poly : dist(x, boundary) <= eps}.

    Piecewise quadratic in eps for polygons; equals area(poly) once eps
    reaches the inradius.  Non-convex polygons are handled through round
    inner buffering (the offset boundary gains arcs at reflex vertices).
    """
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    if eps == 0:
        return 0.0
    if poly.is_convex:
        inner = inner_offset_polygon(poly, eps)
        if inner is None:
            return poly.area
        return poly.area - 0.5 * abs(_signed_area2(inner))
    import shapely

    sp = shapely.geometry.Polygon(poly.vertices)
    return poly.area - sp.buffer(-eps, quad_segs=128).area


def steiner_outer_tube(poly: Polygon, eps: float, exterior: bool = True) -> float:
    """Steiner polynomial volume of the outer eps-neighbourhood.

    exterior=True omits the area term:  perimeter*eps + pi*eps^2.
    exterior=False is the full parallel body:  area + perimeter*eps + pi*eps^2.
    """
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    if not poly.is_convex:
        raise GeometryError("the Steiner polynomial applies to convex polygons")
    ext = poly.perimeter * eps + np.pi * eps * eps
    return ext if exterior else ext + poly.area


# ---------------------------------------------------------------------------
# attractor hulls


def _directed_gap(new_pts, old_pts):
    d = new_pts[:, None, :] - old_pts[None, :, :]
    return float(np.max(np.min(np.hypot(d[..., 0], d[..., 1]), axis=1)))


def convex_hull_of_attractor(
    system: SelfSimilarSystem,
    tol: float = 1e-9,
    max_iterations: int = 200,
    snap_candidates: Optional[np.ndarray] = None,
) -> Polygon:
    """Convex hull of the attractor of a planar system.

    Iterates H_{k+1} = hull(images of vertices of H_k, plus the vertices)
    starting from the hull of the fixed points, until the vertex
    displacement drops below tol.  Vertices landing within tol of a snap
    candidate (by default: short word images of the fixed points) are
    snapped onto it, so hulls of the standard examples come out exact.
    """
    if system.dim != 2:
        raise GeometryError("attractor hull is implemented for planar systems")
    pts = system.fixed_points()
    hull = convex_hull(pts)
    gap = np.inf
    for _ in range(max_iterations):
        images = np.vstack([m(hull) for m in system.maps] + [hull])
        new_hull = convex_hull(images, tol=tol)
        if len(new_hull) < 3:
            raise GeometryError("attractor not full-dimensional")
        gap = _directed_gap(new_hull, hull) if len(hull) >= 1 else np.inf
        hull = new_hull
        if gap < tol:
            break
    else:
        raise GeometryError(f"hull iteration did not converge; last gap {gap:.3e}")
    if len(hull) < 3:
        raise GeometryError("attractor not full-dimensional")
    if snap_candidates is None:
        snap_candidates = _fixed_point_orbit(system, depth=4)
    hull = _snap_points(hull, snap_candidates, tol=max(tol, 1e-9) * 50)
    return Polygon(convex_hull(hull, tol=tol))


def _fixed_point_orbit(system: SelfSimilarSystem, depth: int) -> np.ndarray:
    pts = system.fixed_points()
    out = [pts]
    frontier = pts
    for _ in range(depth):
        frontier = np.vstack([m(frontier) for m in system.maps])
        out.append(frontier)
        if sum(len(a) for a in out) > 20000:
            break
    return np.vstack(out)


def _snap_points(points, candidates, tol):
    pts = np.array(points, dtype=float)
    if len(candidates) == 0:
        return pts
    for i, p in enumerate(pts):
        d = np.hypot(candidates[:, 0] - p[0], candidates[:, 1] - p[1])
        j = int(np.argmin(d))
        if d[j] < tol:
            pts[i] = candidates[j]
    return pts


def attractor_interval(system: SelfSimilarSystem, tol: float = 1e-12) -> tuple:
    """[min, max] of a one-dimensional attractor, endpoints snapped onto
    the nearest short word image of a fixed point."""
    if system.dim != 1:
        raise GeometryError("attractor_interval is for systems on the line")
    pts = system.fixed_points().ravel()
    lo, hi = float(np.min(pts)), float(np.max(pts))
    for _ in range(200):
        ends = np.array([[lo], [hi]])
        images = np.vstack([m(ends) for m in system.maps]).ravel()
        nlo = min(lo, float(np.min(images)))
        nhi = max(hi, float(np.max(images)))
        if abs(nlo - lo) < tol and abs(nhi - hi) < tol:
            lo, hi = nlo, nhi
            break
        lo, hi = nlo, nhi
    orbit = _fixed_point_orbit(system, depth=4).ravel()
    snap = max(tol, 1e-9) * 50 * max(1.0, abs(lo), abs(hi))
    for cand in orbit:
        if abs(cand - lo) < snap:
            lo = float(cand)
        if abs(cand - hi) < snap:
            hi = float(cand)
    return lo, hi


def attractor_point_cloud(
    system: SelfSimilarSystem,
    resolution: Optional[float] = None,
    depth: Optional[int] = None,
    budget: int = 4_000_000,
) -> tuple:
    """Deep word images of a seed point, with the covering radius achieved.

    Returns (points, covering_radius): every attractor point lies within
    covering_radius of some returned point.
    """
    if depth is None and resolution is None:
        depth = 12
    hull_diam = _system_diameter(system)
    rmax = max(system.ratios)
    if depth is None:
        depth = max(1, int(np.ceil(np.log(resolution / hull_diam) / np.log(rmax))))
    if system.J ** depth > budget:
        # fall back to the deepest affordable uniform depth
        depth = int(np.log(budget) / np.log(system.J))
    seed = system.maps[0].fixed_point()
    pts = np.atleast_2d(seed)
    for _ in range(depth):
        pts = np.vstack([m(pts) for m in system.maps])
    return pts, hull_diam * rmax ** depth


def _system_diameter(system: SelfSimilarSystem) -> float:
    fp = system.fixed_points()
    if system.dim == 1:
        return float(np.ptp(fp.ravel())) or 1.0
    d = fp[:, None, :] - fp[None, :, :]
    return float(np.max(np.hypot(d[..., 0], d[..., 1]))) or 1.0


# ---------------------------------------------------------------------------
# boolean decomposition


def polygon_difference_components(
    outer: Polygon,
    inner_list: Sequence[Polygon],
    snap_grid: float = 1e-9,
    area_tol: float = 1e-12,
) -> list:
    """Connected components of int(outer) minus the closed inner polygons.

    The arrangement of all boundary edges is polygonized, so components
    that merely touch at pinch points (as open sets they are distinct)
    come out separately.  Components below area_tol * area(outer) are
    discarded as clipping noise.
    """
    import shapely
    from shapely.geometry import Polygon as ShapelyPolygon
    from shapely.ops import polygonize, unary_union

    souter = ShapelyPolygon(outer.vertices)
    sinners = [ShapelyPolygon(p.vertices) for p in inner_list]
    for i, a in enumerate(sinners):
        leak = a.difference(souter).area
        if leak > 1e-9 * souter.area:
            raise GeometryError(f"inner polygon {i} is not contained in the outer polygon")
        for j in range(i + 1, len(sinners)):
            overlap = a.intersection(sinners[j]).area
            if overlap > area_tol * souter.area:
                raise TilesetError(
                    f"tileset condition violated: images {i} and {j} overlap by {overlap:.3e}"
                )
    edges = [shapely.set_precision(g.boundary, snap_grid) for g in [souter] + sinners]
    faces = polygonize(unary_union(edges))
    components = []
    for face in faces:
        rp = face.representative_point()
        if not souter.contains(rp):
            continue
        if any(s.contains(rp) for s in sinners):
            continue
        if face.area < area_tol * souter.area:
            continue
        components.append(Polygon(np.asarray(face.exterior.coords)[:-1], tol=1e-9))
    components.sort(key=lambda p: (-p.area, tuple(np.round(p.vertices[0], 9))))
    return components
