"""Even convex bodies: H-representations, Wulff shapes, boxes and balls.

An :class:`HBody` stores one direction per antipodal pair; the body is
``{x : |x . v_i| <= h_i}``.  Its Wulff shape is realised as an explicit
:class:`Polytope2` (n = 2) or :class:`Polytope3` (n = 3).  Boxes and balls are
kept symbolic in any dimension because their Gaussian quantities are known in
closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .errors import GeometryError, InputError

EDGE_TOL = 1e-12   # facets with smaller length/area count as vanished
UNIT_TOL = 1e-12
MAX_BOX_DIM = 10


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def normalize_directions(directions) -> np.ndarray:
    v = np.atleast_2d(np.asarray(directions, dtype=float))
    norms = np.linalg.norm(v, axis=1)
    if np.any(~np.isfinite(norms)) or np.any(norms == 0):
        raise InputError("directions must be finite and nonzero")
    return v / norms[:, None]


@dataclass(frozen=True, eq=False)
class HBody:
    """Even body given by support numbers on a set of antipodal direction pairs."""

    directions: np.ndarray
    support: np.ndarray

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.directions, dtype=float))
        h = np.asarray(self.support, dtype=float).ravel()
        if v.shape[0] != h.shape[0]:
            raise InputError("directions and support must have the same length")
        if v.shape[1] < 2:
            raise InputError("dimension must be >= 2")
        if np.any(~np.isfinite(h)) or np.any(h <= 0):
            raise InputError("support numbers must be positive and finite")
        if np.any(np.abs(np.linalg.norm(v, axis=1) - 1.0) > 1e-9):
            raise InputError("directions must be unit vectors")
        v = v / np.linalg.norm(v, axis=1)[:, None]
        gram = np.abs(v @ v.T)
        np.fill_diagonal(gram, 0.0)
        if gram.size and gram.max() > 1.0 - 1e-12:
            raise InputError("directions must be pairwise non-parallel")
        object.__setattr__(self, "directions", _frozen(v))
        object.__setattr__(self, "support", _frozen(h))

    @classmethod
    def from_normals(cls, normals, support) -> "HBody":
        return cls(normalize_directions(normals), support)

    @property
    def dimension(self) -> int:
        return self.directions.shape[1]

    def __len__(self):
        return self.support.shape[0]

    def with_support(self, h) -> "HBody":
        return HBody(self.directions, h)

    def realize(self):
        return wulff_shape(self)


@dataclass(frozen=True, eq=False)
class Polytope2:
    """Centrally symmetric convex polygon.

    Edge ``i`` runs from ``vertices[i]`` to ``vertices[i+1]`` (counter-clockwise)
    with outer normal ``normals[i]`` and support number ``support[i]``.
    ``pair[i]`` is the index of the antipodal pair the edge belongs to and
    ``sign[i]`` is +1 for the pair's representative normal and -1 for its mirror.
    When built from an :class:`HBody`, ``pair`` indexes the body's directions.
    """

    vertices: np.ndarray
    normals: np.ndarray
    support: np.ndarray
    pair: np.ndarray
    sign: np.ndarray
    vanished: tuple = ()

    dimension = 2

    def __post_init__(self):
        for name in ("vertices", "normals", "support"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        for name in ("pair", "sign"):
            a = np.array(getattr(self, name), dtype=int)
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @classmethod
    def from_vertices(cls, vertices) -> "Polytope2":
        """Polygon from counter-clockwise convex vertices; collinear points are merged."""
        pts = _clean_ring(np.asarray(vertices, dtype=float))
        k = len(pts)
        if k < 4 or k % 2:
            raise GeometryError("a centrally symmetric polygon needs an even number >= 4 of vertices")
        e = np.roll(pts, -1, axis=0) - pts
        lengths = np.linalg.norm(e, axis=1)
        normals = np.column_stack([e[:, 1], -e[:, 0]]) / lengths[:, None]
        support = np.einsum("ij,ij->i", normals, pts)
        m = k // 2
        if np.max(np.abs(normals[m:] + normals[:m])) > 1e-9:
            raise GeometryError("polygon is not centrally symmetric")
        if np.any(support <= 0):
            raise GeometryError("origin is not interior to the polygon")
        pair = np.concatenate([np.arange(m), np.arange(m)])
        sign = np.concatenate([np.ones(m, int), -np.ones(m, int)])
        return cls(pts, normals, support, pair, sign)

    @property
    def n_facets(self) -> int:
        return self.support.shape[0]

    def edge_lengths(self) -> np.ndarray:
        return np.linalg.norm(np.roll(self.vertices, -1, axis=0) - self.vertices, axis=1)

    def edge_coordinates(self):
        """Signed tangential coordinates (s_a, s_b) of every edge's endpoints.

        The tangent is the normal rotated by +90 degrees, so ``s_a < s_b`` and the
        origin of each coordinate is the foot point ``h_i v_i``.
        """
        tangent = np.column_stack([-self.normals[:, 1], self.normals[:, 0]])
        a = self.vertices
        b = np.roll(self.vertices, -1, axis=0)
        return np.einsum("ij,ij->i", tangent, a), np.einsum("ij,ij->i", tangent, b)

    def representatives(self) -> np.ndarray:
        return np.flatnonzero(self.sign > 0)

    def to_hbody(self) -> HBody:
        idx = self.representatives()
        return HBody(self.normals[idx], self.support[idx])


@dataclass(frozen=True, eq=False)
class Facet3:
    normal: np.ndarray
    support: float
    loop: tuple
    pair: int
    sign: int


@dataclass(frozen=True, eq=False)
class Polytope3:
    vertices: np.ndarray
    facets: tuple
    vanished: tuple = ()

    dimension = 3

    def __post_init__(self):
        object.__setattr__(self, "vertices", _frozen(self.vertices))

    @property
    def n_facets(self) -> int:
        return len(self.facets)

    @property
    def normals(self) -> np.ndarray:
        return np.array([f.normal for f in self.facets])

    @property
    def support(self) -> np.ndarray:
        return np.array([f.support for f in self.facets])

    @property
    def pair(self) -> np.ndarray:
        return np.array([f.pair for f in self.facets], dtype=int)

    @property
    def sign(self) -> np.ndarray:
        return np.array([f.sign for f in self.facets], dtype=int)

    def n_edges(self) -> int:
        return sum(len(f.loop) for f in self.facets) // 2

    def facet_areas(self) -> np.ndarray:
        out = []
        for f in self.facets:
            p = self.vertices[list(f.loop)]
            cross = np.cross(p, np.roll(p, -1, axis=0)).sum(axis=0)
            out.append(0.5 * float(cross @ f.normal))
        return np.array(out)

    def representatives(self) -> np.ndarray:
        return np.flatnonzero(self.sign > 0)

    def to_hbody(self) -> HBody:
        idx = self.representatives()
        return HBody(self.normals[idx], self.support[idx])


@dataclass(frozen=True, eq=False)
class SymBox:
    """``prod_i [-a_i, a_i]`` in any dimension up to ``MAX_BOX_DIM``."""

    half_widths: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.half_widths, dtype=float).ravel()
        if a.size < 2 or a.size > MAX_BOX_DIM:
            raise InputError(f"box dimension must be between 2 and {MAX_BOX_DIM}")
        if np.any(~np.isfinite(a)) or np.any(a <= 0):
            raise InputError("half widths must be positive and finite")
        object.__setattr__(self, "half_widths", _frozen(a))

    @property
    def dimension(self) -> int:
        return self.half_widths.shape[0]

    def to_hbody(self) -> HBody:
        return HBody(np.eye(self.dimension), self.half_widths)

    def realize(self):
        return wulff_shape(self.to_hbody())


@dataclass(frozen=True)
class Ball:
    radius: float
    dimension: int

    def __post_init__(self):
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise InputError("radius must be positive")
        if not 2 <= self.dimension <= MAX_BOX_DIM:
            raise InputError(f"ball dimension must be between 2 and {MAX_BOX_DIM}")


Body = Union[Polytope2, Polytope3, SymBox, Ball]


# ----------------------------------------------------------------------------
# Wulff shapes


def _clean_ring(pts, tol=1e-13):
    # drop repeated points and collinear middle points of a closed ring
    changed = True
    while changed and len(pts) >= 3:
        changed = False
        nxt = np.roll(pts, -1, axis=0)
        prv = np.roll(pts, 1, axis=0)
        scale = max(1.0, float(np.abs(pts).max()))
        d = np.linalg.norm(nxt - pts, axis=1)
        cross = (pts[:, 0] - prv[:, 0]) * (nxt[:, 1] - pts[:, 1]) - \
            (pts[:, 1] - prv[:, 1]) * (nxt[:, 0] - pts[:, 0])
        bad = (d <= tol * scale) | (np.abs(cross) <= tol * scale * scale)
        if bad.any():
            pts = pts[~bad] if not bad.all() else pts[:0]
            changed = True
    return pts


def _line_vertices(normals, support):
    # vertex i = intersection of line i-1 and line i
    n0 = np.roll(normals, 1, axis=0)
    h0 = np.roll(support, 1)
    det = n0[:, 0] * normals[:, 1] - n0[:, 1] * normals[:, 0]
    x = (h0 * normals[:, 1] - support * n0[:, 1]) / det
    y = (n0[:, 0] * support - normals[:, 0] * h0) / det
    return np.column_stack([x, y])


def wulff_shape_2d(body: HBody) -> Polytope2:
    """Polygon ``{x : |x . v_i| <= h_i}`` with redundant constraints pruned."""
    if body.dimension != 2:
        raise InputError("wulff_shape_2d needs a planar body")
    m = len(body)
    if m < 2:
        raise GeometryError("directions do not span the plane: intersection is unbounded")
    normals = np.vstack([body.directions, -body.directions])
    support = np.concatenate([body.support, body.support])
    pair = np.concatenate([np.arange(m), np.arange(m)])
    sign = np.concatenate([np.ones(m, int), -np.ones(m, int)])
    order = np.argsort(np.arctan2(normals[:, 1], normals[:, 0]), kind="stable")
    active = list(order)

    while True:
        removed = _prune_redundant(normals, support, active)
        # keep the pair structure exactly symmetric
        alive = {}
        for i in active:
            alive.setdefault(pair[i], set()).add(sign[i])
        broken = {p for p, s in alive.items() if len(s) < 2}
        if broken:
            active = [i for i in active if pair[i] not in broken]
            removed = True
        if len(active) < 4:
            raise GeometryError("Wulff shape degenerated")
        idx = np.array(active)
        verts = _line_vertices(normals[idx], support[idx])
        lengths = np.linalg.norm(np.roll(verts, -1, axis=0) - verts, axis=1)
        short = lengths <= EDGE_TOL
        if short.any():
            drop = set(pair[idx[short]])
            active = [i for i in active if pair[i] not in drop]
            continue
        if not removed:
            break

    vanished = tuple(sorted(set(range(m)) - set(pair[idx])))
    return Polytope2(verts, normals[idx], support[idx], pair[idx], sign[idx], vanished)


def _prune_redundant(normals, support, active) -> bool:
    # Iterated local test on the angularly sorted cyclic list: constraint i is
    # redundant when the vertex of its two neighbours already satisfies it.
    removed_any = False
    changed = True
    while changed and len(active) >= 3:
        changed = False
        k = len(active)
        for pos in range(k):
            i = active[pos]
            a = active[pos - 1]
            b = active[(pos + 1) % k]
            na, nb = normals[a], normals[b]
            det = na[0] * nb[1] - na[1] * nb[0]
            if det <= 1e-15:
                # neighbours span an angle >= pi: constraint i is needed for boundedness
                continue
            x = (support[a] * nb[1] - support[b] * na[1]) / det
            y = (na[0] * support[b] - nb[0] * support[a]) / det
            slack = support[i] - (normals[i, 0] * x + normals[i, 1] * y)
            if slack >= -1e-14 * max(1.0, abs(support[i])):
                del active[pos]
                removed_any = changed = True
                break
    for pos in range(len(active)):
        na, nb = normals[active[pos - 1]], normals[active[pos]]
        if na[0] * nb[1] - na[1] * nb[0] <= 0:
            raise GeometryError("directions do not span the plane: intersection is unbounded")
    return removed_any


def wulff_shape_3d(body: HBody) -> Polytope3:
    """Polytope ``{x : |x . v_i| <= h_i}`` in R^3 via the dual convex hull of ``v_i / h_i``."""
    if body.dimension != 3:
        raise InputError("wulff_shape_3d needs a body in R^3")
    m = len(body)
    if m < 3 or np.linalg.matrix_rank(body.directions, tol=1e-10) < 3:
        raise GeometryError("directions do not span R^3: intersection is unbounded")
    normals = np.vstack([body.directions, -body.directions])
    support = np.concatenate([body.support, body.support])
    pair = np.concatenate([np.arange(m), np.arange(m)])
    sign = np.concatenate([np.ones(m, int), -np.ones(m, int)])
    active = np.ones(2 * m, dtype=bool)

    while True:
        idx = np.flatnonzero(active)
        dual = normals[idx] / support[idx, None]
        try:
            hull = ConvexHull(dual)
        except QhullError as exc:
            raise GeometryError(f"halfspace intersection failed: {exc}") from exc
        offsets = hull.equations[:, 3]
        if np.any(offsets >= 0):
            raise GeometryError("origin is not interior")
        corner = hull.equations[:, :3] / (-offsets[:, None])
        vid, verts = _merge_points(corner, 1e-9 * max(1.0, float(np.abs(corner).max())))
        on_hull = set(hull.vertices.tolist())
        incident = {k: set() for k in on_hull}
        for s, simplex in enumerate(hull.simplices):
            for k in simplex:
                incident[k].add(vid[s])
        facets = []
        drop = set()
        for k in sorted(on_hull):
            g = idx[k]
            loop = _order_loop(verts, sorted(incident[k]), normals[g])
            if len(loop) < 3 or _loop_area(verts, loop, normals[g]) <= EDGE_TOL:
                drop.add(pair[g])
                continue
            facets.append(Facet3(_frozen(normals[g]), float(support[g]), tuple(loop),
                                 int(pair[g]), int(sign[g])))
        present = {}
        for f in facets:
            present.setdefault(f.pair, set()).add(f.sign)
        drop |= {p for p, s in present.items() if len(s) < 2}
        live_pairs = {f.pair for f in facets}
        missing = set(pair[idx]) - live_pairs
        if drop:
            active &= ~np.isin(pair, list(drop | missing))
            continue
        if missing:
            active &= ~np.isin(pair, list(missing))
            continue
        break

    used = sorted({v for f in facets for v in f.loop})
    remap = {v: i for i, v in enumerate(used)}
    facets = tuple(Facet3(f.normal, f.support, tuple(remap[v] for v in f.loop), f.pair, f.sign)
                   for f in sorted(facets, key=lambda f: (f.pair, -f.sign)))
    vanished = tuple(sorted(set(range(m)) - {f.pair for f in facets}))
    return Polytope3(verts[used], facets, vanished)


def _merge_points(points, tol):
    ids = -np.ones(len(points), dtype=int)
    reps = []
    for i, p in enumerate(points):
        for j, r in enumerate(reps):
            if np.max(np.abs(p - r)) <= tol:
                ids[i] = j
                break
        else:
            ids[i] = len(reps)
            reps.append(p)
    return ids, np.array(reps)


def _plane_basis(normal):
    a = np.array([1.0, 0.0, 0.0]) if abs(normal[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(normal, a)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(normal, e1)
    return e1, e2


def _order_loop(verts, ids, normal):
    if len(ids) < 3:
        return list(ids)
    p = verts[ids]
    c = p.mean(axis=0)
    e1, e2 = _plane_basis(normal)
    ang = np.arctan2((p - c) @ e2, (p - c) @ e1)
    return [ids[i] for i in np.argsort(ang)]


def _loop_area(verts, loop, normal):
    p = verts[list(loop)]
    return 0.5 * float(np.cross(p, np.roll(p, -1, axis=0)).sum(axis=0) @ normal)


def wulff_shape(body: HBody):
    if body.dimension == 2:
        return wulff_shape_2d(body)
    if body.dimension == 3:
        return wulff_shape_3d(body)
    raise InputError("explicit polytopes are supported only in dimensions 2 and 3")


# ----------------------------------------------------------------------------
# support and radial functions


def support_value(body: Body, v):
    """Support function ``max_{x in body} x . v``; ``v`` need not be normalised.

    ``v`` may be a single vector or an array of row vectors.
    """
    v = np.asarray(v, dtype=float)
    if isinstance(body, (Polytope2, Polytope3)):
        out = v @ body.vertices.T
        out = out.max(axis=-1)
    elif isinstance(body, SymBox):
        out = np.abs(v) @ body.half_widths
    elif isinstance(body, Ball):
        out = body.radius * np.linalg.norm(v, axis=-1)
    else:
        raise InputError(f"unsupported body type {type(body).__name__}")
    return out[()] if np.ndim(out) == 0 else out


def radial_value(body: Body, u):
    """Radial function ``max{lam : lam u in body}``."""
    u = np.asarray(u, dtype=float)
    if isinstance(body, (Polytope2, Polytope3)):
        dots = u @ body.normals.T
        with np.errstate(divide="ignore"):
            ratio = np.where(dots > 0, body.support / np.where(dots > 0, dots, 1.0), np.inf)
        out = ratio.min(axis=-1)
    elif isinstance(body, SymBox):
        with np.errstate(divide="ignore"):
            out = np.min(body.half_widths / np.abs(u), axis=-1)
    elif isinstance(body, Ball):
        out = body.radius / np.linalg.norm(u, axis=-1)
    else:
        raise InputError(f"unsupported body type {type(body).__name__}")
    return out[()] if np.ndim(out) == 0 else out


# ----------------------------------------------------------------------------
# Minkowski combinations


def minkowski_combination_2d(K: Polytope2, L: Polytope2, t: float) -> Polytope2:
    """Exact ``(1-t) K + t L``.

    The support function of the combination is ``(1-t) h_K + t h_L`` and its
    facet normals are among the union of both normal sets, so the Wulff shape
    on that union is the combination itself.
    """
    if not 0.0 <= t <= 1.0:
        raise InputError("t must lie in [0, 1]")
    if t == 0.0:
        return K
    if t == 1.0:
        return L
    dirs = np.vstack([K.normals[K.representatives()], L.normals[L.representatives()]])
    # fold into the half circle and drop parallel duplicates
    ang = np.mod(np.arctan2(dirs[:, 1], dirs[:, 0]), math.pi)
    ang = np.sort(ang)
    keep = [ang[0]]
    for a in ang[1:]:
        if a - keep[-1] > 1e-12:
            keep.append(a)
    if len(keep) > 1 and keep[0] + math.pi - keep[-1] <= 1e-12:
        keep.pop()
    keep = np.array(keep)
    u = np.column_stack([np.cos(keep), np.sin(keep)])
    h = (1.0 - t) * support_value(K, u) + t * support_value(L, u)
    return wulff_shape_2d(HBody(u, h))


def minkowski_combination_box(A: SymBox, B: SymBox, t: float) -> SymBox:
    if A.dimension != B.dimension:
        raise InputError("box dimensions differ")
    if not 0.0 <= t <= 1.0:
        raise InputError("t must lie in [0, 1]")
    return SymBox((1.0 - t) * A.half_widths + t * B.half_widths)


def minkowski_combination(K, L, t: float):
    if isinstance(K, SymBox) and isinstance(L, SymBox):
        return minkowski_combination_box(K, L, t)
    if isinstance(K, Polytope2) and isinstance(L, Polytope2):
        return minkowski_combination_2d(K, L, t)
    if isinstance(K, Ball) and isinstance(L, Ball) and K.dimension == L.dimension:
        return Ball((1.0 - t) * K.radius + t * L.radius, K.dimension)
    raise InputError("exact Minkowski combinations need two polygons, two boxes or two balls")


# ----------------------------------------------------------------------------
# direction grids and Hausdorff distance


def circle_directions(k: int, offset: float = 0.0) -> np.ndarray:
    th = offset + 2.0 * math.pi * np.arange(k) / k
    return np.column_stack([np.cos(th), np.sin(th)])


def half_circle_directions(m: int, offset: float = 0.0) -> np.ndarray:
    """``m`` directions, one per antipodal pair, at angles ``offset + j pi / m``."""
    th = offset + math.pi * np.arange(m) / m
    return np.column_stack([np.cos(th), np.sin(th)])


def fibonacci_sphere(k: int) -> np.ndarray:
    i = np.arange(k) + 0.5
    z = 1.0 - 2.0 * i / k
    r = np.sqrt(1.0 - z * z)
    th = math.pi * (1.0 + math.sqrt(5.0)) * i
    return np.column_stack([r * np.cos(th), r * np.sin(th), z])


def body_dimension(body: Body) -> int:
    return int(body.dimension)


def hausdorff_distance(P: Body, Q: Body, grid: int | None = None) -> float:
    """Hausdorff distance as the sup-norm of support-function differences on a direction grid.

    Defaults: 720 directions in the plane, 2562 Fibonacci points on S^2.
    Box/box and ball/ball pairs in higher dimension use exact formulas.
    """
    n = body_dimension(P)
    if n != body_dimension(Q):
        raise InputError("bodies have different dimensions")
    if isinstance(P, SymBox) and isinstance(Q, SymBox) and (n > 3 or grid is None):
        d = P.half_widths - Q.half_widths
        return float(max(np.linalg.norm(np.clip(d, 0, None)), np.linalg.norm(np.clip(-d, 0, None))))
    if isinstance(P, Ball) and isinstance(Q, Ball):
        return abs(P.radius - Q.radius)
    if n == 2:
        dirs = circle_directions(grid or 720)
    elif n == 3:
        dirs = fibonacci_sphere(grid or 2562)
    else:
        raise InputError("grid Hausdorff distance only in dimensions 2 and 3")
    return float(np.max(np.abs(support_value(P, dirs) - support_value(Q, dirs))))


def regular_polygon(m: int, h: float = 1.0, offset: float = 0.0) -> Polytope2:
    """Regular 2m-gon with inradius ``h``."""
    return wulff_shape_2d(HBody(half_circle_directions(m, offset), np.full(m, float(h))))


def as_polytope(body):
    """Return an explicit polygon/polytope for an HBody or SymBox, otherwise the body itself."""
    if isinstance(body, HBody):
        return wulff_shape(body)
    return body


@dataclass(frozen=True)
class HalfSpace:
    """``{x : x . normal <= offset}``; only used as a Monte Carlo calibration body."""

    normal: tuple
    offset: float = 0.0

    @property
    def dimension(self) -> int:
        return len(self.normal)
