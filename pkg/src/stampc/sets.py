"""Guaranteed set arithmetic.

Zonotopes, interval boxes, interval matrices, strips and intersections of
zonotopes.  Every value is immutable once built; every operation returns a
set that contains the exact result (and is exact where noted).
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field
from math import comb
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import linprog

MEMBER_TOL = 1e-9
GEOM_TOL = 1e-6
MAX_GENERATORS = 32
_ZERO_COL = 1e-14
_HALFSPACE_LIMIT = 4000


class EmptySetError(ValueError):
    """Raised when a set operation produces (or is handed) an empty set."""


class DegenerateStripWarning(RuntimeWarning):
    pass


def _frozen(a, ndim: int, name: str) -> np.ndarray:
    arr = np.array(a, dtype=float)
    if ndim == 1:
        arr = np.atleast_1d(arr)
        if arr.ndim != 1:
            raise ValueError(f"{name} must be a vector, got shape {arr.shape}")
    elif ndim == 2:
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1)
        if arr.ndim != 2:
            raise ValueError(f"{name} must be a matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Zonotope:
    """The set ``{center + generators @ s : ||s||_inf <= 1}``.

    Zero generator columns are dropped on construction; a zonotope with no
    generators is a singleton.
    """

    center: np.ndarray
    generators: np.ndarray = field(default=None)

    __array_ufunc__ = None

    def __post_init__(self):
        c = _frozen(self.center, 1, "center")
        g = self.generators
        if g is None:
            g = np.zeros((c.size, 0))
        g = np.array(g, dtype=float)
        if g.ndim == 1:
            g = g.reshape(c.size, -1) if g.size else np.zeros((c.size, 0))
        if g.ndim != 2 or g.shape[0] != c.size:
            raise ValueError(
                f"generators must have {c.size} rows, got shape {g.shape}")
        keep = np.abs(g).max(axis=0, initial=0.0) > _ZERO_COL if g.shape[1] else []
        g = _frozen(g[:, keep] if g.shape[1] else g, 2, "generators")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "generators", g)

    @classmethod
    def singleton(cls, point) -> "Zonotope":
        return cls(point)

    @classmethod
    def from_box(cls, lower, upper) -> "Zonotope":
        return IntervalBox(lower, upper).to_zonotope()

    @property
    def dim(self) -> int:
        return self.center.size

    @property
    def order(self) -> int:
        """Number of generator columns."""
        return self.generators.shape[1]

    def __add__(self, other: "Zonotope") -> "Zonotope":
        return minkowski_sum(self, other)

    def __rmatmul__(self, A) -> "Zonotope":
        return linear_map(A, self)

    def translate(self, offset) -> "Zonotope":
        return Zonotope(self.center + np.asarray(offset, float), self.generators)

    def support(self, direction) -> float:
        d = np.asarray(direction, float)
        return float(self.center @ d + np.abs(self.generators.T @ d).sum())

    def sample(self, count: int, rng: np.random.Generator) -> np.ndarray:
        """Points ``center + G s`` with ``s`` uniform on the unit cube, shape (count, n)."""
        s = rng.uniform(-1.0, 1.0, size=(count, self.order))
        return self.center + s @ self.generators.T

    def __repr__(self):
        return f"Zonotope(center={self.center.tolist()}, order={self.order})"


@dataclass(frozen=True, eq=False)
class IntervalBox:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = _frozen(self.lower, 1, "lower")
        hi = _frozen(self.upper, 1, "upper")
        if lo.shape != hi.shape:
            raise ValueError("lower/upper shape mismatch")
        if np.any(lo > hi + MEMBER_TOL * (1.0 + np.abs(hi))):
            raise ValueError(f"lower > upper in box {lo} .. {hi}")
        hi = np.maximum(lo, hi)
        hi.setflags(write=False)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def from_center_radius(cls, center, radius) -> "IntervalBox":
        c = np.asarray(center, float)
        r = np.asarray(radius, float)
        return cls(c - r, c + r)

    @property
    def dim(self) -> int:
        return self.lower.size

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.lower + self.upper)

    @property
    def radius(self) -> np.ndarray:
        return 0.5 * (self.upper - self.lower)

    def to_zonotope(self) -> Zonotope:
        return Zonotope(self.center, np.diag(self.radius))

    def vertices(self) -> np.ndarray:
        """Distinct corners, shape (k, n); degenerate axes are not duplicated."""
        axes = [(lo,) if lo == hi else (lo, hi)
                for lo, hi in zip(self.lower, self.upper)]
        return np.array(list(itertools.product(*axes)), dtype=float).reshape(-1, self.dim)

    def intersect(self, other: "IntervalBox") -> "IntervalBox | None":
        lo = np.maximum(self.lower, other.lower)
        hi = np.minimum(self.upper, other.upper)
        if np.any(lo > hi + MEMBER_TOL * (1.0 + np.abs(hi))):
            return None
        return IntervalBox(lo, np.maximum(lo, hi))

    def contains_box(self, other: "IntervalBox", tol: float = MEMBER_TOL) -> bool:
        return bool(np.all(other.lower >= self.lower - tol)
                    and np.all(other.upper <= self.upper + tol))

    def diameter(self) -> float:
        return float(np.linalg.norm(self.upper - self.lower))


@dataclass(frozen=True, eq=False)
class IntervalMatrix:
    """Entrywise intervals ``midpoint +/- radius``."""

    midpoint: np.ndarray
    radius: np.ndarray

    def __post_init__(self):
        mid = _frozen(self.midpoint, 2, "midpoint")
        rad = _frozen(self.radius, 2, "radius")
        if mid.shape != rad.shape:
            raise ValueError("midpoint/radius shape mismatch")
        if np.any(rad < 0):
            raise ValueError("interval matrix radius must be nonnegative")
        object.__setattr__(self, "midpoint", mid)
        object.__setattr__(self, "radius", rad)

    @classmethod
    def from_bounds(cls, lower, upper) -> "IntervalMatrix":
        lo = np.atleast_2d(np.asarray(lower, float))
        hi = np.atleast_2d(np.asarray(upper, float))
        if np.any(lo > hi):
            raise ValueError("lower > upper in interval matrix")
        return cls(0.5 * (lo + hi), 0.5 * (hi - lo))

    @classmethod
    def point(cls, matrix) -> "IntervalMatrix":
        m = np.atleast_2d(np.asarray(matrix, float))
        return cls(m, np.zeros_like(m))

    @property
    def shape(self):
        return self.midpoint.shape

    @property
    def lower(self) -> np.ndarray:
        return self.midpoint - self.radius

    @property
    def upper(self) -> np.ndarray:
        return self.midpoint + self.radius

    def __add__(self, other: "IntervalMatrix") -> "IntervalMatrix":
        return IntervalMatrix(self.midpoint + other.midpoint, self.radius + other.radius)

    def scale(self, lo: float, hi: float) -> "IntervalMatrix":
        """Product with the scalar interval ``[lo, hi]``."""
        cands = np.stack([self.lower * lo, self.lower * hi, self.upper * lo, self.upper * hi])
        return IntervalMatrix.from_bounds(cands.min(axis=0), cands.max(axis=0))

    def times_point(self, G) -> "IntervalMatrix":
        """Interval product with a point matrix ``G`` on the right."""
        G = np.atleast_2d(np.asarray(G, float))
        return IntervalMatrix(self.midpoint @ G, self.radius @ np.abs(G))

    def contains(self, matrix, tol: float = MEMBER_TOL) -> bool:
        m = np.asarray(matrix, float)
        return bool(np.all(np.abs(m - self.midpoint) <= self.radius + tol))


@dataclass(frozen=True, eq=False)
class Strip:
    """``{v : offset - normal @ v in bound}``, possibly unbounded."""

    normal: np.ndarray
    offset: np.ndarray
    bound: IntervalBox

    def __post_init__(self):
        phi = _frozen(self.normal, 2, "normal")
        y = _frozen(self.offset, 1, "offset")
        if phi.shape[0] != y.size or self.bound.dim != y.size:
            raise ValueError("strip normal/offset/bound dimensions disagree")
        object.__setattr__(self, "normal", phi)
        object.__setattr__(self, "offset", y)

    @property
    def dim(self) -> int:
        return self.normal.shape[1]

    def residual(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, float))
        return self.offset - pts @ self.normal.T

    def contains_points(self, points, tol: float = MEMBER_TOL) -> np.ndarray:
        r = self.residual(points)
        return np.all((r >= self.bound.lower - tol) & (r <= self.bound.upper + tol), axis=1)

    def halfspaces(self) -> tuple[np.ndarray, np.ndarray]:
        """Rows of ``A v <= b`` describing the strip."""
        A = np.vstack([self.normal, -self.normal])
        b = np.concatenate([self.offset - self.bound.lower, self.bound.upper - self.offset])
        return A, b


@dataclass(frozen=True, eq=False)
class ZonoIntersection:
    """Intersection of equal-dimension zonotopes."""

    members: tuple

    def __post_init__(self):
        members = tuple(self.members)
        if not members:
            raise ValueError("ZonoIntersection needs at least one member")
        dims = {z.dim for z in members}
        if len(dims) != 1:
            raise ValueError(f"members have mixed dimensions {sorted(dims)}")
        object.__setattr__(self, "members", members)

    @property
    def dim(self) -> int:
        return self.members[0].dim

    def __len__(self):
        return len(self.members)

    def hull(self) -> IntervalBox:
        """Intersection of member hulls; raises EmptySetError if it is empty."""
        box = interval_hull(self.members[0])
        for z in self.members[1:]:
            box = box.intersect(interval_hull(z))
            if box is None:
                raise EmptySetError("member interval hulls do not intersect")
        return box


# --- core operations -------------------------------------------------------

def _check_dims(a: int, b: int, what: str):
    if a != b:
        raise ValueError(f"dimension mismatch in {what}: {a} vs {b}")


def minkowski_sum(a: Zonotope, b: Zonotope) -> Zonotope:
    _check_dims(a.dim, b.dim, "minkowski_sum")
    return Zonotope(a.center + b.center, np.hstack([a.generators, b.generators]))


def linear_map(A, z: Zonotope) -> Zonotope:
    A = np.atleast_2d(np.asarray(A, float))
    _check_dims(A.shape[1], z.dim, "linear_map")
    return Zonotope(A @ z.center, A @ z.generators)


def interval_hull(z) -> IntervalBox:
    if isinstance(z, IntervalBox):
        return z
    if isinstance(z, ZonoIntersection):
        return z.hull()
    r = np.abs(z.generators).sum(axis=1)
    return IntervalBox(z.center - r, z.center + r)


def zonotope_inclusion(M: IntervalMatrix) -> np.ndarray:
    """Generator block bounding ``{M* s : M* in M, s in unit cube}``.

    Returns ``[midpoint | diag(row sums of radius)]`` with zero columns removed.
    """
    if np.any(M.radius < 0):
        raise ValueError("negative radius in interval matrix")
    pad = np.diag(M.radius.sum(axis=1))
    G = np.hstack([M.midpoint, pad])
    return G[:, np.abs(G).max(axis=0, initial=0.0) > _ZERO_COL]


def centered_inclusion(point_image: Callable[[np.ndarray, Zonotope], Zonotope],
                       jacobian: Callable[[IntervalBox, Zonotope], IntervalMatrix],
                       z: Zonotope, m_set: Zonotope) -> Zonotope:
    """First-order guaranteed enclosure of ``{eta(v, d) : v in z, d in m_set}``.

    ``point_image(p, m_set)`` must return a zonotope containing ``eta(p, m_set)``
    and ``jacobian(box, m_set)`` an interval matrix enclosing the v-Jacobian of
    eta over ``box x m_set``.
    """
    base = point_image(z.center, m_set)
    if not isinstance(base, Zonotope):
        raise TypeError("point image must be a Zonotope")
    if z.order == 0:
        return base
    J = jacobian(interval_hull(z), m_set)
    if not isinstance(J, IntervalMatrix):
        raise TypeError("jacobian must return an IntervalMatrix")
    if not (np.all(np.isfinite(J.midpoint)) and np.all(np.isfinite(J.radius))):
        raise ValueError("non-finite Jacobian enclosure")
    block = zonotope_inclusion(J.times_point(z.generators))
    return Zonotope(base.center, np.hstack([base.generators, block]))


def intersect_strip(z: Zonotope, strip: Strip) -> Zonotope:
    """A zonotope containing ``z`` intersected with ``strip``.

    Uses ``c + L (y - Phi c)`` and ``[(I - L Phi) G | L R]`` with the gain ``L``
    minimising the squared Frobenius norm of the new generator matrix.  If the
    strip already covers ``z`` the zonotope is returned as is.
    """
    _check_dims(z.dim, strip.dim, "intersect_strip")
    phi = strip.normal
    y = strip.offset - strip.bound.center
    R = np.diag(strip.bound.radius)
    G = z.generators
    spread = np.abs(phi @ G).sum(axis=1)
    miss = np.abs(y - phi @ z.center)
    if np.all(miss + spread <= strip.bound.radius + MEMBER_TOL):
        return z
    if np.all(spread < 1e-14):
        # every point of z has the same residual and it lies outside the strip
        warnings.warn("strip normal annihilates the zonotope; left unrefined",
                      DegenerateStripWarning, stacklevel=2)
        return z
    GGt = G @ G.T
    S = phi @ GGt @ phi.T + R @ R
    gain = GGt @ phi.T @ np.linalg.pinv(S)
    center = z.center + gain @ (y - phi @ z.center)
    gens = np.hstack([(np.eye(z.dim) - gain @ phi) @ G, gain @ R])
    return Zonotope(center, gens)


def strip_box_hull(strip: Strip, box: IntervalBox) -> IntervalBox | None:
    """Exact interval hull of ``strip`` intersected with ``box`` (None if empty)."""
    _check_dims(strip.dim, box.dim, "strip_box_hull")
    A, b = strip.halfspaces()
    # drop vacuous rows (zero normal) after checking consistency
    live = np.linalg.norm(A, axis=1) > 1e-14
    if np.any(b[~live] < -MEMBER_TOL):
        return None
    A, b = A[live], b[live]
    if A.shape[0] == 0:
        return box
    n = box.dim
    bounds = list(zip(box.lower, box.upper))
    lo = np.empty(n)
    hi = np.empty(n)
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        for sign, out in ((1.0, lo), (-1.0, hi)):
            res = linprog(sign * e, A_ub=A, b_ub=b + MEMBER_TOL, bounds=bounds,
                          method="highs")
            if res.status == 2:
                return None
            if res.status != 0:
                raise RuntimeError(f"strip/box LP failed: {res.message}")
            out[i] = res.x[i]
    return IntervalBox(np.maximum(lo, box.lower), np.minimum(np.maximum(lo, hi), box.upper))


def reduce_order(z: Zonotope, max_generators: int = MAX_GENERATORS) -> Zonotope:
    """Cap the generator count by boxing the smallest columns (sound)."""
    n, m = z.dim, z.order
    if m <= max_generators:
        return z
    if max_generators < n:
        raise ValueError("cannot reduce below the dimension")
    G = z.generators
    score = np.abs(G).sum(axis=0) - np.abs(G).max(axis=0)
    order = np.argsort(score, kind="stable")
    n_box = m - (max_generators - n)
    boxed, kept = order[:n_box], np.sort(order[n_box:])
    pad = np.diag(np.abs(G[:, boxed]).sum(axis=1))
    return Zonotope(z.center, np.hstack([G[:, kept], pad]))


# --- membership ------------------------------------------------------------

def _zonotope_halfspaces(G: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Facet normals (unit rows) and offsets of a full-dimensional centred zonotope."""
    r, m = G.shape
    if r == 1:
        return np.ones((1, 1)), np.array([np.abs(G).sum()])
    normals = []
    for idx in itertools.combinations(range(m), r - 1):
        ns = null_space(G[:, idx].T)
        if ns.shape[1] != 1:
            continue
        normals.append(ns[:, 0])
    N = np.array(normals)
    # canonical sign, then dedupe parallel facets
    sgn = np.sign(N[np.arange(len(N)), np.argmax(np.abs(N) > 1e-12, axis=1)])
    N = N * sgn[:, None]
    N = np.unique(np.round(N, 12), axis=0)
    N /= np.linalg.norm(N, axis=1, keepdims=True)
    h = np.abs(N @ G).sum(axis=1)
    return N, h


def _lp_norm(G: np.ndarray, y: np.ndarray) -> float:
    """Smallest ||s||_inf with G s = y (inf if infeasible)."""
    r, m = G.shape
    cost = np.zeros(m + 1)
    cost[-1] = 1.0
    A_ub = np.vstack([np.hstack([np.eye(m), -np.ones((m, 1))]),
                      np.hstack([-np.eye(m), -np.ones((m, 1))])])
    A_eq = np.hstack([G, np.zeros((r, 1))])
    res = linprog(cost, A_ub=A_ub, b_ub=np.zeros(2 * m), A_eq=A_eq, b_eq=y,
                  bounds=[(None, None)] * m + [(0, None)], method="highs")
    return float(res.x[-1]) if res.status == 0 else np.inf


def _zonotope_contains(z: Zonotope, pts: np.ndarray, tol: float) -> np.ndarray:
    y = pts - z.center
    G = z.generators
    scale = 1.0 + np.abs(z.center).max(initial=0.0) + np.abs(G).sum(axis=1).max(initial=0.0)
    if z.order == 0:
        return np.all(np.abs(y) <= tol * scale, axis=1)
    U, sv, _ = np.linalg.svd(G, full_matrices=True)
    rank = int(np.sum(sv > 1e-12 * sv[0]))
    ok = np.ones(len(pts), dtype=bool)
    if rank < z.dim:
        off = y @ U[:, rank:]
        ok &= np.all(np.abs(off) <= tol * scale, axis=1)
        Ur = U[:, :rank]
        y = y @ Ur
        G = Ur.T @ G
    r, m = G.shape
    if m == r:
        s = np.linalg.solve(G, y.T).T
        return ok & np.all(np.abs(s) <= 1.0 + tol, axis=1)
    if comb(m, r - 1) <= _HALFSPACE_LIMIT:
        N, h = _zonotope_halfspaces(G)
        return ok & np.all(np.abs(y @ N.T) <= h * (1.0 + tol) + tol, axis=1)
    return ok & np.array([_lp_norm(G, yi) <= 1.0 + tol for yi in y])


def contains_points(s, points, tol: float = MEMBER_TOL) -> np.ndarray:
    """Vectorised membership of each row of ``points`` in ``s``."""
    pts = np.atleast_2d(np.asarray(points, float))
    if pts.shape[1] != s.dim:
        raise ValueError(f"dimension mismatch in contains: {pts.shape[1]} vs {s.dim}")
    if isinstance(s, IntervalBox):
        return np.all((pts >= s.lower - tol) & (pts <= s.upper + tol), axis=1)
    if isinstance(s, ZonoIntersection):
        ok = np.ones(len(pts), dtype=bool)
        for z in s.members:
            ok &= _zonotope_contains(z, pts, tol)
        return ok
    if isinstance(s, Zonotope):
        return _zonotope_contains(s, pts, tol)
    raise TypeError(f"unsupported set type {type(s).__name__}")


def contains_point(s, x, tol: float = MEMBER_TOL) -> bool:
    return bool(contains_points(s, np.asarray(x, float).reshape(1, -1), tol)[0])


def diameter(s) -> float:
    """Euclidean diameter of the tightest member-wise hull intersection.

    Exact for 1-D sets, an over-approximation otherwise.  Raises
    EmptySetError when the hulls do not intersect.
    """
    if isinstance(s, Zonotope):
        s = ZonoIntersection((s,))
    return interval_hull(s).diameter()


# --- polytopes -------------------------------------------------------------

def polytope_vertices(A, b) -> np.ndarray:
    """Vertices of the bounded polytope ``{x : A x <= b}`` by enumeration."""
    A = np.atleast_2d(np.asarray(A, float))
    b = np.asarray(b, float).ravel()
    n = A.shape[1]
    verts = []
    for rows in itertools.combinations(range(A.shape[0]), n):
        Asub = A[list(rows)]
        if abs(np.linalg.det(Asub)) < 1e-12:
            continue
        x = np.linalg.solve(Asub, b[list(rows)])
        if np.all(A @ x <= b + 1e-9 * (1.0 + np.abs(b))):
            verts.append(x)
    if not verts:
        return np.zeros((0, n))
    V = np.array(verts)
    _, idx = np.unique(np.round(V, 10), axis=0, return_index=True)
    return V[np.sort(idx)]


def _check_polytope(A: np.ndarray, b: np.ndarray):
    n = A.shape[1]
    feas = linprog(np.zeros(n), A_ub=A, b_ub=b, bounds=[(None, None)] * n, method="highs")
    if feas.status == 2:
        raise EmptySetError("polytope is empty")
    for i in range(n):
        for sign in (1.0, -1.0):
            c = np.zeros(n)
            c[i] = sign
            res = linprog(c, A_ub=A, b_ub=b, bounds=[(None, None)] * n, method="highs")
            if res.status == 3:
                raise ValueError("polytope is unbounded")


def polytope_to_zonotopes(A, b) -> ZonoIntersection:
    """Write a bounded polytope ``{x : A x <= b}`` as an intersection of zonotopes.

    For each face a parallelotope is built with one edge along the face
    normal, spanning the polytope's extent from the face to its farthest
    point, and the remaining edges in the face plane covering the polytope's
    projection.  Each parallelotope contains the polytope and lies in the
    face's half-space, so the intersection is exact.  Parallelotopes that
    contain another one are dropped.
    """
    A = np.atleast_2d(np.asarray(A, float))
    b = np.asarray(b, float).ravel()
    if A.shape[0] != b.size:
        raise ValueError("A and b disagree on the number of half-spaces")
    _check_polytope(A, b)
    V = polytope_vertices(A, b)
    if len(V) == 0:
        raise EmptySetError("polytope has no vertices")
    n = A.shape[1]
    pieces: list[Zonotope] = []
    for a_row in A:
        norm = np.linalg.norm(a_row)
        if norm < 1e-14:
            continue
        a = a_row / norm
        basis = np.column_stack([a, null_space(a[None, :])]) if n > 1 else a.reshape(1, 1)
        proj = V @ basis
        lo, hi = proj.min(axis=0), proj.max(axis=0)
        center = basis @ (0.5 * (lo + hi))
        gens = basis * (0.5 * (hi - lo))
        pieces.append(Zonotope(center, gens))
    kept: list[Zonotope] = []
    for cand in pieces:
        cand_v = _parallelotope_vertices(cand)
        if any(np.all(contains_points(cand, _parallelotope_vertices(k), GEOM_TOL)) for k in kept):
            continue
        kept = [k for k in kept if not np.all(contains_points(k, cand_v, GEOM_TOL))]
        kept.append(cand)
    return ZonoIntersection(tuple(kept))


def _parallelotope_vertices(z: Zonotope) -> np.ndarray:
    signs = np.array(list(itertools.product((-1.0, 1.0), repeat=z.order)))
    if z.order == 0:
        return z.center.reshape(1, -1)
    return z.center + signs @ z.generators.T


def box_intersection(boxes: Sequence[IntervalBox]) -> IntervalBox | None:
    out = boxes[0]
    for bx in boxes[1:]:
        out = out.intersect(bx)
        if out is None:
            return None
    return out
