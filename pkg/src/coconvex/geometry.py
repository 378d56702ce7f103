"""Dimension-generic polyhedral primitives.

Cones are stored with both descriptions: unit extreme rays (``generators``)
and outer unit facet normals (``facet_normals``) so that
``C = {x : <x, nu> <= 0 for every nu}``. Bounded polyhedra are handled by
exhaustive vertex enumeration, which is adequate for the small instances
(n <= 4, a few dozen halfspaces) this package targets.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from itertools import combinations
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linprog

from .exceptions import (
    DegenerateInput,
    DirectionOutsideOmega,
    Empty,
    LowerDimensional,
    NotFullDimensional,
    NotPointed,
    NotUnit,
    Unbounded,
)

EPS_GEO = 1e-9

# vectors closer than this to unit length are kept bit-for-bit
UNIT_TOL = 1e-12


class Tag(str, Enum):
    CONE = "cone"
    OMEGA = "omega"
    TOP = "top"


def as_unit(v, tol: float = UNIT_TOL) -> np.ndarray:
    """Return ``v`` as a float array of unit length.

    Vectors already within ``tol`` of unit length are returned unchanged, so
    repeated normalization is a no-op.
    """
    v = np.array(v, dtype=float)
    if v.ndim != 1 or not np.all(np.isfinite(v)):
        raise DegenerateInput(f"expected a finite vector, got {v!r}")
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        raise DegenerateInput("zero vector")
    if abs(norm - 1.0) > tol:
        v = v / norm
    return v


def _rank(points: np.ndarray, tol: float) -> int:
    if len(points) == 0:
        return 0
    s = np.linalg.svd(np.atleast_2d(points), compute_uv=False)
    return int(np.sum(s > tol))


def affine_rank(points: np.ndarray, tol: float = EPS_GEO) -> int:
    points = np.atleast_2d(points)
    if len(points) <= 1:
        return 0
    return _rank(points[1:] - points[0], tol * max(1.0, np.abs(points).max()))


def _dedupe_rows(X: np.ndarray, tol) -> np.ndarray:
    """Indices of rows kept when merging rows closer than ``tol`` (scalar or per row)."""
    tol = np.broadcast_to(np.asarray(tol, dtype=float), (len(X),))
    keep: list[int] = []
    for i in range(len(X)):
        if not keep or np.abs(X[keep] - X[i]).max(axis=1).min() > tol[i]:
            keep.append(i)
    return np.asarray(keep, dtype=int)


def _point_tol(X: np.ndarray, eps: float = EPS_GEO) -> np.ndarray:
    return eps * np.maximum(1.0, np.abs(X).max(axis=-1))


@dataclass(frozen=True, eq=False)
class PolyhedralCone:
    """Pointed, full-dimensional polyhedral cone with apex at the origin.

    Build instances with :func:`validate_cone`; the constructor does no
    checking.
    """

    generators: np.ndarray
    facet_normals: np.ndarray
    w: np.ndarray

    @property
    def dim(self) -> int:
        return self.generators.shape[1]

    def contains(self, x, tol: float = EPS_GEO) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(self.facet_normals @ x <= tol * max(1.0, np.abs(x).max())))

    def in_omega(self, u) -> bool:
        return in_omega(self, u)

    def a0(self, directions) -> float:
        """Smallest ``-<g, u>`` over unit generators and the given directions.

        Every unit ``x`` in the cone then satisfies ``<x, u> <= -a0``.
        """
        U = np.atleast_2d(np.asarray(directions, dtype=float))
        return float(np.min(-(self.generators @ U.T)))

    def same_as(self, other: "PolyhedralCone", tol: float = EPS_GEO) -> bool:
        if other is self:
            return True
        if other.dim != self.dim or len(other.generators) != len(self.generators):
            return False
        D = np.abs(self.generators[:, None, :] - other.generators[None, :, :]).max(axis=2)
        return bool(np.all(D.min(axis=1) <= tol) and np.all(D.min(axis=0) <= tol))

    def __repr__(self):
        return f"PolyhedralCone(dim={self.dim}, rays={len(self.generators)}, facets={len(self.facet_normals)})"


def _positive_functional(G: np.ndarray) -> Optional[np.ndarray]:
    n = G.shape[1]
    res = linprog(
        np.zeros(n), A_ub=-G, b_ub=-np.ones(len(G)), bounds=[(None, None)] * n, method="highs"
    )
    if res.status != 0:
        return None
    return res.x / np.linalg.norm(res.x)


def validate_cone(generators) -> PolyhedralCone:
    """Validate ray generators and compute the facet description.

    Non-extreme and duplicate rays are dropped. The reference direction
    ``w`` is the normalized sum of the unit extreme rays when that sum is
    strictly positive on every ray, otherwise a strictly positive functional
    found by linear programming.

    Raises
    ------
    DegenerateInput
        A zero or non-finite generator.
    NotPointed
        The rays admit no strictly positive functional.
    NotFullDimensional
        The rays do not span the ambient space.
    """
    G = np.array(generators, dtype=float)
    if G.ndim != 2 or G.shape[1] < 2 or len(G) == 0:
        raise DegenerateInput(f"generators must form a (k, n) array with n >= 2, got shape {G.shape}")
    G = np.array([as_unit(g) for g in G])
    G = G[_dedupe_rows(G, EPS_GEO)]
    n = G.shape[1]

    if _positive_functional(G) is None:
        raise NotPointed("the generators do not span a pointed cone")
    if _rank(G, EPS_GEO) < n:
        raise NotFullDimensional(f"generators span less than R^{n}")

    normals = []
    for combo in combinations(range(len(G)), n - 1):
        M = G[list(combo)]
        if _rank(M, EPS_GEO) < n - 1:
            continue
        nu = np.linalg.svd(M)[2][-1]
        vals = G @ nu
        if vals.max() > EPS_GEO:
            nu = -nu
            vals = -vals
        if vals.max() > EPS_GEO:
            continue
        normals.append(nu / np.linalg.norm(nu))
    N = np.array(normals)
    N = N[_dedupe_rows(N, EPS_GEO)]

    # a ray is extreme iff n-1 independent facets are tight on it
    extreme = [
        i for i in range(len(G)) if _rank(N[np.abs(N @ G[i]) <= EPS_GEO], EPS_GEO) == n - 1
    ]
    G = G[extreme]

    w = G.sum(axis=0)
    w_norm = np.linalg.norm(w)
    if w_norm > 0:
        w = w / w_norm
    if w_norm == 0 or np.min(G @ w) <= EPS_GEO:
        w = _positive_functional(G)
    return PolyhedralCone(generators=G, facet_normals=N, w=w)


def polar_cone(C: PolyhedralCone) -> PolyhedralCone:
    """The polar cone; its rays are the facet normals of ``C``."""
    return validate_cone(C.facet_normals)


def in_omega(C: PolyhedralCone, u) -> bool:
    """True iff ``u`` is a unit vector in the interior of the polar cone."""
    u = np.asarray(u, dtype=float)
    if u.shape != (C.dim,) or not np.all(np.isfinite(u)):
        raise NotUnit(f"expected a finite vector of length {C.dim}")
    if abs(np.linalg.norm(u) - 1.0) > EPS_GEO:
        raise NotUnit(f"|u| = {np.linalg.norm(u)!r} is not 1")
    return bool(np.all(C.generators @ u < -EPS_GEO))


def require_omega(C: PolyhedralCone, U) -> np.ndarray:
    U = np.atleast_2d(np.asarray(U, dtype=float))
    for u in U:
        if not in_omega(C, u):
            raise DirectionOutsideOmega(f"direction {u.tolist()} is not in the open set Omega_C")
    return U


# ---------------------------------------------------------------------------
# bounded polyhedra


@dataclass(frozen=True, eq=False)
class Facet:
    normal: np.ndarray
    offset: float
    vertex_ids: tuple
    area: float
    tag: Optional[Tag] = None
    source: int = -1  # index of the generating halfspace


@dataclass(frozen=True, eq=False)
class TruncatedPolytope:
    """Vertex/facet description of a bounded polytope.

    ``t`` is the truncation height when the polytope is a cone truncation
    ``K cap {<x, w> <= t}``, otherwise ``None``.
    """

    vertices: np.ndarray
    facets: tuple
    t: Optional[float] = None

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    def facets_tagged(self, tag: Tag) -> list:
        return [F for F in self.facets if F.tag == tag]

    @property
    def volume(self) -> float:
        return polytope_volume(self)


def _simplex_volume(P: np.ndarray) -> float:
    E = P[1:] - P[0]
    k = len(E)
    if k == E.shape[1]:
        return abs(float(np.linalg.det(E))) / math.factorial(k)
    gram = float(np.linalg.det(E @ E.T))
    return math.sqrt(max(gram, 0.0)) / math.factorial(k)


class _Triangulator:
    """Pulling triangulation: each face is coned from its smallest vertex
    over the triangulated subfaces that avoid it."""

    def __init__(self, vertices: np.ndarray, tight_sets: list, tol: float):
        self.V = vertices
        self.tight_sets = tight_sets
        self.tol = tol
        self._memo: dict = {}

    def subfaces(self, face: frozenset, dim: int) -> list:
        out, seen = [], set()
        for ts in self.tight_sets:
            sub = face & ts
            if len(sub) < dim or sub == face or sub in seen:
                continue
            seen.add(sub)
            if dim - 1 <= 1 or affine_rank(self.V[sorted(sub)], self.tol) == dim - 1:
                out.append(sub)
        return out

    def simplices(self, face: frozenset, dim: int) -> list:
        key = (face, dim)
        if key in self._memo:
            return self._memo[key]
        if dim == 0:
            result = [(min(face),)]
        elif dim == 1:
            ids = sorted(face)
            if len(ids) > 2:
                # collinear leftovers: keep the two extreme points
                P = self.V[ids]
                d = P[-1] - P[0]
                proj = P @ d
                ids = [ids[int(np.argmin(proj))], ids[int(np.argmax(proj))]]
            result = [tuple(ids)]
        else:
            v0 = min(face)
            result = []
            for sub in self.subfaces(face, dim):
                if v0 in sub:
                    continue
                result.extend((v0,) + s for s in self.simplices(sub, dim - 1))
        self._memo[key] = result
        return result

    def content(self, face: frozenset, dim: int) -> float:
        return sum(_simplex_volume(self.V[list(s)]) for s in self.simplices(face, dim))


def _enumerate(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    m, n = A.shape
    combos = np.array(list(combinations(range(m), n)), dtype=int)
    if len(combos) == 0:
        return np.zeros((0, n))
    M = A[combos]
    det = np.abs(np.linalg.det(M))
    ok = det > 1e-12
    if not np.any(ok):
        return np.zeros((0, n))
    X = np.linalg.solve(M[ok], b[combos[ok]][..., None])[..., 0]
    feasible = np.all(X @ A.T <= b + _point_tol(X)[:, None], axis=1)
    # best-conditioned intersections first so dedupe keeps them
    order = np.argsort(-det[ok][feasible], kind="stable")
    X = X[feasible][order]
    if len(X) == 0:
        return X
    X = X[_dedupe_rows(X, _point_tol(X))]
    # polish against every tight halfspace
    tight = np.abs(X @ A.T - b) <= _point_tol(X)[:, None]
    for j in range(len(X)):
        rows = tight[j]
        if rows.sum() > n:
            X[j] = np.linalg.lstsq(A[rows], b[rows], rcond=None)[0]
    return X + 0.0  # no negative zeros


def _build_polytope(A, b, tags, t) -> TruncatedPolytope:
    V = _enumerate(A, b)
    n = A.shape[1]
    if len(V) == 0:
        raise Empty("halfspace intersection has no vertices")
    if affine_rank(V, EPS_GEO) < n:
        raise LowerDimensional("halfspace intersection is not full-dimensional")
    tight = np.abs(V @ A.T - b) <= _point_tol(V)[:, None]
    tight_sets = [frozenset(np.flatnonzero(tight[:, i]).tolist()) for i in range(len(b))]
    tri = _Triangulator(V, tight_sets, EPS_GEO)
    facets, seen = [], set()
    for i, ts in enumerate(tight_sets):
        if len(ts) < n or ts in seen:
            continue
        if affine_rank(V[sorted(ts)], EPS_GEO) != n - 1:
            continue
        seen.add(ts)
        area = tri.content(ts, n - 1)
        facets.append(
            Facet(
                normal=A[i],
                offset=float(b[i]),
                vertex_ids=tuple(sorted(ts)),
                area=area,
                tag=None if tags is None else tags[i],
                source=i,
            )
        )
    P = TruncatedPolytope(vertices=V, facets=tuple(facets), t=t)
    object.__setattr__(P, "_triangulator", tri)
    return P


def _normalize_halfspaces(halfspaces):
    normals, offsets = [], []
    for a, beta in halfspaces:
        a = np.asarray(a, dtype=float)
        norm = np.linalg.norm(a)
        if norm == 0 or not np.isfinite(norm) or not np.isfinite(beta):
            raise DegenerateInput("halfspace normals must be finite and nonzero")
        if abs(norm - 1.0) > UNIT_TOL:
            a, beta = a / norm, beta / norm
        normals.append(a)
        offsets.append(float(beta))
    return np.array(normals), np.array(offsets)


def halfspace_to_vertices(halfspaces: Sequence, tags: Optional[Sequence] = None) -> TruncatedPolytope:
    """Intersect halfspaces ``<a, x> <= b`` given as ``(a, b)`` pairs.

    Raises ``Empty``, ``Unbounded`` or ``LowerDimensional`` when the
    intersection is not a full-dimensional polytope.
    """
    A, b = _normalize_halfspaces(halfspaces)
    if A.ndim != 2 or A.shape[1] < 2:
        raise DegenerateInput("need at least one halfspace in dimension >= 2")
    m, n = A.shape
    # maximize a common slack s <= 1 to classify feasibility
    res = linprog(
        np.r_[np.zeros(n), -1.0],
        A_ub=np.c_[A, np.ones(m)],
        b_ub=b,
        bounds=[(None, None)] * n + [(None, 1.0)],
        method="highs",
    )
    if res.status == 2:
        raise Empty("halfspaces are inconsistent")
    slack = -res.fun if res.status == 0 else 1.0
    if slack < -EPS_GEO:
        raise Empty("halfspaces are inconsistent")
    # bounded iff rank A = n and A^T y = 0 for some y >= 1
    if _rank(A, EPS_GEO) < n:
        raise Unbounded("halfspace normals do not span the space")
    res = linprog(np.zeros(m), A_eq=A.T, b_eq=np.zeros(n), bounds=[(1.0, None)] * m, method="highs")
    if res.status != 0:
        raise Unbounded("halfspace intersection is unbounded")
    if slack <= EPS_GEO:
        raise LowerDimensional("halfspace intersection has empty interior")
    return _build_polytope(A, b, tags, None)


def polytope_volume(P: TruncatedPolytope) -> float:
    """Volume from the facet formula ``(1/n) sum offset(F) * area(F)``."""
    return sum(F.offset * F.area for F in P.facets) / P.dim


def simplicial_volume(P: TruncatedPolytope) -> float:
    """Volume of a pulling triangulation of ``P``; independent of offsets."""
    tri = getattr(P, "_triangulator", None)
    if tri is None:
        tight_sets = [frozenset(F.vertex_ids) for F in P.facets]
        tri = _Triangulator(P.vertices, tight_sets, EPS_GEO)
    return tri.content(frozenset(range(len(P.vertices))), P.dim)


def facet_simplices(P: TruncatedPolytope, facet: Facet) -> list:
    """Vertex-index simplices triangulating one facet."""
    tri = getattr(P, "_triangulator", None)
    if tri is None:
        tri = _Triangulator(P.vertices, [frozenset(F.vertex_ids) for F in P.facets], EPS_GEO)
    return tri.simplices(frozenset(facet.vertex_ids), P.dim - 1)


def cone_halfspaces(C: PolyhedralCone, t: float):
    """Halfspaces and tags describing ``C_t``."""
    A = np.vstack([C.facet_normals, C.w])
    b = np.r_[np.zeros(len(C.facet_normals)), float(t)]
    tags = [Tag.CONE] * len(C.facet_normals) + [Tag.TOP]
    return A, b, tags


def truncated_cone(C: PolyhedralCone, t: float) -> TruncatedPolytope:
    A, b, tags = cone_halfspaces(C, t)
    return _build_polytope(A, b, tags, float(t))
