"""C-full bodies given by Wulff data and the coconvex calculus on them.

A body over the cone ``C`` is stored as constraint directions ``u_i`` in
Omega_C and positive offsets ``f_i``; it denotes

    K = C cap {x : <x, u_i> <= -f_i for all i},    A = C \\ K.

All volumes and measures are read off a truncation ``K cap C_t`` with ``t``
large enough that ``A`` lies strictly below the top facet.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial import ConvexHull

from .exceptions import (
    ConeMismatch,
    EmptySelection,
    InvalidMeasure,
    NonpositiveOffset,
    NonpositiveScale,
    WrongArity,
)
from .geometry import (
    EPS_GEO,
    PolyhedralCone,
    Tag,
    TruncatedPolytope,
    _build_polytope,
    _dedupe_rows,
    cone_halfspaces,
    in_omega,
    require_omega,
    simplicial_volume,
    truncated_cone,
)


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Finite atomic measure on Omega_C: unit directions with positive masses."""

    directions: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        U = np.atleast_2d(np.asarray(self.directions, dtype=float))
        c = np.atleast_1d(np.asarray(self.masses, dtype=float))
        object.__setattr__(self, "directions", U)
        object.__setattr__(self, "masses", c)

    def __len__(self):
        return len(self.masses)

    @property
    def total(self) -> float:
        return float(np.sum(self.masses))

    def restrict(self, indices: Iterable[int]) -> "DiscreteMeasure":
        idx = sorted(set(int(i) for i in indices))
        return DiscreteMeasure(self.directions[idx], self.masses[idx])

    def mass_at(self, u, tol: float = 1e-8) -> float:
        d = np.abs(self.directions - np.asarray(u, dtype=float)).max(axis=1)
        hits = d <= tol
        return float(self.masses[hits].sum())

    def __repr__(self):
        return f"DiscreteMeasure(atoms={len(self)}, total={self.total:.6g})"


def validate_measure(C: PolyhedralCone, measure: DiscreteMeasure) -> DiscreteMeasure:
    U, c = measure.directions, measure.masses
    if len(c) == 0 or U.shape != (len(c), C.dim):
        raise InvalidMeasure("measure needs at least one atom of matching dimension")
    if not np.all(np.isfinite(c)) or np.any(c <= 0):
        raise InvalidMeasure("atom masses must be finite and positive")
    try:
        require_omega(C, U)
    except Exception as exc:
        raise InvalidMeasure(str(exc)) from exc
    if len(_dedupe_rows(U, EPS_GEO)) != len(U):
        raise InvalidMeasure("atom directions must be distinct")
    return measure


@dataclass(frozen=True, eq=False)
class CFullBody:
    """Wulff shape ``K`` over ``cone`` with constraints ``(directions, offsets)``.

    Use :func:`wulff_shape` to construct a validated instance.
    """

    cone: PolyhedralCone
    directions: np.ndarray
    offsets: np.ndarray

    @property
    def dim(self) -> int:
        return self.cone.dim

    def __len__(self):
        return len(self.offsets)

    @cached_property
    def enclosing_t(self) -> float:
        return min_enclosing_t(self)

    @cached_property
    def truncation(self) -> TruncatedPolytope:
        return truncate(self, self.enclosing_t)

    @cached_property
    def vertices(self) -> np.ndarray:
        """Vertices of ``K`` itself (truncation vertices off the top facet)."""
        P = truncate(self, support_height(self))
        top = [F for F in P.facets if F.tag == Tag.TOP]
        on_top = set(top[0].vertex_ids) if top else set()
        return P.vertices[[i for i in range(len(P.vertices)) if i not in on_top]]

    def support(self, U) -> np.ndarray:
        """``h_K`` at the rows of ``U`` (all must lie in Omega_C)."""
        U = require_omega(self.cone, U)
        return (self.vertices @ U.T).max(axis=0)

    def __repr__(self):
        return f"CFullBody(dim={self.dim}, constraints={len(self)})"


def _check_same_cone(*bodies: CFullBody) -> PolyhedralCone:
    C = bodies[0].cone
    for B in bodies[1:]:
        if not C.same_as(B.cone):
            raise ConeMismatch("bodies live on different cones")
    return C


def wulff_shape(C: PolyhedralCone, dirs, f) -> CFullBody:
    """Wulff shape ``C cap {<x, u_i> <= -f_i}``.

    Raises ``DirectionOutsideOmega`` for directions outside the open polar
    sphere patch and ``NonpositiveOffset`` for ``f_i <= 0``.
    """
    U = np.atleast_2d(np.array(dirs, dtype=float))
    f = np.atleast_1d(np.array(f, dtype=float))
    if U.shape != (len(f), C.dim):
        raise ValueError(f"got {len(U)} directions of dim {U.shape[1]} and {len(f)} offsets")
    if len(f) == 0:
        raise ValueError("a Wulff shape needs at least one constraint")
    require_omega(C, U)
    if not np.all(np.isfinite(f)) or np.any(f <= 0):
        raise NonpositiveOffset(f"offsets must be positive, got {f.tolist()}")
    if len(_dedupe_rows(U, EPS_GEO)) != len(U):
        raise ValueError("constraint directions must be pairwise distinct")
    return CFullBody(C, U, f)


def _wulff_unchecked(C, U, f) -> CFullBody:
    return CFullBody(C, np.asarray(U, dtype=float), np.asarray(f, dtype=float))


def min_enclosing_t(body: CFullBody) -> float:
    """Height ``t`` with ``C \\ K`` inside the open truncation ``C_t``.

    Points of ``C \\ K`` have norm at most ``max f / a0``; twice that bound is
    returned.
    """
    a0 = body.cone.a0(body.directions)
    return 2.0 * float(np.max(body.offsets)) / a0


def support_height(body: CFullBody) -> float:
    """Truncation height used to read off vertices of ``K``."""
    a0 = body.cone.a0(body.directions)
    R = float(np.max(body.offsets)) / a0
    return 2.0 * R / a0


def truncate(body: CFullBody, t: float | None = None) -> TruncatedPolytope:
    """``K cap C_t`` with facets tagged CONE, OMEGA or TOP."""
    if t is None:
        return body.truncation
    C = body.cone
    A, b, tags = cone_halfspaces(C, t)
    A = np.vstack([A[:-1], body.directions, A[-1:]])
    b = np.r_[b[:-1], -body.offsets, b[-1]]
    tags = tags[:-1] + [Tag.OMEGA] * len(body) + tags[-1:]
    return _build_polytope(A, b, tags, float(t))


def support_value(C: PolyhedralCone, body: CFullBody, u) -> float:
    """``h_K(u) = max <u, x>`` over ``K``; negative on Omega_C."""
    if not C.same_as(body.cone):
        raise ConeMismatch("body lives on a different cone")
    return float(body.support(np.asarray(u, dtype=float))[0])


# ---------------------------------------------------------------------------
# volumes and measures


def _omega_facets(body: CFullBody):
    P = body.truncation
    return [F for F in P.facets if F.tag == Tag.OMEGA and F.area > EPS_GEO]


def _cone_masses(body: CFullBody):
    n = body.dim
    facets = _omega_facets(body)
    return facets, [(-F.offset) * F.area / n for F in facets]


def coconvex_volume(body: CFullBody) -> float:
    """``V_n(C \\ K)`` as ``(1/n) sum (-h_K(u)) * area`` over the OMEGA facets."""
    return sum(_cone_masses(body)[1])


def truncation_difference_volume(body: CFullBody, t: float | None = None) -> float:
    """``V_n(C_t) - V_n(K cap C_t)`` from triangulations (no facet offsets)."""
    t = body.enclosing_t if t is None else t
    return simplicial_volume(truncated_cone(body.cone, t)) - simplicial_volume(truncate(body, t))


def surface_area_measure(body: CFullBody) -> DiscreteMeasure:
    facets = _omega_facets(body)
    n = body.dim
    if not facets:
        return DiscreteMeasure(np.zeros((0, n)), np.zeros(0))
    return DiscreteMeasure(np.array([F.normal for F in facets]), np.array([F.area for F in facets]))


def cone_volume_measure(body: CFullBody) -> DiscreteMeasure:
    facets, masses = _cone_masses(body)
    return DiscreteMeasure(np.array([F.normal for F in facets]), np.array(masses))


def facet_areas(body: CFullBody) -> np.ndarray:
    """Facet area per constraint, zero for slack constraints."""
    a = np.zeros(len(body))
    first_omega = len(body.cone.facet_normals)
    for F in _omega_facets(body):
        a[F.source - first_omega] = F.area
    return a


def canonicalize(body: CFullBody) -> CFullBody:
    """Drop constraints that carry no facet; offsets are then ``-h_K``."""
    facets = _omega_facets(body)
    first_omega = len(body.cone.facet_normals)
    keep = sorted(F.source - first_omega for F in facets)
    return _wulff_unchecked(body.cone, body.directions[keep], body.offsets[keep])


def scale(a: CFullBody, lam: float) -> CFullBody:
    if not np.isfinite(lam) or lam <= 0:
        raise NonpositiveScale(f"scale factor must be positive, got {lam!r}")
    if lam == 1:
        return a
    return _wulff_unchecked(a.cone, a.directions, lam * a.offsets)


def _hull_facets(points: np.ndarray, tol: float):
    hull = ConvexHull(points)
    eq = hull.equations
    normals = eq[:, :-1] / np.linalg.norm(eq[:, :-1], axis=1)[:, None]
    return normals[_dedupe_rows(normals, 1e-7)]


def co_sum(a: CFullBody, b: CFullBody) -> CFullBody:
    """Body whose ``K`` is the Minkowski sum ``K_a + K_b``.

    The sum is truncated at the sum of the constituent heights; its hull is
    formed from pairwise vertex sums together with their pushes along every
    cone ray to the truncation height. Facet normals coming out of the hull
    are refitted through their tight sum points before the offsets are read.
    """
    C = _check_same_cone(a, b)
    n = C.dim
    S = (a.vertices[:, None, :] + b.vertices[None, :, :]).reshape(-1, n)
    S = S[_dedupe_rows(S, EPS_GEO * max(1.0, np.abs(S).max()))]
    T = a.enclosing_t + b.enclosing_t
    heights = S @ C.w
    pushed = [S + ((T - heights) / (g @ C.w))[:, None] * g for g in C.generators]
    points = np.vstack([S] + pushed)
    scale_ = max(1.0, float(np.abs(S).max()))
    tol = 1e-9 * scale_

    dirs, offs = [], []
    for u in _hull_facets(points, tol):
        if not np.all(C.generators @ u < -1e-7):
            continue
        vals = S @ u
        tight = S[vals >= vals.max() - tol]
        if len(tight) < n:
            continue
        X = tight - tight.mean(axis=0)
        v = np.linalg.svd(X)[2][-1]
        if v @ u < 0:
            v = -v
        v = v / np.linalg.norm(v)
        if not in_omega(C, v):
            continue
        dirs.append(v)
        offs.append(-(S @ v).max())
    U = np.array(dirs)
    keep = _dedupe_rows(U, 1e-10)
    return canonicalize(_wulff_unchecked(C, U[keep], np.array(offs)[keep]))


def co_sum_all(bodies: Sequence[CFullBody]) -> CFullBody:
    out = bodies[0]
    for B in bodies[1:]:
        out = co_sum(out, B)
    return out


def restrict_to_normals(a: CFullBody, selection: Sequence[int]) -> CFullBody:
    """The bounded set ``A_(omega)`` for a subset of ``a``'s constraint directions.

    Offsets are taken from the support function of ``K`` (not the raw ``f``),
    so the result is contained in ``a``.
    """
    idx = sorted(set(int(i) for i in selection))
    if not idx:
        raise EmptySelection("select at least one constraint direction")
    if idx[0] < 0 or idx[-1] >= len(a):
        raise IndexError(f"selection {idx} out of range for {len(a)} constraints")
    U = a.directions[idx]
    return canonicalize(_wulff_unchecked(a.cone, U, -a.support(U)))


# ---------------------------------------------------------------------------
# mixed volumes


def _distinct(bodies: Sequence[CFullBody]):
    reps: list[CFullBody] = []
    labels = []
    for B in bodies:
        for j, R in enumerate(reps):
            if R is B or (
                R.offsets.shape == B.offsets.shape
                and np.array_equal(R.offsets, B.offsets)
                and np.array_equal(R.directions, B.directions)
            ):
                labels.append(j)
                break
        else:
            labels.append(len(reps))
            reps.append(B)
    return reps, labels


class _CoSumCache:
    """Co-sums ``c_1 A_1 (+) ... (+) c_k A_k`` keyed by integer multiplicities."""

    def __init__(self, reps):
        self.reps = reps
        self._bodies: dict = {}

    def body(self, counts: tuple) -> CFullBody:
        if counts not in self._bodies:
            parts = [scale(R, c) for R, c in zip(self.reps, counts) if c > 0]
            self._bodies[counts] = co_sum_all(parts)
        return self._bodies[counts]


def _subset_counts(labels, S, k):
    counts = [0] * k
    for i in S:
        counts[labels[i]] += 1
    return tuple(counts)


def mixed_volume(bodies: Sequence[CFullBody]) -> float:
    """Mixed volume of ``n`` coconvex sets by polarization of co-sum volumes."""
    C = _check_same_cone(*bodies)
    n = C.dim
    if len(bodies) != n:
        raise WrongArity(f"mixed volume in dimension {n} takes {n} bodies, got {len(bodies)}")
    reps, labels = _distinct(bodies)
    if len(reps) == 1:
        return coconvex_volume(reps[0])
    cache = _CoSumCache(reps)
    terms = []
    for size in range(1, n + 1):
        for S in combinations(range(n), size):
            V = coconvex_volume(cache.body(_subset_counts(labels, S, len(reps))))
            terms.append((-1) ** (n - size) * V)
    return math.fsum(terms) / math.factorial(n)


def _merge_atoms(pairs, tol=1e-8):
    dirs: list[np.ndarray] = []
    masses: list[float] = []
    for u, m in pairs:
        for j, d in enumerate(dirs):
            if np.abs(d - u).max() <= tol:
                masses[j] += m
                break
        else:
            dirs.append(u)
            masses.append(m)
    return dirs, masses


def mixed_area_measure(bodies: Sequence[CFullBody]) -> DiscreteMeasure:
    """Mixed area measure of ``n-1`` bodies by polarization of area measures.

    Atom directions from different co-sums are merged within 1e-8; atoms whose
    polarized mass cancels below 1e-9 of the largest term are dropped.
    """
    C = _check_same_cone(*bodies)
    n = C.dim
    k = len(bodies)
    if k != n - 1:
        raise WrongArity(f"mixed area measure in dimension {n} takes {n - 1} bodies, got {k}")
    reps, labels = _distinct(bodies)
    cache = _CoSumCache(reps)
    pairs = []
    biggest = 0.0
    for size in range(1, k + 1):
        sign = (-1) ** (k - size)
        for S in combinations(range(k), size):
            mu = surface_area_measure(cache.body(_subset_counts(labels, S, len(reps))))
            biggest = max(biggest, float(mu.masses.max(initial=0.0)))
            pairs.extend((u, sign * m / math.factorial(k)) for u, m in zip(mu.directions, mu.masses))
    dirs, masses = _merge_atoms(pairs)
    keep = [i for i, m in enumerate(masses) if m > 1e-9 * biggest]
    if not keep:
        return DiscreteMeasure(np.zeros((0, n)), np.zeros(0))
    return DiscreteMeasure(np.array([dirs[i] for i in keep]), np.array([masses[i] for i in keep]))


def integrate_support(body: CFullBody, measure: DiscreteMeasure) -> float:
    """``(1/n) sum_u (-h_K(u)) * mass(u)`` over the atoms of ``measure``."""
    if len(measure) == 0:
        return 0.0
    hbar = -body.support(measure.directions)
    return math.fsum(hbar * measure.masses) / body.dim


def mixed_volume_integral(bodies: Sequence[CFullBody]) -> float:
    """Mixed volume from the support function of the first body integrated
    against the mixed area measure of the remaining ones."""
    C = _check_same_cone(*bodies)
    if len(bodies) != C.dim:
        raise WrongArity(f"mixed volume in dimension {C.dim} takes {C.dim} bodies")
    return integrate_support(bodies[0], mixed_area_measure(bodies[1:]))
