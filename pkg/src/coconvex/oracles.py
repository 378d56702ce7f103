"""Independent checks: Monte-Carlo volume, brute-force cone volumes and
finite-difference gradients."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.spatial import Delaunay

from .core import (
    CFullBody,
    DiscreteMeasure,
    _merge_atoms,
    _omega_facets,
    coconvex_volume,
    min_enclosing_t,
    wulff_shape,
)
from .exceptions import StepTooLarge
from .geometry import PolyhedralCone, truncated_cone

CHUNK = 1 << 16


@dataclass(frozen=True)
class MCEstimate:
    estimate: float
    stderr: float
    samples: int
    seed: int
    box_volume: float = float("nan")
    hits: int = 0

    def within(self, value: float, k: float = 4.0) -> bool:
        """Whether ``value`` lies within ``k`` standard errors."""
        return abs(self.estimate - value) <= k * self.stderr


def _count_hits(body: CFullBody, lo, hi, size: int, seed_seq: np.random.SeedSequence) -> int:
    rng = np.random.Generator(np.random.Philox(seed_seq))
    X = lo + (hi - lo) * rng.random((size, len(lo)))
    in_cone = np.all(X @ body.cone.facet_normals.T <= 0.0, axis=1)
    outside_k = np.any(X @ body.directions.T > -body.offsets, axis=1)
    return int(np.count_nonzero(in_cone & outside_k))


def mc_volume(body: CFullBody, samples: int, seed: int = 0, workers: int = 1) -> MCEstimate:
    """Rejection-sampling estimate of the coconvex volume.

    Points are drawn uniformly from the bounding box of ``C_t`` with
    ``t = min_enclosing_t(body)``. Samples are split into fixed-size chunks,
    each with its own Philox substream spawned from ``seed``, so the result
    does not depend on ``workers``.
    """
    samples = int(samples)
    if samples < 1:
        raise ValueError("samples must be >= 1")
    box = truncated_cone(body.cone, min_enclosing_t(body)).vertices
    lo, hi = box.min(axis=0), box.max(axis=0)
    box_volume = float(np.prod(hi - lo))

    sizes = [CHUNK] * (samples // CHUNK)
    if samples % CHUNK:
        sizes.append(samples % CHUNK)
    streams = np.random.SeedSequence(int(seed)).spawn(len(sizes))
    jobs = list(zip(sizes, streams))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            counts = list(pool.map(lambda job: _count_hits(body, lo, hi, *job), jobs))
    else:
        counts = [_count_hits(body, lo, hi, *job) for job in jobs]
    hits = sum(counts)

    p = hits / samples
    return MCEstimate(
        estimate=p * box_volume,
        stderr=math.sqrt(p * (1.0 - p) / samples) * box_volume,
        samples=samples,
        seed=int(seed),
        box_volume=box_volume,
        hits=hits,
    )


def _facet_cone_volume(points: np.ndarray, normal: np.ndarray) -> float:
    """Volume of the union of simplices with apex ``o`` over a triangulation
    of the planar convex polygon (or polytope) spanned by ``points``."""
    n = points.shape[1]
    if n == 2:
        p, q = points[np.argsort(points @ np.array([-normal[1], normal[0]]))[[0, -1]]]
        return abs(p[0] * q[1] - p[1] * q[0]) / 2.0
    basis = np.linalg.svd(normal[None, :])[2][1:]
    local = (points - points.mean(axis=0)) @ basis.T
    total = 0.0
    for simplex in Delaunay(local).simplices:
        total += abs(np.linalg.det(points[simplex])) / math.factorial(n)
    return total


def brute_cone_volume(body: CFullBody) -> DiscreteMeasure:
    """Cone-volume measure assembled from origin simplices over each facet.

    Uses only facet vertices: the facet triangulation comes from a Delaunay
    triangulation in the facet plane, independent of the facet areas and
    offsets used by :func:`coconvex.core.cone_volume_measure`.
    """
    P = body.truncation
    atoms = []
    for F in _omega_facets(body):
        pts = P.vertices[list(F.vertex_ids)]
        atoms.append((F.normal, _facet_cone_volume(pts, F.normal)))
    n = body.dim
    if not atoms:
        return DiscreteMeasure(np.zeros((0, n)), np.zeros(0))
    dirs, masses = _merge_atoms(atoms)
    return DiscreteMeasure(np.array(dirs), np.array(masses))


def fd_gradient(C: PolyhedralCone, dirs, f, step=1e-5) -> np.ndarray:
    """Central differences of the coconvex volume in each offset.

    ``step`` is a scalar or one step per offset.
    """
    f = np.asarray(f, dtype=float)
    h = np.broadcast_to(np.asarray(step, dtype=float), f.shape)
    if not np.all(h > 0):
        raise StepTooLarge(f"step must be positive, got {step!r}")
    if np.any(f - h <= 0):
        raise StepTooLarge(f"step {step} would make an offset nonpositive")
    g = np.empty(len(f))
    for i in range(len(f)):
        e = np.zeros(len(f))
        e[i] = h[i]
        up = coconvex_volume(wulff_shape(C, dirs, f + e))
        down = coconvex_volume(wulff_shape(C, dirs, f - e))
        g[i] = (up - down) / (2.0 * h[i])
    return g
