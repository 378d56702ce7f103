"""Random cones, directions and bodies for property testing."""
from __future__ import annotations

import numpy as np
from sklearn.utils import check_random_state

from .core import CFullBody, canonicalize, wulff_shape
from .geometry import PolyhedralCone, validate_cone


def random_cone(n: int, random_state=None) -> PolyhedralCone:
    """A random pointed cone in dimension 2, 3 or 4.

    In the plane the opening angle is drawn from [40, 140] degrees; in higher
    dimension 3 to 5 rays are drawn from a cap of angular radius 15-50
    degrees around a random axis.
    """
    rng = check_random_state(random_state)
    if n == 2:
        start = rng.uniform(0, 2 * np.pi)
        opening = np.deg2rad(rng.uniform(40, 140))
        G = [[np.cos(a), np.sin(a)] for a in (start, start + opening)]
        return validate_cone(G)
    while True:
        axis = rng.normal(size=n)
        axis /= np.linalg.norm(axis)
        basis = np.linalg.svd(axis[None, :])[2][1:]
        k = rng.randint(n, n + 3)
        radius = np.tan(np.deg2rad(rng.uniform(15, 50)))
        angles = np.sort(rng.uniform(0, 2 * np.pi, size=k)) if n == 3 else None
        rays = []
        for j in range(k):
            if n == 3:
                d = np.cos(angles[j]) * basis[0] + np.sin(angles[j]) * basis[1]
            else:
                d = basis.T @ rng.normal(size=n - 1)
                d /= np.linalg.norm(d)
            rays.append(axis + radius * rng.uniform(0.6, 1.0) * d)
        try:
            C = validate_cone(rays)
        except ValueError:
            continue
        if len(C.generators) >= n:
            return C


def random_directions(C: PolyhedralCone, m: int, random_state=None, margin: float = 0.2) -> np.ndarray:
    """``m`` directions strictly inside Omega_C: normalized positive
    combinations of the facet normals with weights in ``[margin, 1]``."""
    rng = check_random_state(random_state)
    W = rng.uniform(margin, 1.0, size=(m, len(C.facet_normals)))
    U = W @ C.facet_normals
    return U / np.linalg.norm(U, axis=1)[:, None]


def random_body(C: PolyhedralCone, m: int, random_state=None, f_range=(0.5, 2.0)) -> CFullBody:
    rng = check_random_state(random_state)
    U = random_directions(C, m, rng)
    f = rng.uniform(*f_range, size=m)
    return wulff_shape(C, U, f)


def random_active_body(C: PolyhedralCone, m: int, random_state=None, min_active: int = 1) -> CFullBody:
    """Canonical random body with at least ``min_active`` facets."""
    rng = check_random_state(random_state)
    while True:
        B = canonicalize(random_body(C, m, rng))
        if len(B) >= min_active:
            return B
