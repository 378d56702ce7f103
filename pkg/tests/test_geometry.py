import numpy as np
import pytest
from numpy.testing import assert_allclose

from coconvex import geometry
from coconvex.core import support_value
from coconvex.exceptions import (
    DegenerateInput,
    DirectionOutsideOmega,
    Empty,
    LowerDimensional,
    NotFullDimensional,
    NotPointed,
    NotUnit,
    Unbounded,
)
from coconvex.geometry import (
    Tag,
    halfspace_to_vertices,
    in_omega,
    polar_cone,
    polytope_volume,
    simplicial_volume,
    truncated_cone,
    validate_cone,
)
from coconvex.random import random_body, random_cone, random_directions

from conftest import S2, S3, S5, U_STAR


def _same_rows(A, B, tol=1e-9):
    A, B = np.asarray(A, float), np.asarray(B, float)
    if A.shape != B.shape:
        return False
    return all(np.min(np.abs(B - a).max(axis=1)) <= tol for a in A)


def test_quadrant_cone(quadrant):
    assert _same_rows(quadrant.facet_normals, [[0, -1], [-1, 0]])
    assert_allclose(quadrant.w, [1 / S2, 1 / S2])
    assert quadrant.dim == 2


def test_octant_cone(octant):
    assert_allclose(octant.w, np.ones(3) / S3)
    assert _same_rows(octant.facet_normals, -np.eye(3))


def test_generators_normalized_and_deduplicated():
    C = validate_cone([[2, 0], [0, 3], [1, 0], [1, 1]])
    assert _same_rows(C.generators, [[1, 0], [0, 1]])


@pytest.mark.parametrize(
    "gens, exc",
    [
        ([[1, 0], [-1, 0]], NotPointed),
        ([[1, 0], [0, 1], [-1, -1]], NotPointed),
        ([[1, 0, 0], [0, 1, 0]], NotFullDimensional),
        ([[1, 0], [0, 0]], DegenerateInput),
    ],
)
def test_invalid_cones(gens, exc):
    with pytest.raises(exc):
        validate_cone(gens)


def test_polar_of_quadrant_is_nonpositive_quadrant(quadrant, octant):
    assert _same_rows(polar_cone(quadrant).generators, [[-1, 0], [0, -1]])
    assert _same_rows(polar_cone(octant).generators, -np.eye(3))


def test_polar_of_skew_cone():
    C = validate_cone(np.array([[2, 1], [1, 2]]) / S5)
    P = polar_cone(C)
    assert _same_rows(P.generators, np.array([[1, -2], [-2, 1]]) / S5)
    # every polar generator is nonpositive on C
    assert np.all(P.generators @ C.generators.T <= 1e-12)


@pytest.mark.parametrize("seed", range(10))
def test_polar_involution(seed):
    C = random_cone([2, 3, 4][seed % 3], seed)
    assert _same_rows(polar_cone(polar_cone(C)).generators, C.generators)


def test_in_omega(quadrant):
    assert in_omega(quadrant, U_STAR)
    assert not in_omega(quadrant, [0.0, -1.0])
    assert not in_omega(quadrant, [1.0, 0.0])
    with pytest.raises(NotUnit):
        in_omega(quadrant, [-1.0, -1.0])


def test_unit_square():
    P = halfspace_to_vertices([([1, 0], 1), ([-1, 0], 0), ([0, 1], 1), ([0, -1], 0)])
    assert len(P.vertices) == 4
    assert len(P.facets) == 4
    assert polytope_volume(P) == pytest.approx(1.0, abs=1e-12)


def test_unit_cube():
    hs = [(e, 1.0) for e in np.eye(3)] + [(-e, 0.0) for e in np.eye(3)]
    P = halfspace_to_vertices(hs)
    assert len(P.vertices) == 8
    assert polytope_volume(P) == pytest.approx(1.0, abs=1e-12)
    assert simplicial_volume(P) == pytest.approx(1.0, abs=1e-12)


def test_truncated_quadrant(quadrant):
    P = truncated_cone(quadrant, 1.0)
    assert _same_rows(P.vertices, [[0, 0], [S2, 0], [0, S2]])
    assert polytope_volume(P) == pytest.approx(1.0, abs=1e-12)
    top = P.facets_tagged(Tag.TOP)
    assert len(top) == 1 and top[0].offset == pytest.approx(1.0)
    assert all(F.offset == pytest.approx(0.0, abs=1e-12) for F in P.facets_tagged(Tag.CONE))


def test_halfspace_errors():
    with pytest.raises(Empty):
        halfspace_to_vertices([([1, 0], -1), ([-1, 0], -1), ([0, 1], 1), ([0, -1], 1)])
    with pytest.raises(Unbounded):
        halfspace_to_vertices([([1, 0], 1), ([0, 1], 1)])
    with pytest.raises(LowerDimensional):
        halfspace_to_vertices([([1, 0], 0), ([-1, 0], 0), ([0, 1], 1), ([0, -1], 1)])


@pytest.mark.parametrize("seed", range(20))
def test_facet_and_simplicial_volume_agree(seed):
    rng = np.random.RandomState(seed)
    C = random_cone(2 + seed % 2, rng)
    B = random_body(C, rng.randint(1, 7), rng)
    P = B.truncation
    assert polytope_volume(P) == pytest.approx(simplicial_volume(P), rel=1e-9)
    tol = geometry._point_tol(P.vertices)
    for F in P.facets:
        assert np.all(P.vertices @ F.normal <= F.offset + tol)


@pytest.mark.parametrize("seed", range(10))
def test_vertex_hull_round_trip(seed):
    from scipy.spatial import ConvexHull

    rng = np.random.RandomState(seed)
    C = random_cone(3, rng)
    P = random_body(C, rng.randint(1, 6), rng).truncation
    hull = ConvexHull(P.vertices)
    hs = [(eq[:-1], -eq[-1]) for eq in hull.equations]
    Q = halfspace_to_vertices(hs)
    assert _same_rows(Q.vertices, P.vertices, tol=1e-8)


def test_support_value_examples(quadrant, single):
    assert support_value(quadrant, single, U_STAR) == pytest.approx(-1.0, abs=1e-12)
    assert support_value(quadrant, single, [-0.8, -0.6]) == pytest.approx(-0.6 * S2, abs=1e-12)
    assert support_value(quadrant, single, [-0.6, -0.8]) == pytest.approx(-0.6 * S2, abs=1e-12)
    with pytest.raises(DirectionOutsideOmega):
        support_value(quadrant, single, [0.0, -1.0])


@pytest.mark.parametrize("seed", range(10))
def test_a0_bound_holds_on_random_directions(seed):
    rng = np.random.RandomState(seed)
    C = random_cone(3, rng)
    U = random_directions(C, 5, rng)
    a0 = C.a0(U)
    x = rng.uniform(0.1, 1.0, size=len(C.generators)) @ C.generators
    assert np.all(-(U @ x) >= a0 * np.linalg.norm(x) - 1e-12)
