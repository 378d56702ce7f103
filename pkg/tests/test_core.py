import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from coconvex.core import (
    DiscreteMeasure,
    canonicalize,
    co_sum,
    co_sum_all,
    coconvex_volume,
    cone_volume_measure,
    facet_areas,
    integrate_support,
    min_enclosing_t,
    mixed_area_measure,
    mixed_volume,
    mixed_volume_integral,
    restrict_to_normals,
    scale,
    support_height,
    surface_area_measure,
    truncate,
    truncation_difference_volume,
    validate_measure,
    wulff_shape,
)
from coconvex.exceptions import (
    ConeMismatch,
    DirectionOutsideOmega,
    EmptySelection,
    InvalidMeasure,
    NonpositiveOffset,
    NonpositiveScale,
    WrongArity,
)
from coconvex.geometry import Tag, validate_cone
from coconvex.random import random_active_body, random_body, random_cone, random_directions

from conftest import S2, S3, S5, U1, U2, U_STAR


def test_wulff_shape_quadrant(single):
    K_pts = np.array([[S2, 0], [0, S2], [2, 2], [3, 0.1]])
    assert np.all(K_pts @ U_STAR <= -1 + 1e-12)
    assert_allclose(np.sort(single.vertices, axis=0), [[0, 0], [S2, S2]], atol=1e-12)


def test_wulff_shape_errors(quadrant):
    with pytest.raises(DirectionOutsideOmega):
        wulff_shape(quadrant, [[0.0, -1.0]], [1.0])
    with pytest.raises(NonpositiveOffset):
        wulff_shape(quadrant, [U_STAR], [0.0])
    with pytest.raises(ValueError):
        wulff_shape(quadrant, [U_STAR, U1], [1.0])


def test_min_enclosing_t(single, octant_body):
    assert min_enclosing_t(single) == pytest.approx(2 * S2)
    assert min_enclosing_t(octant_body) == pytest.approx(2 * S3)
    assert min_enclosing_t(scale(single, 3.5)) == pytest.approx(3.5 * 2 * S2)
    assert support_height(single) >= min_enclosing_t(single)


def test_golden_volumes(single, octant_body, pair_body):
    assert coconvex_volume(single) == pytest.approx(1.0, abs=1e-12)
    assert coconvex_volume(octant_body) == pytest.approx(S3 / 2, abs=1e-12)
    assert coconvex_volume(pair_body) == pytest.approx(5 / 3, abs=1e-12)


def test_truncation_tags(pair_body):
    P = truncate(pair_body)
    tags = sorted(F.tag.value for F in P.facets)
    assert tags == ["cone", "cone", "omega", "omega", "top"]
    for F in P.facets_tagged(Tag.OMEGA):
        assert F.offset < 0


def test_surface_area_measure(single, pair_body, quadrant):
    mu = surface_area_measure(single)
    assert_allclose(mu.directions, [U_STAR])
    assert_allclose(mu.masses, [2.0])
    mu = surface_area_measure(pair_body)
    assert_allclose(mu.mass_at(U1), 5 / 3)
    assert_allclose(mu.mass_at(U2), 5 / 3)
    redundant = wulff_shape(quadrant, [U1, U2, U_STAR], [1.0, 1.0, 0.5])
    mu2 = surface_area_measure(redundant)
    assert len(mu2) == 2
    assert mu2.mass_at(U_STAR) == 0.0
    assert_allclose(facet_areas(redundant), [5 / 3, 5 / 3, 0.0])


def test_cone_volume_measure(single, pair_body):
    assert_allclose(cone_volume_measure(single).masses, [1.0])
    mu = cone_volume_measure(pair_body)
    assert_allclose(mu.masses, [5 / 6, 5 / 6])
    assert mu.total == coconvex_volume(pair_body)
    assert_allclose(cone_volume_measure(scale(pair_body, 1.7)).masses, 1.7**2 * mu.masses)


def test_co_sum_single_normal(single):
    s = co_sum(single, single)
    assert_allclose(s.offsets, [2.0])
    assert coconvex_volume(s) == pytest.approx(4.0)


def test_co_sum_mixed_instance(single, pair_body):
    s = co_sum(single, pair_body)
    assert len(s) == 3
    expect = {tuple(np.round(U_STAR, 9)): 1 + np.sqrt(10) / 3}
    expect[tuple(np.round(U1, 9))] = 1 + S2 / S5
    expect[tuple(np.round(U2, 9))] = 1 + S2 / S5
    for u, f in zip(s.directions, s.offsets):
        assert f == pytest.approx(expect[tuple(np.round(u, 9))], abs=1e-10)


def test_co_sum_cone_mismatch(single, octant_body):
    with pytest.raises(ConeMismatch):
        co_sum(single, octant_body)


@pytest.mark.parametrize("seed", range(12))
def test_co_sum_support_additivity(seed):
    rng = np.random.RandomState(seed)
    C = random_cone(2 + seed % 2, rng)
    a, b = random_body(C, rng.randint(1, 5), rng), random_body(C, rng.randint(1, 5), rng)
    U = random_directions(C, 32, rng, margin=0.05)
    assert_allclose(co_sum(a, b).support(U), a.support(U) + b.support(U), atol=1e-9)


def test_scale(single, octant_body):
    assert scale(single, 1.0) is single
    assert coconvex_volume(scale(single, 2.0)) == pytest.approx(4.0)
    assert coconvex_volume(scale(octant_body, 0.5)) == pytest.approx(S3 / 2 / 8)
    with pytest.raises(NonpositiveScale):
        scale(single, 0.0)


@given(st.integers(0, 2**31 - 1), st.sampled_from([0.5, 2.0, 7.3]))
@settings(max_examples=20, deadline=None)
def test_homogeneity(seed, lam):
    rng = np.random.RandomState(seed)
    C = random_cone(2 + seed % 2, rng)
    A = random_body(C, rng.randint(1, 6), rng)
    n = C.dim
    assert coconvex_volume(scale(A, lam)) == pytest.approx(lam**n * coconvex_volume(A), rel=1e-10)


def test_restrict_to_normals(pair_body):
    assert coconvex_volume(restrict_to_normals(pair_body, [0])) == pytest.approx(5 / 4)
    assert coconvex_volume(restrict_to_normals(pair_body, [1])) == pytest.approx(5 / 4)
    full = restrict_to_normals(pair_body, [0, 1])
    assert coconvex_volume(full) == pytest.approx(5 / 3)
    with pytest.raises(EmptySelection):
        restrict_to_normals(pair_body, [])


@pytest.mark.parametrize("seed", range(8))
def test_restriction_monotone(seed):
    rng = np.random.RandomState(seed)
    C = random_cone(2 + seed % 2, rng)
    A = random_active_body(C, 6, rng, min_active=2)
    order = rng.permutation(len(A))
    vols = [coconvex_volume(restrict_to_normals(A, order[: k + 1])) for k in range(len(A))]
    assert np.all(np.diff(vols) >= -1e-12)
    assert vols[-1] == pytest.approx(coconvex_volume(A), rel=1e-12)


@pytest.mark.parametrize("seed", range(15))
def test_lemma1_identity(seed):
    rng = np.random.RandomState(seed)
    C = random_cone(2 + seed % 2, rng)
    A = random_body(C, rng.randint(1, 9), rng)
    assert coconvex_volume(A) == pytest.approx(truncation_difference_volume(A), rel=1e-9)


def test_canonicalize_keeps_set(quadrant):
    B = wulff_shape(quadrant, [U1, U2, U_STAR], [1.0, 1.0, 0.5])
    c = canonicalize(B)
    assert len(c) == 2
    U = random_directions(quadrant, 16, 0)
    assert_allclose(c.support(U), B.support(U), atol=1e-12)


def test_mixed_volume_examples(single, pair_body):
    assert mixed_volume([single, single]) == pytest.approx(1.0)
    assert mixed_volume([single, scale(single, 2.0)]) == pytest.approx(2.0)
    s = co_sum(single, pair_body)
    by_hand = 0.5 * (coconvex_volume(s) - coconvex_volume(single) - coconvex_volume(pair_body))
    assert mixed_volume([single, pair_body]) == pytest.approx(by_hand, rel=1e-12)
    with pytest.raises(WrongArity):
        mixed_volume([single])


@pytest.mark.parametrize("seed", range(6))
def test_mixed_volume_symmetric_3d(seed):
    rng = np.random.RandomState(seed)
    C = random_cone(3, rng)
    bodies = [random_body(C, rng.randint(1, 4), rng) for _ in range(3)]
    ref = mixed_volume(bodies)
    for perm in itertools.permutations(range(3)):
        assert mixed_volume([bodies[i] for i in perm]) == pytest.approx(ref, rel=1e-8)


def test_mixed_area_measure(single, pair_body):
    mu = mixed_area_measure([pair_body])
    assert_allclose(mu.masses, surface_area_measure(pair_body).masses)
    # facet length 2f is linear in f
    nu = mixed_area_measure([co_sum(single, scale(single, 2.0))])
    assert_allclose(nu.masses, [6.0])
    assert mixed_volume_integral([single, pair_body]) == pytest.approx(mixed_volume([single, pair_body]), rel=1e-8)


def test_integrate_support(single):
    mu = surface_area_measure(single)
    assert integrate_support(single, mu) == pytest.approx(coconvex_volume(single))


def test_validate_measure(quadrant):
    with pytest.raises(InvalidMeasure):
        validate_measure(quadrant, DiscreteMeasure(np.array([U_STAR]), np.array([-1.0])))
    with pytest.raises(InvalidMeasure):
        validate_measure(quadrant, DiscreteMeasure(np.array([[0.0, -1.0]]), np.array([1.0])))


def test_co_sum_all(single):
    s = co_sum_all([single, single, single])
    assert_allclose(s.offsets, [3.0])
