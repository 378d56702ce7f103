import numpy as np
import pytest
from numpy.testing import assert_allclose

from coconvex.core import coconvex_volume, cone_volume_measure, facet_areas
from coconvex.exceptions import StepTooLarge
from coconvex.oracles import brute_cone_volume, fd_gradient, mc_volume
from coconvex.random import random_body, random_cone

from conftest import U1, U2, U_STAR


def test_mc_single_sample(single):
    est = mc_volume(single, 1, seed=3)
    assert est.estimate in (0.0, est.box_volume)
    assert est.samples == 1


def test_mc_deterministic(pair_body):
    a = mc_volume(pair_body, 200_000, seed=11)
    b = mc_volume(pair_body, 200_000, seed=11, workers=3)
    c = mc_volume(pair_body, 200_000, seed=12)
    assert a == b
    assert a.estimate != c.estimate


def test_mc_golden(single, pair_body):
    for body in (single, pair_body):
        est = mc_volume(body, 200_000, seed=5)
        assert est.within(coconvex_volume(body))


def test_mc_rejects_zero_samples(single):
    with pytest.raises(ValueError):
        mc_volume(single, 0)


def test_brute_cone_volume_examples(single, pair_body, octant_body):
    assert_allclose(brute_cone_volume(single).masses, [1.0], rtol=1e-12)
    mu = brute_cone_volume(pair_body)
    assert_allclose([mu.mass_at(U1), mu.mass_at(U2)], [5 / 6, 5 / 6], rtol=1e-12)
    assert_allclose(brute_cone_volume(octant_body).masses, [np.sqrt(3) / 2], rtol=1e-12)


@pytest.mark.parametrize("seed", range(15))
def test_brute_matches_measure(seed):
    rng = np.random.RandomState(seed)
    C = random_cone([2, 3, 4][seed % 3], rng)
    B = random_body(C, rng.randint(1, 7), rng)
    ref, got = cone_volume_measure(B), brute_cone_volume(B)
    assert len(ref) == len(got)
    for u, m in zip(ref.directions, ref.masses):
        assert got.mass_at(u) == pytest.approx(m, rel=1e-10)


def test_fd_gradient_examples(quadrant, single, pair_body):
    assert_allclose(fd_gradient(quadrant, [U_STAR], [1.0], 1e-5), [2.0], rtol=1e-8)
    assert_allclose(fd_gradient(quadrant, [U1, U2], [1.0, 1.0], 1e-5), [5 / 3, 5 / 3], rtol=1e-8)
    with pytest.raises(StepTooLarge):
        fd_gradient(quadrant, [U_STAR], [1.0], 1.5)


@pytest.mark.parametrize("seed", range(10))
def test_fd_matches_facet_areas(seed):
    rng = np.random.RandomState(seed)
    C = random_cone(2 + seed % 2, rng)
    B = random_body(C, rng.randint(1, 6), rng)
    g = facet_areas(B)
    fd = fd_gradient(C, B.directions, B.offsets, 1e-5 * B.offsets.min())
    assert np.linalg.norm(fd - g) <= 1e-4 * np.linalg.norm(g)
