import numpy as np
import pytest

from coconvex import validate_cone, wulff_shape

S2, S3, S5 = np.sqrt(2.0), np.sqrt(3.0), np.sqrt(5.0)
U_STAR = np.array([-1.0, -1.0]) / S2
U1 = np.array([-1.0, -2.0]) / S5
U2 = np.array([-2.0, -1.0]) / S5


@pytest.fixture
def quadrant():
    return validate_cone([[1.0, 0.0], [0.0, 1.0]])


@pytest.fixture
def octant():
    return validate_cone(np.eye(3))


@pytest.fixture
def single(quadrant):
    """Quadrant body with the one constraint (u*, 1); volume 1."""
    return wulff_shape(quadrant, [U_STAR], [1.0])


@pytest.fixture
def pair_body(quadrant):
    """Quadrant body with constraints (u1, 1), (u2, 1); volume 5/3."""
    return wulff_shape(quadrant, [U1, U2], [1.0, 1.0])


@pytest.fixture
def octant_body(octant):
    return wulff_shape(octant, [-np.ones(3) / S3], [1.0])
