import numpy as np
import pytest

from physfuse.dynamics import BodyState, InertialParams, Pose3, Scene
from physfuse.geometry import SupportPolytope, cube_mesh

CUBE_EDGE = 0.1
CUBE_HALF = 0.05


def cube_sdf(points: np.ndarray) -> np.ndarray:
    """Analytic SDF of the axis-aligned cube with half-extent 0.05 m."""
    q = np.abs(np.atleast_2d(points)) - CUBE_HALF
    outside = np.linalg.norm(np.maximum(q, 0.0), axis=1)
    inside = np.minimum(q.max(axis=1), 0.0)
    return outside + inside


def sphere_sdf(points: np.ndarray, radius: float = 0.05) -> np.ndarray:
    return np.linalg.norm(np.atleast_2d(points), axis=1) - radius


@pytest.fixture
def cube():
    return cube_mesh(CUBE_EDGE)


@pytest.fixture
def cube_net(cube):
    return SupportPolytope(cube.vertices, smoothing=0.0)


@pytest.fixture
def cube_params(cube):
    return InertialParams.uniform_density(cube, 0.5)


@pytest.fixture
def far_pusher_scene():
    # pusher parked far away: pure table dynamics
    return Scene(pusher_schedule=np.array([[0.0, 10.0, 10.0, 10.0],
                                           [100.0, 10.0, 10.0, 10.0]]))


@pytest.fixture
def resting_cube_state():
    return BodyState(Pose3([1, 0, 0, 0], [0, 0, CUBE_HALF]),
                     np.zeros(3), np.zeros(3), 0.0)
