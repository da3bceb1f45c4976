import numpy as np
import pytest

from physfuse.dynamics import Pose3
from physfuse.errors import ConfigurationError
from physfuse.geometry import TriMesh, box_mesh, ray_triangle_hits, \
    visible_vertices


def camera_at(pos):
    return Pose3([1, 0, 0, 0], pos)


def test_single_camera_sees_facing_face(cube):
    seen = visible_vertices(cube, [camera_at([1.0, 0.0, 0.0])], [])
    assert len(seen) == 4
    assert np.all(seen[:, 0] == 0.05)


def test_full_occluder_blocks_everything(cube):
    slab = box_mesh([0.01, 1.0, 1.0])
    slab = TriMesh(slab.vertices + [0.5, 0, 0], slab.faces)
    seen = visible_vertices(cube, [camera_at([1.0, 0.0, 0.0])], [slab])
    assert len(seen) == 0


def test_half_occluder_leaves_upper_vertices(cube):
    # slab covering the lower half of the view from a +x camera
    slab = box_mesh([0.01, 1.0, 0.5])
    slab = TriMesh(slab.vertices + [0.5, 0.0, -0.25], slab.faces)
    seen = visible_vertices(cube, [camera_at([1.0, 0.0, 0.0])], [slab])
    # oracle: ray-triangle intersection against the slab per +x vertex
    assert len(seen) == 2
    assert np.all(seen[:, 0] == 0.05)
    assert np.all(seen[:, 2] == 0.05)


def test_multiple_cameras_union(cube):
    cams = [camera_at([1.0, 0.0, 0.0]), camera_at([-1.0, 0.0, 0.0])]
    seen = visible_vertices(cube, cams, [])
    assert len(seen) == 8


def test_empty_camera_list_rejected(cube):
    with pytest.raises(ConfigurationError):
        visible_vertices(cube, [], [])


def test_ray_triangle_basic():
    tri = np.array([[[0, -1, -1], [0, 1, -1], [0, 0, 1.0]]])
    t, face = ray_triangle_hits(np.array([[-2.0, 0, 0]]),
                                np.array([[1.0, 0, 0]]), tri)
    assert t[0] == pytest.approx(2.0)
    assert face[0] == 0
    # miss
    t, face = ray_triangle_hits(np.array([[-2.0, 5, 0]]),
                                np.array([[1.0, 0, 0]]), tri)
    assert np.isinf(t[0])
    assert face[0] == -1
    # pointing away
    t, _ = ray_triangle_hits(np.array([[-2.0, 0, 0]]),
                             np.array([[-1.0, 0, 0]]), tri)
    assert np.isinf(t[0])
