import numpy as np
import pytest

from physfuse.errors import ConfigurationError
from physfuse.geometry import (TriMesh, chamfer_distance, cube_mesh,
                               point_mesh_distance, volumetric_iou)

# frozen from a 10^6-sample brute-force run (exact point-to-surface
# distances, area-weighted sampling, seed 12345)
TRANSLATED_CUBE_CHAMFER_CM = 0.336


def translated(mesh, offset):
    return TriMesh(mesh.vertices + np.asarray(offset), mesh.faces)


def test_identical_meshes_near_zero(cube):
    # samples lie exactly on the other mesh's surface
    assert chamfer_distance(cube, cube, 2000) == pytest.approx(0.0, abs=1e-3)


def test_translated_cube_matches_brute_force_oracle(cube):
    other = translated(cube, [0.01, 0.0, 0.0])
    value = chamfer_distance(cube, other, 20000)
    assert value == pytest.approx(TRANSLATED_CUBE_CHAMFER_CM, rel=0.05)


def test_chamfer_symmetric_exactly(cube):
    other = translated(cube, [0.013, -0.004, 0.002])
    assert chamfer_distance(cube, other, 5000, seed=3) \
        == chamfer_distance(other, cube, 5000, seed=3)


def test_chamfer_deterministic_per_seed(cube):
    other = translated(cube, [0.01, 0.0, 0.0])
    a = chamfer_distance(cube, other, 5000, seed=1)
    b = chamfer_distance(cube, other, 5000, seed=1)
    c = chamfer_distance(cube, other, 5000, seed=2)
    assert a == b
    assert a != c


def test_chamfer_rejects_empty(cube):
    empty = TriMesh(np.zeros((0, 3)), np.zeros((0, 3), dtype=int))
    with pytest.raises(ConfigurationError):
        chamfer_distance(cube, empty)


def test_point_mesh_distance_exact_on_cube(cube):
    pts = np.array([[0.06, 0.0, 0.0],     # face
                    [0.06, 0.06, 0.0],    # edge
                    [0.06, 0.06, 0.06],   # corner
                    [0.0, 0.0, 0.0]])     # center (inside: surface dist)
    d = point_mesh_distance(pts, cube)
    expect = [0.01, 0.01 * np.sqrt(2), 0.01 * np.sqrt(3), 0.05]
    assert np.allclose(d, expect, atol=1e-12)


def test_iou_identical(cube):
    assert volumetric_iou(cube, cube, voxel=0.002) == pytest.approx(1.0, abs=0.02)


def test_iou_disjoint(cube):
    other = translated(cube, [1.0, 0.0, 0.0])
    assert volumetric_iou(cube, other, voxel=0.002) == 0.0


def test_iou_half_shift_analytic(cube):
    # overlap 0.5 of a cube volume; union 1.5 -> IoU = 1/3
    other = translated(cube, [0.05, 0.0, 0.0])
    assert volumetric_iou(cube, other, voxel=0.002) \
        == pytest.approx(1.0 / 3.0, abs=0.03)


def test_iou_bounds_and_symmetry(cube):
    other = translated(cube, [0.03, 0.01, 0.0])
    v1 = volumetric_iou(cube, other, voxel=0.0025)
    v2 = volumetric_iou(other, cube, voxel=0.0025)
    assert 0.0 <= v1 <= 1.0
    assert v1 == pytest.approx(v2, abs=1e-12)


def test_iou_rejects_non_watertight(cube):
    open_mesh = TriMesh(cube.vertices, cube.faces[:-2])
    with pytest.raises(ConfigurationError):
        volumetric_iou(cube, open_mesh, voxel=0.004)
