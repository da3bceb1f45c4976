import numpy as np
import pytest

from conftest import cube_sdf, sphere_sdf
from physfuse.errors import ConfigurationError, DegenerateHull, EmptyLevelSet
from physfuse.geometry import (ShapeField, SupportPolytope, box_mesh,
                               convex_hull_mesh, cube_mesh, cylinder_mesh,
                               extract_mesh_sdf, extract_mesh_support,
                               frustum_mesh, load_obj, mesh_mass_properties,
                               save_obj)


def test_marching_cubes_sphere_radii():
    field = ShapeField.from_function(sphere_sdf, [-0.08] * 3, [0.08] * 3, 0.005)
    mesh = extract_mesh_sdf(field)
    radii = np.linalg.norm(mesh.vertices, axis=1)
    assert np.all(np.abs(radii - 0.05) <= field.cell_size)
    # round trip: extracted vertices sit on the zero set of the field
    assert np.max(np.abs(field.query(mesh.vertices))) <= field.cell_size


def test_marching_cubes_empty_level_set():
    field = ShapeField([0, 0, 0], 0.01, np.full((8, 8, 8), 0.3))
    with pytest.raises(EmptyLevelSet):
        extract_mesh_sdf(field)


def test_marching_cubes_cube_volume():
    field = ShapeField.from_function(cube_sdf, [-0.08] * 3, [0.08] * 3, 0.004)
    mesh = extract_mesh_sdf(field)
    assert mesh.is_watertight()
    # voxel-count style oracle: the level-set volume within 5% of (0.1)^3
    assert mesh.volume() == pytest.approx(1e-3, rel=0.05)


def test_support_mesh_cube_volume(cube_net):
    mesh = extract_mesh_support(cube_net, 5768)
    assert mesh.volume() == pytest.approx(1e-3, rel=0.01)


def test_support_mesh_tetrahedron_exact():
    verts = np.array([[0, 0, 0], [0.1, 0, 0], [0, 0.1, 0], [0, 0, 0.1]])
    net = SupportPolytope(verts)
    mesh = extract_mesh_support(net, 64)
    assert len(mesh.vertices) == 4
    got = {tuple(np.round(v, 12)) for v in mesh.vertices}
    want = {tuple(v) for v in verts}
    assert got == want


def test_support_mesh_degenerate():
    net = SupportPolytope(np.tile([[0.01, 0.02, 0.03]], (4, 1)))
    with pytest.raises(DegenerateHull):
        extract_mesh_support(net, 64)


def test_hull_orientation_outward(cube_net):
    mesh = extract_mesh_support(cube_net, 200)
    centers = mesh.triangles.mean(axis=1)
    normals = mesh.face_normals()
    assert np.all(np.einsum("ij,ij->i", centers, normals) > 0)


def test_primitive_mass_properties():
    box = box_mesh([0.08, 0.12, 0.16])
    vol, com, inertia = mesh_mass_properties(box)
    assert vol == pytest.approx(0.08 * 0.12 * 0.16, rel=1e-9)
    assert np.allclose(com, 0.0, atol=1e-12)
    expected = vol / 12.0 * np.array([0.12 ** 2 + 0.16 ** 2,
                                      0.08 ** 2 + 0.16 ** 2,
                                      0.08 ** 2 + 0.12 ** 2])
    assert np.allclose(np.diag(inertia), expected, rtol=1e-9)

    cyl = cylinder_mesh(0.04, 0.12, segments=256)
    vol, com, inertia = mesh_mass_properties(cyl)
    assert vol == pytest.approx(np.pi * 0.04 ** 2 * 0.12, rel=1e-3)
    assert inertia[2, 2] / vol == pytest.approx(0.04 ** 2 / 2, rel=1e-3)


def test_frustum_watertight_and_centroid_below_middle():
    fr = frustum_mesh(0.06, 0.03, 0.1)
    assert fr.is_watertight()
    _, com, _ = mesh_mass_properties(fr)
    assert com[2] < 0.0  # wider bottom pulls the centroid down


def test_obj_roundtrip(tmp_path, cube):
    save_obj(cube, tmp_path / "cube.obj")
    loaded = load_obj(tmp_path / "cube.obj")
    assert np.allclose(loaded.vertices, cube.vertices)
    assert np.array_equal(loaded.faces, cube.faces)
    assert loaded.is_watertight()


def test_degenerate_faces_dropped():
    verts = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0.5, 0.5, 0.0]])
    faces = np.array([[0, 1, 2], [0, 1, 1]])  # second face has zero area
    from physfuse.geometry import TriMesh
    mesh = TriMesh(verts, faces)
    assert len(mesh.faces) == 1
    with pytest.raises(ConfigurationError):
        TriMesh(verts, np.array([[0, 1, 9]]))


def test_convex_hull_of_random_points():
    rng = np.random.default_rng(0)
    pts = rng.normal(size=(100, 3))
    hull = convex_hull_mesh(pts)
    assert hull.is_watertight()
    # all points inside or on the hull
    normals = hull.face_normals()
    anchors = hull.triangles[:, 0]
    signed = (pts @ normals.T - np.einsum("fi,fi->f", anchors, normals))
    assert signed.max() <= 1e-9
