import numpy as np
import pytest

from conftest import cube_sdf, sphere_sdf
from physfuse.errors import ConfigurationError
from physfuse.geometry import ShapeField
from physfuse.optim import Adam


def sphere_field(cell=0.005):
    return ShapeField.from_function(sphere_sdf, [-0.08] * 3, [0.08] * 3, cell)


def cube_field(cell=0.005):
    return ShapeField.from_function(cube_sdf, [-0.08] * 3, [0.08] * 3, cell)


def test_sphere_surface_point():
    f = sphere_field()
    assert f.query(np.array([0.05, 0, 0])) == pytest.approx(0.0, abs=1e-9)


def test_sphere_outside_point():
    f = sphere_field()
    # radial SDF d - r; trilinear error bounded by the cell size
    assert f.query(np.array([0.10, 0, 0])) == pytest.approx(0.05, abs=f.cell_size)


def test_cube_interior_point_against_sampled_surface():
    # oracle: min distance to a densely sampled cube surface, sign by containment
    f = cube_field()
    p = np.array([0.02, 0.01, -0.01])
    u = np.linspace(-0.05, 0.05, 201)
    gx, gy = np.meshgrid(u, u, indexing="ij")
    faces = []
    for axis in range(3):
        for s in (-0.05, 0.05):
            pts = np.zeros((gx.size, 3))
            pts[:, axis] = s
            pts[:, (axis + 1) % 3] = gx.reshape(-1)
            pts[:, (axis + 2) % 3] = gy.reshape(-1)
            faces.append(pts)
    surface = np.concatenate(faces)
    oracle = -np.min(np.linalg.norm(surface - p, axis=1))  # inside
    assert oracle == pytest.approx(-0.03, abs=1e-6)
    assert f.query(p) == pytest.approx(oracle, abs=f.cell_size)


def test_outside_grid_is_clamped_plus_euclidean_and_continuous():
    f = sphere_field()
    inside_edge = f.query(np.array([0.0799, 0.0, 0.0]))
    just_out = f.query(np.array([0.0801, 0.0, 0.0]))
    assert abs(just_out - inside_edge) < 1e-3
    far = f.query(np.array([1.08, 0.0, 0.0]))
    assert far == pytest.approx(f.query(np.array([0.08, 0, 0])) + 1.0, abs=1e-9)


def test_total_function_finite_everywhere():
    f = sphere_field()
    rng = np.random.default_rng(0)
    pts = rng.normal(scale=5.0, size=(1000, 3))
    assert np.all(np.isfinite(f.query(pts)))


def test_invariants_rejected():
    with pytest.raises(ConfigurationError):
        ShapeField([0, 0, 0], 0.0, np.zeros((4, 4, 4)))
    with pytest.raises(ConfigurationError):
        ShapeField([0, 0, 0], 0.01, np.zeros((1, 4, 4)))
    with pytest.raises(ConfigurationError):
        ShapeField([0, 0, 0], 0.01, np.full((4, 4, 4), np.nan))


def test_gradient_fit_reaches_optimizer_tolerance():
    # training on an exact-SDF target drives node error below the
    # optimizer's stopping tolerance
    target = sphere_field()
    field = ShapeField(target.origin, target.cell_size,
                       np.zeros_like(target.values))
    adam = Adam({"grid": 5e-3})
    goal = target.values.reshape(-1)
    vals = field.values.reshape(-1)
    grad_tol, tolerance = 1e-8, 1e-4
    for _ in range(5000):
        grad = 2.0 * (vals - goal)
        if np.max(np.abs(grad)) < grad_tol:
            break
        vals = adam.step({"grid": vals}, {"grid": grad})["grid"]
    assert np.max(np.abs(vals - goal)) <= tolerance


def test_binary_roundtrip(tmp_path):
    f = cube_field()
    f.save(tmp_path / "field.bin")
    g = ShapeField.load(tmp_path / "field.bin")
    assert g.dims == f.dims
    assert np.allclose(g.origin, f.origin)
    assert g.cell_size == f.cell_size
    # float32 storage
    assert np.allclose(g.values, f.values, atol=1e-6)
    assert (tmp_path / "field.bin.json").exists()


def test_query_with_support_matches_query():
    f = cube_field()
    rng = np.random.default_rng(1)
    pts = rng.uniform(-0.12, 0.12, size=(200, 3))
    vals, idx, w = f.query_with_support(pts)
    assert np.allclose(vals, f.query(pts))
    # weights sum to one (interpolation partition of unity)
    assert np.allclose(w.sum(axis=1), 1.0)
