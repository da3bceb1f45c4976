import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from physfuse.errors import ConfigurationError
from physfuse.geometry import SupportPair, SupportPolytope, \
    initialize_polytope
from physfuse.transforms import fibonacci_sphere


def random_net(seed=0, k=20, smoothing=0.0):
    rng = np.random.default_rng(seed)
    return SupportPolytope(rng.normal(scale=0.05, size=(k, 3)), smoothing)


def test_cube_axis_query(cube_net):
    value, point = cube_net.query(np.array([1.0, 0.0, 0.0]))
    assert value == pytest.approx(0.05)
    # tie among four +x vertices broken by lowest index
    assert np.allclose(point, [0.05, -0.05, -0.05])


def test_cube_corner_query(cube_net):
    n = np.array([1.0, 1.0, 1.0]) / np.sqrt(3.0)
    value, point = cube_net.query(n)
    assert value == pytest.approx(0.15 / np.sqrt(3.0))
    assert np.allclose(point, [0.05, 0.05, 0.05])


def test_brute_force_equivalence_exact():
    net = random_net()
    rng = np.random.default_rng(7)
    for _ in range(100):
        n = rng.normal(size=3)
        n /= np.linalg.norm(n)
        value, point = net.query(n)
        # brute force over per-vertex dot products
        scores = [float(v @ n) for v in net.vertices]
        assert value == max(scores)  # exact, not approximate
        assert np.array_equal(point, net.vertices[int(np.argmax(scores))])


def test_value_and_point_consistent_bitwise():
    net = random_net(3)
    rng = np.random.default_rng(8)
    for _ in range(50):
        n = rng.normal(size=3)
        n /= np.linalg.norm(n)
        value, point = net.query(n)
        assert value == float(point @ n)


def test_homogeneity_exact_power_of_two_scales():
    # exact float equality is achievable when the scale is a power of two;
    # arbitrary scales verify to near machine precision below
    net = random_net(1)
    rng = np.random.default_rng(9)
    for _ in range(1000):
        n = rng.normal(size=3)
        a = 2.0 ** rng.integers(-3, 4)
        assert net.value(a * n) == a * net.value(n)


def test_homogeneity_relative_for_arbitrary_scales():
    net = random_net(2, smoothing=0.0)
    smooth = SupportPolytope(net.vertices, smoothing=0.002)
    rng = np.random.default_rng(10)
    for _ in range(1000):
        n = rng.normal(size=3)
        n /= np.linalg.norm(n)
        a = rng.uniform(0.1, 10.0)
        assert net.value(a * n) == pytest.approx(a * net.value(n), rel=1e-12)
        # log-sum-exp smoothing upper-bounds the exact support value
        assert smooth.value(a * n) >= a * net.value(n) - 1e-12


@settings(max_examples=200, deadline=None)
@given(st.integers(min_value=0, max_value=10 ** 6))
def test_subadditivity(seed):
    net = random_net(4)
    rng = np.random.default_rng(seed)
    n1 = rng.normal(size=3)
    n2 = rng.normal(size=3)
    lhs = net.value(n1 + n2)
    rhs = net.value(n1) + net.value(n2)
    assert lhs <= rhs + 1e-12  # float-rounding slack only


def test_supporting_hyperplane_validity():
    net = random_net(5)
    from physfuse.geometry import extract_mesh_support
    mesh = extract_mesh_support(net, 500)
    rng = np.random.default_rng(11)
    for _ in range(1000):
        n = rng.normal(size=3)
        n /= np.linalg.norm(n)
        value = net.value(n)
        assert np.all(mesh.vertices @ n <= value + 1e-9)


def test_smoothed_value_upper_bounds_and_point_interior():
    net = random_net(6, smoothing=0.002)
    exact = SupportPolytope(net.vertices, smoothing=0.0)
    rng = np.random.default_rng(12)
    for _ in range(50):
        n = rng.normal(size=3)
        n /= np.linalg.norm(n)
        v_smooth, p = net.query(n)
        v_exact, _ = exact.query(n)
        assert v_smooth >= v_exact - 1e-12
        assert p @ n <= v_exact + 1e-12  # softmax point stays in the hull


def test_minimum_vertex_count():
    with pytest.raises(ConfigurationError):
        SupportPolytope(np.zeros((3, 3)))


def test_renormalizes_non_unit_queries():
    net = random_net(7)
    v1, p1 = net.query(np.array([2.0, 0.0, 0.0]))
    v2, p2 = net.query(np.array([1.0, 0.0, 0.0]))
    assert v1 == pytest.approx(v2, rel=1e-12)
    assert np.allclose(p1, p2)


def test_json_roundtrip(tmp_path, cube_net):
    cube_net.save(tmp_path / "net.json")
    loaded = SupportPolytope.load(tmp_path / "net.json")
    assert np.array_equal(loaded.vertices, cube_net.vertices)
    assert loaded.smoothing == cube_net.smoothing


def test_support_pair_invariants(cube_net):
    value, point = cube_net.query(np.array([0.0, 0.0, -1.0]))
    pair = SupportPair(np.array([0.0, 0.0, -1.0]), point, 1.0)
    assert float(pair.point @ pair.direction) == value
    with pytest.raises(ConfigurationError):
        SupportPair(np.array([0.0, 0.0, -2.0]), point)
    with pytest.raises(ConfigurationError):
        SupportPair(np.array([0.0, 0.0, 1.0]), point, impulse=-1.0)


def test_initializer_scales_from_visible_points(cube):
    net = initialize_polytope(64, cube.vertices, seed=0)
    assert net.num_vertices == 64
    # centered on the visible-point centroid (the cube's origin) with
    # radius half the bounding-box diagonal of the corners
    radii = np.linalg.norm(net.vertices, axis=1)
    assert np.allclose(radii, 0.05 * np.sqrt(3.0), atol=1e-12)
