import numpy as np
import pytest

from physfuse.dynamics import (BodyState, Pose3, Scene, contact_kinematics,
                               ground_truth_contacts)
from physfuse.geometry import SupportPolytope, convex_hull_mesh
from physfuse.transforms import quat_from_axis_angle


def pusher_scene(center, radius=0.015):
    sched = np.array([[0.0, *center], [100.0, *center]])
    return Scene(pusher_radius=radius, pusher_schedule=sched)


def test_resting_cube_table_gap_zero(cube_net, resting_cube_state):
    scene = pusher_scene([10, 10, 10])
    table, _ = contact_kinematics(cube_net, resting_cube_state, scene, 0.0)
    assert table.gap == pytest.approx(0.0, abs=1e-9)
    assert np.allclose(table.normal, [0, 0, 1])


def test_lifted_cube_table_gap(cube_net):
    scene = pusher_scene([10, 10, 10])
    state = BodyState(Pose3([1, 0, 0, 0], [0, 0, 0.06]), np.zeros(3),
                      np.zeros(3), 0.0)
    table, _ = contact_kinematics(cube_net, state, scene, 0.0)
    assert table.gap == pytest.approx(0.01, abs=1e-9)


def test_pusher_gap_analytic(cube_net, resting_cube_state):
    # sphere r=0.015 centered 0.07 from the cube center along +x:
    # gap = 0.07 - 0.05 - 0.015 (plane-sphere distance)
    scene = pusher_scene([0.07, 0.0, 0.05])
    _, pusher = contact_kinematics(cube_net, resting_cube_state, scene, 0.0)
    assert pusher.gap == pytest.approx(0.005, abs=1e-9)
    # normal points from the environment into the object
    assert np.allclose(pusher.normal, [-1, 0, 0], atol=1e-12)


def test_contact_frames_orthonormal(cube_net, resting_cube_state):
    scene = pusher_scene([0.07, 0.03, 0.08])
    for contact in contact_kinematics(cube_net, resting_cube_state, scene, 0.0):
        F = contact.frame()
        assert np.allclose(F @ F.T, np.eye(3), atol=1e-12)
        assert np.linalg.det(F) == pytest.approx(1.0, abs=1e-12)


def test_rotated_cube_support_point_tracks_rotation(cube_net):
    scene = pusher_scene([10, 10, 10])
    q = quat_from_axis_angle([0, 1, 0], np.radians(30.0))
    state = BodyState(Pose3(q, [0, 0, 0.08]), np.zeros(3), np.zeros(3), 0.0)
    table, _ = contact_kinematics(cube_net, state, scene, 0.0)
    # a tilted cube rests on an edge: deepest point below the center
    assert table.world_point[2] < 0.08
    assert table.gap == pytest.approx(table.world_point[2], abs=1e-12)


def test_negative_gaps_allowed(cube_net):
    scene = pusher_scene([10, 10, 10])
    state = BodyState(Pose3([1, 0, 0, 0], [0, 0, 0.04]), np.zeros(3),
                      np.zeros(3), 0.0)
    table, _ = contact_kinematics(cube_net, state, scene, 0.0)
    assert table.gap == pytest.approx(-0.01, abs=1e-9)


def test_ground_truth_contacts_richer_than_learner(cube, cube_net,
                                                   resting_cube_state):
    # no inverse crime: the data-generating contact set differs from the
    # learner's single-support-point kinematics on a resting box
    scene = pusher_scene([0.07, 0.0, 0.05])
    hull = convex_hull_mesh(cube.vertices)
    rich = ground_truth_contacts(hull, resting_cube_state, scene, 0.0)
    lean = contact_kinematics(cube_net, resting_cube_state, scene, 0.0)
    rich_table = [c for c in rich if c.kind == "table"]
    lean_table = [c for c in lean if c.kind == "table"]
    assert len(rich_table) == 4
    assert len(lean_table) == 1
    # four distinct corners on the data side
    corners = np.stack([c.body_point for c in rich_table])
    assert len(np.unique(np.round(corners, 9), axis=0)) == 4
    # the smoothed learner resolves the flat face to its center, which is
    # not any corner the data simulator uses
    smooth = SupportPolytope(cube_net.vertices, smoothing=0.002)
    smooth_table = contact_kinematics(smooth, resting_cube_state, scene, 0.0)[0]
    assert np.allclose(smooth_table.body_point, [0, 0, -0.05], atol=1e-9)
    assert not any(np.allclose(c.body_point, smooth_table.body_point)
                   for c in rich_table)
    # pusher gap agrees between the two models on a flat face
    rich_push = [c for c in rich if c.kind == "pusher"][0]
    lean_push = [c for c in lean if c.kind == "pusher"][0]
    assert rich_push.gap == pytest.approx(lean_push.gap, abs=1e-9)
