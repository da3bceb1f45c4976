import numpy as np
import pytest

from physfuse.dynamics import (BodyState, BodyTrajectory, Pose3,
                               contact_activation_iou, pose_error,
                               time_before_divergence)
from physfuse.errors import ConfigurationError
from physfuse.transforms import quat_from_axis_angle


def make_traj(n=301, dt=1.0 / 30.0, offset=(0, 0, 0), yaw_deg=0.0,
              drift_per_s=(0, 0, 0), yaw_step_at=None, yaw_step_deg=0.0):
    states = []
    for i in range(n):
        t = i * dt
        pos = np.asarray(offset, dtype=float) + np.asarray(drift_per_s) * t
        angle = np.radians(yaw_deg)
        if yaw_step_at is not None and t >= yaw_step_at:
            angle += np.radians(yaw_step_deg)
        q = quat_from_axis_angle([0, 0, 1], angle)
        states.append(BodyState(Pose3(q, pos), np.zeros(3), np.zeros(3), t))
    return BodyTrajectory(states)


def test_identical_trajectories_zero_error():
    a = make_traj()
    assert pose_error(a, a) == (0.0, 0.0)


def test_constant_position_offset():
    ref = make_traj()
    sim = make_traj(offset=(0.02, 0, 0))
    pos, rot = pose_error(sim, ref)
    assert pos == pytest.approx(0.02, abs=1e-12)
    assert rot == pytest.approx(0.0, abs=1e-6)


def test_constant_yaw_offset():
    ref = make_traj()
    sim = make_traj(yaw_deg=30.0)
    pos, rot = pose_error(sim, ref)
    assert pos == pytest.approx(0.0, abs=1e-12)
    assert rot == pytest.approx(30.0, abs=1e-9)


def test_divergence_full_horizon_when_never():
    a = make_traj(n=301)  # 10 s
    assert time_before_divergence(a, a) == (10.0, 10.0)


def test_divergence_linear_drift():
    ref = make_traj()
    sim = make_traj(drift_per_s=(0.02, 0, 0))
    t_pos, t_rot = time_before_divergence(sim, ref)
    # 0.02 m/s reaches the 0.10 m threshold at t = 5 s
    assert t_pos == pytest.approx(5.0, abs=1.0 / 30.0 + 1e-9)
    assert t_rot == pytest.approx(10.0)


def test_divergence_rotation_step():
    ref = make_traj()
    sim = make_traj(yaw_step_at=3.0, yaw_step_deg=60.0)
    t_pos, t_rot = time_before_divergence(sim, ref)
    assert t_rot == pytest.approx(3.0, abs=1e-9)
    assert t_pos == pytest.approx(10.0)


def test_mismatched_spans_rejected():
    ref = make_traj(n=301)
    sim = make_traj(n=100)
    with pytest.raises(ConfigurationError):
        pose_error(sim, ref)


def test_contact_iou_examples():
    ones = np.ones(90, dtype=bool)
    assert contact_activation_iou(ones, ones) == 1.0
    a = np.zeros(90, dtype=bool)
    a[:30] = True
    b = np.zeros(90, dtype=bool)
    b[60:] = True
    assert contact_activation_iou(a, b) == 0.0
    # frames 1..60 vs 31..90 -> 30 / 90
    a = np.zeros(90, dtype=bool)
    a[0:60] = True
    b = np.zeros(90, dtype=bool)
    b[30:90] = True
    assert contact_activation_iou(a, b) == pytest.approx(1.0 / 3.0)
    # both inactive
    z = np.zeros(10, dtype=bool)
    assert contact_activation_iou(z, z) == 1.0
    with pytest.raises(ConfigurationError):
        contact_activation_iou(np.zeros(5, dtype=bool), z)
