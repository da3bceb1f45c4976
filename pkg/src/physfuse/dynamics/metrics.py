"""Trajectory comparison metrics for dynamics prediction."""

from __future__ import annotations

import numpy as np

from ..errors import ConfigurationError
from ..transforms import geodesic_angle
from .types import BodyTrajectory

POSITION_THRESHOLD = 0.10       # m
ROTATION_THRESHOLD = 45.0       # degrees


def _paired_errors(sim: BodyTrajectory, ref: BodyTrajectory):
    """Per-frame position (m) and rotation (deg) errors; sim resampled to
    the reference timestamps by nearest state."""
    sim_times = sim.times
    ref_times = ref.times
    if (ref_times[0] < sim_times[0] - sim.dt / 2
            or ref_times[-1] > sim_times[-1] + sim.dt / 2):
        raise ConfigurationError("simulated trajectory does not span the reference")
    idx = np.clip(np.round((ref_times - sim_times[0]) / sim.dt).astype(int),
                  0, len(sim) - 1)
    pos = np.empty(len(ref))
    rot = np.empty(len(ref))
    for k, (i, ref_state) in enumerate(zip(idx, ref.states)):
        sim_state = sim[int(i)]
        pos[k] = np.linalg.norm(sim_state.pose.translation
                                - ref_state.pose.translation)
        rot[k] = np.degrees(geodesic_angle(sim_state.pose.rotation,
                                           ref_state.pose.rotation))
    return pos, rot


def pose_error(sim: BodyTrajectory, ref: BodyTrajectory) -> tuple[float, float]:
    """(mean position error m, mean rotation error deg) over the reference."""
    pos, rot = _paired_errors(sim, ref)
    return float(pos.mean()), float(rot.mean())


def time_before_divergence(sim: BodyTrajectory, ref: BodyTrajectory,
                           pos_thresh: float = POSITION_THRESHOLD,
                           rot_thresh: float = ROTATION_THRESHOLD
                           ) -> tuple[float, float]:
    """Time from the start until each error first reaches its threshold;
    the full horizon when it never does."""
    pos, rot = _paired_errors(sim, ref)
    times = ref.times - ref.times[0]
    horizon = float(times[-1])

    def _first(err, thresh):
        hit = np.nonzero(err >= thresh)[0]
        return float(times[hit[0]]) if len(hit) else horizon

    return _first(pos, pos_thresh), _first(rot, rot_thresh)


def contact_activation_iou(sim_flags: np.ndarray, ref_flags: np.ndarray) -> float:
    """Temporal IoU of per-frame contact activation; 1.0 when both are
    entirely inactive."""
    sim_flags = np.asarray(sim_flags, dtype=bool)
    ref_flags = np.asarray(ref_flags, dtype=bool)
    if sim_flags.shape != ref_flags.shape:
        raise ConfigurationError("contact flag lengths differ")
    union = np.logical_or(sim_flags, ref_flags).sum()
    if union == 0:
        return 1.0
    return float(np.logical_and(sim_flags, ref_flags).sum() / union)
