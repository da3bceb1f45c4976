"""Precomputed per-transition arrays for contact-implicit learning.

Everything that depends only on the observed states and the scene is
stacked once; quantities that depend on the trainable model (support
points, gaps, jacobians) are recomputed from these arrays each epoch.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..dynamics.types import BodyTrajectory, Scene
from ..transforms import quat_to_matrix, tangent_basis

_Z = np.array([0.0, 0.0, 1.0])


@dataclass
class TransitionData:
    R: np.ndarray              # (T,3,3) current body-to-world rotation
    R_next: np.ndarray
    origin: np.ndarray         # (T,3)
    origin_next: np.ndarray
    v0: np.ndarray             # (T,3) world linear velocity (body origin)
    omega: np.ndarray          # (T,3) body angular velocity
    v0_next: np.ndarray
    omega_next: np.ndarray
    dt: np.ndarray             # (T,)
    d_query: np.ndarray        # (T,2,3) body-frame support query dirs (table, pusher)
    d_query_next: np.ndarray   # (T,2,3) same at the next state
    frames: np.ndarray         # (T,2,3,3) world contact frames (rows n,t1,t2)
    n_push_next: np.ndarray    # (T,3) world unit vector toward pusher, next state
    pusher_center_next: np.ndarray  # (T,3)
    pusher_velocity: np.ndarray     # (T,3)
    surface_velocity: np.ndarray    # (T,2,3) per-contact environment velocity
    mus: np.ndarray            # (2,)
    table_height: float
    pusher_radius: float
    gravity: float

    @property
    def count(self) -> int:
        return len(self.dt)


def build_transition_data(trajectories: list[BodyTrajectory],
                          scene: Scene) -> TransitionData:
    rows = {k: [] for k in ("R", "R_next", "origin", "origin_next", "v0",
                            "omega", "v0_next", "omega_next", "dt",
                            "d_query", "d_query_next", "frames",
                            "n_push_next", "pusher_center_next",
                            "pusher_velocity", "surface_velocity")}

    def _dirs(R, origin, t):
        center = scene.pusher_center(t)
        toward = center - origin
        n = np.linalg.norm(toward)
        toward = toward / n if n > 1e-12 else np.array([1.0, 0.0, 0.0])
        return R.T @ (-_Z), R.T @ toward, toward, center

    for traj in trajectories:
        for a, b in zip(traj.states[:-1], traj.states[1:]):
            R = quat_to_matrix(a.pose.rotation)
            Rn = quat_to_matrix(b.pose.rotation)
            d_tab, d_push, toward, _ = _dirs(R, a.pose.translation, a.time)
            d_tab_n, d_push_n, toward_n, center_n = _dirs(
                Rn, b.pose.translation, b.time)
            frames = np.empty((2, 3, 3))
            for c, normal in enumerate((_Z, -toward)):
                t1, t2 = tangent_basis(normal)
                frames[c] = np.stack([normal, t1, t2])
            pv = scene.pusher_velocity(a.time)
            rows["R"].append(R)
            rows["R_next"].append(Rn)
            rows["origin"].append(a.pose.translation)
            rows["origin_next"].append(b.pose.translation)
            rows["v0"].append(a.linear_velocity)
            rows["omega"].append(a.angular_velocity)
            rows["v0_next"].append(b.linear_velocity)
            rows["omega_next"].append(b.angular_velocity)
            rows["dt"].append(b.time - a.time)
            rows["d_query"].append(np.stack([d_tab, d_push]))
            rows["d_query_next"].append(np.stack([d_tab_n, d_push_n]))
            rows["frames"].append(frames)
            rows["n_push_next"].append(toward_n)
            rows["pusher_center_next"].append(center_n)
            rows["pusher_velocity"].append(pv)
            rows["surface_velocity"].append(np.stack([np.zeros(3), pv]))

    stacked = {k: np.asarray(v, dtype=float) for k, v in rows.items()}
    if not trajectories:
        stacked = {k: np.zeros((0,) + _EMPTY_SHAPES[k]) for k in rows}
    return TransitionData(mus=np.array([scene.mu_table, scene.mu_pusher]),
                          table_height=scene.table_height,
                          pusher_radius=scene.pusher_radius,
                          gravity=scene.gravity, **stacked)


_EMPTY_SHAPES = {
    "R": (3, 3), "R_next": (3, 3), "origin": (3,), "origin_next": (3,),
    "v0": (3,), "omega": (3,), "v0_next": (3,), "omega_next": (3,),
    "dt": (), "d_query": (2, 3), "d_query_next": (2, 3), "frames": (2, 3, 3),
    "n_push_next": (3,), "pusher_center_next": (3,), "pusher_velocity": (3,),
    "surface_velocity": (2, 3),
}


def softmax_support(vertices: np.ndarray, dirs: np.ndarray, smoothing: float):
    """Support points and softmax weights for a batch of directions.

    At zero smoothing the weights are one-hot at the lowest-index argmax.
    """
    scores = dirs @ vertices.T
    if smoothing == 0.0:
        idx = np.argmax(scores, axis=-1)
        w = np.zeros_like(scores)
        np.put_along_axis(w, idx[..., None], 1.0, axis=-1)
    else:
        m = scores.max(axis=-1, keepdims=True)
        e = np.exp((scores - m) / smoothing)
        w = e / e.sum(axis=-1, keepdims=True)
    return w @ vertices, w
