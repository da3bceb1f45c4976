"""Synthetic depth rendering, visibility extraction, and pose noise."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..dynamics.types import BodyState, BodyTrajectory, Pose3
from ..errors import ConfigurationError
from ..geometry.meshing import convex_hull_mesh
from ..geometry.visibility import ray_triangle_hits
from ..transforms import quat_conj, quat_exp, quat_log, quat_mul, \
    quat_normalize
from .spec import CameraIntrinsics, SceneSpec

PIXEL_STRIDE = 8   # cast every 8th pixel; supervision density, not optics


@dataclass
class DepthFrame:
    time: float
    camera_pose: Pose3
    hit_pixels: np.ndarray    # (N, 2) int pixel coords (u, v)
    hit_points: np.ndarray    # (N, 3) world points on the object surface
    miss_pixels: np.ndarray   # (M, 2) rays blocked by an occluder


class DepthObservations:
    def __init__(self, frames: list[DepthFrame], intrinsics: CameraIntrinsics):
        if len(frames) >= 2:
            steps = np.diff([f.time for f in frames])
            if np.max(np.abs(steps - steps[0])) > 1e-6:
                raise ConfigurationError("depth frames must be uniformly spaced")
        self.frames = frames
        self.intrinsics = intrinsics

    def save(self, path: str | Path) -> None:
        path = Path(path)
        header = {"intrinsics": self.intrinsics.__dict__,
                  "frames": [{"time": f.time,
                              "q": f.camera_pose.rotation.tolist(),
                              "t": f.camera_pose.translation.tolist(),
                              "n_hits": int(len(f.hit_points)),
                              "n_miss": int(len(f.miss_pixels))}
                             for f in self.frames]}
        path.write_text(json.dumps(header))
        blobs = []
        for f in self.frames:
            blobs.append(np.asarray(f.hit_pixels, dtype="<f4").tobytes())
            blobs.append(np.asarray(f.hit_points, dtype="<f4").tobytes())
            blobs.append(np.asarray(f.miss_pixels, dtype="<f4").tobytes())
        path.with_suffix(path.suffix + ".bin").write_bytes(b"".join(blobs))

    @classmethod
    def load(cls, path: str | Path) -> "DepthObservations":
        path = Path(path)
        header = json.loads(path.read_text())
        raw = path.with_suffix(path.suffix + ".bin").read_bytes()
        frames = []
        offset = 0
        for fh in header["frames"]:
            n, m = fh["n_hits"], fh["n_miss"]
            px = np.frombuffer(raw, "<f4", n * 2, offset).reshape(n, 2)
            offset += n * 2 * 4
            pts = np.frombuffer(raw, "<f4", n * 3, offset).reshape(n, 3)
            offset += n * 3 * 4
            miss = np.frombuffer(raw, "<f4", m * 2, offset).reshape(m, 2)
            offset += m * 2 * 4
            frames.append(DepthFrame(
                fh["time"], Pose3(np.asarray(fh["q"]), np.asarray(fh["t"])),
                px.astype(int), pts.astype(float), miss.astype(int)))
        return cls(frames, CameraIntrinsics(**header["intrinsics"]))


def _pixel_rays(intr: CameraIntrinsics, pose: Pose3, stride: int):
    us = np.arange(stride // 2, intr.width, stride)
    vs = np.arange(stride // 2, intr.height, stride)
    uu, vv = np.meshgrid(us, vs, indexing="ij")
    pix = np.stack([uu.reshape(-1), vv.reshape(-1)], axis=1)
    cam = np.stack([(pix[:, 0] - intr.cx) / intr.fx,
                    (pix[:, 1] - intr.cy) / intr.fy,
                    np.ones(len(pix))], axis=1)
    dirs = cam @ pose.matrix().T
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    return pix, dirs


def render_depth(spec: SceneSpec, traj: BodyTrajectory,
                 stride: int = PIXEL_STRIDE):
    """Pinhole ray casting of the object behind the occluders.

    Returns (DepthObservations, visible) where visible holds the
    body-frame hull vertices seen unoccluded in at least one frame.
    Gaussian noise perturbs hit depths along the ray.
    """
    mesh = spec.object.mesh()
    hull = convex_hull_mesh(mesh.vertices)
    occluders = spec.occluder_meshes()
    occ_tris = (np.concatenate([o.triangles for o in occluders])
                if occluders else np.zeros((0, 3, 3)))
    cam_pose = spec.camera_pose
    origin = cam_pose.translation

    for occ in occluders:
        lo = occ.vertices.min(axis=0)
        hi = occ.vertices.max(axis=0)
        if np.all(origin >= lo) and np.all(origin <= hi):
            raise ConfigurationError("camera is inside an occluder")

    rng = np.random.default_rng(spec.seed)
    pix, dirs = _pixel_rays(spec.intrinsics, cam_pose, stride)
    origins = np.broadcast_to(origin, dirs.shape)

    frames = []
    visible_idx: set[int] = set()
    for state in traj.states:
        R = state.pose.matrix()
        t = state.pose.translation
        world = mesh.transformed(R, t)
        lo, hi = world.vertices.min(axis=0), world.vertices.max(axis=0)
        if np.all(origin >= lo) and np.all(origin <= hi):
            raise ConfigurationError("camera is inside the object")
        t_obj, _ = ray_triangle_hits(origins, dirs, world.triangles)
        t_occ, _ = ray_triangle_hits(origins, dirs, occ_tris)
        seen = np.isfinite(t_obj) & (t_obj < t_occ)
        blocked = np.isfinite(t_obj) & ~seen
        depth = t_obj[seen]
        if spec.noise.depth_sigma > 0:
            depth = depth + rng.normal(0.0, spec.noise.depth_sigma,
                                       size=depth.shape)
        hits = origin + depth[:, None] * dirs[seen]
        frames.append(DepthFrame(state.time, cam_pose, pix[seen],
                                 hits, pix[blocked]))

        # hull vertices unoccluded by anything nearer than themselves
        world_hull = hull.vertices @ R.T + t
        vdirs = world_hull - origin
        blockers = np.concatenate([occ_tris, world.triangles])
        tv, _ = ray_triangle_hits(np.broadcast_to(origin, vdirs.shape),
                                  vdirs, blockers)
        lengths = np.linalg.norm(vdirs, axis=1)
        clear = tv >= 1.0 - 1e-3 / np.maximum(lengths, 1e-12)
        visible_idx.update(np.nonzero(clear)[0].tolist())

    visible = hull.vertices[sorted(visible_idx)]
    return DepthObservations(frames, spec.intrinsics), visible


def perturb_poses(traj: BodyTrajectory, noise, seed: int = 0) -> BodyTrajectory:
    """Gaussian position and small-angle rotation noise per frame, with
    velocities recomputed by finite differences of the perturbed poses."""
    rng = np.random.default_rng(seed)
    n = len(traj)
    dt = traj.dt
    positions = np.array([s.pose.translation for s in traj.states])
    quats = [s.pose.rotation for s in traj.states]
    if noise.pose_sigma_pos > 0:
        positions = positions + rng.normal(0.0, noise.pose_sigma_pos, (n, 3))
    if noise.pose_sigma_rot > 0:
        quats = [quat_normalize(quat_mul(q, quat_exp(
            rng.normal(0.0, noise.pose_sigma_rot, 3)))) for q in quats]

    linear = np.empty((n, 3))
    linear[1:-1] = (positions[2:] - positions[:-2]) / (2 * dt)
    linear[0] = (positions[1] - positions[0]) / dt
    linear[-1] = (positions[-1] - positions[-2]) / dt
    angular = np.empty((n, 3))
    for i in range(n):
        if 0 < i < n - 1:
            rel = quat_mul(quat_conj(quats[i - 1]), quats[i + 1])
            angular[i] = quat_log(rel) / (2 * dt)
        else:
            j = 1 if i == 0 else n - 1
            rel = quat_mul(quat_conj(quats[j - 1]), quats[j])
            angular[i] = quat_log(rel) / dt
    states = [BodyState(Pose3(quats[i], positions[i]), linear[i], angular[i],
                        traj.states[i].time) for i in range(n)]
    return BodyTrajectory(states)
