"""Scene specifications for synthetic sessions."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..dynamics.types import (DEFAULT_MU_PUSHER, DEFAULT_MU_TABLE, Pose3,
                              Scene)
from ..errors import ConfigurationError
from ..geometry.trimesh import TriMesh, box_mesh, cube_mesh, cylinder_mesh, \
    frustum_mesh, load_obj

SESSION_RATE = 30.0        # Hz
SESSION_DURATION = 10.0    # s
DEPTH_SIGMA = 0.002        # m
POSE_SIGMA_POS = 0.003     # m
POSE_SIGMA_ROT = np.radians(1.0)
PUSHER_RADIUS = 0.015      # m


@dataclass
class CameraIntrinsics:
    fx: float = 600.0
    fy: float = 600.0
    cx: float = 320.0
    cy: float = 240.0
    width: int = 640
    height: int = 480


@dataclass
class NoiseSpec:
    depth_sigma: float = DEPTH_SIGMA
    pose_sigma_pos: float = POSE_SIGMA_POS
    pose_sigma_rot: float = POSE_SIGMA_ROT

    def __post_init__(self):
        if min(self.depth_sigma, self.pose_sigma_pos, self.pose_sigma_rot) < 0:
            raise ConfigurationError("noise sigmas must be >= 0")


@dataclass
class ObjectSpec:
    primitive: str
    dimensions: list
    mass: float

    def __post_init__(self):
        if self.mass <= 0:
            raise ConfigurationError("object mass must be positive")

    def mesh(self) -> TriMesh:
        p = self.primitive
        d = self.dimensions
        if p == "cube":
            return cube_mesh(float(d[0]))
        if p == "box":
            return box_mesh([float(v) for v in d])
        if p == "cylinder":
            return cylinder_mesh(float(d[0]), float(d[1]))
        if p == "frustum":
            return frustum_mesh(float(d[0]), float(d[1]), float(d[2]))
        if p == "mesh-file":
            return load_obj(str(d[0]))
        raise ConfigurationError(f"unknown primitive {p!r}")


@dataclass
class SceneSpec:
    object: ObjectSpec
    start_pose: Pose3
    push_script: np.ndarray                 # (N, 4) rows (t, x, y, z)
    occluders: list = field(default_factory=list)   # [(lo 3, hi 3), ...]
    camera_pose: Pose3 = None
    intrinsics: CameraIntrinsics = field(default_factory=CameraIntrinsics)
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    seed: int = 0
    duration: float = SESSION_DURATION
    rate: float = SESSION_RATE
    table_height: float = 0.0
    pusher_radius: float = PUSHER_RADIUS
    mu_table: float = DEFAULT_MU_TABLE
    mu_pusher: float = DEFAULT_MU_PUSHER

    def __post_init__(self):
        self.push_script = np.asarray(self.push_script, dtype=float).reshape(-1, 4)
        if np.any(np.diff(self.push_script[:, 0]) < 0):
            raise ConfigurationError("push script times must be monotone")
        if self.camera_pose is None:
            # default viewpoint: in front of and above the table origin
            self.camera_pose = _looking_at(np.array([0.6, 0.0, 0.45]),
                                           np.array([0.0, 0.0, 0.05]))

    def scene(self) -> Scene:
        script = self.push_script
        if script[-1, 0] < self.duration:
            script = np.vstack([script,
                                [self.duration, *script[-1, 1:]]])
        if script[0, 0] > 0.0:
            script = np.vstack([[0.0, *script[0, 1:]], script])
        return Scene(self.table_height, self.pusher_radius, script,
                     self.mu_table, self.mu_pusher)

    def occluder_meshes(self) -> list[TriMesh]:
        meshes = []
        for lo, hi in self.occluders:
            lo = np.asarray(lo, dtype=float)
            hi = np.asarray(hi, dtype=float)
            mesh = box_mesh(hi - lo)
            meshes.append(TriMesh(mesh.vertices + (lo + hi) / 2, mesh.faces))
        return meshes

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps({
            "object": {"primitive": self.object.primitive,
                       "dimensions": list(self.object.dimensions),
                       "mass": self.object.mass},
            "start_pose": {"q": self.start_pose.rotation.tolist(),
                           "t": self.start_pose.translation.tolist()},
            "push_script": self.push_script.tolist(),
            "occluders": [[list(map(float, lo)), list(map(float, hi))]
                          for lo, hi in self.occluders],
            "camera": {"q": self.camera_pose.rotation.tolist(),
                       "t": self.camera_pose.translation.tolist(),
                       "fx": self.intrinsics.fx, "fy": self.intrinsics.fy,
                       "cx": self.intrinsics.cx, "cy": self.intrinsics.cy,
                       "width": self.intrinsics.width,
                       "height": self.intrinsics.height},
            "noise": {"depth_sigma": self.noise.depth_sigma,
                      "pose_sigma_pos": self.noise.pose_sigma_pos,
                      "pose_sigma_rot": self.noise.pose_sigma_rot},
            "seed": self.seed, "duration": self.duration, "rate": self.rate,
            "table_height": self.table_height,
            "pusher_radius": self.pusher_radius,
            "mu_table": self.mu_table, "mu_pusher": self.mu_pusher,
        }, indent=1))

    @classmethod
    def load(cls, path: str | Path) -> "SceneSpec":
        d = json.loads(Path(path).read_text())
        cam = d.get("camera", {})
        intr = CameraIntrinsics(**{k: cam[k] for k in
                                   ("fx", "fy", "cx", "cy", "width", "height")
                                   if k in cam})
        camera_pose = None
        if "q" in cam:
            camera_pose = Pose3(np.asarray(cam["q"]), np.asarray(cam["t"]))
        return cls(
            object=ObjectSpec(**d["object"]),
            start_pose=Pose3(np.asarray(d["start_pose"]["q"]),
                             np.asarray(d["start_pose"]["t"])),
            push_script=np.asarray(d["push_script"]),
            occluders=[(np.asarray(lo), np.asarray(hi))
                       for lo, hi in d.get("occluders", [])],
            camera_pose=camera_pose, intrinsics=intr,
            noise=NoiseSpec(**d.get("noise", {})),
            seed=d.get("seed", 0),
            duration=d.get("duration", SESSION_DURATION),
            rate=d.get("rate", SESSION_RATE),
            table_height=d.get("table_height", 0.0),
            pusher_radius=d.get("pusher_radius", PUSHER_RADIUS),
            mu_table=d.get("mu_table", DEFAULT_MU_TABLE),
            mu_pusher=d.get("mu_pusher", DEFAULT_MU_PUSHER))


def _looking_at(position: np.ndarray, target: np.ndarray) -> Pose3:
    """Camera pose with +z toward the target and x roughly horizontal."""
    z = target - position
    z = z / np.linalg.norm(z)
    up = np.array([0.0, 0.0, 1.0])
    x = np.cross(z, up)
    if np.linalg.norm(x) < 1e-9:
        x = np.array([1.0, 0.0, 0.0])
    x = x / np.linalg.norm(x)
    y = np.cross(z, x)
    R = np.stack([x, y, z], axis=1)
    # rotation matrix to quaternion (w, x, y, z)
    w = np.sqrt(max(0.0, 1.0 + R[0, 0] + R[1, 1] + R[2, 2])) / 2.0
    if w > 1e-9:
        q = np.array([w, (R[2, 1] - R[1, 2]) / (4 * w),
                      (R[0, 2] - R[2, 0]) / (4 * w),
                      (R[1, 0] - R[0, 1]) / (4 * w)])
    else:  # fall back through the largest diagonal element
        i = int(np.argmax(np.diag(R)))
        j, k = (i + 1) % 3, (i + 2) % 3
        s = np.sqrt(max(1e-12, 1.0 + R[i, i] - R[j, j] - R[k, k])) * 2.0
        q = np.zeros(4)
        q[0] = (R[k, j] - R[j, k]) / s
        q[1 + i] = s / 4.0
        q[1 + j] = (R[j, i] + R[i, j]) / s
        q[1 + k] = (R[k, i] + R[i, k]) / s
    return Pose3(q / np.linalg.norm(q), position)
