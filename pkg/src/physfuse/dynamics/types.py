"""State, scene, and inertial parameter types for rigid-body simulation."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import ConfigurationError
from ..transforms import quat_normalize, quat_to_matrix

GRAVITY = 9.81  # m/s^2, downward
DEFAULT_MU_TABLE = 0.26
DEFAULT_MU_PUSHER = 0.15


@dataclass
class Pose3:
    """Rigid transform: body frame to world (unit quaternion + translation)."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.rotation, dtype=float).reshape(4)
        n = np.linalg.norm(q)
        if abs(n - 1.0) > 1e-6:
            raise ConfigurationError("quaternion norm off unit by > 1e-6")
        self.rotation = q / n
        self.translation = np.asarray(self.translation, dtype=float).reshape(3)

    def matrix(self) -> np.ndarray:
        return quat_to_matrix(self.rotation)

    def transform(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(points) @ self.matrix().T + self.translation

    def inverse_transform(self, points: np.ndarray) -> np.ndarray:
        return (np.asarray(points) - self.translation) @ self.matrix()


@dataclass
class BodyState:
    """Pose plus velocities: linear in world frame at the body origin,
    angular in the body frame."""

    pose: Pose3
    linear_velocity: np.ndarray
    angular_velocity: np.ndarray
    time: float

    def __post_init__(self):
        self.linear_velocity = np.asarray(self.linear_velocity, dtype=float).reshape(3)
        self.angular_velocity = np.asarray(self.angular_velocity, dtype=float).reshape(3)
        vals = np.concatenate([self.pose.rotation, self.pose.translation,
                               self.linear_velocity, self.angular_velocity,
                               [self.time]])
        if not np.all(np.isfinite(vals)):
            raise ConfigurationError("non-finite body state")


class BodyTrajectory:
    """Uniformly sampled sequence of body states."""

    def __init__(self, states: list[BodyState]):
        if len(states) < 2:
            raise ConfigurationError("trajectory needs at least 2 states")
        times = np.array([s.time for s in states])
        steps = np.diff(times)
        if np.any(steps <= 0):
            raise ConfigurationError("times must strictly increase")
        if np.max(np.abs(steps - steps[0])) > 1e-6:
            raise ConfigurationError("trajectory spacing must be uniform")
        self.states = list(states)
        self.dt = float(steps[0])

    def __len__(self) -> int:
        return len(self.states)

    def __getitem__(self, i) -> BodyState:
        return self.states[i]

    @property
    def times(self) -> np.ndarray:
        return np.array([s.time for s in self.states])

    def duration(self) -> float:
        return float(self.states[-1].time - self.states[0].time)

    def save(self, path: str | Path) -> None:
        rows = []
        for s in self.states:
            qw, qx, qy, qz = s.pose.rotation
            x, y, z = s.pose.translation
            vx, vy, vz = s.linear_velocity
            wx, wy, wz = s.angular_velocity
            rows.append({"t": s.time, "qw": qw, "qx": qx, "qy": qy, "qz": qz,
                         "x": x, "y": y, "z": z, "vx": vx, "vy": vy, "vz": vz,
                         "wx": wx, "wy": wy, "wz": wz})
        Path(path).write_text(json.dumps(rows))

    @classmethod
    def load(cls, path: str | Path) -> "BodyTrajectory":
        rows = json.loads(Path(path).read_text())
        states = [BodyState(
            Pose3(np.array([r["qw"], r["qx"], r["qy"], r["qz"]]),
                  np.array([r["x"], r["y"], r["z"]])),
            np.array([r["vx"], r["vy"], r["vz"]]),
            np.array([r["wx"], r["wy"], r["wz"]]), r["t"]) for r in rows]
        return cls(states)


class Scene:
    """Known environment: table plane z = height, spherical pusher on a
    prescribed schedule, and fixed friction coefficients."""

    def __init__(self, table_height: float = 0.0, pusher_radius: float = 0.015,
                 pusher_schedule: np.ndarray | None = None,
                 mu_table: float = DEFAULT_MU_TABLE,
                 mu_pusher: float = DEFAULT_MU_PUSHER,
                 gravity: float = GRAVITY):
        if pusher_radius <= 0:
            raise ConfigurationError("pusher radius must be positive")
        if mu_table < 0 or mu_pusher < 0:
            raise ConfigurationError("friction coefficients must be >= 0")
        self.table_height = float(table_height)
        self.pusher_radius = float(pusher_radius)
        if pusher_schedule is None:
            pusher_schedule = np.array([[0.0, 0.0, 0.0, 10.0]])
        self.pusher_schedule = np.asarray(pusher_schedule, dtype=float).reshape(-1, 4)
        if np.any(np.diff(self.pusher_schedule[:, 0]) < 0):
            raise ConfigurationError("pusher schedule times must be sorted")
        self.mu_table = float(mu_table)
        self.mu_pusher = float(mu_pusher)
        self.gravity = float(gravity)

    def covers(self, t0: float, t1: float) -> bool:
        ts = self.pusher_schedule[:, 0]
        return bool(ts[0] <= t0 + 1e-9 and ts[-1] >= t1 - 1e-9)

    def pusher_center(self, t: float) -> np.ndarray:
        """Linearly interpolated pusher center; clamped at the ends."""
        ts = self.pusher_schedule[:, 0]
        return np.array([np.interp(t, ts, self.pusher_schedule[:, 1 + i])
                         for i in range(3)])

    def pusher_velocity(self, t: float, h: float = 1e-4) -> np.ndarray:
        return (self.pusher_center(t + h) - self.pusher_center(t - h)) / (2 * h)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps({
            "table_height": self.table_height,
            "pusher_radius": self.pusher_radius,
            "pusher_centers": self.pusher_schedule.tolist(),
            "mu_table": self.mu_table,
            "mu_pusher": self.mu_pusher,
        }))

    @classmethod
    def load(cls, path: str | Path) -> "Scene":
        d = json.loads(Path(path).read_text())
        return cls(d["table_height"], d["pusher_radius"],
                   np.asarray(d["pusher_centers"]), d["mu_table"], d["mu_pusher"])


class InertialParams:
    """Mass, center of mass (body frame), and rotational inertia about the
    center of mass stored through its Cholesky factor."""

    def __init__(self, mass: float, com: np.ndarray, inertia_chol: np.ndarray):
        if mass <= 0:
            raise ConfigurationError("mass must be positive")
        self.mass = float(mass)
        self.com = np.asarray(com, dtype=float).reshape(3)
        L = np.tril(np.asarray(inertia_chol, dtype=float).reshape(3, 3))
        self.inertia_chol = L

    @classmethod
    def from_matrix(cls, mass: float, com: np.ndarray,
                    inertia: np.ndarray) -> "InertialParams":
        return cls(mass, com, np.linalg.cholesky(np.asarray(inertia, dtype=float)))

    @classmethod
    def uniform_density(cls, mesh, mass: float) -> "InertialParams":
        from ..geometry.trimesh import mesh_mass_properties
        volume, com, inertia_unit = mesh_mass_properties(mesh)
        return cls.from_matrix(mass, com, inertia_unit * (mass / volume))

    def inertia(self) -> np.ndarray:
        return self.inertia_chol @ self.inertia_chol.T

    def validate(self, tol: float = 1e-9) -> None:
        I = self.inertia()
        eig = np.linalg.eigvalsh(I)
        if eig[0] <= 0:
            raise ConfigurationError("inertia not positive definite")
        for i in range(3):
            if eig[i] > eig[(i + 1) % 3] + eig[(i + 2) % 3] + tol:
                raise ConfigurationError("principal moments violate the "
                                         "triangle inequality")

    def to_dict(self) -> dict:
        return {"mass": self.mass, "com": self.com.tolist(),
                "inertia_chol": self.inertia_chol.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "InertialParams":
        return cls(d["mass"], np.asarray(d["com"]), np.asarray(d["inertia_chol"]))


@dataclass
class ContactPoint:
    """One candidate contact between the body and the environment.

    ``normal`` points from the environment into the object; the jacobian
    maps the body twist [v_origin_world, omega_body] to the contact-point
    velocity expressed in (n, t1, t2).
    """

    gap: float
    world_point: np.ndarray
    normal: np.ndarray
    tangent1: np.ndarray
    tangent2: np.ndarray
    jacobian: np.ndarray
    mu: float
    body_point: np.ndarray
    kind: str = "table"
    surface_velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))
    query_direction: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def frame(self) -> np.ndarray:
        return np.stack([self.normal, self.tangent1, self.tangent2])
