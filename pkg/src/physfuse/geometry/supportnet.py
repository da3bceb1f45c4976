"""Learnable polytope support function.

A convex body is represented by K trainable vertices; its support
function is the max of vertex dot products with the query direction,
which is convex and positively homogeneous by construction.  A
log-sum-exp temperature smooths the max for gradient flow during
training; at zero smoothing queries are exact with ties broken by the
lowest vertex index.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import ConfigurationError
from ..transforms import fibonacci_sphere


@dataclass
class SupportPair:
    """A support direction/point pair, optionally tagged with the normal
    impulse (N*s) that made it contact evidence."""

    direction: np.ndarray
    point: np.ndarray
    impulse: float = 0.0

    def __post_init__(self):
        self.direction = np.asarray(self.direction, dtype=float).reshape(3)
        self.point = np.asarray(self.point, dtype=float).reshape(3)
        n = np.linalg.norm(self.direction)
        if abs(n - 1.0) > 1e-9:
            raise ConfigurationError("support direction must be unit length")
        if self.impulse < 0:
            raise ConfigurationError("impulse must be non-negative")


class SupportPolytope:
    def __init__(self, vertices: np.ndarray, smoothing: float = 0.0):
        vertices = np.asarray(vertices, dtype=float).reshape(-1, 3)
        if len(vertices) < 4:
            raise ConfigurationError("support polytope needs at least 4 vertices")
        if smoothing < 0:
            raise ConfigurationError("smoothing must be >= 0")
        self.vertices = vertices
        self.smoothing = float(smoothing)

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    # -- core queries ----------------------------------------------------

    def value(self, directions: np.ndarray) -> np.ndarray:
        """Support value for arbitrary (not necessarily unit) directions.

        Positively homogeneous: value(a*d) == a*value(d) for a > 0 at
        zero smoothing.
        """
        d = np.atleast_2d(np.asarray(directions, dtype=float))
        scores = d @ self.vertices.T
        if self.smoothing == 0.0:
            vals = scores[np.arange(len(d)), np.argmax(scores, axis=1)]
        else:
            m = scores.max(axis=1, keepdims=True)
            vals = (m + self.smoothing * np.log(
                np.exp((scores - m) / self.smoothing).sum(axis=1, keepdims=True)
            ))[:, 0]
        return vals if np.asarray(directions).ndim > 1 else float(vals[0])

    def support_points(self, directions: np.ndarray) -> np.ndarray:
        """Gradient of the support value: the supporting point per direction."""
        d = np.atleast_2d(np.asarray(directions, dtype=float))
        pts, _ = self._points_and_weights(d)
        return pts if np.asarray(directions).ndim > 1 else pts[0]

    def _points_and_weights(self, d: np.ndarray):
        scores = d @ self.vertices.T
        if self.smoothing == 0.0:
            idx = np.argmax(scores, axis=1)  # first max = lowest index
            w = np.zeros_like(scores)
            w[np.arange(len(d)), idx] = 1.0
        else:
            m = scores.max(axis=1, keepdims=True)
            e = np.exp((scores - m) / self.smoothing)
            w = e / e.sum(axis=1, keepdims=True)
        return w @ self.vertices, w

    def query(self, direction: np.ndarray):
        """(value, support point) for a unit direction.

        Inputs off unit norm by more than 1e-6 are renormalized.  At zero
        smoothing the value equals point . direction bitwise.
        """
        d = np.asarray(direction, dtype=float).reshape(3)
        n = np.linalg.norm(d)
        if n == 0.0:
            raise ConfigurationError("zero query direction")
        if abs(n - 1.0) > 1e-6:
            d = d / n
        scores = d @ self.vertices.T
        if self.smoothing == 0.0:
            idx = int(np.argmax(scores))
            point = self.vertices[idx].copy()
            # recompute as the plain dot product so value == point . d bitwise
            return float(point @ d), point
        m = float(scores.max())
        e = np.exp((scores - m) / self.smoothing)
        value = m + self.smoothing * np.log(e.sum())
        w = e / e.sum()
        return float(value), w @ self.vertices

    def support_jacobian(self, d: np.ndarray):
        """Support point plus its jacobian w.r.t. each vertex.

        Returns ``(point, w, J)`` where ``w`` (K,) are softmax weights and
        ``J[k]`` is d(point)/d(vertex_k), shape (K, 3, 3).  Requires
        smoothing > 0 (the map is piecewise constant otherwise).
        """
        if self.smoothing == 0.0:
            raise ConfigurationError("support jacobian needs smoothing > 0")
        d = np.asarray(d, dtype=float).reshape(3)
        scores = self.vertices @ d
        m = scores.max()
        e = np.exp((scores - m) / self.smoothing)
        w = e / e.sum()
        point = w @ self.vertices
        diff = self.vertices - point
        jac = (w[:, None, None] * np.eye(3)[None]
               + (w[:, None] * diff / self.smoothing)[:, :, None] * d[None, None, :])
        return point, w, jac

    # -- persistence -------------------------------------------------------

    def to_dict(self) -> dict:
        return {"vertices": self.vertices.tolist(), "smoothing": self.smoothing}

    @classmethod
    def from_dict(cls, data: dict) -> "SupportPolytope":
        return cls(np.asarray(data["vertices"]), float(data.get("smoothing", 0.0)))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path: str | Path) -> "SupportPolytope":
        return cls.from_dict(json.loads(Path(path).read_text()))


def initialize_polytope(num_vertices: int, visible_points: np.ndarray | None,
                        trajectory_extent: float = 0.1,
                        center: np.ndarray | None = None,
                        seed: int = 0, smoothing: float = 0.0,
                        jitter: float = 0.0) -> SupportPolytope:
    """Vertices on a sphere sized from the observed evidence.

    Radius is half the bounding-box diagonal of the visible points,
    centered on their centroid; with no visible points the caller's
    ``trajectory_extent``/``center`` stand in.
    """
    rng = np.random.default_rng(seed)
    if visible_points is not None and len(visible_points) >= 2:
        pts = np.asarray(visible_points, dtype=float)
        center = pts.mean(axis=0)
        radius = 0.5 * float(np.linalg.norm(pts.max(axis=0) - pts.min(axis=0)))
        radius = max(radius, 1e-3)
    else:
        center = np.zeros(3) if center is None else np.asarray(center, dtype=float)
        radius = 0.5 * trajectory_extent
    verts = fibonacci_sphere(num_vertices) * radius + center
    if jitter > 0:
        verts = verts + rng.normal(scale=jitter, size=verts.shape)
    return SupportPolytope(verts, smoothing=smoothing)
