"""Dense signed-distance grid with trilinear interpolation."""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from ..errors import ConfigurationError


class ShapeField:
    """Signed distances (meters) on a regular grid in the body frame.

    ``values[i, j, k]`` is the distance at ``origin + cell_size * (i, j, k)``.
    Queries inside the grid interpolate trilinearly; outside the grid the
    value is the interpolation at the clamped boundary point plus the
    Euclidean distance to it, which keeps the field continuous and
    conservatively positive far away.
    """

    def __init__(self, origin, cell_size: float, values: np.ndarray,
                 trainable: bool = True):
        values = np.asarray(values, dtype=float)
        if values.ndim != 3 or min(values.shape) < 2:
            raise ConfigurationError("grid must be 3D with >= 2 nodes per axis")
        if cell_size <= 0:
            raise ConfigurationError("cell_size must be positive")
        if not np.all(np.isfinite(values)):
            raise ConfigurationError("grid values must be finite")
        self.origin = np.asarray(origin, dtype=float).reshape(3)
        self.cell_size = float(cell_size)
        self.values = values
        self.trainable = trainable

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.values.shape

    @classmethod
    def from_aabb(cls, lo, hi, cell_size: float, fill: float = 0.0,
                  padding: float = 0.0) -> "ShapeField":
        lo = np.asarray(lo, dtype=float) - padding
        hi = np.asarray(hi, dtype=float) + padding
        dims = np.maximum(2, np.ceil((hi - lo) / cell_size).astype(int) + 1)
        return cls(lo, cell_size, np.full(dims, fill))

    @classmethod
    def from_function(cls, fn, lo, hi, cell_size: float,
                      padding: float = 0.0) -> "ShapeField":
        """Sample an SDF callable (points (N,3) -> (N,)) at the grid nodes."""
        field = cls.from_aabb(lo, hi, cell_size, padding=padding)
        field.values = fn(field.node_points()).reshape(field.dims)
        return field

    def node_points(self) -> np.ndarray:
        nx, ny, nz = self.dims
        ii, jj, kk = np.meshgrid(np.arange(nx), np.arange(ny), np.arange(nz),
                                 indexing="ij")
        idx = np.stack([ii, jj, kk], axis=-1).reshape(-1, 3)
        return self.origin + idx * self.cell_size

    # -- queries --------------------------------------------------------------

    def _locate(self, points: np.ndarray):
        """Clamped cell indices, fractional offsets, and outside excess."""
        p = np.atleast_2d(np.asarray(points, dtype=float))
        pos = (p - self.origin) / self.cell_size
        upper = np.array(self.dims, dtype=float) - 1.0
        clamped = np.clip(pos, 0.0, upper)
        excess = np.linalg.norm((pos - clamped), axis=1) * self.cell_size
        base = np.minimum(clamped.astype(int), np.array(self.dims) - 2)
        frac = clamped - base
        return base, frac, excess

    def _corner_values(self, base: np.ndarray) -> np.ndarray:
        i, j, k = base[:, 0], base[:, 1], base[:, 2]
        v = self.values
        return np.stack([
            v[i, j, k], v[i + 1, j, k], v[i, j + 1, k], v[i + 1, j + 1, k],
            v[i, j, k + 1], v[i + 1, j, k + 1], v[i, j + 1, k + 1],
            v[i + 1, j + 1, k + 1],
        ], axis=1)

    @staticmethod
    def _corner_weights(frac: np.ndarray) -> np.ndarray:
        fx, fy, fz = frac[:, 0], frac[:, 1], frac[:, 2]
        gx, gy, gz = 1.0 - fx, 1.0 - fy, 1.0 - fz
        return np.stack([
            gx * gy * gz, fx * gy * gz, gx * fy * gz, fx * fy * gz,
            gx * gy * fz, fx * gy * fz, gx * fy * fz, fx * fy * fz,
        ], axis=1)

    def query(self, points: np.ndarray) -> np.ndarray:
        """Signed distance at one or many points (total function)."""
        single = np.asarray(points).ndim == 1
        base, frac, excess = self._locate(points)
        vals = (self._corner_values(base) * self._corner_weights(frac)).sum(axis=1)
        vals = vals + excess
        return float(vals[0]) if single else vals

    def query_with_support(self, points: np.ndarray):
        """Values plus the flattened grid indices/weights touched per point.

        The returned ``(indices, weights)`` pair is the gradient of each
        value with respect to the flattened grid array; the outside-grid
        excess term does not depend on grid values.
        """
        base, frac, excess = self._locate(points)
        weights = self._corner_weights(frac)
        nx, ny, nz = self.dims
        i, j, k = base[:, 0], base[:, 1], base[:, 2]
        flat = (i * ny + j) * nz + k
        offsets = np.array([0, ny * nz, nz, ny * nz + nz,
                            1, ny * nz + 1, nz + 1, ny * nz + nz + 1])
        indices = flat[:, None] + offsets[None, :]
        vals = (self.values.reshape(-1)[indices] * weights).sum(axis=1) + excess
        return vals, indices, weights

    # -- I/O --------------------------------------------------------------

    def save(self, path: str | Path) -> None:
        """Binary grid (little-endian header + float32 values) + JSON sidecar."""
        path = Path(path)
        header = struct.pack("<3i", *self.dims)
        header += struct.pack("<3d", *self.origin)
        header += struct.pack("<d", self.cell_size)
        path.write_bytes(header + self.values.astype("<f4").tobytes(order="C"))
        sidecar = {
            "dims": [int(d) for d in self.dims],
            "origin": [float(x) for x in self.origin],
            "cell_size": self.cell_size,
            "dtype": "float32",
            "order": "C",
        }
        path.with_suffix(path.suffix + ".json").write_text(
            json.dumps(sidecar, indent=1))

    @classmethod
    def load(cls, path: str | Path) -> "ShapeField":
        raw = Path(path).read_bytes()
        dims = struct.unpack("<3i", raw[:12])
        origin = struct.unpack("<3d", raw[12:36])
        (cell,) = struct.unpack("<d", raw[36:44])
        values = np.frombuffer(raw[44:], dtype="<f4").astype(float).reshape(dims)
        return cls(origin, cell, values)
