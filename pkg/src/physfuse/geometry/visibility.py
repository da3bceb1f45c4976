"""Ray casting and camera visibility of hull vertices."""

from __future__ import annotations

import numpy as np

from ..errors import ConfigurationError
from .trimesh import TriMesh

HIT_TOLERANCE = 1e-3  # meters; grazing hits closer than this to the target count as clear


def ray_triangle_hits(origins: np.ndarray, directions: np.ndarray,
                      triangles: np.ndarray, eps: float = 1e-12):
    """Batched Moller-Trumbore: t of first hit per ray, inf when none.

    origins/directions are (R, 3); triangles (F, 3, 3).  Directions need
    not be unit length (t is in direction units).  Returns (t, face_index).
    """
    origins = np.atleast_2d(origins)
    directions = np.atleast_2d(directions)
    if len(triangles) == 0:
        n = len(origins)
        return np.full(n, np.inf), np.full(n, -1, dtype=int)
    v0 = triangles[:, 0]
    e1 = triangles[:, 1] - v0
    e2 = triangles[:, 2] - v0
    pvec = np.cross(directions[:, None, :], e2[None, :, :])
    det = np.einsum("rfk,fk->rf", pvec, e1)
    inv = np.where(np.abs(det) > eps, 1.0 / np.where(det == 0, 1.0, det), 0.0)
    tvec = origins[:, None, :] - v0[None, :, :]
    u = np.einsum("rfk,rfk->rf", tvec, pvec) * inv
    qvec = np.cross(tvec, e1[None, :, :])
    v = np.einsum("rk,rfk->rf", directions, qvec) * inv
    t = np.einsum("fk,rfk->rf", e2, qvec) * inv
    ok = ((np.abs(det) > eps) & (u >= 0) & (v >= 0) & (u + v <= 1) & (t > eps))
    t = np.where(ok, t, np.inf)
    face = np.argmin(t, axis=1)
    tmin = t[np.arange(len(t)), face]
    face = np.where(np.isfinite(tmin), face, -1)
    return tmin, face


def _camera_position(camera) -> np.ndarray:
    if hasattr(camera, "translation"):
        return np.asarray(camera.translation, dtype=float)
    return np.asarray(camera, dtype=float).reshape(3)


def visible_vertices(mesh: TriMesh, cameras, occluders,
                     tolerance: float = HIT_TOLERANCE) -> np.ndarray:
    """Hull vertices seen unoccluded by at least one camera.

    A vertex is visible from a camera when the ray from the camera center
    to the vertex hits no occluder triangle and no nearer triangle of the
    mesh itself, within ``tolerance`` of the vertex.  ``mesh`` is expected
    to be convex (the hull of a reconstruction).
    """
    if len(cameras) == 0:
        raise ConfigurationError("at least one camera is required")
    blockers = [np.asarray(o.triangles) for o in occluders if len(o.faces)]
    blockers.append(mesh.triangles)
    tris = np.concatenate(blockers, axis=0)
    keep = np.zeros(len(mesh.vertices), dtype=bool)
    for camera in cameras:
        origin = _camera_position(camera)
        dirs = mesh.vertices - origin
        origins = np.broadcast_to(origin, dirs.shape)
        t, _ = ray_triangle_hits(origins, dirs, tris)
        # t is measured in units of |vertex - origin|: clear if nothing
        # hits more than `tolerance` before the vertex itself
        lengths = np.linalg.norm(dirs, axis=1)
        keep |= t >= 1.0 - tolerance / np.maximum(lengths, 1e-12)
    return mesh.vertices[keep]
