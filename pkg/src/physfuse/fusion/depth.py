"""Depth-derived SDF supervision along camera rays."""

from __future__ import annotations

import numpy as np

from ..dynamics.types import BodyTrajectory
from ..errors import ConfigurationError
from .sampling import (KIND_EMPTY_SPACE, KIND_EXACT_DEPTH, KIND_FREE_SPACE,
                       KIND_NEAR_SURFACE, SampleBatch)

TRUNCATION = 0.01          # m
FREE_SPACE_TARGET = 0.1    # dimensionless; applied as 0.1 * truncation meters
EMPTY_SPAN = 0.05          # m of empty-space supervision in front of hits
FREE_MARGIN = 0.02         # m of uncertain space behind hits
RAY_COUNTS = (8, 6, 4)     # empty / near-surface / free samples per ray


def depth_supervision(depth, poses: BodyTrajectory,
                      trunc: float = TRUNCATION,
                      free_target: float = FREE_SPACE_TARGET,
                      empty_span: float = EMPTY_SPAN,
                      free_margin: float = FREE_MARGIN,
                      max_rays_per_frame: int = 256,
                      counts: tuple[int, int, int] = RAY_COUNTS,
                      seed: int = 0) -> SampleBatch:
    """Body-frame SDF samples from valid depth returns.

    Per hit ray: exact zero at the hit, signed targets within the
    truncation band, the truncation constant farther in front, and the
    small uncertain constant just behind the surface.  Rays that saw an
    occluder or nothing produce no samples.
    """
    rng = np.random.default_rng(seed)
    t0 = poses[0].time
    batches = []
    for frame in depth.frames:
        idx = int(round((frame.time - t0) / poses.dt))
        if idx < 0 or idx >= len(poses) \
                or abs(poses[idx].time - frame.time) > poses.dt / 2:
            raise ConfigurationError(
                f"no pose within dt/2 of frame time {frame.time}")
        pose = poses[idx].pose
        hits = np.asarray(frame.hit_points, dtype=float).reshape(-1, 3)
        if len(hits) == 0:
            continue
        if len(hits) > max_rays_per_frame:
            hits = hits[rng.choice(len(hits), max_rays_per_frame,
                                   replace=False)]
        origin = frame.camera_pose.translation
        rays = hits - origin
        depth_along = np.linalg.norm(rays, axis=1)
        dirs = rays / depth_along[:, None]
        n = len(hits)

        n_e, n_n, n_f = counts
        tau_empty = (depth_along[:, None]
                     - rng.uniform(trunc, empty_span, (n, n_e)))
        tau_near = (depth_along[:, None]
                    + rng.uniform(-trunc, trunc, (n, n_n)))
        tau_free = (depth_along[:, None]
                    + rng.uniform(trunc, trunc + free_margin, (n, n_f)))
        taus = np.concatenate([tau_empty, tau_near, tau_free], axis=1)
        world = origin[None, None, :] + taus[:, :, None] * dirs[:, None, :]
        targets = np.concatenate([
            np.full((n, n_e), trunc),
            np.clip(depth_along[:, None] - tau_near, -trunc, trunc),
            np.full((n, n_f), free_target * trunc),
        ], axis=1)
        kinds = np.concatenate([
            np.full((n, n_e), KIND_EMPTY_SPACE, dtype="U16"),
            np.full((n, n_n), KIND_NEAR_SURFACE, dtype="U16"),
            np.full((n, n_f), KIND_FREE_SPACE, dtype="U16"),
        ], axis=1)

        points_w = np.concatenate([world.reshape(-1, 3), hits])
        values = np.concatenate([targets.reshape(-1), np.zeros(n)])
        kind_col = np.concatenate([kinds.reshape(-1),
                                   np.full(n, KIND_EXACT_DEPTH, dtype="U16")])
        batches.append(SampleBatch(pose.inverse_transform(points_w),
                                   kind_col, values))
    return SampleBatch.concat(batches)
