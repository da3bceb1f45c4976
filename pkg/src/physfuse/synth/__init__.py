"""Synthetic scenes: ground-truth simulation, depth rendering, pose noise."""

from .render import (PIXEL_STRIDE, DepthFrame, DepthObservations,
                     perturb_poses, render_depth)
from .simulate import SIM_DT, simulate_ground_truth
from .spec import (CameraIntrinsics, NoiseSpec, ObjectSpec, SceneSpec,
                   SESSION_DURATION, SESSION_RATE)

__all__ = [
    "CameraIntrinsics", "DepthFrame", "DepthObservations", "NoiseSpec",
    "ObjectSpec", "PIXEL_STRIDE", "SESSION_DURATION", "SESSION_RATE",
    "SIM_DT", "SceneSpec", "perturb_poses", "render_depth",
    "simulate_ground_truth",
]
