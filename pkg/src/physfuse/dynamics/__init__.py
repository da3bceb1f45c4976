"""Rigid-body frictional simulation against the known scene, plus
dynamics-prediction metrics."""

from .contact import contact_kinematics, ground_truth_contacts
from .metrics import (POSITION_THRESHOLD, ROTATION_THRESHOLD,
                      contact_activation_iou, pose_error,
                      time_before_divergence)
from .stepper import (ContactSolve, RolloutResult, com_velocity,
                      contact_system, project_friction_cone, rollout,
                      solve_forward_contact, step)
from .types import (DEFAULT_MU_PUSHER, DEFAULT_MU_TABLE, GRAVITY, BodyState,
                    BodyTrajectory, ContactPoint, InertialParams, Pose3,
                    Scene)

__all__ = [
    "BodyState", "BodyTrajectory", "ContactPoint", "ContactSolve",
    "DEFAULT_MU_PUSHER", "DEFAULT_MU_TABLE", "GRAVITY", "InertialParams",
    "POSITION_THRESHOLD", "Pose3", "ROTATION_THRESHOLD", "RolloutResult",
    "Scene", "com_velocity", "contact_activation_iou", "contact_kinematics",
    "contact_system", "ground_truth_contacts", "pose_error",
    "project_friction_cone", "rollout", "solve_forward_contact", "step",
    "time_before_divergence",
]
