"""Contact-implicit learning: impulse hypotheses via an inner solve,
geometry/inertia updates via outer gradient descent, with vision
supervision from visible hull vertices."""

from .batch import TransitionData, build_transition_data, softmax_support
from .inertia import InertiaParameterization
from .inner import InnerSolveResult, project_cones, solve_impulses
from .losses import (EpochKinematics, ImpulseHypothesis, Transition,
                     ViolationWeights, contact_loss_and_grads,
                     inner_quadratic, violation_losses)
from .train import (ContactTrainResult, evidence_from_json, evidence_to_json,
                    extract_contact_evidence, load_checkpoint, outward_directions,
                    save_checkpoint, train_contact_model, vision_loss)

__all__ = [
    "ContactTrainResult", "EpochKinematics", "ImpulseHypothesis",
    "InertiaParameterization", "InnerSolveResult", "Transition",
    "TransitionData", "ViolationWeights", "build_transition_data",
    "contact_loss_and_grads", "evidence_from_json", "evidence_to_json",
    "extract_contact_evidence", "inner_quadratic", "load_checkpoint",
    "outward_directions", "project_cones", "save_checkpoint",
    "softmax_support", "solve_impulses", "train_contact_model",
    "violation_losses", "vision_loss",
]
