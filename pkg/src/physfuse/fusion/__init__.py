"""SDF fusion: contact-evidence sampling, depth supervision, grid
training, and model export."""

from .depth import depth_supervision
from .export import build_urdf, export_model, parse_urdf
from .sampling import (KIND_CONVEXITY, KIND_EMPTY_SPACE, KIND_EXACT_DEPTH,
                       KIND_FREE_SPACE, KIND_HYPERPLANE, KIND_NEAR_SURFACE,
                       KIND_SUPPORT_RAY, SampleBatch, SdfSample,
                       sample_convexity_pairs, sample_hyperplane_bounds,
                       sample_support_rays)
from .train import FusionWeights, batch_loss_and_grad, fusion_loss_terms, \
    train_sdf

__all__ = [
    "FusionWeights", "KIND_CONVEXITY", "KIND_EMPTY_SPACE", "KIND_EXACT_DEPTH",
    "KIND_FREE_SPACE", "KIND_HYPERPLANE", "KIND_NEAR_SURFACE",
    "KIND_SUPPORT_RAY", "SampleBatch", "SdfSample", "batch_loss_and_grad",
    "build_urdf", "depth_supervision", "export_model", "fusion_loss_terms",
    "parse_urdf", "sample_convexity_pairs", "sample_hyperplane_bounds",
    "sample_support_rays", "train_sdf",
]
