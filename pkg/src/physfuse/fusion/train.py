"""Grid SDF training against combined depth and contact-evidence losses."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..config import TrainConfig
from ..errors import NumericalError
from ..geometry.shapefield import ShapeField
from ..optim import Adam
from .sampling import (KIND_CONVEXITY, KIND_EMPTY_SPACE, KIND_EXACT_DEPTH,
                       KIND_FREE_SPACE, KIND_HYPERPLANE, KIND_NEAR_SURFACE,
                       KIND_SUPPORT_RAY, SampleBatch, sample_convexity_pairs)

logger = logging.getLogger(__name__)


@dataclass
class FusionWeights:
    """Loss weights of the SDF fit; truncation and targets in meters."""

    w_free: float = 50.0          # uncertain free space
    eps_free: float = 0.1         # free-space target, truncation-normalized
    w_empty: float = 1.0
    w_surf: float = 3000.0
    trunc: float = 0.01
    lam: float = 1.0              # target scale at the truncation distance
    w_support: float = 2.0
    w_hyperplane: float = 1.0
    w_convexity: float = 1.0

    def __post_init__(self):
        vals = [self.w_free, self.eps_free, self.w_empty, self.w_surf,
                self.trunc, self.lam, self.w_support, self.w_hyperplane,
                self.w_convexity]
        if min(vals) < 0:
            raise ValueError("fusion weights must be non-negative")


def fusion_loss_terms(sdf_fn, batch: SampleBatch, weights: FusionWeights):
    """Loss components for a sample batch against any SDF callable.

    Exact-target kinds use squared residuals; hyperplane bounds a squared
    hinge; convexity a linear hinge (one-sided upper bound).
    """
    values = sdf_fn(batch.points) if len(batch) else np.zeros(0)
    terms = {}
    residual = values - batch.values
    for kind, w in ((KIND_NEAR_SURFACE, weights.w_surf),
                    (KIND_EXACT_DEPTH, weights.w_surf),
                    (KIND_EMPTY_SPACE, weights.w_empty),
                    (KIND_FREE_SPACE, weights.w_free),
                    (KIND_SUPPORT_RAY, weights.w_support)):
        m = batch.kinds == kind
        terms[kind] = float((residual[m] ** 2).sum())
    m = batch.kinds == KIND_HYPERPLANE
    terms[KIND_HYPERPLANE] = float((np.minimum(0.0, residual[m]) ** 2).sum())
    m = batch.kinds == KIND_CONVEXITY
    terms[KIND_CONVEXITY] = float(np.maximum(0.0, residual[m]).sum())
    total = (weights.w_surf * terms[KIND_NEAR_SURFACE]
             + weights.w_surf * terms[KIND_EXACT_DEPTH]
             + weights.w_empty * terms[KIND_EMPTY_SPACE]
             + weights.w_free * terms[KIND_FREE_SPACE]
             + weights.w_support * terms[KIND_SUPPORT_RAY]
             + weights.w_hyperplane * terms[KIND_HYPERPLANE]
             + weights.w_convexity * terms[KIND_CONVEXITY])
    terms["total"] = float(total)
    return terms


_KIND_WEIGHT_ATTR = {
    KIND_NEAR_SURFACE: "w_surf", KIND_EXACT_DEPTH: "w_surf",
    KIND_EMPTY_SPACE: "w_empty", KIND_FREE_SPACE: "w_free",
    KIND_SUPPORT_RAY: "w_support", KIND_HYPERPLANE: "w_hyperplane",
    KIND_CONVEXITY: "w_convexity",
}


def batch_loss_and_grad(field: ShapeField, batch: SampleBatch,
                        weights: FusionWeights):
    """Total batch loss and its gradient w.r.t. the flattened grid."""
    grad = np.zeros(field.values.size)
    if len(batch) == 0:
        return 0.0, grad
    values, indices, interp_w = field.query_with_support(batch.points)
    residual = values - batch.values
    dloss = np.zeros(len(batch))
    total = 0.0
    for kind, attr in _KIND_WEIGHT_ATTR.items():
        w = getattr(weights, attr)
        m = batch.kinds == kind
        if not m.any() or w == 0.0:
            continue
        r = residual[m]
        if kind == KIND_HYPERPLANE:
            h = np.minimum(0.0, r)
            total += w * (h ** 2).sum()
            dloss[m] = 2.0 * w * h
        elif kind == KIND_CONVEXITY:
            h = np.maximum(0.0, r)
            total += w * h.sum()
            dloss[m] = w * (r > 0.0)
        else:
            total += w * (r ** 2).sum()
            dloss[m] = 2.0 * w * r
    np.add.at(grad, indices.reshape(-1),
              (dloss[:, None] * interp_w).reshape(-1))
    return float(total), grad


def _sample_domain(batches: list[SampleBatch]):
    pts = np.concatenate([b.points for b in batches if len(b)])
    return pts.min(axis=0), pts.max(axis=0)


def train_sdf(depth_samples: SampleBatch,
              physible_samples: SampleBatch | None = None,
              weights: FusionWeights | None = None,
              config: TrainConfig | None = None,
              domain: tuple[np.ndarray, np.ndarray] | None = None,
              callback=None) -> ShapeField:
    """Fit the signed-distance grid to depth and contact-evidence samples.

    Per epoch, independent seeded streams draw up to the configured
    counts of support-ray, hyperplane, and depth samples, plus fresh
    convexity pairs against the current field; one Adam step follows.
    Deterministic per seed; zero physics weights reproduce a depth-only
    fit bitwise on the same domain.
    """
    weights = weights or FusionWeights()
    config = config or TrainConfig()
    if len(depth_samples) == 0:
        raise NumericalError("depth supervision is empty")
    physible = physible_samples or SampleBatch.empty()
    if domain is None:
        domain = _sample_domain([depth_samples, physible])
    field = ShapeField.from_aabb(domain[0], domain[1], config.grid_cell,
                                 fill=2.0 * weights.trunc,
                                 padding=config.grid_padding)
    field.values *= 1.0  # owned, trainable copy

    rays = physible.of_kind(KIND_SUPPORT_RAY)
    hyper = physible.of_kind(KIND_HYPERPLANE)
    adam = Adam({"grid": config.lr_grid})
    use_convexity = weights.w_convexity > 0.0 and len(rays) > 0
    history = []
    for epoch in range(config.epochs_sdf):
        parts = []
        rng_depth = np.random.default_rng([config.seed, epoch, 0])
        n = min(len(depth_samples), config.depth_batch)
        parts.append(depth_samples.subset(
            rng_depth.choice(len(depth_samples), n, replace=False)))
        if len(rays):
            rng_s = np.random.default_rng([config.seed, epoch, 1])
            n = min(len(rays), config.support_ray_batch)
            parts.append(rays.subset(rng_s.choice(len(rays), n, replace=False)))
        if len(hyper):
            rng_h = np.random.default_rng([config.seed, epoch, 2])
            n = min(len(hyper), config.hyperplane_batch)
            parts.append(hyper.subset(rng_h.choice(len(hyper), n,
                                                   replace=False)))
        if use_convexity and np.abs(field.values).min() <= 0.01:
            parts.append(sample_convexity_pairs(
                field, rays, config.convexity_pairs,
                seed=[config.seed, epoch, 3]))
        batch = SampleBatch.concat(parts)
        loss, grad = batch_loss_and_grad(field, batch, weights)
        if not np.isfinite(loss):
            raise NumericalError("non-finite fusion loss",
                                 snapshot={"epoch": epoch,
                                           "history": history})
        new = adam.step({"grid": field.values.reshape(-1)}, {"grid": grad})
        field.values = new["grid"].reshape(field.dims)
        history.append(loss)
        if callback is not None:
            callback(epoch, loss, field)
        if epoch % 100 == 0:
            logger.debug("sdf epoch %d loss %.4e", epoch, loss)
    field.loss_history = history
    return field
