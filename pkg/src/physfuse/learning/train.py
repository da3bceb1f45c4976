"""Alternating training loop for geometry and inertia from trajectories.

Each epoch: (1) recompute contact kinematics from the current model,
(2) solve all per-transition impulse hypotheses, (3) take one Adam step
on the summed violation losses plus the vision term, with analytic
gradients through the smoothed support function.
"""

from __future__ import annotations

import json
import logging
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..config import TrainConfig
from ..dynamics.types import BodyTrajectory, InertialParams, Scene
from ..errors import NumericalError
from ..geometry.meshing import extract_mesh_support
from ..geometry.metrics import closest_points_on_mesh
from ..geometry.supportnet import SupportPair, SupportPolytope, \
    initialize_polytope
from ..optim import Adam
from .batch import TransitionData, build_transition_data
from .inertia import InertiaParameterization
from .inner import solve_impulses
from .losses import (EpochKinematics, ViolationWeights,
                     contact_loss_and_grads, inner_quadratic)

logger = logging.getLogger(__name__)


@dataclass
class ContactTrainResult:
    net: SupportPolytope
    params: InertialParams
    hypotheses: np.ndarray            # (T, 6) final per-transition impulses
    history: dict[str, list] = field(default_factory=dict)
    inertia_param: InertiaParameterization | None = None


def outward_directions(vertices: np.ndarray, points: np.ndarray,
                       n_dirs: int):
    """Outward unit vectors from the current support mesh toward points.

    The mesh is refreshed from the exact (unsmoothed) support function;
    points already on the mesh are dropped (they contribute zero) and the
    direction is flipped for points inside the hull so it always points
    out of the shape.
    """
    mesh = extract_mesh_support(SupportPolytope(vertices, 0.0), n_dirs)
    dist, nearest, _ = closest_points_on_mesh(points, mesh, k=16)
    keep = dist > 1e-12
    points = points[keep]
    nearest = nearest[keep]
    dirs = (points - nearest) / dist[keep][:, None]
    normals = mesh.face_normals()
    anchors = mesh.triangles[:, 0]
    signed = (np.einsum("pi,fi->pf", points, normals)
              - np.einsum("fi,fi->f", anchors, normals)[None, :]).max(axis=1)
    dirs = np.where(signed[:, None] <= 0.0, -dirs, dirs)
    return points, dirs


def vision_loss(net: SupportPolytope, visible: np.ndarray,
                n_dirs: int = 642, batch: int = 1000, seed: int = 0) -> float:
    """Mean distance between support points toward the visible vertices
    and the vertices themselves (the vision supervision term)."""
    visible = np.asarray(visible, dtype=float).reshape(-1, 3)
    if len(visible) == 0:
        warnings.warn("vision loss evaluated with no visible points")
        return 0.0
    rng = np.random.default_rng(seed)
    if len(visible) > batch:
        visible = visible[rng.choice(len(visible), batch, replace=False)]
    n_total = len(visible)
    points, dirs = outward_directions(net.vertices, visible, n_dirs)
    if len(points) == 0:
        return 0.0
    s = net.support_points(dirs)
    return float(np.linalg.norm(s - points, axis=1).sum() / n_total)


def _initial_model(visible, trajectories, config: TrainConfig):
    if visible is not None and len(visible) >= 2:
        net = initialize_polytope(config.num_vertices, visible,
                                  smoothing=config.smoothing_train,
                                  seed=config.seed)
    else:
        translations = np.array([s.pose.translation for tr in trajectories
                                 for s in tr.states]) if trajectories else np.zeros((1, 3))
        extent = float(np.linalg.norm(translations.max(axis=0)
                                      - translations.min(axis=0))) + 0.1
        net = initialize_polytope(config.num_vertices, None,
                                  trajectory_extent=extent,
                                  center=np.zeros(3),
                                  smoothing=config.smoothing_train,
                                  seed=config.seed)
    center = net.vertices.mean(axis=0)
    radius = float(np.linalg.norm(net.vertices - center, axis=1).mean())
    inertia = InertiaParameterization.from_sphere(config.init_mass, center,
                                                  radius)
    return net.vertices.copy(), inertia


def train_contact_model(trajectories: list[BodyTrajectory],
                        visible: np.ndarray | None, scene: Scene,
                        weights: ViolationWeights | None = None,
                        config: TrainConfig | None = None,
                        callback=None) -> ContactTrainResult:
    """Learn support geometry and inertial parameters from trajectories.

    Friction is fixed by the scene.  Raises NumericalError with a
    diagnostic snapshot if the loss goes non-finite.
    """
    weights = weights or ViolationWeights()
    config = config or TrainConfig()
    data = build_transition_data(trajectories, scene)
    vis_pts = None
    if visible is not None:
        vis_pts = np.asarray(visible, dtype=float).reshape(-1, 3)
        if len(vis_pts) == 0:
            vis_pts = None

    vertices, inertia = _initial_model(vis_pts, trajectories, config)
    adam = Adam({"vertices": config.lr_vertices,
                 "log_mass": config.lr_log_mass,
                 "com": config.lr_com,
                 "second_chol": config.lr_inertia_chol})
    history: dict[str, list] = {k: [] for k in
                                ("total", "pred", "comp", "diss", "pen",
                                 "vision")}
    z = np.zeros((data.count, 6))
    for epoch in range(config.epochs_contact):
        if data.count:
            kin = EpochKinematics(vertices, config.smoothing_train, data)
            H, g, c0 = inner_quadratic(kin, inertia, weights)
            z = solve_impulses(H, g, c0, data.mus,
                               iterations=config.inner_iterations,
                               grad_tol=config.inner_grad_tol).impulses
        vision = None
        if vis_pts is not None:
            rng = np.random.default_rng([config.seed, epoch])
            sample = vis_pts
            if len(sample) > config.vision_batch:
                sample = sample[rng.choice(len(sample), config.vision_batch,
                                           replace=False)]
            pts, dirs = outward_directions(vertices, sample,
                                           config.vision_mesh_dirs)
            vision = (pts, dirs, len(sample))

        terms, grads = contact_loss_and_grads(
            vertices, inertia, data, z, weights, config.smoothing_train,
            vision=vision)
        if not np.isfinite(terms["total"]):
            raise NumericalError(
                "non-finite training loss",
                snapshot={"epoch": epoch, "terms": terms,
                          "vertices": vertices.tolist(),
                          "inertia": inertia.vector().tolist(),
                          "history": history})
        for key in history:
            history[key].append(terms[key])

        params = {"vertices": vertices, "log_mass": np.float64(inertia.log_mass),
                  "com": inertia.com, "second_chol": inertia.second_chol}
        new = adam.step(params, grads)
        vertices = new["vertices"]
        inertia = InertiaParameterization(float(new["log_mass"]), new["com"],
                                          new["second_chol"])
        inertia.clamp_diagonal()
        if callback is not None:
            callback(epoch, terms, vertices, inertia)
        if epoch % 50 == 0:
            logger.debug("epoch %d total %.3e", epoch, terms["total"])

    if data.count:
        kin = EpochKinematics(vertices, config.smoothing_train, data)
        H, g, c0 = inner_quadratic(kin, inertia, weights)
        z = solve_impulses(H, g, c0, data.mus,
                           iterations=config.inner_iterations,
                           grad_tol=config.inner_grad_tol).impulses
    net = SupportPolytope(vertices, smoothing=config.smoothing_eval)
    return ContactTrainResult(net, inertia.to_params(), z, history, inertia)


def extract_contact_evidence(net: SupportPolytope, params: InertialParams,
                             trajectories: list[BodyTrajectory], scene: Scene,
                             top_fraction: float = 0.30,
                             weights: ViolationWeights | None = None,
                             config: TrainConfig | None = None
                             ) -> list[SupportPair]:
    """Force-filtered support evidence from a final impulse-solve pass.

    Re-runs the inner solve over all transitions with the trained model
    (exact support queries) and keeps the (direction, point) pairs whose
    hypothesized normal impulse lies in the top fraction over all
    contact-frames.
    """
    weights = weights or ViolationWeights()
    config = config or TrainConfig()
    data = build_transition_data(trajectories, scene)
    if data.count == 0:
        warnings.warn("no transitions; contact evidence is empty")
        return []
    exact = SupportPolytope(net.vertices, smoothing=0.0)
    kin = EpochKinematics(exact.vertices, 0.0, data)
    inertia = InertiaParameterization.from_params(params)
    H, g, c0 = inner_quadratic(kin, inertia, weights)
    z = solve_impulses(H, g, c0, data.mus,
                       iterations=config.inner_iterations,
                       grad_tol=config.inner_grad_tol).impulses
    jn = z.reshape(-1, 2, 3)[:, :, 0]
    threshold = float(np.quantile(jn.reshape(-1), 1.0 - top_fraction))
    keep = (jn > 0.0) & (jn >= threshold)
    if not keep.any():
        warnings.warn("no contacts with positive impulse; evidence empty")
        return []
    pairs = []
    for t, c in zip(*np.nonzero(keep)):
        d = data.d_query[t, c]
        pairs.append(SupportPair(direction=d / np.linalg.norm(d),
                                 point=kin.s_cur[t, c],
                                 impulse=float(jn[t, c])))
    return pairs


def evidence_to_json(pairs: list[SupportPair], path: str | Path) -> None:
    Path(path).write_text(json.dumps(
        [{"n": p.direction.tolist(), "s": p.point.tolist(), "jn": p.impulse}
         for p in pairs]))


def evidence_from_json(path: str | Path) -> list[SupportPair]:
    return [SupportPair(np.asarray(d["n"]), np.asarray(d["s"]), d["jn"])
            for d in json.loads(Path(path).read_text())]


def save_checkpoint(result: ContactTrainResult, path: str | Path,
                    epoch: int | None = None) -> None:
    Path(path).write_text(json.dumps({
        "supportnet": result.net.to_dict(),
        "inertial": result.params.to_dict(),
        "epoch": epoch if epoch is not None else len(result.history.get("total", [])),
        "loss_history": result.history,
    }))


def load_checkpoint(path: str | Path) -> ContactTrainResult:
    d = json.loads(Path(path).read_text())
    return ContactTrainResult(
        SupportPolytope.from_dict(d["supportnet"]),
        InertialParams.from_dict(d["inertial"]),
        np.zeros((0, 6)), d.get("loss_history", {}))
