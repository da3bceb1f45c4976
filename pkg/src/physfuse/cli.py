"""Command-line pipeline: synth, learn, eval, export.

Exit codes: 0 success, 2 invalid input, 3 numerical failure.  All
configuration comes from files plus flag overrides; outputs are
reproducible given identical inputs and seeds (manifests record config
hashes and timings).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from multiprocessing import Pool
from pathlib import Path

import numpy as np

from .config import TrainConfig, config_hash, load_config
from .dynamics import (BodyTrajectory, InertialParams, Scene, rollout,
                       contact_activation_iou, pose_error,
                       time_before_divergence)
from .errors import NumericalError, PhysfuseError
from .fusion import (FusionWeights, SampleBatch, depth_supervision,
                     export_model, sample_hyperplane_bounds,
                     sample_support_rays, train_sdf)
from .geometry import (SupportPolytope, TriMesh, chamfer_distance,
                       convex_hull_mesh, extract_mesh_sdf,
                       extract_mesh_support, load_obj, save_obj,
                       volumetric_iou, ShapeField)
from .learning import (ViolationWeights, evidence_from_json,
                       evidence_to_json, extract_contact_evidence,
                       save_checkpoint, train_contact_model)
from .synth import (DepthObservations, SceneSpec, perturb_poses,
                    render_depth, simulate_ground_truth)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3

METRICS_COLUMNS = ["session", "variant", "chamfer_cm", "iou", "pos_err_m",
                   "rot_err_deg", "t_div_pos_s", "t_div_rot_s", "contact_iou"]


def _write_manifest(path: Path, stage: str, session: str, outputs: dict,
                    seeds: dict, cfg_hash: str, timings: dict) -> None:
    for name, p in outputs.items():
        if not Path(p).exists():
            raise PhysfuseError(f"manifest output missing: {name} -> {p}")
    path.write_text(json.dumps({
        "session": session, "stage": stage,
        "outputs": {k: str(v) for k, v in outputs.items()},
        "seeds": seeds, "config_hash": cfg_hash, "timings": timings,
    }, indent=1))


# -- synth ----------------------------------------------------------------------

def cmd_synth(spec_path: str, out_dir: str) -> int:
    t_start = time.time()
    spec = SceneSpec.load(spec_path)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    timings = {}

    t0 = time.time()
    result = simulate_ground_truth(spec)
    timings["simulate_s"] = time.time() - t0
    t0 = time.time()
    depth, visible = render_depth(spec, result.trajectory)
    timings["render_s"] = time.time() - t0
    observed = perturb_poses(result.trajectory, spec.noise,
                             seed=spec.seed + 1)

    spec.save(out / "scene_spec.json")
    spec.scene().save(out / "scene.json")
    result.trajectory.save(out / "trajectory_ref.json")
    observed.save(out / "trajectory_obs.json")
    depth.save(out / "depth.json")
    (out / "visible.json").write_text(json.dumps(visible.tolist()))
    save_obj(spec.object.mesh(), out / "mesh_gt.obj")
    (out / "contact_flags.json").write_text(
        json.dumps([bool(b) for b in result.pusher_contact]))

    outputs = {name: out / name for name in
               ("scene_spec.json", "scene.json", "trajectory_ref.json",
                "trajectory_obs.json", "depth.json", "visible.json",
                "mesh_gt.obj", "contact_flags.json")}
    timings["total_s"] = time.time() - t_start
    _write_manifest(out / "manifest_synth.json", "synth", out.name, outputs,
                    {"seed": spec.seed}, "", timings)
    return EXIT_OK


# -- learn ----------------------------------------------------------------------

def _require(session: Path, *names: str) -> None:
    for name in names:
        if not (session / name).exists():
            raise FileNotFoundError(str(session / name))


def cmd_learn(session_dir: str, config: TrainConfig | None = None,
              out_dir: str | None = None, no_vision: bool = False,
              no_physics: bool = False) -> int:
    t_start = time.time()
    session = Path(session_dir)
    _require(session, "scene.json", "trajectory_obs.json", "depth.json",
             "visible.json")
    cfg = config or TrainConfig()
    out = Path(out_dir) if out_dir else session / "model"
    out.mkdir(parents=True, exist_ok=True)
    timings = {}

    scene = Scene.load(session / "scene.json")
    observed = BodyTrajectory.load(session / "trajectory_obs.json")
    depth = DepthObservations.load(session / "depth.json")
    visible = np.asarray(json.loads((session / "visible.json").read_text()))

    t0 = time.time()
    depth_samples = depth_supervision(
        depth, observed, max_rays_per_frame=cfg.max_rays_per_frame,
        free_margin=cfg.free_space_margin, seed=cfg.seed + 11)
    timings["depth_samples_s"] = time.time() - t0

    fusion_weights = FusionWeights()
    outputs = {}
    seeds = {"seed": cfg.seed}

    if no_physics:
        t0 = time.time()
        field = train_sdf(depth_samples, None, fusion_weights, cfg)
        timings["sdf_depth_s"] = time.time() - t0
        field.save(out / "field_depth.bin")
        save_obj(extract_mesh_sdf(field), out / "mesh_depth.obj")
        outputs.update(field_depth=out / "field_depth.bin",
                       mesh_depth=out / "mesh_depth.obj")
    else:
        weights = ViolationWeights()
        if no_vision:
            weights.w_vision = 0.0
        t0 = time.time()
        trained = train_contact_model(
            [observed], None if no_vision else visible, scene,
            weights=weights, config=cfg)
        timings["contact_train_s"] = time.time() - t0
        trained.net.save(out / "supportnet.json")
        (out / "inertial.json").write_text(
            json.dumps(trained.params.to_dict()))
        save_checkpoint(trained, out / "checkpoint.json")

        t0 = time.time()
        evidence = extract_contact_evidence(
            trained.net, trained.params, [observed], scene,
            top_fraction=cfg.top_impulse_fraction, weights=weights,
            config=cfg)
        evidence_to_json(evidence, out / "evidence.json")
        ray_samples = sample_support_rays(evidence, seed=cfg.seed + 21)
        hyper_samples = sample_hyperplane_bounds(
            evidence, trained.net, seed=cfg.seed + 22,
            n_mesh=cfg.hull_mesh_points, mesh_dirs=cfg.support_mesh_dirs)
        physible = SampleBatch.concat([ray_samples, hyper_samples])
        timings["evidence_s"] = time.time() - t0

        domain_pts = [depth_samples.points]
        if len(physible):
            domain_pts.append(physible.points)
        lo = np.concatenate(domain_pts).min(axis=0)
        hi = np.concatenate(domain_pts).max(axis=0)

        t0 = time.time()
        fused = train_sdf(depth_samples, physible, fusion_weights, cfg,
                          domain=(lo, hi))
        timings["sdf_fused_s"] = time.time() - t0
        t0 = time.time()
        depth_only = train_sdf(depth_samples, None, fusion_weights, cfg,
                               domain=(lo, hi))
        timings["sdf_depth_s"] = time.time() - t0

        fused.save(out / "field_fused.bin")
        depth_only.save(out / "field_depth.bin")
        save_obj(extract_mesh_sdf(depth_only), out / "mesh_depth.obj")
        exported = export_model(fused, trained.net, trained.params, scene,
                                out, hull_dirs=cfg.support_mesh_dirs)
        outputs.update(supportnet=out / "supportnet.json",
                       inertial=out / "inertial.json",
                       checkpoint=out / "checkpoint.json",
                       evidence=out / "evidence.json",
                       field_fused=out / "field_fused.bin",
                       field_depth=out / "field_depth.bin",
                       mesh_depth=out / "mesh_depth.obj",
                       **exported)

    timings["total_s"] = time.time() - t_start
    _write_manifest(out / "manifest_learn.json", "learn", session.name,
                    outputs, seeds, config_hash(cfg), timings)
    return EXIT_OK


# -- eval -----------------------------------------------------------------------

def _variant_models(session: Path, model: Path, cfg: TrainConfig):
    """(name, eval mesh, collision hull, inertial params) per variant."""
    spec = SceneSpec.load(session / "scene_spec.json")
    gt_mesh = load_obj(session / "mesh_gt.obj")
    gt_hull = convex_hull_mesh(gt_mesh.vertices)
    gt_params = InertialParams.uniform_density(gt_mesh, spec.object.mass)

    depth_field = ShapeField.load(model / "field_depth.bin")
    depth_mesh = extract_mesh_sdf(depth_field)
    depth_hull = convex_hull_mesh(depth_mesh.vertices)
    vision_params = InertialParams.uniform_density(depth_hull, cfg.init_mass)

    net = SupportPolytope.load(model / "supportnet.json")
    learned = InertialParams.from_dict(
        json.loads((model / "inertial.json").read_text()))
    pll_mesh = extract_mesh_support(net, cfg.support_mesh_dirs)

    fused_field = ShapeField.load(model / "field_fused.bin")
    fused_mesh = extract_mesh_sdf(fused_field)
    fused_hull = convex_hull_mesh(fused_mesh.vertices)

    return [("vision_only", depth_mesh, depth_hull, vision_params),
            ("pll_only", pll_mesh, pll_mesh, learned),
            ("fused", fused_mesh, fused_hull, learned),
            ("ground_truth", gt_mesh, gt_hull, gt_params)], gt_mesh


def cmd_eval(session_dir: str, model_dir: str | None = None,
             out_csv: str | None = None, config: TrainConfig | None = None,
             voxel: float = 0.004, chamfer_samples: int = 10000,
             rollout_smoothing: float = 0.002) -> int:
    session = Path(session_dir)
    cfg = config or TrainConfig()
    model = Path(model_dir) if model_dir else session / "model"
    _require(session, "scene.json", "trajectory_obs.json", "mesh_gt.obj",
             "contact_flags.json", "scene_spec.json")
    _require(model, "field_depth.bin", "field_fused.bin", "supportnet.json",
             "inertial.json")

    scene = Scene.load(session / "scene.json")
    reference = BodyTrajectory.load(session / "trajectory_obs.json")
    ref_flags = np.asarray(
        json.loads((session / "contact_flags.json").read_text()), dtype=bool)
    variants, gt_mesh = _variant_models(session, model, cfg)

    # sessions begin at rest: roll out from the first tracked pose with
    # zero velocity rather than the noise-amplified differenced velocity
    first = reference[0]
    initial = type(first)(first.pose, np.zeros(3), np.zeros(3), first.time)

    rows = []
    for name, eval_mesh, hull, params in variants:
        cham = chamfer_distance(eval_mesh, gt_mesh, chamfer_samples,
                                seed=cfg.seed)
        iou = volumetric_iou(eval_mesh, gt_mesh, voxel=voxel)
        net = SupportPolytope(hull.vertices, smoothing=rollout_smoothing)
        result = rollout(net, params, scene, initial,
                         horizon=reference.duration())
        pos_err, rot_err = pose_error(result.trajectory, reference)
        t_pos, t_rot = time_before_divergence(result.trajectory, reference)
        n = min(len(result.pusher_contact), len(ref_flags))
        c_iou = contact_activation_iou(result.pusher_contact[:n],
                                       ref_flags[:n])
        rows.append([session.name, name, f"{cham:.6f}", f"{iou:.6f}",
                     f"{pos_err:.6f}", f"{rot_err:.6f}", f"{t_pos:.6f}",
                     f"{t_rot:.6f}", f"{c_iou:.6f}"])

    out = Path(out_csv) if out_csv else model / "metrics.csv"
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(METRICS_COLUMNS)
        writer.writerows(rows)
    return EXIT_OK


# -- export ---------------------------------------------------------------------

def cmd_export(session_dir: str, model_dir: str | None = None,
               out_dir: str | None = None,
               config: TrainConfig | None = None) -> int:
    session = Path(session_dir)
    cfg = config or TrainConfig()
    model = Path(model_dir) if model_dir else session / "model"
    _require(session, "scene.json")
    _require(model, "field_fused.bin", "supportnet.json", "inertial.json")
    scene = Scene.load(session / "scene.json")
    field = ShapeField.load(model / "field_fused.bin")
    net = SupportPolytope.load(model / "supportnet.json")
    params = InertialParams.from_dict(
        json.loads((model / "inertial.json").read_text()))
    export_model(field, net, params, scene,
                 Path(out_dir) if out_dir else model,
                 hull_dirs=cfg.support_mesh_dirs)
    return EXIT_OK


# -- argument handling ------------------------------------------------------------

def _learn_worker(args):
    session, kwargs = args
    return cmd_learn(session, **kwargs)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="physfuse",
        description="Reconstruct object geometry and inertia from synthetic "
                    "occluded pushing sessions.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="generate a synthetic session")
    p_synth.add_argument("spec")
    p_synth.add_argument("--out", required=True)

    p_learn = sub.add_parser("learn", help="run the learning stages")
    p_learn.add_argument("sessions", nargs="+")
    p_learn.add_argument("--config", default=None)
    p_learn.add_argument("--out", default=None)
    p_learn.add_argument("--no-vision", action="store_true")
    p_learn.add_argument("--no-physics", action="store_true")
    p_learn.add_argument("--jobs", type=int, default=1)

    p_eval = sub.add_parser("eval", help="evaluate model variants")
    p_eval.add_argument("sessions", nargs="+")
    p_eval.add_argument("--model", default=None)
    p_eval.add_argument("--out", default=None)
    p_eval.add_argument("--config", default=None)
    p_eval.add_argument("--voxel", type=float, default=0.004)

    p_export = sub.add_parser("export", help="re-export mesh/URDF package")
    p_export.add_argument("session")
    p_export.add_argument("--model", default=None)
    p_export.add_argument("--out", default=None)

    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    try:
        if args.command == "synth":
            return cmd_synth(args.spec, args.out)
        if args.command == "learn":
            cfg = load_config(args.config) if args.config else TrainConfig()
            if args.out and len(args.sessions) > 1:
                parser.error("--out only applies to a single session")
            kwargs = {"config": cfg, "out_dir": args.out,
                      "no_vision": args.no_vision,
                      "no_physics": args.no_physics}
            if args.jobs > 1 and len(args.sessions) > 1:
                with Pool(args.jobs) as pool:
                    codes = pool.map(_learn_worker,
                                     [(s, kwargs) for s in args.sessions])
                return max(codes)
            codes = [cmd_learn(s, **kwargs) for s in args.sessions]
            return max(codes)
        if args.command == "eval":
            cfg = load_config(args.config) if args.config else TrainConfig()
            codes = [cmd_eval(s, args.model, args.out, cfg, args.voxel)
                     for s in args.sessions]
            return max(codes)
        if args.command == "export":
            return cmd_export(args.session, args.model, args.out)
        parser.error(f"unknown command {args.command}")
    except (FileNotFoundError, json.JSONDecodeError, ValueError) as exc:
        logger.error("input error: %s", exc)
        return EXIT_INPUT
    except NumericalError as exc:
        logger.error("numerical failure: %s", exc)
        return EXIT_NUMERIC
    except PhysfuseError as exc:
        logger.error("error: %s", exc)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
