"""Plain-text key-value training configuration.

Config files hold one ``key = value`` pair per line; ``#`` starts a
comment.  Values parse as int, float, bool, or string, in that order.
Unknown keys are rejected so typos cannot silently change a run.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, fields
from pathlib import Path


@dataclass
class TrainConfig:
    seed: int = 0
    # contact-implicit learning
    epochs_contact: int = 300
    inner_iterations: int = 500
    inner_grad_tol: float = 1e-10
    lr_vertices: float = 1e-3
    lr_log_mass: float = 1e-3
    lr_com: float = 1e-3
    lr_inertia_chol: float = 1e-4
    num_vertices: int = 64
    smoothing_train: float = 0.002
    smoothing_eval: float = 0.0
    init_mass: float = 0.5
    vision_mesh_dirs: int = 642
    vision_batch: int = 1000
    support_mesh_dirs: int = 5768
    top_impulse_fraction: float = 0.30
    # SDF fusion
    epochs_sdf: int = 500
    lr_grid: float = 2e-3
    grid_cell: float = 0.005
    grid_padding: float = 0.1
    support_ray_batch: int = 1000
    hyperplane_batch: int = 5000
    convexity_pairs: int = 4096
    depth_batch: int = 4096
    hull_mesh_points: int = 25000
    # depth supervision
    max_rays_per_frame: int = 256
    free_space_margin: float = 0.02

    def parameter_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _parse_value(raw: str):
    raw = raw.strip()
    for cast in (int, float):
        try:
            return cast(raw)
        except ValueError:
            pass
    if raw.lower() in ("true", "false"):
        return raw.lower() == "true"
    return raw


def load_config(path: str | Path | None, overrides: dict | None = None) -> TrainConfig:
    cfg = TrainConfig()
    known = {f.name for f in fields(TrainConfig)}
    entries = {}
    if path is not None:
        for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, raw = line.split("=", 1)
            key = key.strip()
            if key not in known:
                raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
            entries[key] = _parse_value(raw)
    if overrides:
        for key, value in overrides.items():
            if key not in known:
                raise ValueError(f"unknown config key {key!r}")
            entries[key] = value
    for key, value in entries.items():
        setattr(cfg, key, value)
    return cfg


def save_config(cfg: TrainConfig, path: str | Path) -> None:
    lines = [f"{k} = {v}" for k, v in cfg.parameter_dict().items()]
    Path(path).write_text("\n".join(lines) + "\n")


def config_hash(cfg: TrainConfig) -> str:
    text = "\n".join(f"{k}={v!r}" for k, v in sorted(cfg.parameter_dict().items()))
    return hashlib.sha256(text.encode()).hexdigest()[:16]
