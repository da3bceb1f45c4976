"""SDF supervision samples derived from contact evidence.

Support-ray samples carry exact induced signed distances along each
evidence ray; hyperplane samples carry lower bounds from supporting
hyperplanes; convexity samples carry interpolated upper bounds that bias
the shape convex between observed and inferred surface regions.
"""

from __future__ import annotations

import json
import struct
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..geometry.meshing import extract_mesh_support
from ..geometry.shapefield import ShapeField
from ..geometry.supportnet import SupportPair, SupportPolytope
from ..transforms import tangent_basis

KIND_EXACT_DEPTH = "exact_depth"
KIND_NEAR_SURFACE = "near_surface"
KIND_EMPTY_SPACE = "empty_space"
KIND_FREE_SPACE = "free_space"
KIND_SUPPORT_RAY = "support_ray"
KIND_HYPERPLANE = "hyperplane_bound"
KIND_CONVEXITY = "convexity_pair"

_KIND_CODES = {
    KIND_EXACT_DEPTH: 0, KIND_NEAR_SURFACE: 1, KIND_EMPTY_SPACE: 2,
    KIND_FREE_SPACE: 3, KIND_SUPPORT_RAY: 4, KIND_HYPERPLANE: 5,
    KIND_CONVEXITY: 6,
}
_CODE_KINDS = {v: k for k, v in _KIND_CODES.items()}

# kinds whose value is an exact target / a lower bound / an upper bound
TARGET_KINDS = {KIND_EXACT_DEPTH, KIND_NEAR_SURFACE, KIND_EMPTY_SPACE,
                KIND_FREE_SPACE, KIND_SUPPORT_RAY}
LOWER_BOUND_KINDS = {KIND_HYPERPLANE}
UPPER_BOUND_KINDS = {KIND_CONVEXITY}


@dataclass
class SdfSample:
    """One supervision sample: a body-frame point, a kind, and a value
    interpreted per kind (exact target, lower bound, or upper bound)."""

    point: np.ndarray
    kind: str
    value: float
    weight: float = 1.0

    @property
    def target(self):
        return self.value if self.kind in TARGET_KINDS else None

    @property
    def lower_bound(self):
        return self.value if self.kind in LOWER_BOUND_KINDS else None

    @property
    def upper_bound(self):
        return self.value if self.kind in UPPER_BOUND_KINDS else None


class SampleBatch:
    """Column-stored list of SdfSample (indexing yields SdfSample views)."""

    def __init__(self, points: np.ndarray, kinds: np.ndarray,
                 values: np.ndarray, weights: np.ndarray | None = None):
        self.points = np.asarray(points, dtype=float).reshape(-1, 3)
        self.kinds = np.asarray(kinds)
        self.values = np.asarray(values, dtype=float)
        self.weights = (np.ones(len(self.points)) if weights is None
                        else np.asarray(weights, dtype=float))

    @classmethod
    def empty(cls) -> "SampleBatch":
        return cls(np.zeros((0, 3)), np.zeros(0, dtype="U16"), np.zeros(0))

    @classmethod
    def concat(cls, batches: list["SampleBatch"]) -> "SampleBatch":
        batches = [b for b in batches if len(b)]
        if not batches:
            return cls.empty()
        return cls(np.concatenate([b.points for b in batches]),
                   np.concatenate([b.kinds for b in batches]),
                   np.concatenate([b.values for b in batches]),
                   np.concatenate([b.weights for b in batches]))

    def of_kind(self, kind: str) -> "SampleBatch":
        m = self.kinds == kind
        return SampleBatch(self.points[m], self.kinds[m], self.values[m],
                           self.weights[m])

    def subset(self, idx) -> "SampleBatch":
        return SampleBatch(self.points[idx], self.kinds[idx],
                           self.values[idx], self.weights[idx])

    def __len__(self) -> int:
        return len(self.points)

    def __getitem__(self, i: int) -> SdfSample:
        return SdfSample(self.points[i], str(self.kinds[i]),
                         float(self.values[i]), float(self.weights[i]))

    # binary record stream: kind u8, point 3*f32, value f32, weight f32
    def save(self, path: str | Path) -> None:
        path = Path(path)
        codes = np.array([_KIND_CODES[str(k)] for k in self.kinds],
                         dtype=np.uint8)
        rec = np.zeros(len(self), dtype=[("kind", "u1"), ("p", "<f4", 3),
                                         ("value", "<f4"), ("weight", "<f4")])
        rec["kind"] = codes
        rec["p"] = self.points.astype("<f4")
        rec["value"] = self.values.astype("<f4")
        rec["weight"] = self.weights.astype("<f4")
        path.write_bytes(rec.tobytes())
        header = {"count": len(self), "kinds": _KIND_CODES,
                  "record": "kind:u8,point:3f32,value:f32,weight:f32"}
        path.with_suffix(path.suffix + ".json").write_text(json.dumps(header))

    @classmethod
    def load(cls, path: str | Path) -> "SampleBatch":
        raw = np.frombuffer(Path(path).read_bytes(),
                            dtype=[("kind", "u1"), ("p", "<f4", 3),
                                   ("value", "<f4"), ("weight", "<f4")])
        kinds = np.array([_CODE_KINDS[int(c)] for c in raw["kind"]])
        return cls(raw["p"].astype(float), kinds, raw["value"].astype(float),
                   raw["weight"].astype(float))


RAY_EPSILON = 0.005      # m, inward sampling depth
RAY_FAR = 0.10           # m, outward reach
RAY_COUNTS = (100, 100, 50)


def sample_support_rays(pairs: list[SupportPair], seed: int = 0,
                        epsilon: float = RAY_EPSILON, far: float = RAY_FAR,
                        counts: tuple[int, int, int] = RAY_COUNTS) -> SampleBatch:
    """Exact induced signed distances along each evidence ray.

    Per pair: ``counts[0]`` points up to ``epsilon`` inward, ``counts[1]``
    up to ``epsilon`` outward, ``counts[2]`` up to ``far`` outward; each
    sample's target is its ray parameter.
    """
    rng = np.random.default_rng(seed)
    if not pairs:
        return SampleBatch.empty()
    points, values = [], []
    for pair in pairs:
        ls = np.concatenate([
            -rng.uniform(0.0, epsilon, counts[0]),
            rng.uniform(0.0, epsilon, counts[1]),
            rng.uniform(0.0, far, counts[2]),
        ])
        points.append(pair.point[None, :] + ls[:, None] * pair.direction[None, :])
        values.append(ls)
    points = np.concatenate(points)
    values = np.concatenate(values)
    kinds = np.full(len(points), KIND_SUPPORT_RAY, dtype="U16")
    return SampleBatch(points, kinds, values)


HYPERPLANE_TOL = 1e-3      # m, distance filter to a supporting hyperplane
CYLINDER_NEAR_RADIUS = 0.05
CYLINDER_NEAR_LENGTH = 0.005
CYLINDER_FAR_RADIUS = 0.10
CYLINDER_FAR_LENGTH = 0.10
CYLINDER_COUNTS = (200, 100, 100)


def _cylinder_points(rng, base, axis, radius, length, count):
    t1, t2 = tangent_basis(axis)
    rr = radius * np.sqrt(rng.uniform(0.0, 1.0, count))
    th = rng.uniform(0.0, 2.0 * np.pi, count)
    ax = rng.uniform(0.0, length, count)
    return (base[None, :] + ax[:, None] * axis[None, :]
            + (rr * np.cos(th))[:, None] * t1[None, :]
            + (rr * np.sin(th))[:, None] * t2[None, :])


def sample_hyperplane_bounds(pairs: list[SupportPair], net: SupportPolytope,
                             seed: int = 0, n_mesh: int = 25000,
                             tol: float = HYPERPLANE_TOL,
                             mesh_dirs: int = 5768) -> SampleBatch:
    """Lower-bound samples around hull faces near evidence hyperplanes.

    Points are sampled evenly on the support mesh, kept when within
    ``tol`` of some pair's supporting hyperplane, and each kept
    (face normal, point) seeds cylinders of bound samples: 200 within
    5 cm radius extending 5 mm inward, 100 the same outward, and 100
    within 10 cm radius extending 10 cm outward.  Each sample's value is
    its signed distance to the face plane (a sound SDF lower bound).
    """
    rng = np.random.default_rng(seed)
    if not pairs:
        return SampleBatch.empty()
    exact = SupportPolytope(net.vertices, smoothing=0.0)
    mesh = extract_mesh_support(exact, mesh_dirs)
    areas = mesh.face_areas()
    face_idx = rng.choice(len(mesh.faces), size=n_mesh, p=areas / areas.sum())
    r1 = np.sqrt(rng.random(n_mesh))
    r2 = rng.random(n_mesh)
    bary = np.stack([1 - r1, r1 * (1 - r2), r1 * r2], axis=1)
    tri = mesh.triangles[face_idx]
    surf = np.einsum("nk,nki->ni", bary, tri)
    normals = mesh.face_normals()[face_idx]

    dirs = np.stack([p.direction for p in pairs])
    anchors = np.stack([p.point for p in pairs])
    # plane distance of each surface point to each evidence hyperplane
    dist = np.abs(surf @ dirs.T - np.einsum("pi,pi->p", anchors, dirs)[None, :])
    keep = dist.min(axis=1) <= tol
    surf = surf[keep]
    normals = normals[keep]
    if len(surf) == 0:
        return SampleBatch.empty()

    points = []
    for v, m in zip(surf, normals):
        points.append(_cylinder_points(rng, v, -m, CYLINDER_NEAR_RADIUS,
                                       CYLINDER_NEAR_LENGTH, CYLINDER_COUNTS[0]))
        points.append(_cylinder_points(rng, v, m, CYLINDER_NEAR_RADIUS,
                                       CYLINDER_NEAR_LENGTH, CYLINDER_COUNTS[1]))
        points.append(_cylinder_points(rng, v, m, CYLINDER_FAR_RADIUS,
                                       CYLINDER_FAR_LENGTH, CYLINDER_COUNTS[2]))
    points = np.concatenate(points)
    per = sum(CYLINDER_COUNTS)
    values = np.einsum("ni,ni->n",
                       points - np.repeat(surf, per, axis=0),
                       np.repeat(normals, per, axis=0))
    kinds = np.full(len(points), KIND_HYPERPLANE, dtype="U16")
    return SampleBatch(points, kinds, values)


NEAR_SURFACE_EPS = 0.01    # m, |SDF| band defining near-surface grid nodes


def sample_convexity_pairs(field: ShapeField, ray_samples: SampleBatch,
                           n_pairs: int = 4096, seed=0,
                           eps: float = NEAR_SURFACE_EPS) -> SampleBatch:
    """Upper-bound samples interpolating near-surface and ray points.

    Pairs a random near-surface grid node (|SDF| <= eps, target taken
    from the field) with a random support-ray sample; the interpolated
    point's value is the matching convex combination of both targets.
    """
    rays = ray_samples.of_kind(KIND_SUPPORT_RAY)
    node_points = field.node_points()
    near = np.abs(field.values.reshape(-1)) <= eps
    if not near.any() or len(rays) == 0:
        warnings.warn("convexity sampling skipped: empty endpoint set")
        return SampleBatch.empty()
    rng = np.random.default_rng(seed)
    s1 = node_points[near][rng.integers(0, int(near.sum()), n_pairs)]
    j = rng.integers(0, len(rays), n_pairs)
    s2 = rays.points[j]
    t1 = field.query(s1)
    t2 = rays.values[j]
    lam = rng.uniform(0.0, 1.0, n_pairs)
    points = lam[:, None] * s1 + (1.0 - lam)[:, None] * s2
    values = lam * t1 + (1.0 - lam) * t2
    kinds = np.full(n_pairs, KIND_CONVEXITY, dtype="U16")
    return SampleBatch(points, kinds, values)
