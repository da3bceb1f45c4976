"""Triangle meshes: construction, OBJ I/O, sampling, and mass properties."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..errors import ConfigurationError

_DEGENERATE_AREA = 1e-14


class TriMesh:
    """Indexed triangle mesh (vertices in meters).

    Faces with area below tolerance are dropped at construction; indices
    are validated.  Instances are treated as immutable.
    """

    def __init__(self, vertices: np.ndarray, faces: np.ndarray):
        vertices = np.asarray(vertices, dtype=float).reshape(-1, 3)
        faces = np.asarray(faces, dtype=np.int64).reshape(-1, 3)
        if faces.size and (faces.min() < 0 or faces.max() >= len(vertices)):
            raise ConfigurationError("face index out of range")
        if faces.size:
            areas = _face_areas(vertices, faces)
            faces = faces[areas > _DEGENERATE_AREA]
        self.vertices = vertices
        self.faces = faces

    # -- derived quantities -------------------------------------------------

    @property
    def triangles(self) -> np.ndarray:
        return self.vertices[self.faces]

    def face_areas(self) -> np.ndarray:
        return _face_areas(self.vertices, self.faces)

    def face_normals(self) -> np.ndarray:
        tri = self.triangles
        n = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
        return n / np.linalg.norm(n, axis=1, keepdims=True)

    def is_watertight(self) -> bool:
        """Every undirected edge is shared by exactly two faces."""
        if len(self.faces) == 0:
            return False
        edges = np.concatenate([
            self.faces[:, [0, 1]], self.faces[:, [1, 2]], self.faces[:, [2, 0]],
        ])
        edges = np.sort(edges, axis=1)
        _, counts = np.unique(edges, axis=0, return_counts=True)
        return bool(np.all(counts == 2))

    def volume(self) -> float:
        """Signed volume by the divergence theorem (outward orientation)."""
        tri = self.triangles
        return float(np.einsum("ij,ij->i", tri[:, 0],
                               np.cross(tri[:, 1], tri[:, 2])).sum() / 6.0)

    def transformed(self, rotation: np.ndarray, translation: np.ndarray) -> "TriMesh":
        return TriMesh(self.vertices @ np.asarray(rotation).T + translation, self.faces)

    def sample_surface(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Area-weighted uniform surface samples."""
        areas = self.face_areas()
        probs = areas / areas.sum()
        idx = rng.choice(len(self.faces), size=n, p=probs)
        tri = self.triangles[idx]
        # uniform barycentric via square-root trick
        r1 = np.sqrt(rng.random(n))
        r2 = rng.random(n)
        a = 1.0 - r1
        b = r1 * (1.0 - r2)
        c = r1 * r2
        return (a[:, None] * tri[:, 0] + b[:, None] * tri[:, 1]
                + c[:, None] * tri[:, 2])


def _face_areas(vertices: np.ndarray, faces: np.ndarray) -> np.ndarray:
    tri = vertices[faces]
    return 0.5 * np.linalg.norm(
        np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0]), axis=1)


# -- mass properties ---------------------------------------------------------

# second moment of the canonical tetrahedron (0, e1, e2, e3), unit density
_TET_COV = (np.full((3, 3), 1.0 / 120.0) + np.eye(3) / 120.0)


def mesh_mass_properties(mesh: TriMesh) -> tuple[float, np.ndarray, np.ndarray]:
    """Volume, centroid, and unit-density inertia about the centroid.

    Uses signed tetrahedra against the origin; requires a watertight,
    outward-oriented mesh.
    """
    tri = mesh.triangles
    dets = np.einsum("ij,ij->i", tri[:, 0], np.cross(tri[:, 1], tri[:, 2]))
    volume = dets.sum() / 6.0
    if volume <= 0:
        raise ConfigurationError("mesh volume non-positive; check orientation")
    centroid = (dets[:, None] * tri.sum(axis=1)).sum(axis=0) / (24.0 * volume)
    # covariance about origin: sum of det * A @ C0 @ A^T per tetra
    cov = np.einsum("n,nik,kl,njl->ij", dets, tri.transpose(0, 2, 1),
                    _TET_COV, tri.transpose(0, 2, 1))
    # shift to centroid (unit density)
    cov -= volume * np.outer(centroid, centroid)
    inertia = np.trace(cov) * np.eye(3) - cov
    return float(volume), centroid, inertia


# -- primitive constructors ---------------------------------------------------

def box_mesh(extents) -> TriMesh:
    """Axis-aligned box centered at the origin; extents are full lengths."""
    e = np.asarray(extents, dtype=float) * 0.5
    if np.any(e <= 0):
        raise ConfigurationError("box extents must be positive")
    corners = np.array([[sx, sy, sz] for sx in (-1, 1) for sy in (-1, 1)
                        for sz in (-1, 1)]) * e
    # 12 triangles, outward CCW orientation
    faces = np.array([
        [0, 1, 3], [0, 3, 2],   # -x
        [4, 6, 7], [4, 7, 5],   # +x
        [0, 4, 5], [0, 5, 1],   # -y
        [2, 3, 7], [2, 7, 6],   # +y
        [0, 2, 6], [0, 6, 4],   # -z
        [1, 5, 7], [1, 7, 3],   # +z
    ])
    return TriMesh(corners, faces)


def cube_mesh(edge: float) -> TriMesh:
    return box_mesh([edge, edge, edge])


def frustum_mesh(r_bottom: float, r_top: float, height: float,
                 segments: int = 48) -> TriMesh:
    """Conical frustum along +z, centered vertically at the origin.

    ``r_top == r_bottom`` gives a cylinder; ``r_top`` may be small but
    must be positive so the cap triangulation stays valid.
    """
    if min(r_bottom, r_top, height) <= 0:
        raise ConfigurationError("frustum dimensions must be positive")
    ang = 2.0 * np.pi * np.arange(segments) / segments
    ring = np.stack([np.cos(ang), np.sin(ang), np.zeros(segments)], axis=1)
    bot = ring * r_bottom + [0, 0, -height / 2]
    top = ring * r_top + [0, 0, height / 2]
    verts = np.concatenate([bot, top, [[0, 0, -height / 2]], [[0, 0, height / 2]]])
    cb, ct = 2 * segments, 2 * segments + 1
    faces = []
    for i in range(segments):
        j = (i + 1) % segments
        faces += [[i, j, segments + i], [j, segments + j, segments + i]]
        faces += [[cb, j, i], [ct, segments + i, segments + j]]
    return TriMesh(verts, np.array(faces))


def cylinder_mesh(radius: float, height: float, segments: int = 48) -> TriMesh:
    return frustum_mesh(radius, radius, height, segments)


# -- Wavefront OBJ I/O --------------------------------------------------------

def save_obj(mesh: TriMesh, path: str | Path) -> None:
    lines = [f"v {x:.9g} {y:.9g} {z:.9g}" for x, y, z in mesh.vertices]
    lines += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in mesh.faces]
    Path(path).write_text("\n".join(lines) + "\n")


def load_obj(path: str | Path) -> TriMesh:
    verts, faces = [], []
    for line in Path(path).read_text().splitlines():
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "v":
            verts.append([float(v) for v in parts[1:4]])
        elif parts[0] == "f":
            idx = [int(p.split("/")[0]) - 1 for p in parts[1:]]
            if len(idx) != 3:
                raise ConfigurationError("only triangular faces are supported")
            faces.append(idx)
    return TriMesh(np.array(verts, dtype=float), np.array(faces, dtype=np.int64))
