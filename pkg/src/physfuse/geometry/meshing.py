"""Surface extraction from the two shape representations."""

from __future__ import annotations

import numpy as np
from scipy.spatial import ConvexHull, QhullError
from skimage import measure

from ..errors import DegenerateHull, EmptyLevelSet
from ..transforms import fibonacci_sphere
from .shapefield import ShapeField
from .supportnet import SupportPolytope
from .trimesh import TriMesh

DEFAULT_SUPPORT_DIRECTIONS = 5768


def extract_mesh_sdf(field: ShapeField) -> TriMesh:
    """Zero level set of the grid via marching cubes."""
    if field.values.min() > 0.0 or field.values.max() < 0.0:
        raise EmptyLevelSet("grid has no zero crossing")
    cell = field.cell_size
    verts, faces, _, _ = measure.marching_cubes(
        field.values, level=0.0, spacing=(cell, cell, cell))
    return TriMesh(verts + field.origin, faces)


def extract_mesh_support(net: SupportPolytope,
                         n_dirs: int = DEFAULT_SUPPORT_DIRECTIONS) -> TriMesh:
    """Convex hull of support points over an even direction lattice."""
    if n_dirs < 4:
        raise ValueError("need at least 4 directions")
    dirs = fibonacci_sphere(n_dirs)
    points = net.support_points(dirs)
    return convex_hull_mesh(points)


def convex_hull_mesh(points: np.ndarray) -> TriMesh:
    """Outward-oriented hull of a point set; raises DegenerateHull if flat."""
    points = np.asarray(points, dtype=float)
    try:
        hull = ConvexHull(points)
    except (QhullError, ValueError) as exc:
        raise DegenerateHull(str(exc)) from exc
    used = np.unique(hull.simplices)
    remap = np.full(len(points), -1, dtype=np.int64)
    remap[used] = np.arange(len(used))
    verts = points[used]
    faces = remap[hull.simplices]
    # orient each face so its normal agrees with qhull's outward equation
    tri = verts[faces]
    normals = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
    flip = np.einsum("ij,ij->i", normals, hull.equations[:, :3]) < 0
    faces[flip] = faces[flip][:, [0, 2, 1]]
    return TriMesh(verts, faces)
