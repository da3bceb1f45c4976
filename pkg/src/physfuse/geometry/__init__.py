"""Shape representations, mesh extraction, visibility, and geometric metrics."""

from .meshing import (DEFAULT_SUPPORT_DIRECTIONS, convex_hull_mesh,
                      extract_mesh_sdf, extract_mesh_support)
from .metrics import chamfer_distance, point_mesh_distance, volumetric_iou
from .shapefield import ShapeField
from .supportnet import SupportPair, SupportPolytope, initialize_polytope
from .trimesh import (TriMesh, box_mesh, cube_mesh, cylinder_mesh,
                      frustum_mesh, load_obj, mesh_mass_properties, save_obj)
from .visibility import ray_triangle_hits, visible_vertices

__all__ = [
    "DEFAULT_SUPPORT_DIRECTIONS", "ShapeField", "SupportPair",
    "SupportPolytope", "TriMesh", "box_mesh", "chamfer_distance",
    "convex_hull_mesh", "cube_mesh", "cylinder_mesh", "extract_mesh_sdf",
    "extract_mesh_support", "frustum_mesh", "initialize_polytope", "load_obj",
    "mesh_mass_properties", "point_mesh_distance", "ray_triangle_hits",
    "save_obj", "visible_vertices", "volumetric_iou",
]
