"""Model packaging: meshes plus a URDF with the identified inertia."""

from __future__ import annotations

import xml.etree.ElementTree as ET
from pathlib import Path
from xml.dom import minidom

import numpy as np

from ..dynamics.types import InertialParams, Scene
from ..geometry.meshing import extract_mesh_sdf, extract_mesh_support
from ..geometry.shapefield import ShapeField
from ..geometry.supportnet import SupportPolytope
from ..geometry.trimesh import save_obj


def build_urdf(name: str, params: InertialParams, visual_mesh: str,
               collision_mesh: str, scene: Scene) -> str:
    robot = ET.Element("robot", name=name)
    link = ET.SubElement(robot, "link", name="body")

    inertial = ET.SubElement(link, "inertial")
    ET.SubElement(inertial, "origin",
                  xyz=" ".join(f"{v!r}" for v in params.com), rpy="0 0 0")
    ET.SubElement(inertial, "mass", value=f"{params.mass!r}")
    I = params.inertia()
    ET.SubElement(inertial, "inertia",
                  ixx=f"{I[0, 0]!r}", ixy=f"{I[0, 1]!r}", ixz=f"{I[0, 2]!r}",
                  iyy=f"{I[1, 1]!r}", iyz=f"{I[1, 2]!r}", izz=f"{I[2, 2]!r}")

    visual = ET.SubElement(link, "visual")
    geom = ET.SubElement(visual, "geometry")
    ET.SubElement(geom, "mesh", filename=visual_mesh)

    collision = ET.SubElement(link, "collision")
    geom = ET.SubElement(collision, "geometry")
    ET.SubElement(geom, "mesh", filename=collision_mesh)

    contact = ET.SubElement(link, "contact")
    ET.SubElement(contact, "lateral_friction", value=f"{scene.mu_table!r}")
    ET.SubElement(contact, "pusher_friction", value=f"{scene.mu_pusher!r}")
    return minidom.parseString(ET.tostring(robot)).toprettyxml(indent="  ")


def export_model(field: ShapeField, net: SupportPolytope,
                 params: InertialParams, scene: Scene, out_dir,
                 name: str = "object", hull_dirs: int = 5768) -> dict:
    """Write the fused mesh, the convex support hull, and a URDF.

    Raises EmptyLevelSet when the field has no surface to extract.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    mesh = extract_mesh_sdf(field)
    hull = extract_mesh_support(net, hull_dirs)
    paths = {"mesh": out / f"{name}_mesh.obj",
             "hull": out / f"{name}_hull.obj",
             "urdf": out / f"{name}.urdf"}
    save_obj(mesh, paths["mesh"])
    save_obj(hull, paths["hull"])
    paths["urdf"].write_text(build_urdf(name, params, paths["mesh"].name,
                                        paths["hull"].name, scene))
    return {k: str(v) for k, v in paths.items()}


def parse_urdf(path) -> dict:
    """Read back mass, center of mass, inertia, mesh refs, frictions."""
    root = ET.parse(path).getroot()
    link = root.find("link")
    inertial = link.find("inertial")
    com = np.array([float(v) for v in
                    inertial.find("origin").get("xyz").split()])
    mass = float(inertial.find("mass").get("value"))
    e = inertial.find("inertia")
    ixx, ixy, ixz = (float(e.get(k)) for k in ("ixx", "ixy", "ixz"))
    iyy, iyz, izz = (float(e.get(k)) for k in ("iyy", "iyz", "izz"))
    inertia = np.array([[ixx, ixy, ixz], [ixy, iyy, iyz], [ixz, iyz, izz]])
    contact = link.find("contact")
    return {
        "mass": mass, "com": com, "inertia": inertia,
        "visual_mesh": link.find("visual/geometry/mesh").get("filename"),
        "collision_mesh": link.find("collision/geometry/mesh").get("filename"),
        "mu_table": float(contact.find("lateral_friction").get("value")),
        "mu_pusher": float(contact.find("pusher_friction").get("value")),
    }
