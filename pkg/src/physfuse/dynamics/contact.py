"""Contact kinematics against the table plane and the spherical pusher."""

from __future__ import annotations

import numpy as np

from ..geometry.metrics import closest_points_on_mesh
from ..geometry.supportnet import SupportPolytope
from ..geometry.trimesh import TriMesh
from ..transforms import skew, tangent_basis
from .types import BodyState, ContactPoint, Scene

_Z = np.array([0.0, 0.0, 1.0])


def _contact_jacobian(frame: np.ndarray, rotation: np.ndarray,
                      body_point: np.ndarray) -> np.ndarray:
    """Rows of F @ [I, -R [r]x]: twist [v_origin_world, omega_body] to
    contact-point velocity in the contact frame."""
    return np.hstack([frame, -frame @ rotation @ skew(body_point)])


def _make_contact(gap, world_point, normal, rotation, body_point, mu, kind,
                  surface_velocity=None, query_direction=None) -> ContactPoint:
    t1, t2 = tangent_basis(normal)
    frame = np.stack([normal, t1, t2])
    return ContactPoint(
        gap=float(gap), world_point=np.asarray(world_point, dtype=float),
        normal=np.asarray(normal, dtype=float), tangent1=t1, tangent2=t2,
        jacobian=_contact_jacobian(frame, rotation, body_point), mu=mu,
        body_point=np.asarray(body_point, dtype=float), kind=kind,
        surface_velocity=(np.zeros(3) if surface_velocity is None
                          else np.asarray(surface_velocity, dtype=float)),
        query_direction=(np.zeros(3) if query_direction is None
                         else np.asarray(query_direction, dtype=float)))


def contact_kinematics(net: SupportPolytope, state: BodyState, scene: Scene,
                       t: float) -> list[ContactPoint]:
    """The learner's two contact candidates: table support point and the
    support point toward the pusher sphere.

    Table: the support query direction is the body-frame image of -z and
    the gap is the world height of that support point above the plane.
    Pusher: the query direction points from the body origin toward the
    pusher center; the gap is the support-plane to sphere-center distance
    minus the radius.  Either gap may be negative.
    """
    R = state.pose.matrix()
    origin = state.pose.translation

    d_table = R.T @ (-_Z)
    s_body = net.support_points(d_table[None])[0]
    s_world = R @ s_body + origin
    table = _make_contact(s_world[2] - scene.table_height, s_world, _Z, R,
                          s_body, scene.mu_table, "table",
                          query_direction=d_table)

    center = scene.pusher_center(t)
    toward = center - origin
    norm = np.linalg.norm(toward)
    toward = toward / norm if norm > 1e-12 else np.array([1.0, 0.0, 0.0])
    d_push = R.T @ toward
    s_body_p = net.support_points(d_push[None])[0]
    s_world_p = R @ s_body_p + origin
    gap = float((center - s_world_p) @ toward) - scene.pusher_radius
    pusher = _make_contact(gap, s_world_p, -toward, R, s_body_p,
                           scene.mu_pusher, "pusher",
                           surface_velocity=scene.pusher_velocity(t),
                           query_direction=d_push)
    return [table, pusher]


def ground_truth_contacts(hull: TriMesh, state: BodyState, scene: Scene,
                          t: float, n_table: int = 4) -> list[ContactPoint]:
    """Richer contact model for data generation: the n deepest hull
    vertices against the table plus the exact closest mesh point to the
    pusher sphere.  Deliberately richer than the learner's single-support
    kinematics so learning is never tested against its own forward model.
    """
    R = state.pose.matrix()
    origin = state.pose.translation
    world_verts = hull.vertices @ R.T + origin
    order = np.argsort(world_verts[:, 2])[:n_table]
    contacts = [
        _make_contact(world_verts[i][2] - scene.table_height, world_verts[i],
                      _Z, R, hull.vertices[i], scene.mu_table, "table")
        for i in order
    ]

    center = scene.pusher_center(t)
    world_mesh = hull.transformed(R, origin)
    dist, nearest, _ = closest_points_on_mesh(center[None], world_mesh,
                                              k=len(hull.faces))
    away = center - nearest[0]
    n = np.linalg.norm(away)
    away = away / n if n > 1e-12 else _Z
    contacts.append(_make_contact(
        dist[0] - scene.pusher_radius, nearest[0], -away, R,
        R.T @ (nearest[0] - origin), scene.mu_pusher, "pusher",
        surface_velocity=scene.pusher_velocity(t)))
    return contacts
