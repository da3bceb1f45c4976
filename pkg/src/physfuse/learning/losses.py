"""Violation losses for contact-implicit learning, with analytic gradients.

Each observed transition is scored against hypothesized contact impulses
through four terms:

* prediction: mass-matrix-weighted residual between the stepped and the
  observed next velocity,
* complementarity: impulse times next-configuration gap, squared,
* dissipation: deviation of the tangential impulse from maximal Coulomb
  dissipation at the observed slip velocity, squared,
* penetration: hinge on negative next-configuration gaps, squared.

Gaps and slip velocities are evaluated at the observed next state, so all
four terms vanish exactly on physically consistent transitions.  The
terms are quadratic in the impulses (the inner problem is a cone QP) and
smooth in the model parameters through the softened support function.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..dynamics.types import BodyState, ContactPoint
from .batch import TransitionData, softmax_support
from .inertia import InertiaParameterization, inertia_gradient_to_chol

NORMAL_INDEX = np.array([0, 3])


@dataclass
class ViolationWeights:
    """Relative weights of the violation terms and the vision term."""

    w_pred: float = 4.0
    w_comp: float = 1.0
    w_diss: float = 5000.0
    w_pen: float = 0.5
    w_vision: float = 0.04

    def __post_init__(self):
        if min(self.w_pred, self.w_comp, self.w_diss, self.w_pen,
               self.w_vision) < 0:
            raise ValueError("loss weights must be non-negative")


@dataclass
class Transition:
    """One observed state pair at spacing dt, plus the contact kinematics
    computed from the current model (refreshed every epoch)."""

    state: BodyState
    next_state: BodyState
    dt: float
    contacts: list[ContactPoint] | None = None


@dataclass
class ImpulseHypothesis:
    """Per-contact impulses (jn, jt1, jt2) in contact frames, N*s."""

    impulses: np.ndarray

    def __post_init__(self):
        self.impulses = np.asarray(self.impulses, dtype=float).reshape(-1, 3)


def _cross_batch(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.cross(a, b)


class EpochKinematics:
    """Model-dependent contact quantities for every transition.

    Shapes: support points ``s_cur``/``s_next`` (T, 2, 3) with softmax
    weights (T, 2, K); next-configuration gaps ``phi`` (T, 2); slip
    velocities ``vt`` (T, 2, 2) relative to the environment surface.
    """

    def __init__(self, vertices: np.ndarray, smoothing: float,
                 data: TransitionData):
        self.vertices = vertices
        self.smoothing = smoothing
        self.data = data
        T = data.count
        d_cur = data.d_query.reshape(-1, 3)
        d_next = data.d_query_next.reshape(-1, 3)
        s_cur, w_cur = softmax_support(vertices, d_cur, smoothing)
        s_next, w_next = softmax_support(vertices, d_next, smoothing)
        self.s_cur = s_cur.reshape(T, 2, 3)
        self.w_cur = w_cur.reshape(T, 2, -1)
        self.s_next = s_next.reshape(T, 2, 3)
        self.w_next = w_next.reshape(T, 2, -1)

        # next-configuration gaps
        world_next = (np.einsum("tij,tcj->tci", data.R_next, self.s_next)
                      + data.origin_next[:, None, :])
        phi_table = world_next[:, 0, 2] - data.table_height
        phi_push = (np.einsum("ti,ti->t",
                              data.pusher_center_next - world_next[:, 1],
                              data.n_push_next) - data.pusher_radius)
        self.phi = np.stack([phi_table, phi_push], axis=1)

        # slip velocity at the observed next state through the current
        # contact configuration, relative to the environment surface
        v_pt = (data.v0_next[:, None, :]
                + np.einsum("tij,tcj->tci", data.R,
                            _cross_batch(data.omega_next[:, None, :], self.s_cur)))
        rel = v_pt - data.surface_velocity
        self.vt = np.einsum("tckj,tcj->tck", data.frames[:, :, 1:, :], rel)
        self.vt_norm = np.linalg.norm(self.vt, axis=2)
        # dissipation row vector a_c with diss_c = (a_c . z_c)^2
        self.a_diss = np.concatenate(
            [(data.mus[None, :] * self.vt_norm)[:, :, None], self.vt], axis=2)

    def jacobian(self, com: np.ndarray) -> np.ndarray:
        """Stacked contact jacobian (T, 6, 6) in center-of-mass twist
        coordinates [v_com_world, omega_body]."""
        data = self.data
        T = data.count
        lever = self.s_cur - com
        sk = np.zeros((T, 2, 3, 3))
        sk[:, :, 0, 1] = -lever[:, :, 2]
        sk[:, :, 0, 2] = lever[:, :, 1]
        sk[:, :, 1, 0] = lever[:, :, 2]
        sk[:, :, 1, 2] = -lever[:, :, 0]
        sk[:, :, 2, 0] = -lever[:, :, 1]
        sk[:, :, 2, 1] = lever[:, :, 0]
        rot_block = -np.einsum("tcij,tjk,tckl->tcil", data.frames, data.R, sk)
        J = np.zeros((T, 6, 6))
        J[:, 0:3, 0:3] = data.frames[:, 0]
        J[:, 3:6, 0:3] = data.frames[:, 1]
        J[:, 0:3, 3:6] = rot_block[:, 0]
        J[:, 3:6, 3:6] = rot_block[:, 1]
        return J


def _com_deltas(data: TransitionData, com: np.ndarray):
    """Velocity change in center-of-mass coordinates (current rotation)."""
    dw = data.omega_next - data.omega
    dv = (data.v0_next - data.v0
          + np.einsum("tij,tj->ti", data.R, _cross_batch(dw, com[None, :])))
    return dv, dw


def inner_quadratic(kin: EpochKinematics, inertia: InertiaParameterization,
                    weights: ViolationWeights):
    """H, g, c0 of the impulse QP: f(z) = 0.5 z'Hz + g'z + c0 per transition."""
    data = kin.data
    T = data.count
    m = inertia.mass
    I = inertia.inertia()
    I_inv = np.linalg.inv(I)
    J = kin.jacobian(inertia.com)

    lin = J[:, :, 0:3]
    rot = J[:, :, 3:6]
    A_pred = (np.einsum("tri,tsi->trs", lin, lin) / m
              + np.einsum("tri,ij,tsj->trs", rot, I_inv, rot))

    dv, dw = _com_deltas(data, inertia.com)
    # M^-1 gamma with gamma = [0,0,-m g dt, 0,0,0]: the mass cancels
    q = np.zeros((T, 6))
    q[:, 2] = -data.gravity * data.dt
    q[:, 0:3] -= dv
    q[:, 3:6] -= dw

    H = 2.0 * weights.w_pred * A_pred
    idx = np.arange(T)[:, None]
    H[idx, NORMAL_INDEX[None, :], NORMAL_INDEX[None, :]] += \
        2.0 * weights.w_comp * kin.phi ** 2
    a6 = np.zeros((T, 2, 6))
    a6[:, 0, 0:3] = kin.a_diss[:, 0]
    a6[:, 1, 3:6] = kin.a_diss[:, 1]
    H += 2.0 * weights.w_diss * np.einsum("tcr,tcs->trs", a6, a6)

    g = 2.0 * weights.w_pred * np.einsum("trc,tc->tr", J, q)

    pen = (np.maximum(0.0, -kin.phi) ** 2).sum(axis=1)
    # gamma . delta-u has only the linear z-component
    gamma_lin = -m * data.gravity * data.dt
    const_pred = (gamma_lin ** 2 / m - 2.0 * gamma_lin * dv[:, 2]
                  + m * np.einsum("ti,ti->t", dv, dv)
                  + np.einsum("ti,ij,tj->t", dw, I, dw))
    c0 = weights.w_pred * const_pred + weights.w_pen * pen
    return H, g, c0


def violation_terms(kin: EpochKinematics, inertia: InertiaParameterization,
                    z: np.ndarray):
    """Per-transition (pred, comp, diss, pen) arrays at impulses ``z`` (T, 6)."""
    data = kin.data
    m = inertia.mass
    I = inertia.inertia()
    f_world_c = np.einsum("tcij,tci->tcj", data.frames, z.reshape(-1, 2, 3))
    f_world = f_world_c.sum(axis=1)
    f_body_c = np.einsum("tji,tcj->tci", data.R, f_world_c)
    lever = kin.s_cur - inertia.com
    tau = _cross_batch(lever, f_body_c).sum(axis=1)

    dv, dw = _com_deltas(data, inertia.com)
    r_lin = np.zeros_like(dv)
    r_lin[:, 2] = -data.gravity * data.dt
    r_lin += f_world / m - dv
    q_rot = np.linalg.solve(I, tau.T).T
    r_rot = q_rot - dw

    pred = (m * np.einsum("ti,ti->t", r_lin, r_lin)
            + np.einsum("ti,ij,tj->t", r_rot, I, r_rot))
    zc = z.reshape(-1, 2, 3)
    comp = ((kin.phi * zc[:, :, 0]) ** 2).sum(axis=1)
    d_c = np.einsum("tci,tci->tc", kin.a_diss, zc)
    diss = (d_c ** 2).sum(axis=1)
    pen = (np.maximum(0.0, -kin.phi) ** 2).sum(axis=1)
    aux = {"r_lin": r_lin, "r_rot": r_rot, "q_rot": q_rot, "f_world": f_world,
           "f_body_c": f_body_c, "tau": tau, "dv": dv, "dw": dw, "d_c": d_c}
    return pred, comp, diss, pen, aux


def contact_loss_and_grads(vertices: np.ndarray,
                           inertia: InertiaParameterization,
                           data: TransitionData, z: np.ndarray,
                           weights: ViolationWeights, smoothing: float,
                           vision: tuple | None = None,
                           with_grads: bool = True):
    """Total training loss and its analytic parameter gradients.

    The impulses ``z`` and the vision sample (points, outward directions)
    are held fixed; gradients flow to the support vertices, log-mass,
    center of mass, and the second-moment Cholesky factor.  Returns
    ``(terms, grads)`` where terms holds the summed loss components.
    """
    K = len(vertices)
    T = data.count
    m = inertia.mass
    I = inertia.inertia()
    terms = {"pred": 0.0, "comp": 0.0, "diss": 0.0, "pen": 0.0, "vision": 0.0}
    grads = {"vertices": np.zeros((K, 3)), "log_mass": 0.0,
             "com": np.zeros(3), "second_chol": np.zeros((3, 3))}
    grad_inertia = np.zeros((3, 3))

    if T > 0:
        kin = EpochKinematics(vertices, smoothing, data)
        pred, comp, diss, pen, aux = violation_terms(kin, inertia, z)
        terms["pred"] = float(pred.sum())
        terms["comp"] = float(comp.sum())
        terms["diss"] = float(diss.sum())
        terms["pen"] = float(pen.sum())

        if with_grads:
            w = weights
            r_lin, r_rot = aux["r_lin"], aux["r_rot"]
            q_rot, dw = aux["q_rot"], aux["dw"]
            f_world, f_body_c = aux["f_world"], aux["f_body_c"]
            zc = z.reshape(T, 2, 3)

            # -- prediction term --------------------------------------------
            # mass (through the 1/m in r_lin and the metric weight m)
            g_mass = (np.einsum("ti,ti->t", r_lin, r_lin)
                      - 2.0 / m * np.einsum("ti,ti->t", r_lin, f_world)).sum()
            grads["log_mass"] += w.w_pred * m * g_mass
            # center of mass (through delta-v transform and lever arms)
            rT_rlin = np.einsum("tji,tj->ti", data.R, r_lin)
            g_com_lin = 2.0 * m * _cross_batch(dw, rT_rlin)
            f_body_tot = f_body_c.sum(axis=1)
            g_com_rot = -2.0 * _cross_batch(f_body_tot, r_rot)
            grads["com"] += w.w_pred * (g_com_lin + g_com_rot).sum(axis=0)
            # inertia matrix
            grad_inertia += w.w_pred * (
                np.einsum("ti,tj->ij", dw, dw)
                - np.einsum("ti,tj->ij", q_rot, q_rot))
            # support points via the torque lever
            gs_cur = 2.0 * w.w_pred * _cross_batch(f_body_c,
                                                   r_rot[:, None, :])

            # -- dissipation term --------------------------------------------
            safe = np.maximum(kin.vt_norm, 1e-12)
            dvt = 2.0 * aux["d_c"][:, :, None] * (
                zc[:, :, 1:] + (data.mus[None, :] * zc[:, :, 0] / safe)[:, :, None]
                * kin.vt)
            dvt = np.where(kin.vt_norm[:, :, None] > 1e-12, dvt,
                           2.0 * aux["d_c"][:, :, None] * zc[:, :, 1:])
            # dvt_k/ds = -omega_next x (R^T t_k)
            t_body = np.einsum("tji,tckj->tcki", data.R,
                               data.frames[:, :, 1:, :])
            dvk_ds = -_cross_batch(data.omega_next[:, None, None, :], t_body)
            gs_cur += w.w_diss * np.einsum("tck,tcki->tci", dvt, dvk_ds)

            # -- complementarity and penetration ------------------------------
            dphi = (2.0 * w.w_comp * kin.phi * zc[:, :, 0] ** 2
                    - 2.0 * w.w_pen * np.maximum(0.0, -kin.phi))
            dphi_ds = np.empty((T, 2, 3))
            dphi_ds[:, 0] = data.R_next[:, 2, :]
            dphi_ds[:, 1] = -np.einsum("tji,tj->ti", data.R_next,
                                       data.n_push_next)
            gs_next = dphi[:, :, None] * dphi_ds

            grads["vertices"] += _support_chain(
                vertices, data.d_query.reshape(-1, 3),
                kin.w_cur.reshape(-1, K), kin.s_cur.reshape(-1, 3),
                gs_cur.reshape(-1, 3), smoothing)
            grads["vertices"] += _support_chain(
                vertices, data.d_query_next.reshape(-1, 3),
                kin.w_next.reshape(-1, K), kin.s_next.reshape(-1, 3),
                gs_next.reshape(-1, 3), smoothing)

    if vision is not None and len(vision[0]):
        # (points, outward dirs, total count): points already on the mesh
        # surface were dropped upstream but still count in the mean
        points, dirs, n_total = vision
        s_vis, w_vis = softmax_support(vertices, dirs, smoothing)
        diff = s_vis - points
        dist = np.linalg.norm(diff, axis=1)
        terms["vision"] = float(dist.sum() / n_total)
        if with_grads:
            safe = dist > 1e-12
            gs = np.where(safe[:, None], diff / np.maximum(dist, 1e-300)[:, None],
                          0.0) / n_total
            grads["vertices"] += weights.w_vision * _support_chain(
                vertices, dirs, w_vis, s_vis, gs, smoothing)

    total = (weights.w_pred * terms["pred"] + weights.w_comp * terms["comp"]
             + weights.w_diss * terms["diss"] + weights.w_pen * terms["pen"]
             + weights.w_vision * terms["vision"])
    terms["total"] = float(total)
    if with_grads:
        grads["second_chol"] = inertia_gradient_to_chol(
            grad_inertia, inertia.second_chol)
        return terms, grads
    return terms, None


def _support_chain(vertices: np.ndarray, dirs: np.ndarray, w: np.ndarray,
                   s: np.ndarray, gs: np.ndarray,
                   smoothing: float) -> np.ndarray:
    """Chain upstream support-point gradients onto the vertices.

    ds/dv_k = w_k I + (w_k / sigma) (v_k - s) d^T; at zero smoothing only
    the argmax vertex receives the upstream gradient.
    """
    gv = w.T @ gs
    if smoothing > 0.0:
        alpha = np.einsum("ki,mi->mk", vertices, gs) \
            - np.einsum("mi,mi->m", s, gs)[:, None]
        gv += ((w * alpha) / smoothing).T @ dirs
    return gv


def violation_losses(net, params, transition: Transition,
                     hypothesis: ImpulseHypothesis, scene):
    """Per-term losses for one transition (public, unbatched entry point)."""
    from ..dynamics.types import BodyTrajectory
    from .batch import build_transition_data

    traj = BodyTrajectory([transition.state, transition.next_state])
    data = build_transition_data([traj], scene)
    inertia = InertiaParameterization.from_params(params)
    kin = EpochKinematics(net.vertices, net.smoothing, data)
    z = hypothesis.impulses.reshape(1, 6)
    pred, comp, diss, pen, _ = violation_terms(kin, inertia, z)
    return float(pred[0]), float(comp[0]), float(diss[0]), float(pen[0])
