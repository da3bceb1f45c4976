"""Semi-implicit time stepping with a projected Gauss-Seidel contact solver."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import NumericalError
from ..geometry.supportnet import SupportPolytope
from ..transforms import quat_exp, quat_mul, quat_normalize, quat_to_matrix
from .contact import contact_kinematics
from .types import (GRAVITY, BodyState, BodyTrajectory, ContactPoint,
                    InertialParams, Pose3, Scene)

PGS_MAX_ITERATIONS = 200
PGS_TOLERANCE = 1e-8
# penetration recovery: push-out at a fraction of the depth per step, rate
# capped, and disabled inside a deadband so steady resting contacts (whose
# solver residual leaves nanometer-scale penetration) are never pushed and
# stay energy-neutral; only impulsive transients (support-point switches
# during face impacts) trigger recovery
RECOVERY_FRACTION = 0.25
RECOVERY_SPEED_CAP = 0.1   # m/s
RECOVERY_DEADBAND = 1e-5   # m


def com_velocity(state: BodyState, params: InertialParams,
                 R: np.ndarray | None = None) -> np.ndarray:
    """World velocity of the center of mass given the body-origin state."""
    if R is None:
        R = state.pose.matrix()
    return state.linear_velocity + R @ np.cross(state.angular_velocity, params.com)


def step(state: BodyState, params: InertialParams, impulses,
         contacts: list[ContactPoint], dt: float,
         gravity: float = GRAVITY) -> BodyState:
    """Advance one step: velocities updated by the gravity impulse and
    contact impulses through the mass matrix about the center of mass,
    then the pose integrated with the new velocities (quaternion
    exponential for rotation).

    ``impulses`` holds one (jn, jt1, jt2) vector per contact, expressed in
    that contact's (n, t1, t2) frame.  Internally the update runs in
    center-of-mass coordinates, which is algebraically identical to the
    mixed body-origin mass matrix and keeps the rotational update
    gyroscopically neutral.
    """
    if dt <= 0:
        raise NumericalError("dt must be positive")
    arr = np.concatenate([state.linear_velocity, state.angular_velocity])
    if not np.all(np.isfinite(arr)):
        raise NumericalError("non-finite state velocities")
    R = state.pose.matrix()
    com = params.com
    inertia = params.inertia()

    force_w = np.zeros(3)
    torque_b = np.zeros(3)
    for contact, z in zip(contacts, impulses):
        f = contact.frame().T @ np.asarray(z, dtype=float)
        force_w += f
        torque_b += np.cross(contact.body_point - com, R.T @ f)

    v_com = com_velocity(state, params, R)
    v_com_new = v_com + np.array([0.0, 0.0, -gravity]) * dt + force_w / params.mass
    omega_new = state.angular_velocity + np.linalg.solve(inertia, torque_b)
    if not np.all(np.isfinite(v_com_new)) or not np.all(np.isfinite(omega_new)):
        raise NumericalError("step produced non-finite velocities")

    rotation = quat_normalize(quat_mul(state.pose.rotation,
                                       quat_exp(omega_new * dt)))
    R_new = quat_to_matrix(rotation)
    # advance the center of mass exactly with its new velocity, then place
    # the body origin; expressing the origin velocity in the new rotation
    # keeps the com velocity consistent across steps (no spurious
    # centripetal energy exchange)
    translation = (state.pose.translation + v_com_new * dt
                   - (R_new - R) @ com)
    v_origin_new = v_com_new - R_new @ np.cross(omega_new, com)
    return BodyState(Pose3(rotation, translation), v_origin_new, omega_new,
                     state.time + dt)


# -- one-step contact solve ----------------------------------------------------

@dataclass
class ContactSolve:
    """Solved contact impulses plus convergence diagnostics."""

    impulses: np.ndarray          # (C, 3) in contact frames
    converged: bool
    residual: float
    iterations: int
    objective: float = 0.0


def project_friction_cone(z: np.ndarray, mu: float) -> np.ndarray:
    """Exact Euclidean projection onto {jn >= 0, |jt| <= mu*jn}."""
    jn = z[0]
    jt = z[1:]
    nt = float(np.linalg.norm(jt))
    if mu == 0.0:
        return np.array([max(jn, 0.0), 0.0, 0.0])
    if nt <= mu * jn:
        return z.copy()
    if mu * nt <= -jn:
        return np.zeros(3)
    jn_new = (jn + mu * nt) / (1.0 + mu * mu)
    return np.concatenate([[jn_new], (mu * jn_new / nt) * jt])


def contact_system(state: BodyState, params: InertialParams,
                   contacts: list[ContactPoint], dt: float,
                   gravity: float = GRAVITY):
    """Delassus operator A and bias b of the one-step cone problem.

    The problem min_z 0.5 z'Az + b'z over the product of friction cones
    encodes: non-negative normal impulses, Coulomb cones, and
    complementarity between normal impulse and the predicted next-step
    gap.  Separated contacts may approach at most gap/dt (so the next gap
    stays non-negative); penetrated contacts recover at a rate-limited,
    energy-bounded push-out speed.
    """
    R = state.pose.matrix()
    m_inv = 1.0 / params.mass
    inertia_inv = np.linalg.inv(params.inertia())
    C = len(contacts)
    J = np.zeros((3 * C, 6))
    b = np.zeros(3 * C)
    for i, contact in enumerate(contacts):
        frame = contact.frame()
        lever = contact.body_point - params.com
        J[3 * i:3 * i + 3] = np.hstack([frame, -frame @ R @ skew3(lever)])
        b[3 * i:3 * i + 3] = -frame @ contact.surface_velocity
        if contact.gap >= 0.0:
            b[3 * i] += contact.gap / dt
        elif -contact.gap > RECOVERY_DEADBAND:
            b[3 * i] -= min(RECOVERY_FRACTION * (-contact.gap) / dt,
                            RECOVERY_SPEED_CAP)
    u_free = np.concatenate([
        com_velocity(state, params, R) + np.array([0.0, 0.0, -gravity]) * dt,
        state.angular_velocity,
    ])
    Minv_Jt = np.vstack([m_inv * J[:, :3].T, inertia_inv @ J[:, 3:].T])
    A = J @ Minv_Jt
    b += J @ u_free
    return A, b, J


def skew3(v: np.ndarray) -> np.ndarray:
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def solve_forward_contact(state: BodyState, params: InertialParams,
                          contacts: list[ContactPoint], scene: Scene,
                          dt: float,
                          max_iterations: int = PGS_MAX_ITERATIONS,
                          tolerance: float = PGS_TOLERANCE) -> ContactSolve:
    """Projected Gauss-Seidel on the one-step cone problem.

    Sweeps contacts in their given order; each block takes a proximal
    step scaled by the block's largest eigenvalue and projects onto its
    friction cone exactly.  Non-convergence is flagged, never fatal.
    """
    C = len(contacts)
    if C == 0:
        return ContactSolve(np.zeros((0, 3)), True, 0.0, 0)
    A, b, _ = contact_system(state, params, contacts, dt,
                             gravity=scene.gravity)
    mus = np.array([c.mu for c in contacts])
    taus = []
    for i in range(C):
        block = A[3 * i:3 * i + 3, 3 * i:3 * i + 3]
        lam = float(np.linalg.eigvalsh(block)[-1])
        taus.append(1.0 / lam if lam > 0 else 1.0)
    z = np.zeros(3 * C)
    residual = np.inf
    iterations = 0
    for iterations in range(1, max_iterations + 1):
        z_prev = z.copy()
        for i in range(C):
            sl = slice(3 * i, 3 * i + 3)
            grad = A[sl] @ z + b[sl]
            z[sl] = project_friction_cone(z[sl] - taus[i] * grad, mus[i])
        # fixed point measured in velocity space: impulse components in
        # null(J^T) carry no force or torque, so drift there (common with
        # redundant coplanar contacts) must not count as non-convergence
        residual = float(np.max(np.abs(A @ (z - z_prev))))
        if residual < tolerance:
            break
    objective = float(0.5 * z @ A @ z + b @ z)
    return ContactSolve(z.reshape(C, 3), residual < tolerance, residual,
                        iterations, objective)


# -- rollout --------------------------------------------------------------------

@dataclass
class RolloutResult:
    trajectory: BodyTrajectory
    solver_converged: np.ndarray      # bool per recorded state
    pusher_contact: np.ndarray        # bool per recorded state (gap <= 1 mm)
    min_gap: float = np.inf


def rollout(net: SupportPolytope, params: InertialParams, scene: Scene,
            initial: BodyState, horizon: float, dt: float = 1.0 / 300.0,
            record_hz: float = 30.0,
            contact_fn=None) -> RolloutResult:
    """Open-loop simulation over ``horizon`` seconds.

    Sub-steps at ``dt`` and records at ``record_hz``; deterministic given
    identical inputs.  ``contact_fn(state, t)`` may override the contact
    model (used by the richer data-generating simulator).
    """
    t0 = initial.time
    if not scene.covers(t0, t0 + horizon):
        raise NumericalError("pusher schedule does not cover the horizon")
    substeps_per_record = max(1, int(round(1.0 / (record_hz * dt))))
    n_records = int(round(horizon * record_hz))

    if contact_fn is None:
        def contact_fn(state, t):
            return contact_kinematics(net, state, scene, t)

    def _record_flags(state):
        contacts = contact_fn(state, state.time)
        gaps = [c.gap for c in contacts]
        pusher = [c.gap for c in contacts if c.kind == "pusher"]
        return min(gaps), (min(pusher) <= 1e-3 if pusher else False)

    state = initial
    states = [initial]
    converged_flags = [True]
    g0, touch0 = _record_flags(initial)
    contact_flags = [touch0]
    min_gap = g0
    block_ok = True
    for k in range(n_records * substeps_per_record):
        t = t0 + k * dt
        contacts = contact_fn(state, t)
        solve = solve_forward_contact(state, params, contacts, scene, dt)
        block_ok = block_ok and solve.converged
        state = step(state, params, solve.impulses, contacts, dt,
                     gravity=scene.gravity)
        if (k + 1) % substeps_per_record == 0:
            states.append(state)
            converged_flags.append(block_ok)
            block_ok = True
            gap, touching = _record_flags(state)
            min_gap = min(min_gap, gap)
            contact_flags.append(touching)
    return RolloutResult(BodyTrajectory(states), np.array(converged_flags),
                         np.array(contact_flags), float(min_gap))
