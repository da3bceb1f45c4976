import numpy as np
import pytest

from physfuse.dynamics import (BodyState, InertialParams, Pose3, Scene,
                               contact_kinematics, rollout,
                               solve_forward_contact, step)
from physfuse.dynamics.stepper import com_velocity, contact_system, \
    project_friction_cone
from physfuse.errors import NumericalError
from physfuse.geometry import SupportPolytope, box_mesh
from physfuse.transforms import random_quat

DT = 1.0 / 300.0


def far_scene():
    return Scene(pusher_schedule=np.array([[0, 10, 10, 10], [100, 10, 10, 10]]))


# -- step -----------------------------------------------------------------------

def test_free_fall(cube_params, resting_cube_state):
    out = step(resting_cube_state, cube_params, np.zeros((0, 3)), [], 0.01)
    assert np.allclose(out.linear_velocity, [0, 0, -0.0981], atol=1e-12)
    assert out.time == pytest.approx(0.01)


def test_equilibrium_impulse_keeps_velocity(cube_net, cube_params,
                                            resting_cube_state):
    # the smoothed support resolves the resting face to its center, so the
    # equilibrium impulse acts through the center of mass
    cube_net = SupportPolytope(cube_net.vertices, smoothing=0.002)
    scene = far_scene()
    contacts = contact_kinematics(cube_net, resting_cube_state, scene, 0.0)
    jn = cube_params.mass * 9.81 * DT
    out = step(resting_cube_state, cube_params,
               np.array([[jn, 0, 0], [0, 0, 0]]), contacts, DT)
    assert np.allclose(out.linear_velocity, 0.0, atol=1e-12)
    assert np.allclose(out.angular_velocity, 0.0, atol=1e-12)


def test_tangential_impulse_at_lever_arm(cube_net, cube_params,
                                         resting_cube_state):
    # closed-form rigid-body algebra: delta omega = I^-1 (r x j)
    scene = far_scene()
    contacts = contact_kinematics(cube_net, resting_cube_state, scene, 0.0)
    z = np.array([[0.0, 0.02, -0.01], [0, 0, 0]])
    out = step(resting_cube_state, cube_params, z, contacts, DT)
    contact = contacts[0]
    f_world = contact.frame().T @ z[0]
    r = contact.body_point - cube_params.com
    expected = np.linalg.solve(cube_params.inertia(),
                               np.cross(r, f_world))  # R = identity here
    assert np.allclose(out.angular_velocity, expected, atol=1e-12)


def test_nonfinite_states_rejected(cube_params, resting_cube_state):
    # the state type itself rejects non-finite velocities
    from physfuse.errors import ConfigurationError
    with pytest.raises(ConfigurationError):
        BodyState(resting_cube_state.pose, [np.inf, 0, 0], np.zeros(3), 0.0)
    with pytest.raises(NumericalError):
        step(resting_cube_state, cube_params, np.zeros((0, 3)), [], 0.0)


# -- one-step contact solve --------------------------------------------------------

def test_resting_normal_impulse(cube_net, cube_params, resting_cube_state):
    cube_net = SupportPolytope(cube_net.vertices, smoothing=0.002)
    scene = far_scene()
    contacts = contact_kinematics(cube_net, resting_cube_state, scene, 0.0)
    solve = solve_forward_contact(resting_cube_state, cube_params, contacts,
                                  scene, DT)
    assert solve.converged
    total_normal = solve.impulses[:, 0].sum()
    assert total_normal == pytest.approx(cube_params.mass * 9.81 * DT, abs=1e-6)
    assert np.allclose(solve.impulses[:, 1:], 0.0, atol=1e-9)


def test_sliding_friction_at_cone_boundary(cube_net, cube_params):
    scene = far_scene()
    state = BodyState(Pose3([1, 0, 0, 0], [0, 0, 0.05]),
                      [0.1, 0.0, 0.0], np.zeros(3), 0.0)
    contacts = contact_kinematics(cube_net, state, scene, 0.0)
    solve = solve_forward_contact(state, cube_params, contacts, scene, DT)
    jn = solve.impulses[0, 0]
    jt = solve.impulses[0, 1:]
    assert np.linalg.norm(jt) == pytest.approx(scene.mu_table * jn, rel=1e-6)
    # friction opposes the slip direction
    t1, t2 = contacts[0].tangent1, contacts[0].tangent2
    friction_world = jt[0] * t1 + jt[1] * t2
    assert friction_world @ np.array([1.0, 0, 0]) < 0


def test_single_contact_grid_search_oracle(cube_net, cube_params):
    # brute-force grid over the friction cone: the PGS objective must be
    # within 1e-6 of the grid minimum
    scene = far_scene()
    rng = np.random.default_rng(5)
    for _ in range(5):
        state = BodyState(Pose3([1, 0, 0, 0],
                                [0, 0, 0.05 + rng.uniform(-0.001, 0.001)]),
                          rng.normal(scale=0.05, size=3),
                          rng.normal(scale=0.2, size=3), 0.0)
        contacts = contact_kinematics(cube_net, state, scene, 0.0)[:1]
        solve = solve_forward_contact(state, cube_params, contacts, scene, DT)
        A, b, _ = contact_system(state, cube_params, contacts, DT)
        mu = contacts[0].mu
        jmax = 4.0 * cube_params.mass * 9.81 * DT
        grid = np.linspace(0, jmax, 41)
        tg = np.linspace(-mu * jmax, mu * jmax, 41)
        zz = np.stack(np.meshgrid(grid, tg, tg, indexing="ij"),
                      axis=-1).reshape(-1, 3)
        feasible = np.linalg.norm(zz[:, 1:], axis=1) <= mu * zz[:, 0]
        zz = zz[feasible]
        objs = 0.5 * np.einsum("ni,ij,nj->n", zz, A, zz) + zz @ b
        assert solve.objective <= objs.min() + 1e-6


def test_cone_projection_cases():
    mu = 0.5
    inside = np.array([1.0, 0.2, 0.1])
    assert np.array_equal(project_friction_cone(inside, mu), inside)
    polar = np.array([-1.0, 0.3, 0.0])
    assert np.array_equal(project_friction_cone(polar, mu), np.zeros(3))
    boundary = project_friction_cone(np.array([0.1, 1.0, 0.0]), mu)
    assert np.linalg.norm(boundary[1:]) == pytest.approx(mu * boundary[0])
    frictionless = project_friction_cone(np.array([0.5, 1.0, -1.0]), 0.0)
    assert np.array_equal(frictionless, [0.5, 0.0, 0.0])


# -- rollout -------------------------------------------------------------------

def test_resting_rollout_stays_put(cube_net, cube_params):
    net = SupportPolytope(cube_net.vertices, smoothing=0.002)
    scene = far_scene()
    initial = BodyState(Pose3([1, 0, 0, 0], [0, 0, 0.05]), np.zeros(3),
                        np.zeros(3), 0.0)
    result = rollout(net, cube_params, scene, initial, horizon=5.0)
    drift = max(np.linalg.norm(s.pose.translation - initial.pose.translation)
                for s in result.trajectory.states)
    assert drift < 1e-6
    assert result.solver_converged.all()


def test_quasistatic_push_tracks_pusher(cube_net, cube_params):
    net = SupportPolytope(cube_net.vertices, smoothing=0.002)
    # pusher approaches the +x face at 0.05 m/s and keeps going
    sched = np.array([[0.0, 0.08, 0.0, 0.05], [4.0, -0.12, 0.0, 0.05]])
    scene = Scene(pusher_schedule=sched)
    initial = BodyState(Pose3([1, 0, 0, 0], [0, 0, 0.05]), np.zeros(3),
                        np.zeros(3), 0.0)
    result = rollout(net, cube_params, scene, initial, horizon=4.0)
    # contact begins once the pusher closes the initial 0.015 m gap
    pusher_travel = 0.05 * 4.0
    expected = pusher_travel - (0.08 - 0.05 - scene.pusher_radius)
    displacement = -(result.trajectory[-1].pose.translation[0])
    assert displacement == pytest.approx(expected, rel=0.10)


def test_tall_box_topples(cube_params):
    box = box_mesh([0.06, 0.06, 0.18])
    net = SupportPolytope(box.vertices, smoothing=0.002)
    params = InertialParams.uniform_density(box, 0.5)
    # push high above the w/mu ~ 0.115 m topple threshold
    sched = np.array([[0.0, 0.08, 0.0, 0.16], [3.0, -0.10, 0.0, 0.16],
                      [5.0, -0.10, 0.0, 0.16]])
    scene = Scene(pusher_schedule=sched)
    initial = BodyState(Pose3([1, 0, 0, 0], [0, 0, 0.09]), np.zeros(3),
                        np.zeros(3), 0.0)
    result = rollout(net, params, scene, initial, horizon=5.0)
    from physfuse.transforms import geodesic_angle
    tilt = geodesic_angle(initial.pose.rotation,
                          result.trajectory[-1].pose.rotation)
    assert np.degrees(tilt) > 45.0


def test_rollout_non_penetration_and_determinism(cube_params):
    box = box_mesh([0.1, 0.08, 0.06])
    net = SupportPolytope(box.vertices, smoothing=0.002)
    params = InertialParams.uniform_density(box, 0.7)
    # pushed session: approach, shove, retreat
    sched = np.array([[0.0, 0.10, 0.02, 0.04], [1.2, -0.04, 0.02, 0.04],
                      [2.0, 0.15, 0.02, 0.04]])
    scene = Scene(pusher_schedule=sched)
    initial = BodyState(Pose3([1, 0, 0, 0], [0, 0, 0.03]), np.zeros(3),
                        np.zeros(3), 0.0)
    r1 = rollout(net, params, scene, initial, horizon=2.0)
    r2 = rollout(net, params, scene, initial, horizon=2.0)
    converged_gaps = r1.min_gap if r1.solver_converged.all() else 0.0
    assert converged_gaps >= -1e-4
    for a, b in zip(r1.trajectory.states, r2.trajectory.states):
        assert np.array_equal(a.pose.translation, b.pose.translation)
        assert np.array_equal(a.pose.rotation, b.pose.rotation)
        assert np.array_equal(a.linear_velocity, b.linear_velocity)


def test_friction_cone_feasibility_along_rollout(cube_net, cube_params):
    net = SupportPolytope(cube_net.vertices, smoothing=0.002)
    sched = np.array([[0.0, 0.09, 0.0, 0.05], [2.0, -0.05, 0.0, 0.05]])
    scene = Scene(pusher_schedule=sched)
    state = BodyState(Pose3([1, 0, 0, 0], [0, 0, 0.05]), np.zeros(3),
                      np.zeros(3), 0.0)
    for k in range(300):
        contacts = contact_kinematics(net, state, scene, k * DT)
        solve = solve_forward_contact(state, cube_params, contacts, scene, DT)
        for (jn, jt1, jt2), c in zip(solve.impulses, contacts):
            assert jn >= 0.0
            assert np.hypot(jt1, jt2) <= c.mu * jn + 1e-9
        state = step(state, cube_params, solve.impulses, contacts, DT)


def test_energy_non_increasing_without_pusher():
    def energy(state, params):
        R = state.pose.matrix()
        v = com_velocity(state, params, R)
        ke = (0.5 * params.mass * v @ v
              + 0.5 * state.angular_velocity @ params.inertia()
              @ state.angular_velocity)
        z_com = state.pose.translation[2] + (R @ params.com)[2]
        return ke + params.mass * 9.81 * z_com

    rng = np.random.default_rng(11)
    scene = far_scene()
    for trial in range(6):
        extents = rng.uniform(0.04, 0.12, 3)
        mesh = box_mesh(extents)
        net = SupportPolytope(mesh.vertices, smoothing=0.002)
        params = InertialParams.uniform_density(mesh, rng.uniform(0.3, 1.5))
        params = InertialParams.from_matrix(
            params.mass, rng.uniform(-0.01, 0.01, 3) * extents,
            params.inertia())
        if trial % 2 == 0:
            # resting flat with a random yaw spin
            from physfuse.transforms import quat_from_axis_angle
            q = quat_from_axis_angle([0, 0, 1], rng.uniform(0, np.pi))
            state = BodyState(Pose3(q, [0, 0, extents[2] / 2]), np.zeros(3),
                              [0, 0, rng.uniform(-2, 2)], 0.0)
            steps = 450
        else:
            # airborne tumble that stays clear of the table
            state = BodyState(Pose3(random_quat(rng), [0, 0, 1.0]),
                              rng.normal(scale=0.1, size=3),
                              rng.normal(scale=2.0, size=3), 0.0)
            steps = 100
        e_prev = energy(state, params)
        for k in range(steps):
            contacts = contact_kinematics(net, state, scene, k * DT)
            solve = solve_forward_contact(state, params, contacts, scene, DT)
            state = step(state, params, solve.impulses, contacts, DT)
            e_now = energy(state, params)
            assert e_now <= e_prev + 1e-9
            e_prev = e_now
