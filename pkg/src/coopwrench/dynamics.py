"""Inverse dynamics for the planar chains and the carried object.

Joint torques come from a recursive Newton-Euler sweep specialized to
fixed-base serial chains whose joints all rotate about the axis normal to
the X-Z motion plane.  Gravity acts along world -Z and is injected through
the standard base-acceleration trick, so no separate gravity pass is needed.
Torque vectors are plain float arrays ordered by joint.
"""
from __future__ import annotations

import numpy as np

from .config import Wrench
from .kinematics import JOINT_AXIS, JointState, cross3, planar_rotation


def inverse_dynamics(model, state, gravity):
    """Joint torques carrying the chain itself through the given state.

    The result covers inertial, velocity-product, and gravity loads of the
    links only; any wrench applied at the end effector is accounted for
    separately through the Jacobian transpose by the capability layer.
    """
    q, qdot, qddot = state.q, state.qdot, state.qddot
    n = model.joint_count
    axis = JOINT_AXIS

    # Per-link quantities in the link's own frame (x along the link).
    rotations = [planar_rotation(q[i]) for i in range(n)]
    link_offsets = [np.array([length, 0.0, 0.0]) for length in model.link_lengths]
    com_offsets = [np.array([offset, 0.0, 0.0]) for offset in model.link_com_offsets]
    omega = np.zeros(3)
    omega_dot = np.zeros(3)
    accel = np.array([0.0, 0.0, gravity])  # base acceleration trick
    com_force = np.empty((n, 3))
    com_torque = np.empty((n, 3))
    for i in range(n):
        Rt = rotations[i].T
        if i > 0:
            offset = link_offsets[i - 1]
            accel = accel + cross3(omega_dot, offset) \
                + cross3(omega, cross3(omega, offset))
        accel = Rt @ accel
        omega_prev = Rt @ omega
        omega = omega_prev + qdot[i] * axis
        omega_dot = Rt @ omega_dot + cross3(omega_prev, qdot[i] * axis) \
            + qddot[i] * axis
        com = com_offsets[i]
        com_accel = accel + cross3(omega_dot, com) \
            + cross3(omega, cross3(omega, com))
        com_force[i] = model.link_masses[i] * com_accel
        spin = model.link_inertias[i] * omega
        com_torque[i] = model.link_inertias[i] * omega_dot \
            + cross3(omega, spin)

    torques = np.empty(n)
    child_force = np.zeros(3)
    child_torque = np.zeros(3)
    for i in range(n - 1, -1, -1):
        if i < n - 1:
            R_child = rotations[i + 1]
            child_force = R_child @ child_force
            child_torque = R_child @ child_torque
            child_torque = child_torque + cross3(link_offsets[i], child_force)
        total_force = child_force + com_force[i]
        total_torque = child_torque + com_torque[i] \
            + cross3(com_offsets[i], com_force[i])
        torques[i] = total_torque @ axis
        child_force = total_force
        child_torque = total_torque
    return torques


def mass_matrix(model, q):
    """Joint-space inertia matrix, assembled column by column."""
    q = np.asarray(q, dtype=float)
    n = q.size
    M = np.empty((n, n))
    zero = np.zeros(n)
    for j in range(n):
        unit = np.zeros(n)
        unit[j] = 1.0
        M[:, j] = inverse_dynamics(
            model, JointState(q, zero, unit), gravity=0.0)
    return M


def gravity_vector(model, q, gravity):
    """Joint torques holding the chain static under gravity."""
    q = np.asarray(q, dtype=float)
    zero = np.zeros(q.size)
    return inverse_dynamics(model, JointState(q, zero, zero), gravity)


def object_desired_wrench(obj, state, gravity):
    """Net wrench the grasp group must apply to realize an object motion.

    Force balances inertia plus weight (hovering therefore needs a purely
    upward force); torque follows the world-frame rotational dynamics with
    the inertia tensor rotated into the current orientation.
    """
    force = obj.mass * state.linear_accel \
        + np.array([0.0, 0.0, obj.mass * gravity])
    inertia_world = state.orientation @ obj.inertia @ state.orientation.T
    momentum = inertia_world @ state.angular_velocity
    torque = inertia_world @ state.angular_accel \
        + cross3(state.angular_velocity, momentum)
    return Wrench(force, torque)
