"""Forward kinematics of the simplified 7-angle arm.

The arm is four links chained by pitch-yaw joints (yaw only for the last
joint). Joint i applies Rz(yaw_i) @ Ry(pitch_i) and its link extends along the
local x axis, so the zero configuration is fully extended along the base x
axis. State angles are ordered (pitch_0, yaw_0, pitch_1, yaw_1, pitch_2,
yaw_2, yaw_3).

Derivatives use the revolute-joint identities dp/dq_e = w_e x (p - o_e) and
d2p/dq_e dq_f = (w_e x w_f) x (p - o_f) + w_f x (w_e x (p - o_f)) for e not
after f in the chain.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

LINK_LENGTHS: tuple[float, ...] = (0.33, 0.32, 0.25, 0.15)

# Elementary rotations in chain order: (local axis, state angle index).
_ELEMENTS: tuple[tuple[int, int], ...] = ((2, 1), (1, 0), (2, 3), (1, 2), (2, 5), (1, 4), (2, 6))
# Index of the last elementary rotation belonging to each joint.
_JOINT_END: tuple[int, ...] = (1, 3, 5, 6)
_N_ANGLES = 7


def _axis_rotation(axis: int, angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    if axis == 1:
        return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


@dataclass(frozen=True)
class ChainFrames:
    """World axes and origins of every elementary rotation plus the link end points."""

    axes: np.ndarray      # (7, 3) world rotation axis of each element
    origins: np.ndarray   # (7, 3) world origin of each element
    points: np.ndarray    # (4, 3) end point of each link; the last one is the end effector


def chain_frames(angles: np.ndarray, link_lengths: tuple[float, ...] = LINK_LENGTHS) -> ChainFrames:
    angles = np.asarray(angles, dtype=float)
    rot = np.eye(3)
    origin = np.zeros(3)
    axes = np.empty((len(_ELEMENTS), 3))
    origins = np.empty((len(_ELEMENTS), 3))
    points = np.empty((len(_JOINT_END), 3))
    joint = 0
    for e, (axis, idx) in enumerate(_ELEMENTS):
        axes[e] = rot[:, axis]
        origins[e] = origin
        rot = rot @ _axis_rotation(axis, angles[idx])
        if e == _JOINT_END[joint]:
            origin = origin + rot[:, 0] * link_lengths[joint]
            points[joint] = origin
            joint += 1
    return ChainFrames(axes=axes, origins=origins, points=points)


def forward_kinematics(angles: np.ndarray, link_lengths: tuple[float, ...] = LINK_LENGTHS) -> np.ndarray:
    """End-effector position of the arm."""
    return chain_frames(angles, link_lengths).points[-1].copy()


def link_point_derivatives(angles: np.ndarray, link_lengths: tuple[float, ...] = LINK_LENGTHS
                           ) -> list[tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """Position, Jacobian (3, 7) and Hessian (3, 7, 7) of every link end point w.r.t. the angles."""
    frames = chain_frames(angles, link_lengths)
    result = []
    for j, p in enumerate(frames.points):
        last = _JOINT_END[j]
        jac = np.zeros((3, _N_ANGLES))
        hess = np.zeros((3, _N_ANGLES, _N_ANGLES))
        for e in range(last + 1):
            w_e, o_e = frames.axes[e], frames.origins[e]
            jac[:, _ELEMENTS[e][1]] = np.cross(w_e, p - o_e)
            for f in range(e, last + 1):
                w_f, o_f = frames.axes[f], frames.origins[f]
                second = np.cross(np.cross(w_e, w_f), p - o_f) + np.cross(w_f, np.cross(w_e, p - o_f))
                a, b = _ELEMENTS[e][1], _ELEMENTS[f][1]
                hess[:, a, b] = second
                hess[:, b, a] = second
        result.append((p.copy(), jac, hess))
    return result
