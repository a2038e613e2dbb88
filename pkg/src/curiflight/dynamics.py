"""Rigid-body quadrotor model driven by attitude-thrust commands.

The vehicle is a point mass with an orientation. An inner attitude loop is
abstracted as a first-order lag: each control tick the attitude moves a fixed
fraction of the way along the geodesic from the current rotation to the
commanded one,

    R_{t+1} = R_t exp(alpha * log(R_t^T R_cmd)),   alpha = 1 - exp(-dt / tau),

which is the discrete step of dR = (1/tau) log(R^T R_cmd) R. Translation is
Newtonian with thrust along the body z axis,

    a = R (0, 0, f)^T / m - (0, 0, g)^T,

integrated semi-implicitly (velocity first, then position with the new
velocity). Attitudes are re-orthonormalized every step through the polar
factor of an SVD so numerical drift cannot accumulate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

GRAVITY = 9.81

# Tolerance for the R^T R = I check on states entering the integrator.
ROTATION_TOL = 1e-6


def hat(w: np.ndarray) -> np.ndarray:
    """Map a 3-vector to the corresponding skew-symmetric matrix."""
    return np.array(
        [
            [0.0, -w[2], w[1]],
            [w[2], 0.0, -w[0]],
            [-w[1], w[0], 0.0],
        ]
    )


def vee(m: np.ndarray) -> np.ndarray:
    """Inverse of :func:`hat`."""
    return np.array([m[2, 1], m[0, 2], m[1, 0]])


def rotation_exp(w: np.ndarray) -> np.ndarray:
    """Exponential map so(3) -> SO(3) via the Rodrigues formula."""
    angle = np.linalg.norm(w)
    if angle < 1e-12:
        return np.eye(3) + hat(w)
    k = hat(w / angle)
    return np.eye(3) + np.sin(angle) * k + (1.0 - np.cos(angle)) * (k @ k)


def rotation_log(rot: np.ndarray) -> np.ndarray:
    """Logarithm map SO(3) -> so(3), returned as a rotation vector.

    Handles the small-angle limit with the series expansion and the
    near-pi case through the dominant column of R + I, where the usual
    sin(angle) normalization loses all precision.
    """
    trace = np.clip((np.trace(rot) - 1.0) / 2.0, -1.0, 1.0)
    angle = np.arccos(trace)
    if angle < 1e-7:
        return vee(rot - rot.T) / 2.0
    if angle > np.pi - 1e-5:
        # R ~ exp(pi * hat(axis)): axis^2 = (R + I) / 2 up to O(pi - angle).
        m = (rot + np.eye(3)) / 2.0
        axis = np.sqrt(np.maximum(np.diag(m), 0.0))
        # Fix signs using the largest component as reference.
        k = int(np.argmax(axis))
        axis = m[:, k] / max(axis[k], 1e-12)
        axis = axis / np.linalg.norm(axis)
        # Orient so that the skew part (if any survives) agrees.
        w = vee(rot - rot.T)
        if w @ axis < 0.0:
            axis = -axis
        return angle * axis
    return angle / (2.0 * np.sin(angle)) * vee(rot - rot.T)


def orthonormalize(rot: np.ndarray) -> np.ndarray:
    """Project a near-rotation matrix back onto SO(3) (polar factor)."""
    u, _, vh = np.linalg.svd(rot)
    out = u @ vh
    if np.linalg.det(out) < 0.0:
        u[:, -1] = -u[:, -1]
        out = u @ vh
    return out


def is_rotation(rot: np.ndarray, tol: float = ROTATION_TOL) -> bool:
    if rot.shape != (3, 3) or not np.all(np.isfinite(rot)):
        return False
    if not np.allclose(rot.T @ rot, np.eye(3), atol=tol):
        return False
    return bool(np.linalg.det(rot) > 0.0)


@dataclass(frozen=True)
class QuadParams:
    """Physical parameters of the vehicle and its control loop.

    The diagonal inertia is carried for completeness; the attitude loop
    abstracts torque dynamics, so only mass, thrust ceiling, the attitude
    time constant and the tick length enter the integrator.
    """

    mass: float = 0.547
    inertia_diag: tuple[float, float, float] = (0.033, 0.033, 0.058)
    thrust_max: float = 20.0
    attitude_time_constant: float = 0.08
    control_dt: float = 0.01
    gravity: float = GRAVITY

    def __post_init__(self) -> None:
        if not (self.mass > 0.0 and np.isfinite(self.mass)):
            raise ValueError("mass must be positive and finite")
        if any(i <= 0.0 for i in self.inertia_diag):
            raise ValueError("inertia entries must be positive")
        if not (self.thrust_max > 0.0):
            raise ValueError("thrust_max must be positive")
        if not (self.attitude_time_constant > 0.0):
            raise ValueError("attitude_time_constant must be positive")
        if not (0.0 < self.control_dt <= 0.05):
            raise ValueError("control_dt must lie in (0, 0.05]")
        if not (self.gravity >= 0.0):
            raise ValueError("gravity must be non-negative")


@dataclass(frozen=True)
class QuadState:
    """Pose and twist of the vehicle.

    attitude is the body-to-world rotation matrix; angular_velocity is
    expressed in the body frame.
    """

    position: np.ndarray
    attitude: np.ndarray
    linear_velocity: np.ndarray
    angular_velocity: np.ndarray

    def __post_init__(self) -> None:
        for name in ("position", "linear_velocity", "angular_velocity"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.shape != (3,) or not np.all(np.isfinite(v)):
                raise ValueError(f"{name} must be a finite 3-vector")
            object.__setattr__(self, name, v)
        rot = np.asarray(self.attitude, dtype=float)
        if not is_rotation(rot):
            raise ValueError("attitude must be a rotation matrix (det +1, R^T R = I)")
        object.__setattr__(self, "attitude", rot)

    @staticmethod
    def at_rest(position, attitude=None) -> "QuadState":
        """Hovering state: zero twist at the given pose."""
        rot = np.eye(3) if attitude is None else attitude
        return QuadState(
            position=np.asarray(position, dtype=float),
            attitude=rot,
            linear_velocity=np.zeros(3),
            angular_velocity=np.zeros(3),
        )


@dataclass(frozen=True)
class AttitudeThrustAction:
    """Setpoint consumed by the inner loop: target rotation + total thrust [N]."""

    commanded_attitude: np.ndarray
    thrust: float

    def __post_init__(self) -> None:
        rot = np.asarray(self.commanded_attitude, dtype=float)
        if not is_rotation(rot):
            raise ValueError("commanded_attitude must be a rotation matrix")
        object.__setattr__(self, "commanded_attitude", rot)
        if not (np.isfinite(self.thrust) and self.thrust >= 0.0):
            raise ValueError("thrust must be finite and non-negative")


def step(state: QuadState, action: AttitudeThrustAction, params: QuadParams) -> QuadState:
    """Advance the vehicle one control tick.

    Pure function: the same (state, action, params) triple always produces a
    bit-identical successor. Raises ValueError on non-finite input or a
    thrust outside [0, thrust_max].
    """
    if action.thrust > params.thrust_max:
        raise ValueError("thrust exceeds thrust_max")

    dt = params.control_dt
    alpha = 1.0 - np.exp(-dt / params.attitude_time_constant)

    w_err = rotation_log(state.attitude.T @ action.commanded_attitude)
    w_step = alpha * w_err
    attitude = orthonormalize(state.attitude @ rotation_exp(w_step))
    omega = w_step / dt

    accel = state.attitude @ np.array([0.0, 0.0, action.thrust / params.mass])
    accel = accel - np.array([0.0, 0.0, params.gravity])
    velocity = state.linear_velocity + dt * accel
    position = state.position + dt * velocity

    return QuadState(
        position=position,
        attitude=attitude,
        linear_velocity=velocity,
        angular_velocity=omega,
    )
