"""Ground-truth sensitivity of the estimation error to each parameter.

Two independent routes: the exact sensitivity ODE (co-integrating the
state and its parameter derivative) and central finite differences over
two perturbed simulations. Their agreement is the main cross-check of the
whole pipeline. Also provides the squared L2 energy of a sensitivity
signal over the analysis horizon.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError
from .linalg_core import simpson_weights
from .systems import AugmentedSystem, InputSignal, Trajectory, simulate

__all__ = [
    "SensitivityTrajectory",
    "SensitivityEnergy",
    "sensitivity_ode",
    "sensitivity_fd",
    "l2_energy",
    "signal_energy",
    "default_fd_step",
]


@dataclass(frozen=True)
class SensitivityTrajectory:
    """Samples of the output sensitivity d(ybar)/d(theta_i) on a time grid."""

    param_index: int
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        traj = Trajectory(self.times, self.values)  # reuse its validation
        object.__setattr__(self, "times", traj.times)
        object.__setattr__(self, "values", traj.values)
        object.__setattr__(self, "param_index", int(self.param_index))

    @property
    def width(self) -> int:
        return self.values.shape[1]

    def as_trajectory(self) -> Trajectory:
        return Trajectory(self.times, self.values)


@dataclass(frozen=True)
class SensitivityEnergy:
    """Squared L2[0, N] norm of a sensitivity signal; never negative."""

    value: float

    def __post_init__(self):
        v = float(self.value)
        if not np.isfinite(v):
            raise PreconditionError("energy must be finite")
        # quadrature of a squared signal can round to a tiny negative
        object.__setattr__(self, "value", max(0.0, v))


def default_fd_step(theta_star_i: float) -> float:
    """Central-difference step balancing truncation against round-off."""
    return max(1e-6, 1e-5 * abs(float(theta_star_i)))


def sensitivity_ode(aug: AugmentedSystem, i, theta, u: InputSignal, grid) -> SensitivityTrajectory:
    """Exact route: co-integrate the state with z = d(xbar)/d(theta_i).

    The coupled system is
        d/dt [x; z] = [[A, 0], [dA, A]] [x; z] + [B; dB] u
    with z(0) = d(xbar0)/d(theta_i), and the sensitivity output is
    s = C z + dC x + dD u, where d* are partials with respect to theta_i.
    """
    idx = aug.Abar._param_index(i)
    A, B, C, D, x0 = aug.eval_matrices(theta)
    dA = aug.Abar.partial_at(idx, theta)
    dB = aug.Bbar.partial_at(idx, theta)
    dC = aug.Cbar.partial_at(idx, theta)
    dD = aug.Dbar.partial_at(idx, theta)
    dx0 = aug.xbar0.partial_at(idx, theta).ravel()
    n = aug.nx
    A2 = np.zeros((2 * n, 2 * n))
    A2[:n, :n] = A
    A2[n:, :n] = dA
    A2[n:, n:] = A
    B2 = np.vstack([B, dB])
    # output rows pick s = dC x + C z (+ dD u)
    C2 = np.hstack([dC, C])
    x20 = np.concatenate([x0, dx0])
    _, outputs = simulate(A2, B2, C2, dD, x20, u, grid)
    return SensitivityTrajectory(idx, outputs.times, outputs.values)


def sensitivity_fd(aug: AugmentedSystem, i, theta, h: float, u: InputSignal, grid) -> SensitivityTrajectory:
    """Oracle route: central difference of two perturbed simulations."""
    idx = aug.Abar._param_index(i)
    h = float(h)
    if h <= 0.0:
        raise PreconditionError("finite-difference step must be positive")
    th = aug.spec.check_theta(theta)

    def run(sign: float) -> np.ndarray:
        tp = th.copy()
        tp[idx] += sign * h
        A, B, C, D, x0 = aug.eval_matrices(tp)
        _, outputs = simulate(A, B, C, D, x0, u, grid)
        return outputs.values

    diff = (run(+1.0) - run(-1.0)) / (2.0 * h)
    times = np.asarray(grid, dtype=float).reshape(-1)
    return SensitivityTrajectory(idx, times, diff)


def signal_energy(times, values, N: float) -> float:
    """Composite-Simpson quadrature of the squared Euclidean norm over [0, N]."""
    N = float(N)
    if N <= 0.0:
        raise PreconditionError("horizon N must be positive")
    times = np.asarray(times, dtype=float).reshape(-1)
    values = np.atleast_2d(np.asarray(values, dtype=float))
    if times[0] > 0.0 or times[-1] < N - 1e-9 * max(N, 1.0):
        raise PreconditionError(
            f"grid [{times[0]:.6g}, {times[-1]:.6g}] does not cover [0, {N:.6g}]"
        )
    # integrate up to the grid node at N
    end = int(np.searchsorted(times, N - 1e-9 * max(N, 1.0)))
    if end >= times.size or abs(times[end] - N) > 1e-6 * max(N, 1.0):
        raise PreconditionError("horizon N must land on a grid node")
    dt = float(times[1] - times[0])
    if np.max(np.abs(np.diff(times[: end + 1]) - dt)) > 1e-9 * max(dt, 1.0):
        raise PreconditionError("quadrature requires a uniform grid")
    sq = np.sum(values[: end + 1] ** 2, axis=1)
    w = simpson_weights(end + 1, dt)
    return max(0.0, float(w @ sq))


def l2_energy(s: SensitivityTrajectory, N: float) -> SensitivityEnergy:
    """Squared L2[0, N] norm of a sensitivity trajectory."""
    return SensitivityEnergy(signal_energy(s.times, s.values, N))
