"""Closed-form upper bounds on the sensitivity energy |d(ybar)/d(theta_i)|^2.

Three families: the dynamics bound (parameter-dependent A, log-norm
decay), the initial-state bound (parameter-dependent x(0), Lyapunov
solve), and the Gramian trace baseline. Plus the free-response and
forced-only restrictions of the dynamics bound, the closed-form decay
moment integrals behind its constants, and a Lyapunov-based coordinate
transform that restores a negative log-norm for Hurwitz matrices whose
raw log-norm is positive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, PreconditionError
from .linalg_core import (
    gramian_finite,
    log_norm,
    lyap_observability,
    spectral_abscissa,
    spectral_norm,
    sym_eig_max,
)
from .sensitivity import signal_energy
from .systems import AugmentedSystem, Trajectory

__all__ = [
    "BoundConstants",
    "BoundReport",
    "CoordinateTransform",
    "dynamics_bound",
    "dynamics_bound_terms",
    "init_state_bound",
    "init_state_bound_from",
    "gramian_trace_bound",
    "baseline_from_trace",
    "special_case_bound",
    "decay_moment_integrals",
    "lyapunov_preconditioner",
]


@dataclass(frozen=True)
class BoundConstants:
    """Ingredients of the dynamics bound, kept for reporting."""

    K1: float
    K2: float
    K3: float
    mu: float
    N: float
    dA_norm: float
    bu_inf: float
    x0_norm: float

    def to_dict(self) -> dict:
        return {
            "K1": self.K1,
            "K2": self.K2,
            "K3": self.K3,
            "mu": self.mu,
            "N": self.N,
            "dA_norm": self.dA_norm,
            "bu_inf": self.bu_inf,
            "x0_norm": self.x0_norm,
        }


@dataclass(frozen=True)
class BoundReport:
    """Per-parameter record of bound values against the ground truth."""

    param_index: int
    theta_star: float
    theorem1: float | None
    theorem2: float | None
    gramian_baseline: float | None
    ground_truth_energy: float
    gt_energy_fd: float | None
    constants: BoundConstants
    flags: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "param_index": self.param_index,
            "theta_star": self.theta_star,
            "theorem1": self.theorem1,
            "theorem2": self.theorem2,
            "gramian_baseline": self.gramian_baseline,
            "ground_truth_energy": self.ground_truth_energy,
            "gt_energy_fd": self.gt_energy_fd,
            "constants": self.constants.to_dict(),
            "flags": list(self.flags),
        }


@dataclass(frozen=True)
class CoordinateTransform:
    """Similarity transform x' = T x with T = P^{1/2}, A^T P + P A = -I.

    In the new coordinates sym(T A T^{-1}) = -P^{-1}/2, so the log-norm
    is -1/(2 lmax(P)) < 0 whenever A is Hurwitz. The output ybar is
    unchanged, so bounds computed after the transform still dominate the
    physical sensitivity energy.
    """

    T: np.ndarray
    Tinv: np.ndarray
    cond: float
    mu: float

    def apply(self, Abar, Bbar, Cbar, xbar0):
        """Transformed (Abar', Bbar', Cbar', xbar0')."""
        return (
            self.T @ Abar @ self.Tinv,
            self.T @ Bbar,
            Cbar @ self.Tinv,
            self.T @ np.asarray(xbar0, dtype=float).reshape(-1),
        )

    def apply_direction(self, dAbar) -> np.ndarray:
        return self.T @ dAbar @ self.Tinv


def lyapunov_preconditioner(Abar) -> CoordinateTransform:
    """Build the decay-restoring transform for a Hurwitz matrix."""
    A = np.atleast_2d(np.asarray(Abar, dtype=float))
    sol = lyap_observability(A, np.eye(A.shape[0]))
    w, V = np.linalg.eigh(sol.P)
    if w[0] <= 0.0:
        raise NumericalError("Lyapunov solution is not positive definite")
    T = (V * np.sqrt(w)) @ V.T
    Tinv = (V / np.sqrt(w)) @ V.T
    mu = log_norm(T @ A @ Tinv).mu
    if mu >= 0.0:
        raise NumericalError(
            f"transform failed to restore decay (mu = {mu:.6g})"
        )
    return CoordinateTransform(T=T, Tinv=Tinv, cond=float(math.sqrt(w[-1] / w[0])), mu=mu)


def _check_horizon_and_input(bu_inf: float, N: float):
    if float(N) <= 0.0:
        raise PreconditionError("horizon N must be positive")
    if float(bu_inf) < 0.0:
        raise PreconditionError("bu_inf must be nonnegative")


def dynamics_bound_terms(Abar, dAbar, Cbar, xbar0, bu_inf: float, N: float):
    """Numeric core of the dynamics bound; returns (value, constants).

    Bound: K1 |dA|^2 + K2 |dA|^3 |Bu|_inf + K3 N^2 |dA|^2 |Bu|_inf with
    K1 = |C^T C| |x0|^2 / (4 |mu|^3), K2 = 2 |x0| |C^T C| / |mu|^5 and
    K3 = |C| / |mu|, all norms induced 2-norms.
    """
    _check_horizon_and_input(bu_inf, N)
    A = np.atleast_2d(np.asarray(Abar, dtype=float))
    mu = log_norm(A).mu
    if mu >= 0.0:
        raise PreconditionError(
            f"log-norm mu = {mu:.6g} >= 0: the dynamics bound needs decaying "
            "coordinates; apply the Lyapunov coordinate transform first"
        )
    C = np.atleast_2d(np.asarray(Cbar, dtype=float))
    x0 = np.asarray(xbar0, dtype=float).reshape(-1)
    dA_norm = spectral_norm(dAbar)
    amu = abs(mu)
    c_norm = spectral_norm(C)
    ctc_norm = c_norm * c_norm  # |C^T C|_2 = |C|_2^2
    x0_norm = float(np.linalg.norm(x0))
    K1 = ctc_norm * x0_norm**2 / (4.0 * amu**3)
    K2 = 2.0 * x0_norm * ctc_norm / amu**5
    K3 = c_norm / amu
    value = (
        K1 * dA_norm**2
        + K2 * dA_norm**3 * float(bu_inf)
        + K3 * float(N) ** 2 * dA_norm**2 * float(bu_inf)
    )
    constants = BoundConstants(
        K1=K1, K2=K2, K3=K3, mu=mu, N=float(N),
        dA_norm=dA_norm, bu_inf=float(bu_inf), x0_norm=x0_norm,
    )
    return value, constants


def dynamics_bound(aug: AugmentedSystem, i, theta, bu_inf: float, N: float) -> float:
    """Upper bound on sensitivity energy from parameter-dependent dynamics.

    Strict: requires the log-norm of Abar(theta) to be negative.
    """
    idx = aug.Abar._param_index(i)
    A, _, C, _, x0 = aug.eval_matrices(theta)
    dA = aug.Abar.partial_at(idx, theta)
    value, _ = dynamics_bound_terms(A, dA, C, x0, bu_inf, N)
    return value


def init_state_bound_from(P: np.ndarray, dx0) -> float:
    """lmax(P) |dx0|^2 for a precomputed Lyapunov solution."""
    v = np.asarray(dx0, dtype=float).reshape(-1)
    return float(sym_eig_max(P)) * float(v @ v)


def init_state_bound(aug: AugmentedSystem, i, theta, allow_param_dynamics: bool = False) -> float:
    """Upper bound on sensitivity energy from parameter-dependent x(0).

    Solves Abar^T P + P Abar = -Cbar^T Cbar and returns
    lmax(P) |d(xbar0)/d(theta_i)|^2. In strict mode the system matrices
    must be parameter independent, since the bound equals the energy of
    the free response C e^{At} d(x0) only then.
    """
    idx = aug.Abar._param_index(i)
    if not allow_param_dynamics:
        for name, pm in (
            ("Abar", aug.Abar), ("Bbar", aug.Bbar),
            ("Cbar", aug.Cbar), ("Dbar", aug.Dbar),
        ):
            if not pm.is_constant:
                raise PreconditionError(
                    f"{name} depends on parameters; the initial-state bound "
                    "assumes parameter-independent dynamics (use the dynamics "
                    "bound, or pass allow_param_dynamics=True to compute anyway)"
                )
    A, _, C, _, _ = aug.eval_matrices(theta)
    alpha = spectral_abscissa(A)
    if alpha >= 0.0:
        raise PreconditionError(
            f"Abar is not Hurwitz: spectral abscissa {alpha:.6g} >= 0"
        )
    P = lyap_observability(A, C.T @ C).P
    dx0 = aug.xbar0.partial_at(idx, theta).ravel()
    return init_state_bound_from(P, dx0)


def baseline_from_trace(gram_trace: float, dAbar, x_traj: Trajectory, N: float) -> float:
    """N * trace(Gramian) * |w|^2 with w(t) = dA x(t), for a known trace."""
    N = float(N)
    if N <= 0.0:
        raise PreconditionError("horizon N must be positive")
    dA = np.atleast_2d(np.asarray(dAbar, dtype=float))
    if not np.any(dA):
        return 0.0
    w_values = x_traj.values @ dA.T
    w_energy = signal_energy(x_traj.times, w_values, N)
    return N * float(gram_trace) * w_energy


def gramian_trace_bound(aug: AugmentedSystem, i, theta, x_traj: Trajectory, N: float) -> float:
    """Gramian trace baseline bound N trace(Q_o(N)) |dA x|^2_{L2[0,N]}."""
    idx = aug.Abar._param_index(i)
    if float(N) <= 0.0:
        raise PreconditionError("horizon N must be positive")
    if x_traj.times[-1] < float(N) - 1e-9 * max(float(N), 1.0):
        raise PreconditionError("state trajectory does not cover the horizon")
    A, _, C, _, _ = aug.eval_matrices(theta)
    dA = aug.Abar.partial_at(idx, theta)
    if not np.any(dA):
        return 0.0
    trace = float(np.trace(gramian_finite(A, C, N)))
    return baseline_from_trace(trace, dA, x_traj, N)


def special_case_bound(aug: AugmentedSystem, i, theta, mode: str, bu_inf: float, N: float) -> float:
    """Free-response or forced-only restriction of the dynamics bound."""
    if mode not in ("free_response", "forced_only"):
        raise PreconditionError(f"unknown mode {mode!r}")
    idx = aug.Abar._param_index(i)
    A, _, C, _, x0 = aug.eval_matrices(theta)
    if mode == "free_response" and float(bu_inf) != 0.0:
        raise PreconditionError("free_response requires bu_inf = 0")
    if mode == "forced_only" and np.any(x0 != 0.0):
        raise PreconditionError("forced_only requires xbar(0) = 0")
    dA = aug.Abar.partial_at(idx, theta)
    value, consts = dynamics_bound_terms(A, dA, C, x0, bu_inf, N)
    if mode == "free_response":
        return consts.K1 * consts.dA_norm**2
    return consts.K3 * consts.N**2 * consts.dA_norm**2 * consts.bu_inf


def decay_moment_integrals(mu_abs: float) -> dict:
    """Closed forms of the decay moments on [0, inf).

    I3 = int t^3 e^{-|mu| t} dt = 6/|mu|^4,
    I2 = int t^2 e^{-|mu| t} dt = 2/|mu|^3,
    I2_half = int t^2 e^{-2 |mu| t} dt = 1/(4 |mu|^3).
    """
    mu_abs = float(mu_abs)
    if mu_abs <= 0.0:
        raise PreconditionError("mu_abs must be positive")
    return {
        "I3": 6.0 / mu_abs**4,
        "I2": 2.0 / mu_abs**3,
        "I2_half": 1.0 / (4.0 * mu_abs**3),
    }
