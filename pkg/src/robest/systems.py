"""Parametrized continuous-time LTI systems and their simulation.

Holds the truth/estimate state-space pair, the block-augmented
composition whose output is the estimation error, input signal
definitions, and a fixed-step RK4 integrator. The fixed step keeps
quadrature grids aligned with simulation grids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError, PreconditionError
from .linalg_core import simpson_weights, spectral_norm
from .param_algebra import (
    ParamMatrix,
    ParamVector,
    ParamVectorSpec,
    block_diag,
    hstack,
    vstack,
)

__all__ = [
    "InputSignal",
    "Trajectory",
    "StateSpace",
    "AugmentedSystem",
    "build_augmented",
    "bu_sup_norm",
    "simulate",
    "time_grid",
    "default_dt",
    "write_trajectory_csv",
]

BLOWUP_LIMIT = 1e12
MAX_DT_NORM = 0.1


@dataclass(frozen=True)
class InputSignal:
    """Control input u(t); evaluable at any t >= 0 and bounded on finite horizons."""

    kind: str
    amplitude: tuple[float, ...] = ()
    frequency: float = 0.0
    breakpoints: tuple[float, ...] = ()
    values: tuple[tuple[float, ...], ...] = ()

    _KINDS = ("zero", "step", "sinusoid", "piecewise")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise PreconditionError(f"unknown input kind {self.kind!r}")
        object.__setattr__(self, "amplitude", tuple(float(a) for a in self.amplitude))
        object.__setattr__(self, "frequency", float(self.frequency))
        object.__setattr__(self, "breakpoints", tuple(float(b) for b in self.breakpoints))
        object.__setattr__(
            self, "values", tuple(tuple(float(v) for v in row) for row in self.values)
        )
        if self.kind == "sinusoid" and self.frequency <= 0.0:
            raise PreconditionError("sinusoid requires a positive frequency")
        if self.kind == "piecewise":
            if len(self.breakpoints) != len(self.values) or not self.values:
                raise PreconditionError("piecewise needs one value row per breakpoint")
            if any(b2 <= b1 for b1, b2 in zip(self.breakpoints, self.breakpoints[1:])):
                raise PreconditionError("breakpoints must be strictly increasing")
            widths = {len(row) for row in self.values}
            if len(widths) != 1:
                raise PreconditionError("piecewise value rows must share a width")
        elif not self.amplitude:
            raise PreconditionError("amplitude vector must be nonempty")

    @classmethod
    def zero(cls, k: int) -> "InputSignal":
        return cls(kind="zero", amplitude=(0.0,) * int(k))

    @classmethod
    def step(cls, amplitude) -> "InputSignal":
        return cls(kind="step", amplitude=tuple(np.atleast_1d(amplitude)))

    @classmethod
    def sinusoid(cls, amplitude, frequency: float) -> "InputSignal":
        return cls(
            kind="sinusoid",
            amplitude=tuple(np.atleast_1d(amplitude)),
            frequency=frequency,
        )

    @classmethod
    def piecewise(cls, breakpoints, values) -> "InputSignal":
        return cls(
            kind="piecewise",
            breakpoints=tuple(breakpoints),
            values=tuple(tuple(row) for row in np.atleast_2d(values)),
        )

    @property
    def k(self) -> int:
        if self.kind == "piecewise":
            return len(self.values[0])
        return len(self.amplitude)

    def sample(self, times) -> np.ndarray:
        """Evaluate at the given times; returns shape (len(times), k)."""
        t = np.atleast_1d(np.asarray(times, dtype=float))
        if self.kind == "zero":
            return np.zeros((t.size, self.k))
        if self.kind == "step":
            return np.tile(self.amplitude, (t.size, 1))
        if self.kind == "sinusoid":
            return np.outer(np.sin(self.frequency * t), self.amplitude)
        idx = np.searchsorted(self.breakpoints, t, side="right") - 1
        vals = np.asarray(self.values, dtype=float)
        out = np.zeros((t.size, self.k))
        inside = idx >= 0
        out[inside] = vals[idx[inside]]
        return out

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.kind == "piecewise":
            d["breakpoints"] = list(self.breakpoints)
            d["values"] = [list(row) for row in self.values]
        else:
            d["amplitude"] = list(self.amplitude)
            if self.kind == "sinusoid":
                d["frequency"] = self.frequency
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "InputSignal":
        kind = d.get("kind", "step")
        if kind == "zero":
            return cls.zero(len(d.get("amplitude", [0.0])))
        if kind == "step":
            return cls.step(d["amplitude"])
        if kind == "sinusoid":
            return cls.sinusoid(d["amplitude"], d["frequency"])
        if kind == "piecewise":
            return cls.piecewise(d["breakpoints"], d["values"])
        raise PreconditionError(f"unknown input kind {kind!r}")


@dataclass(frozen=True)
class Trajectory:
    """A time grid plus one sampled vector value per grid point."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        times = np.array(self.times, dtype=float, copy=True).reshape(-1)
        values = np.atleast_2d(np.array(self.values, dtype=float, copy=True))
        if values.shape[0] != times.size:
            raise PreconditionError(
                f"{times.size} grid points but {values.shape[0]} value rows"
            )
        if times.size and np.any(np.diff(times) <= 0.0):
            raise PreconditionError("time grid must be strictly increasing")
        if not np.all(np.isfinite(values)):
            raise PreconditionError("trajectory values must be finite")
        times.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    @property
    def width(self) -> int:
        return self.values.shape[1]


def write_trajectory_csv(traj: Trajectory, path, prefix: str = "") -> None:
    """Write `t,v1,...,vm` rows at full double precision (17 significant digits)."""
    header = "t," + ",".join(f"{prefix}v{i + 1}" for i in range(traj.width))
    lines = [header]
    for t, row in zip(traj.times, traj.values):
        lines.append(",".join(f"{x:.17g}" for x in (t, *row)))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _check_param(pm, rows, cols, spec, label):
    if pm.spec != spec:
        raise PreconditionError(f"{label} uses a different parameter spec")
    if pm.shape != (rows, cols):
        raise PreconditionError(
            f"{label} has shape {pm.shape}, expected ({rows}, {cols})"
        )


@dataclass(frozen=True)
class StateSpace:
    """dx/dt = A(theta) x + B(theta) u, y = C(theta) x + D(theta) u."""

    A: ParamMatrix
    B: ParamMatrix
    C: ParamMatrix
    D: ParamMatrix | None = None
    x0: ParamVector | None = None
    spec: ParamVectorSpec = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        spec = self.spec if self.spec is not None else self.A.spec
        n = self.A.rows
        if self.A.cols != n:
            raise PreconditionError("A must be square")
        k = self.B.cols
        m = self.C.rows
        _check_param(self.A, n, n, spec, "A")
        _check_param(self.B, n, k, spec, "B")
        _check_param(self.C, m, n, spec, "C")
        D = self.D if self.D is not None else ParamMatrix.zeros(m, k, spec)
        _check_param(D, m, k, spec, "D")
        x0 = self.x0 if self.x0 is not None else ParamVector.zeros(n, 1, spec)
        _check_param(x0, n, 1, spec, "x0")
        if not isinstance(x0, ParamVector):
            x0 = x0.as_vector()
        object.__setattr__(self, "D", D)
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "spec", spec)

    @property
    def n(self) -> int:
        return self.A.rows

    @property
    def k(self) -> int:
        return self.B.cols

    @property
    def m(self) -> int:
        return self.C.rows


@dataclass(frozen=True)
class AugmentedSystem:
    """Block composition of truth and estimate; its output is y - y_estimate."""

    Abar: ParamMatrix
    Bbar: ParamMatrix
    Cbar: ParamMatrix
    Dbar: ParamMatrix
    xbar0: ParamVector
    spec: ParamVectorSpec

    def __post_init__(self):
        n = self.Abar.rows
        _check_param(self.Abar, n, n, self.spec, "Abar")
        _check_param(self.Bbar, n, self.k, self.spec, "Bbar")
        _check_param(self.Cbar, self.m, n, self.spec, "Cbar")
        _check_param(self.Dbar, self.m, self.k, self.spec, "Dbar")
        _check_param(self.xbar0, n, 1, self.spec, "xbar0")

    @property
    def nx(self) -> int:
        return self.Abar.rows

    @property
    def k(self) -> int:
        return self.Bbar.cols

    @property
    def m(self) -> int:
        return self.Cbar.rows

    def eval_matrices(self, theta):
        """Numeric (Abar, Bbar, Cbar, Dbar, xbar0) at the given theta."""
        return (
            self.Abar.eval(theta),
            self.Bbar.eval(theta),
            self.Cbar.eval(theta),
            self.Dbar.eval(theta),
            self.xbar0.eval(theta).ravel(),
        )


def build_augmented(truth: StateSpace, estimate: StateSpace) -> AugmentedSystem:
    """Stack truth over estimate so the composed output is the estimation error."""
    if truth.spec != estimate.spec:
        raise PreconditionError("truth and estimate use different parameter specs")
    if (truth.n, truth.k, truth.m) != (estimate.n, estimate.k, estimate.m):
        raise PreconditionError(
            "truth and estimate dimensions differ: "
            f"(n,k,m)=({truth.n},{truth.k},{truth.m}) vs "
            f"({estimate.n},{estimate.k},{estimate.m})"
        )
    return AugmentedSystem(
        Abar=block_diag(truth.A, estimate.A),
        Bbar=vstack(truth.B, estimate.B),
        Cbar=hstack(truth.C, -estimate.C),
        Dbar=truth.D - estimate.D,
        xbar0=vstack(truth.x0, estimate.x0).as_vector(),
        spec=truth.spec,
    )


def bu_sup_norm(aug: AugmentedSystem, u: InputSignal, theta, N: float, points: int = 2049) -> float:
    """Sup over [0, N] of the Euclidean norm of Bbar(theta) u(t).

    Dense uniform grid of at least 2049 samples; exact for zero and step
    inputs since those are constant in time.
    """
    N = float(N)
    if N <= 0.0:
        raise PreconditionError("horizon N must be positive")
    if u.k != aug.k:
        raise PreconditionError(f"input has {u.k} channels, system expects {aug.k}")
    B = aug.Bbar.eval(theta)
    grid = np.linspace(0.0, N, max(int(points), 2049))
    bu = u.sample(grid) @ B.T
    return float(np.max(np.linalg.norm(bu, axis=1)))


def default_dt(A_norm: float, N: float) -> float:
    """Default integration step: min(0.05/|A|, N/2000)."""
    N = float(N)
    if N <= 0.0:
        raise PreconditionError("horizon N must be positive")
    candidates = [N / 2000.0]
    if A_norm > 0.0:
        candidates.append(0.05 / A_norm)
    return min(candidates)


def time_grid(N: float, dt: float) -> np.ndarray:
    """Uniform grid on [0, N] with an even interval count near the given dt."""
    N = float(N)
    dt = float(dt)
    if N <= 0.0 or dt <= 0.0:
        raise PreconditionError("N and dt must be positive")
    num = max(2, int(math.ceil(N / dt)))
    num += num % 2
    return np.linspace(0.0, N, num + 1)


def simulate(Abar, Bbar, Cbar, Dbar, x0, u: InputSignal, grid):
    """Classical RK4 for dx/dt = A x + B u(t) on a uniform grid from 0.

    Returns (states, outputs) trajectories with y = C x + D u. Aborts if
    the state norm exceeds 1e12.
    """
    A = np.atleast_2d(np.asarray(Abar, dtype=float))
    B = np.atleast_2d(np.asarray(Bbar, dtype=float))
    C = np.atleast_2d(np.asarray(Cbar, dtype=float))
    D = np.atleast_2d(np.asarray(Dbar, dtype=float))
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    n = A.shape[0]
    if A.shape != (n, n) or B.shape[0] != n or C.shape[1] != n or x0.size != n:
        raise PreconditionError("system matrices have inconsistent shapes")
    if D.shape != (C.shape[0], B.shape[1]):
        raise PreconditionError("D shape must be (m, k)")
    times = np.asarray(grid, dtype=float).reshape(-1)
    if times.size < 2 or abs(times[0]) > 0.0:
        raise PreconditionError("grid must start at 0 and hold at least two points")
    steps = np.diff(times)
    dt = float(steps[0])
    if np.max(np.abs(steps - dt)) > 1e-9 * max(dt, 1.0):
        raise PreconditionError("grid must be uniform")
    if dt * spectral_norm(A) > MAX_DT_NORM * (1.0 + 1e-12):
        raise PreconditionError(
            f"dt * |Abar| = {dt * spectral_norm(A):.4g} exceeds {MAX_DT_NORM}"
        )
    if float(np.linalg.norm(x0)) > BLOWUP_LIMIT:
        raise NumericalError("initial state norm exceeds the blow-up limit")
    # forcing sampled on the half-step refinement, one matvec batch up front
    fine = np.linspace(times[0], times[-1], 2 * (times.size - 1) + 1)
    bu = u.sample(fine) @ B.T
    xs = np.empty((times.size, n))
    xs[0] = x0
    x = x0.copy()
    for k in range(times.size - 1):
        f0, fh, f1 = bu[2 * k], bu[2 * k + 1], bu[2 * k + 2]
        k1 = A @ x + f0
        k2 = A @ (x + 0.5 * dt * k1) + fh
        k3 = A @ (x + 0.5 * dt * k2) + fh
        k4 = A @ (x + dt * k3) + f1
        x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        nrm = float(np.linalg.norm(x))
        if not math.isfinite(nrm) or nrm > BLOWUP_LIMIT:
            raise NumericalError(
                f"state norm {nrm:.3g} exceeded {BLOWUP_LIMIT:.0e} "
                f"at t = {times[k + 1]:.6g}; integration aborted"
            )
        xs[k + 1] = x
    ys = xs @ C.T + u.sample(times) @ D.T
    return Trajectory(times, xs), Trajectory(times, ys)
