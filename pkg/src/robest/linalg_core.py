"""Dense numerical kernels.

Matrix exponential (scaling and squaring with Pade approximants), its
directional parameter derivative via the block-exponential identity,
symmetric eigen extremes, log-norm, Lyapunov observability solves, and
the finite-horizon observability Gramian. Everything here is a pure
function over small dense matrices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, PreconditionError

__all__ = [
    "LogNormResult",
    "LyapunovSolution",
    "sym_eig_max",
    "log_norm",
    "spectral_abscissa",
    "spectral_norm",
    "expm",
    "expm_param_derivative",
    "lyap_observability",
    "gramian_finite",
    "simpson_weights",
]


@dataclass(frozen=True)
class LogNormResult:
    """Log-norm mu(A) = lambda_max((A + A^T)/2) and its sign gate."""

    mu: float
    is_contractive: bool


@dataclass(frozen=True)
class LyapunovSolution:
    """Solution P of A^T P + P A = -Q with its equation residual."""

    P: np.ndarray
    residual: float


def _as_square(A, name="matrix") -> np.ndarray:
    arr = np.atleast_2d(np.asarray(A, dtype=float))
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise PreconditionError(f"{name} must be square, got shape {arr.shape}")
    return arr


def sym_eig_max(S) -> float:
    """Largest eigenvalue of a symmetric matrix.

    Accepts asymmetry up to 1e-10 relative and symmetrizes internally.
    """
    arr = _as_square(S)
    scale = np.linalg.norm(arr)
    if np.linalg.norm(arr - arr.T) > 1e-10 * max(1.0, scale):
        raise PreconditionError("matrix is not symmetric within tolerance")
    sym = 0.5 * (arr + arr.T)
    return float(np.linalg.eigvalsh(sym)[-1])


def log_norm(A) -> LogNormResult:
    arr = _as_square(A)
    mu = sym_eig_max(0.5 * (arr + arr.T))
    return LogNormResult(mu=mu, is_contractive=mu < 0.0)


def spectral_abscissa(A) -> float:
    """Maximum real part of the eigenvalues of A."""
    arr = _as_square(A)
    return float(np.max(np.linalg.eigvals(arr).real))


def spectral_norm(M) -> float:
    """Induced 2-norm of a (possibly rectangular) matrix: sqrt(lmax(M^T M))."""
    arr = np.atleast_2d(np.asarray(M, dtype=float))
    if arr.size == 0 or not np.any(arr):
        return 0.0
    return math.sqrt(max(0.0, sym_eig_max(arr.T @ arr)))


# Pade coefficient tables and 1-norm switch points for expm.
_PADE_B = {
    3: (120.0, 60.0, 12.0, 1.0),
    5: (30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0),
    7: (17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0),
    9: (
        17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
        2162160.0, 110880.0, 3960.0, 90.0, 1.0,
    ),
    13: (
        64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
        1187353796428800.0, 129060195264000.0, 10559470521600.0,
        670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
        960960.0, 16380.0, 182.0, 1.0,
    ),
}
_PADE_THETA = {
    3: 1.495585217958292e-2,
    5: 2.539398330063230e-1,
    7: 9.504178996162932e-1,
    9: 2.097847961257068e0,
    13: 5.371920351148152e0,
}


def _pade_uv(A: np.ndarray, m: int):
    b = _PADE_B[m]
    n = A.shape[0]
    eye = np.eye(n)
    A2 = A @ A
    if m == 3:
        U = A @ (b[3] * A2 + b[1] * eye)
        V = b[2] * A2 + b[0] * eye
        return U, V
    A4 = A2 @ A2
    if m == 5:
        U = A @ (b[5] * A4 + b[3] * A2 + b[1] * eye)
        V = b[4] * A4 + b[2] * A2 + b[0] * eye
        return U, V
    A6 = A4 @ A2
    if m == 7:
        U = A @ (b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * eye)
        V = b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * eye
        return U, V
    if m == 9:
        A8 = A6 @ A2
        U = A @ (b[9] * A8 + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * eye)
        V = b[8] * A8 + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * eye
        return U, V
    # m == 13: factored form keeps the highest power at A^6
    U = A @ (
        A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2)
        + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * eye
    )
    V = (
        A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2)
        + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * eye
    )
    return U, V


def expm(A) -> np.ndarray:
    """Matrix exponential via scaling and squaring with Pade approximants."""
    arr = _as_square(A)
    if not np.all(np.isfinite(arr)):
        raise PreconditionError("matrix entries must be finite")
    norm1 = float(np.linalg.norm(arr, 1))
    for m in (3, 5, 7, 9):
        if norm1 <= _PADE_THETA[m]:
            U, V = _pade_uv(arr, m)
            return np.linalg.solve(V - U, V + U)
    s = max(0, int(math.ceil(math.log2(norm1 / _PADE_THETA[13])))) if norm1 > _PADE_THETA[13] else 0
    scaled = arr / (2.0 ** s)
    U, V = _pade_uv(scaled, 13)
    X = np.linalg.solve(V - U, V + U)
    for _ in range(s):
        X = X @ X
    return X


def expm_param_derivative(A, E, t: float) -> np.ndarray:
    """Directional derivative of e^{At} along E.

    Equals int_0^t e^{A(t-s)} E e^{As} ds, read off as the upper-right
    block of exp(t [[A, E], [0, A]]).
    """
    Aa = _as_square(A, "A")
    Ea = _as_square(E, "E")
    if Aa.shape != Ea.shape:
        raise PreconditionError(
            f"A and E must share a shape, got {Aa.shape} vs {Ea.shape}"
        )
    n = Aa.shape[0]
    block = np.zeros((2 * n, 2 * n))
    block[:n, :n] = Aa
    block[:n, n:] = Ea
    block[n:, n:] = Aa
    return expm(float(t) * block)[:n, n:]


def lyap_observability(Abar, Q) -> LyapunovSolution:
    """Solve Abar^T P + P Abar = -Q for Hurwitz Abar and symmetric PSD Q.

    Kronecker vectorization with a dense solve; adequate for the small
    state dimensions this library targets.
    """
    A = _as_square(Abar, "Abar")
    Qa = _as_square(Q, "Q")
    if A.shape != Qa.shape:
        raise PreconditionError("Abar and Q must share a shape")
    if np.linalg.norm(Qa - Qa.T) > 1e-10 * max(1.0, np.linalg.norm(Qa)):
        raise PreconditionError("Q must be symmetric")
    Qa = 0.5 * (Qa + Qa.T)
    qmin = float(np.linalg.eigvalsh(Qa)[0])
    if qmin < -1e-8 * max(1.0, np.linalg.norm(Qa)):
        raise PreconditionError(f"Q must be positive semidefinite (min eig {qmin:.3g})")
    alpha = spectral_abscissa(A)
    if alpha >= 0.0:
        raise PreconditionError(
            f"Abar is not Hurwitz: spectral abscissa {alpha:.6g} >= 0"
        )
    n = A.shape[0]
    eye = np.eye(n)
    K = np.kron(eye, A.T) + np.kron(A.T, eye)
    try:
        x = np.linalg.solve(K, -Qa.ravel(order="F"))
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"Lyapunov solve singular (spectral abscissa {alpha:.6g})"
        ) from exc
    P = x.reshape((n, n), order="F")
    P = 0.5 * (P + P.T)
    residual = float(np.linalg.norm(A.T @ P + P @ A + Qa))
    limit = 1e-8 * (np.linalg.norm(A) * np.linalg.norm(P) + np.linalg.norm(Qa))
    if residual > max(limit, 1e-300):
        raise NumericalError(
            f"Lyapunov residual {residual:.3g} exceeds tolerance {limit:.3g}"
        )
    return LyapunovSolution(P=P, residual=residual)


def simpson_weights(n_points: int, h: float) -> np.ndarray:
    """Composite quadrature weights on a uniform grid of n_points.

    Classic Simpson when the interval count is even; Simpson plus a 3/8
    tail when it is odd; trapezoid for a single interval.
    """
    if n_points < 2:
        raise PreconditionError("need at least two grid points")
    h = float(h)
    if h <= 0.0:
        raise PreconditionError("grid step must be positive")
    n_int = n_points - 1
    w = np.zeros(n_points)
    if n_int == 1:
        w[:] = h / 2.0
        return w
    if n_int % 2 == 0:
        w[0] = w[-1] = 1.0
        w[1:-1:2] = 4.0
        w[2:-1:2] = 2.0
        return w * (h / 3.0)
    # odd interval count: classic Simpson on the first n_int - 3 intervals,
    # 3/8 rule on the last three (n_int >= 3 here)
    head = n_int - 3
    if head > 0:
        w[0] = 1.0
        w[1:head:2] = 4.0
        w[2:head:2] = 2.0
        w[head] = 1.0
        w[: head + 1] *= h / 3.0
    tail = np.array([1.0, 3.0, 3.0, 1.0]) * (3.0 * h / 8.0)
    w[-4:] += tail
    return w


_GRAMIAN_MAX_POINTS = 1 << 16


def gramian_finite(Abar, Cbar, N: float) -> np.ndarray:
    """Finite-horizon observability Gramian int_0^N e^{A^T s} C^T C e^{A s} ds.

    Composite Simpson on a uniform grid, with the step halved until the
    trace changes by less than 1e-8 relative. Exponentials along the grid
    come from repeated multiplication by expm(A h) (semigroup stepping).
    """
    A = _as_square(Abar, "Abar")
    C = np.atleast_2d(np.asarray(Cbar, dtype=float))
    if C.shape[1] != A.shape[0]:
        raise PreconditionError(
            f"Cbar has {C.shape[1]} columns but Abar is {A.shape[0]}x{A.shape[0]}"
        )
    N = float(N)
    if N <= 0.0:
        raise PreconditionError("horizon N must be positive")
    Q = C.T @ C
    if not np.any(Q):
        return np.zeros_like(A)

    def level(m: int) -> np.ndarray:
        h = N / m
        Phi = expm(A * h)
        w = simpson_weights(m + 1, h)
        with np.errstate(over="ignore", invalid="ignore"):
            G = w[0] * Q
            Ek = np.eye(A.shape[0])
            for k in range(1, m + 1):
                Ek = Ek @ Phi
                G += w[k] * (Ek.T @ Q @ Ek)
        if not np.all(np.isfinite(G)):
            raise NumericalError(
                "Gramian quadrature overflowed; the horizon is too long for "
                "this growth rate"
            )
        return G

    m = 16
    G_prev = level(m)
    while True:
        m *= 2
        if m > _GRAMIAN_MAX_POINTS:
            raise NumericalError("Gramian quadrature did not converge")
        G = level(m)
        tr_prev, tr = np.trace(G_prev), np.trace(G)
        if abs(tr - tr_prev) <= 1e-8 * max(abs(tr), 1e-300):
            return 0.5 * (G + G.T)
        G_prev = G
