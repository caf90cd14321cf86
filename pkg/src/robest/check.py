"""Fast self-check battery behind `robest check`.

A trimmed version of the property suites: enough to catch a broken
install or a numerically misbehaving BLAS in a few seconds, not a
replacement for the full test suite.
"""

from __future__ import annotations

import math
import tempfile
from pathlib import Path

import numpy as np

from .bounds import decay_moment_integrals
from .linalg_core import (
    expm,
    expm_param_derivative,
    log_norm,
    lyap_observability,
    simpson_weights,
    spectral_norm,
)
from .metric import robustness_metric
from .param_algebra import ParamMatrix, ParamVectorSpec
from .report import run
from .scenarios import RunConfig, builtin_scenario

__all__ = ["run_checks"]


def _check_param_derivative() -> bool:
    spec = ParamVectorSpec(("a", "b"), (0.3, -0.7))
    h = 1e-5
    for seed in range(10):
        rng = np.random.default_rng(seed)
        pm = ParamMatrix.build(
            spec, 2, 2,
            [({}, rng.normal(size=(2, 2))),
             ({"a": 1}, rng.normal(size=(2, 2))),
             ({"a": 1, "b": 2}, rng.normal(size=(2, 2)))],
        )
        theta = rng.normal(size=2)
        for i in range(2):
            step = np.zeros(2)
            step[i] = h
            fd = (pm.eval(theta + step) - pm.eval(theta - step)) / (2 * h)
            exact = pm.partial_at(i, theta)
            if np.max(np.abs(fd - exact)) > 1e-6 * max(1.0, np.max(np.abs(exact))):
                return False
    return True


def _random_decaying(rng, n: int, margin: float = 0.5) -> np.ndarray:
    A = rng.uniform(-1.0, 1.0, (n, n))
    return A - (log_norm(A).mu + margin) * np.eye(n)


def _check_expm_envelope() -> bool:
    for seed in range(10):
        rng = np.random.default_rng(seed)
        A = _random_decaying(rng, 4)
        for t in (0.5, 2.0, 5.0):
            if spectral_norm(expm(A * t)) > math.exp(-0.5 * t) * (1 + 1e-9):
                return False
    return True


def _check_frechet() -> bool:
    h = 1e-6
    for seed in range(5):
        rng = np.random.default_rng(seed)
        A = _random_decaying(rng, 3)
        E = rng.normal(size=(3, 3))
        got = expm_param_derivative(A, E, 1.2)
        fd = (expm((A + h * E) * 1.2) - expm((A - h * E) * 1.2)) / (2 * h)
        if np.max(np.abs(got - fd)) > 1e-5 * max(1.0, np.max(np.abs(got))):
            return False
    return True


def _check_lyapunov() -> bool:
    for seed in range(5):
        rng = np.random.default_rng(seed)
        A = _random_decaying(rng, 4)
        C = rng.normal(size=(2, 4))
        sol = lyap_observability(A, C.T @ C)
        if sol.residual > 1e-8 * (np.linalg.norm(A) * np.linalg.norm(sol.P) + np.linalg.norm(C.T @ C)):
            return False
    return True


def _check_integrals() -> bool:
    for mu_abs in (1.0, 2.0):
        vals = decay_moment_integrals(mu_abs)
        T = 200.0 / mu_abs
        # the half-decay integrand needs the finer step to clear 1e-9
        ts = np.linspace(0.0, T, 80001)
        w = simpson_weights(ts.size, ts[1] - ts[0])
        quads = {
            "I3": float(w @ (ts**3 * np.exp(-mu_abs * ts))),
            "I2": float(w @ (ts**2 * np.exp(-mu_abs * ts))),
            "I2_half": float(w @ (ts**2 * np.exp(-2.0 * mu_abs * ts))),
        }
        for key, v in vals.items():
            if abs(quads[key] - v) > 1e-9 * v:
                return False
    return True


def _check_metric() -> bool:
    rng = np.random.default_rng(0)
    for d in np.abs(rng.normal(scale=10.0, size=1000)):
        r = robustness_metric(float(d))
        if not (0.0 < r <= 1.0):
            return False
    return robustness_metric(0.0) == 1.0


def _check_determinism() -> bool:
    sc = builtin_scenario("affine")
    blobs = []
    with tempfile.TemporaryDirectory() as tmp:
        for j in range(2):
            out = Path(tmp) / f"run{j}"
            run(RunConfig(scenarios=(sc,), out_dir=str(out), seed=0))
            blobs.append((out / "summary.csv").read_bytes())
    return blobs[0] == blobs[1]


CHECKS = (
    ("parameter derivative vs central difference", _check_param_derivative),
    ("matrix exponential decay envelope", _check_expm_envelope),
    ("exponential derivative vs finite difference", _check_frechet),
    ("Lyapunov residuals", _check_lyapunov),
    ("decay moment integrals vs quadrature", _check_integrals),
    ("metric range and endpoints", _check_metric),
    ("deterministic summary output", _check_determinism),
)


def run_checks(verbose: bool = True) -> bool:
    ok = True
    for name, fn in CHECKS:
        passed = fn()
        ok = ok and passed
        if verbose:
            print(f"check {name}: {'pass' if passed else 'FAIL'}")
    return ok
