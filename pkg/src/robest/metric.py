"""Robustness distance and metric of estimation error.

Aggregates per-parameter sensitivity norms (ground truth or any bound
family) into d_R = sum_i theta_i* |d(ybar)/d(theta_i)| / |ybar| and
R = 1/(1 + d_R) in (0, 1]. A conservative bound substituted for the
sensitivity norm yields a conservative (lower) R.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .bounds import BoundReport
from .errors import PreconditionError

__all__ = [
    "SOURCES",
    "Contribution",
    "RobustnessResult",
    "robustness_distance",
    "robustness_metric",
    "metric_from_bounds",
]

SOURCES = ("ground_truth", "theorem1", "theorem2", "gramian_baseline")


@dataclass(frozen=True)
class Contribution:
    """One parameter's term theta* |sens| / |err| of the distance."""

    param_index: int
    theta_star: float
    sens_norm: float
    err_norm: float
    value: float


@dataclass(frozen=True)
class RobustnessResult:
    d_R: float
    R: float
    contributions: tuple[Contribution, ...]
    source: str

    def to_dict(self) -> dict:
        return {
            "d_R": self.d_R,
            "R": self.R,
            "source": self.source,
            "contributions": [
                {
                    "param_index": c.param_index,
                    "theta_star": c.theta_star,
                    "sens_norm": c.sens_norm,
                    "err_norm": c.err_norm,
                    "value": c.value,
                }
                for c in self.contributions
            ],
        }


def _term_value(theta_star: float, sens_norm: float, err_norm: float,
                perfect_convention: bool) -> float:
    if sens_norm < 0.0:
        raise PreconditionError("sensitivity norm must be nonnegative")
    if err_norm <= 0.0:
        if perfect_convention:
            return 0.0
        raise PreconditionError(
            "perfect estimator: metric undefined, R = 1 by convention "
            "available via flag"
        )
    if theta_star == 0.0:
        warnings.warn(
            "theta* = 0 contributes nothing: the metric is blind to this parameter",
            stacklevel=3,
        )
        return 0.0
    if theta_star < 0.0:
        warnings.warn(
            "negative theta*: using its absolute value in the contribution",
            stacklevel=3,
        )
    return abs(theta_star) * sens_norm / err_norm


def robustness_distance(terms, perfect_convention: bool = False) -> float:
    """d_R from (theta_star, sens_norm, err_norm) triples."""
    total = 0.0
    for theta_star, sens_norm, err_norm in terms:
        total += _term_value(
            float(theta_star), float(sens_norm), float(err_norm), perfect_convention
        )
    return total


def robustness_metric(d_R: float) -> float:
    d_R = float(d_R)
    if d_R < 0.0 or not math.isfinite(d_R):
        raise PreconditionError("d_R must be finite and nonnegative")
    return 1.0 / (1.0 + d_R)


def _report_energy(report: BoundReport, source: str):
    if source == "ground_truth":
        return report.ground_truth_energy
    if source == "theorem1":
        return report.theorem1
    if source == "theorem2":
        return report.theorem2
    if source == "gramian_baseline":
        return report.gramian_baseline
    raise PreconditionError(f"unknown source {source!r}; expected one of {SOURCES}")


def metric_from_bounds(reports, err_norm: float, source: str,
                       params=None, perfect_convention: bool = False) -> RobustnessResult:
    """Robustness result with sensitivity norms taken from the chosen source.

    Bound sources contribute sqrt(bound) since bounds cap the squared
    norm. An optional params list restricts the summation to a subset of
    parameter indices.
    """
    err_norm = float(err_norm)
    selected = [
        r for r in reports
        if params is None or r.param_index in set(int(q) for q in params)
    ]
    if params is not None and len(selected) != len(set(int(q) for q in params)):
        raise PreconditionError("a requested parameter index has no report")
    contributions = []
    total = 0.0
    for rep in selected:
        energy = _report_energy(rep, source)
        if energy is None:
            raise PreconditionError(
                f"report for parameter {rep.param_index} has no {source} value"
            )
        sens_norm = math.sqrt(max(0.0, float(energy)))
        value = _term_value(rep.theta_star, sens_norm, err_norm, perfect_convention)
        contributions.append(
            Contribution(
                param_index=rep.param_index,
                theta_star=rep.theta_star,
                sens_norm=sens_norm,
                err_norm=err_norm,
                value=value,
            )
        )
        total += value
    return RobustnessResult(
        d_R=total,
        R=robustness_metric(total),
        contributions=tuple(contributions),
        source=source,
    )
