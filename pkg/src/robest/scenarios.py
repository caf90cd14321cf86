"""Scenario presets, a random stable-system generator, and run configs.

The six presets exercise a mass-spring-damper pair with a scheduling
parameter: affine dependence, affine dependence with a misidentified
estimate, an added quadratic term, a two-parameter variant with a joint
term, and two companion scenarios where only the initial state depends on
the parameters. Estimate constants not fixed by the source material are
defaults here and can be overridden through the JSON config.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError
from .linalg_core import log_norm
from .param_algebra import ParamMatrix, ParamVector, ParamVectorSpec
from .systems import InputSignal, StateSpace

__all__ = [
    "Scenario",
    "RunConfig",
    "builtin_scenarios",
    "builtin_scenario",
    "random_stable_augmented",
    "load_config",
]

MODES = ("strict", "precond")
DEFAULT_SOURCES = ("theorem1", "theorem2", "gramian_baseline")


@dataclass(frozen=True)
class Scenario:
    """A truth/estimate pair with its input, horizon and parameters of interest."""

    name: str
    truth: StateSpace
    estimate: StateSpace
    input: InputSignal
    N: float
    params_of_interest: tuple[int, ...]
    fd_step: float | None = None

    def __post_init__(self):
        if float(self.N) <= 0.0:
            raise PreconditionError("horizon N must be positive")
        object.__setattr__(self, "N", float(self.N))
        p = self.truth.spec.p
        idxs = tuple(int(i) for i in self.params_of_interest)
        if any(i < 0 or i >= p for i in idxs):
            raise PreconditionError("params_of_interest index out of range")
        if not idxs:
            raise PreconditionError("params_of_interest must be nonempty")
        object.__setattr__(self, "params_of_interest", idxs)
        if self.fd_step is not None and float(self.fd_step) <= 0.0:
            raise PreconditionError("fd_step must be positive")

    @property
    def spec(self) -> ParamVectorSpec:
        return self.truth.spec


# Mass-spring-damper coefficients for the presets. The truth dynamics are
# A0 + A1 theta1; the estimate replaces the four constants.
_A0 = [[0.0, 1.0], [-20.0, -2.0]]
_A1 = [[0.0, 0.0], [-5.0, -0.5]]
_A2 = [[0.0, 0.0], [-1.0, -0.1]]
_EST_1 = (19.80, 5.10, 2.05, 0.48)  # identified well
_EST_2 = (19.0, 5.5, 2.2, 0.40)  # identified poorly
_B = [[0.0], [1.0]]
_C = [[1.0, 0.0]]
_X0 = [1.0, 0.0]
_PRESET_N = 14.0  # free response decays below 1e-6 of its start by then


def _est_matrices(consts):
    a0, a1, d0, d1 = consts
    base = [[0.0, 1.0], [-a0, -d0]]
    lin = [[0.0, 0.0], [-a1, -d1]]
    return base, lin


def _spec1() -> ParamVectorSpec:
    return ParamVectorSpec(("theta1",), (0.5,))


def _spec2() -> ParamVectorSpec:
    return ParamVectorSpec(("theta1", "theta2"), (0.5, 0.5))


def _state_space(spec, a_terms, x0_terms=None, b=_B, c=_C):
    n = len(a_terms[0][1])
    A = ParamMatrix.build(spec, n, n, a_terms)
    B = ParamMatrix.constant(b, spec)
    C = ParamMatrix.constant(c, spec)
    if x0_terms is None:
        x0 = ParamVector.constant(_X0, spec)
    else:
        x0 = ParamMatrix.build(spec, n, 1, x0_terms).as_vector()
    return StateSpace(A=A, B=B, C=C, x0=x0, spec=spec)


def _affine_pair(spec, est_consts):
    e0, e1 = _est_matrices(est_consts)
    truth = _state_space(spec, [({}, _A0), ({"theta1": 1}, _A1)])
    estimate = _state_space(spec, [({}, e0), ({"theta1": 1}, e1)])
    return truth, estimate


def builtin_scenarios() -> tuple[Scenario, ...]:
    """The six preset scenarios."""
    step = InputSignal.step([1.0])
    out = []

    truth, est = _affine_pair(_spec1(), _EST_1)
    out.append(Scenario("affine", truth, est, step, _PRESET_N, (0,)))

    truth, est = _affine_pair(_spec1(), _EST_2)
    out.append(Scenario("affine_misid", truth, est, step, _PRESET_N, (0,)))

    spec = _spec1()
    quad = np.asarray(_A1) * 0.1
    e0, e1 = _est_matrices(_EST_1)
    truth = _state_space(
        spec, [({}, _A0), ({"theta1": 1}, _A1), ({"theta1": 2}, quad)]
    )
    est = _state_space(
        spec, [({}, e0), ({"theta1": 1}, e1), ({"theta1": 2}, quad)]
    )
    out.append(Scenario("quadratic", truth, est, step, _PRESET_N, (0,)))

    spec = _spec2()
    joint = np.asarray(_A1) * 0.05
    e0, e1 = _est_matrices(_EST_1)
    truth = _state_space(
        spec,
        [({}, _A0), ({"theta1": 1}, _A1), ({"theta2": 1}, _A2),
         ({"theta1": 1, "theta2": 1}, joint)],
    )
    est = _state_space(
        spec,
        [({}, e0), ({"theta1": 1}, e1), ({"theta2": 1}, _A2),
         ({"theta1": 1, "theta2": 1}, joint)],
    )
    out.append(Scenario("two_param", truth, est, step, _PRESET_N, (0, 1)))

    # initial-state scenarios: dynamics frozen at the base constants so the
    # initial-state bound hypothesis (parameter-independent matrices) holds
    spec = _spec1()
    e0, _ = _est_matrices(_EST_1)
    truth = _state_space(
        spec, [({}, _A0)],
        x0_terms=[({}, [[1.0], [0.0]]), ({"theta1": 2}, [[0.2], [0.0]])],
    )
    est = _state_space(
        spec, [({}, e0)],
        x0_terms=[({}, [[1.0], [0.0]]), ({"theta1": 2}, [[0.25], [0.0]])],
    )
    out.append(Scenario("x0_quadratic", truth, est, step, _PRESET_N, (0,)))

    spec = _spec2()
    truth = _state_space(
        spec, [({}, _A0)],
        x0_terms=[
            ({}, [[1.0], [0.0]]),
            ({"theta1": 2}, [[0.2], [0.0]]),
            ({"theta2": 1}, [[0.1], [0.0]]),
        ],
    )
    est = _state_space(
        spec, [({}, e0)],
        x0_terms=[
            ({}, [[1.0], [0.0]]),
            ({"theta1": 2}, [[0.25], [0.0]]),
            ({"theta2": 1}, [[0.1], [0.0]]),
        ],
    )
    out.append(Scenario("x0_two_param", truth, est, step, _PRESET_N, (0, 1)))

    return tuple(out)


def builtin_scenario(name: str) -> Scenario:
    for sc in builtin_scenarios():
        if sc.name == name:
            return sc
    raise PreconditionError(
        f"unknown scenario {name!r}; known: "
        + ", ".join(sc.name for sc in builtin_scenarios())
    )


def random_stable_augmented(n: int, seed: int, delta: float) -> Scenario:
    """Random truth/estimate pair whose augmented log-norm at theta* is -delta.

    Entries are uniform in [-1, 1]; the estimate perturbs every truth
    coefficient by a factor in [0.98, 1.02]; the affine direction is
    scaled to 10% of the (pre-shift) dynamics norm; both diagonal blocks
    are then shifted by the same multiple of the identity so the
    augmented log-norm at theta* lands exactly on -delta.
    """
    n = int(n)
    delta = float(delta)
    if n < 1:
        raise PreconditionError("state dimension must be at least 1")
    if delta <= 0.0:
        raise PreconditionError("delta must be positive")
    rng = np.random.default_rng(seed)
    spec = ParamVectorSpec(("theta1",), (0.5,))
    theta_star = 0.5

    A0_t = rng.uniform(-1.0, 1.0, (n, n))
    A1_raw = rng.uniform(-1.0, 1.0, (n, n))
    B_t = rng.uniform(-1.0, 1.0, (n, 1))
    C_t = rng.uniform(-1.0, 1.0, (1, n))
    x0_t = rng.uniform(-1.0, 1.0, n)

    a_scale = float(np.linalg.norm(A0_t, 2))
    a1_norm = float(np.linalg.norm(A1_raw, 2))
    A1_t = A1_raw * (0.1 * a_scale / a1_norm) if a1_norm > 0.0 else A1_raw

    def perturb(M):
        return M * (1.0 + 0.02 * rng.uniform(-1.0, 1.0, np.shape(M)))

    A0_e = perturb(A0_t)
    A1_e = perturb(A1_t)
    B_e = perturb(B_t)
    C_e = perturb(C_t)
    x0_e = perturb(x0_t)

    # one common shift puts the nominal augmented log-norm exactly at -delta
    nominal_blocks = np.zeros((2 * n, 2 * n))
    nominal_blocks[:n, :n] = A0_t + theta_star * A1_t
    nominal_blocks[n:, n:] = A0_e + theta_star * A1_e
    shift = log_norm(nominal_blocks).mu + delta
    A0_t = A0_t - shift * np.eye(n)
    A0_e = A0_e - shift * np.eye(n)

    def make(A0, A1, B, C, x0):
        return StateSpace(
            A=ParamMatrix.build(spec, n, n, [({}, A0), ({"theta1": 1}, A1)]),
            B=ParamMatrix.constant(B, spec),
            C=ParamMatrix.constant(C, spec),
            x0=ParamVector.constant(x0, spec),
            spec=spec,
        )

    return Scenario(
        name=f"random_n{n}_seed{seed}",
        truth=make(A0_t, A1_t, B_t, C_t, x0_t),
        estimate=make(A0_e, A1_e, B_e, C_e, x0_e),
        input=InputSignal.step([1.0]),
        N=12.0 / delta,
        params_of_interest=(0,),
    )


@dataclass(frozen=True)
class RunConfig:
    """Everything one `run` invocation needs."""

    scenarios: tuple[Scenario, ...]
    sources: tuple[str, ...] = DEFAULT_SOURCES
    out_dir: str = "robest_out"
    dt: float | None = None
    mode: str = "precond"
    seed: int | None = None

    def __post_init__(self):
        if not self.scenarios:
            raise PreconditionError("config needs at least one scenario")
        if not self.sources:
            raise PreconditionError("config needs at least one bound source")
        bad = [s for s in self.sources if s not in DEFAULT_SOURCES]
        if bad:
            raise PreconditionError(f"unknown bound sources {bad}")
        if self.mode not in MODES:
            raise PreconditionError(f"mode must be one of {MODES}")
        if self.dt is not None and float(self.dt) <= 0.0:
            raise PreconditionError("dt must be positive")
        object.__setattr__(self, "scenarios", tuple(self.scenarios))
        object.__setattr__(self, "sources", tuple(self.sources))


def _parse_state_space(d: dict, spec: ParamVectorSpec) -> StateSpace:
    def pm(key, required=True):
        if key not in d:
            if required:
                raise PreconditionError(f"state space is missing {key!r}")
            return None
        return ParamMatrix.from_dict(d[key], spec)

    A = pm("A")
    B = pm("B")
    C = pm("C")
    D = pm("D", required=False)
    x0_pm = pm("x0", required=False)
    x0 = x0_pm.as_vector() if x0_pm is not None else None
    return StateSpace(A=A, B=B, C=C, D=D, x0=x0, spec=spec)


def _parse_scenario(entry, default_seed) -> list[Scenario]:
    if isinstance(entry, str):
        return [builtin_scenario(entry)]
    if not isinstance(entry, dict):
        raise PreconditionError("scenario entries must be names or objects")
    if "builtin" in entry:
        return [builtin_scenario(entry["builtin"])]
    if "random" in entry:
        r = entry["random"]
        count = int(r.get("count", 1))
        base_seed = int(r.get("seed", default_seed if default_seed is not None else 0))
        return [
            random_stable_augmented(
                int(r.get("n", 3)), base_seed + j, float(r.get("delta", 0.5))
            )
            for j in range(count)
        ]
    try:
        params = entry["params"]
        spec = ParamVectorSpec(tuple(params["names"]), tuple(params["nominal"]))
        truth = _parse_state_space(entry["truth"], spec)
        estimate = _parse_state_space(entry["estimate"], spec)
        inp = InputSignal.from_dict(entry.get("input", {"kind": "step", "amplitude": [1.0] * truth.k}))
        n_horizon = float(entry["N"])
        poi = entry.get("params_of_interest", list(range(spec.p)))
        fd_step = entry.get("fd_step")
        return [
            Scenario(
                name=str(entry.get("name", "custom")),
                truth=truth,
                estimate=estimate,
                input=inp,
                N=n_horizon,
                params_of_interest=tuple(int(i) for i in poi),
                fd_step=None if fd_step is None else float(fd_step),
            )
        ]
    except KeyError as exc:
        raise PreconditionError(f"scenario object is missing {exc.args[0]!r}") from None


def load_config(path, overrides: dict | None = None) -> RunConfig:
    """Read a JSON run config; overrides (CLI flags) win over file values."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise PreconditionError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise PreconditionError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise PreconditionError("config root must be a JSON object")
    merged = dict(data)
    for key, value in (overrides or {}).items():
        if value is not None:
            merged[key] = value
    seed = merged.get("seed")
    entries = merged.get("scenarios", [])
    scenarios: list[Scenario] = []
    for entry in entries:
        scenarios.extend(_parse_scenario(entry, seed))
    names = [sc.name for sc in scenarios]
    if len(set(names)) != len(names):
        raise PreconditionError("scenario names must be unique within a run")
    return RunConfig(
        scenarios=tuple(scenarios),
        sources=tuple(merged.get("sources", DEFAULT_SOURCES)),
        out_dir=str(merged.get("out", "robest_out")),
        dt=None if merged.get("dt") is None else float(merged["dt"]),
        mode=str(merged.get("mode", "precond")),
        seed=None if seed is None else int(seed),
    )
