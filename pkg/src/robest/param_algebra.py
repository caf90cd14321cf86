"""Matrices whose entries are polynomials in a parameter vector.

A ParamMatrix is a sum of monomial terms, each a dense coefficient matrix
times a product of parameter powers. Evaluation and partial
differentiation are exact polynomial operations, so derivative checks
against central differences are limited only by the O(h^2) truncation of
the difference itself. All types are immutable after construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .errors import PreconditionError

__all__ = [
    "ParamVectorSpec",
    "Monomial",
    "ParamMatrix",
    "ParamVector",
    "block_diag",
    "hstack",
    "vstack",
]


@dataclass(frozen=True)
class ParamVectorSpec:
    """Names and nominal values theta* of the parameter vector."""

    names: tuple[str, ...]
    nominal: tuple[float, ...]

    def __post_init__(self):
        names = tuple(str(n) for n in self.names)
        nominal = tuple(float(v) for v in self.nominal)
        if len(set(names)) != len(names):
            raise PreconditionError("parameter names must be unique")
        if len(nominal) != len(names):
            raise PreconditionError(
                f"{len(names)} names but {len(nominal)} nominal values"
            )
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "nominal", nominal)

    @property
    def p(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise PreconditionError(f"unknown parameter {name!r}") from None

    def nominal_array(self) -> np.ndarray:
        return np.array(self.nominal, dtype=float)

    def check_theta(self, theta) -> np.ndarray:
        """Coerce theta to a 1-D float array of length p, or reject."""
        th = np.atleast_1d(np.asarray(theta, dtype=float)).reshape(-1)
        if th.size != self.p:
            raise PreconditionError(
                f"theta has length {th.size} but the spec has {self.p} parameters"
            )
        return th


@dataclass(frozen=True)
class Monomial:
    """Product of parameter powers; the empty product is the constant 1.

    powers holds (parameter index, exponent) pairs, sorted by index, with
    zero exponents dropped, so equal monomials compare and hash equal.
    """

    powers: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        raw = self.powers.items() if isinstance(self.powers, Mapping) else self.powers
        canon: list[tuple[int, int]] = []
        for idx, exp in sorted((int(i), int(e)) for i, e in raw):
            if idx < 0:
                raise PreconditionError("parameter index must be nonnegative")
            if exp < 0:
                raise PreconditionError("exponents must be nonnegative")
            if exp == 0:
                continue
            if canon and canon[-1][0] == idx:
                raise PreconditionError(f"duplicate parameter index {idx} in monomial")
            canon.append((idx, exp))
        object.__setattr__(self, "powers", tuple(canon))

    @property
    def degree(self) -> int:
        return sum(e for _, e in self.powers)

    def max_index(self) -> int:
        return max((i for i, _ in self.powers), default=-1)

    def value(self, theta: np.ndarray) -> float:
        v = 1.0
        for i, e in self.powers:
            v *= float(theta[i]) ** e
        return v

    def partial(self, i: int):
        """Power rule for d/dtheta_i: (factor, reduced monomial), or None."""
        for k, (idx, exp) in enumerate(self.powers):
            if idx == i:
                rest = self.powers[:k] + ((idx, exp - 1),) + self.powers[k + 1 :]
                return float(exp), Monomial(rest)
        return None


@dataclass(frozen=True, eq=False)
class ParamMatrix:
    """Polynomial matrix sum_m coeff_m * theta^m over a fixed spec."""

    spec: ParamVectorSpec
    rows: int
    cols: int
    terms: tuple[tuple[Monomial, np.ndarray], ...] = ()

    def __post_init__(self):
        rows = int(self.rows)
        cols = int(self.cols)
        if rows <= 0 or cols <= 0:
            raise PreconditionError("matrix dimensions must be positive")
        merged: dict[Monomial, np.ndarray] = {}
        raw = self.terms.items() if isinstance(self.terms, Mapping) else self.terms
        for mono, coeff in raw:
            if not isinstance(mono, Monomial):
                mono = Monomial(mono)
            if mono.max_index() >= self.spec.p:
                raise PreconditionError(
                    f"monomial uses parameter index {mono.max_index()} "
                    f"but the spec has p={self.spec.p}"
                )
            arr = np.array(coeff, dtype=float)
            if arr.shape != (rows, cols):
                raise PreconditionError(
                    f"coefficient shape {arr.shape} does not match ({rows}, {cols})"
                )
            if not np.all(np.isfinite(arr)):
                raise PreconditionError("coefficient matrices must be finite")
            if mono in merged:
                merged[mono] = merged[mono] + arr
            else:
                merged[mono] = arr
        canon = []
        for mono in sorted(merged, key=lambda m: m.powers):
            arr = merged[mono]
            if np.any(arr != 0.0):
                arr.setflags(write=False)
                canon.append((mono, arr))
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "terms", tuple(canon))

    # -- constructors -------------------------------------------------

    @classmethod
    def constant(cls, coeff, spec: ParamVectorSpec) -> "ParamMatrix":
        arr = np.atleast_2d(np.asarray(coeff, dtype=float))
        return cls(spec, arr.shape[0], arr.shape[1], ((Monomial(), arr),))

    @classmethod
    def zeros(cls, rows: int, cols: int, spec: ParamVectorSpec) -> "ParamMatrix":
        return cls(spec, rows, cols, ())

    @classmethod
    def build(cls, spec: ParamVectorSpec, rows: int, cols: int, terms: Iterable) -> "ParamMatrix":
        """Build from (powers, coeff) pairs keyed by parameter name or index."""
        canon = []
        for powers, coeff in terms:
            pairs = tuple(
                (spec.index(k) if isinstance(k, str) else int(k), int(v))
                for k, v in dict(powers).items()
            )
            canon.append((Monomial(pairs), coeff))
        return cls(spec, rows, cols, tuple(canon))

    # -- evaluation and differentiation --------------------------------

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def eval(self, theta) -> np.ndarray:
        th = self.spec.check_theta(theta)
        out = np.zeros((self.rows, self.cols))
        for mono, coeff in self.terms:
            out += mono.value(th) * coeff
        return out

    def _param_index(self, i) -> int:
        if isinstance(i, str):
            return self.spec.index(i)
        i = int(i)
        if not 0 <= i < self.spec.p:
            raise PreconditionError(
                f"parameter index {i} out of range for p={self.spec.p}"
            )
        return i

    def partial(self, i) -> "ParamMatrix":
        """Exact polynomial partial derivative with respect to parameter i."""
        i = self._param_index(i)
        new = []
        for mono, coeff in self.terms:
            d = mono.partial(i)
            if d is not None:
                factor, reduced = d
                new.append((reduced, factor * coeff))
        return ParamMatrix(self.spec, self.rows, self.cols, tuple(new))

    def partial_at(self, i, theta) -> np.ndarray:
        return self.partial(i).eval(theta)

    def depends_on(self, i) -> bool:
        i = self._param_index(i)
        return any(idx == i for mono, _ in self.terms for idx, _ in mono.powers)

    @property
    def is_constant(self) -> bool:
        return all(mono.degree == 0 for mono, _ in self.terms)

    # -- arithmetic ----------------------------------------------------

    def _require_same_spec(self, other: "ParamMatrix"):
        if self.spec != other.spec:
            raise PreconditionError("operands use different parameter specs")

    def __add__(self, other: "ParamMatrix") -> "ParamMatrix":
        self._require_same_spec(other)
        if self.shape != other.shape:
            raise PreconditionError(f"shape mismatch {self.shape} vs {other.shape}")
        return ParamMatrix(self.spec, self.rows, self.cols, self.terms + other.terms)

    def __sub__(self, other: "ParamMatrix") -> "ParamMatrix":
        return self + (-other)

    def __neg__(self) -> "ParamMatrix":
        return self.scale(-1.0)

    def scale(self, c: float) -> "ParamMatrix":
        c = float(c)
        return ParamMatrix(
            self.spec, self.rows, self.cols,
            tuple((mono, c * coeff) for mono, coeff in self.terms),
        )

    def __mul__(self, c: float) -> "ParamMatrix":
        return self.scale(c)

    __rmul__ = __mul__

    def as_vector(self) -> "ParamVector":
        return ParamVector(self.spec, self.rows, self.cols, self.terms)

    # -- serialization ---------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "rows": self.rows,
            "cols": self.cols,
            "terms": [
                {
                    "powers": {self.spec.names[i]: e for i, e in mono.powers},
                    "coeff": [[float(v) for v in row] for row in coeff],
                }
                for mono, coeff in self.terms
            ],
        }

    @classmethod
    def from_dict(cls, data: Mapping, spec: ParamVectorSpec) -> "ParamMatrix":
        terms = [(dict(t.get("powers", {})), t["coeff"]) for t in data["terms"]]
        return cls.build(spec, int(data["rows"]), int(data["cols"]), terms)

    def __repr__(self) -> str:
        return f"ParamMatrix({self.rows}x{self.cols}, {len(self.terms)} terms)"


class ParamVector(ParamMatrix):
    """A ParamMatrix restricted to a single column."""

    def __post_init__(self):
        super().__post_init__()
        if self.cols != 1:
            raise PreconditionError("ParamVector must have exactly one column")

    @classmethod
    def constant(cls, coeff, spec: ParamVectorSpec) -> "ParamVector":
        arr = np.asarray(coeff, dtype=float).reshape(-1, 1)
        return cls(spec, arr.shape[0], 1, ((Monomial(), arr),))

    def __repr__(self) -> str:
        return f"ParamVector(len {self.rows}, {len(self.terms)} terms)"


def _common_spec(pms) -> ParamVectorSpec:
    pms = list(pms)
    if not pms:
        raise PreconditionError("need at least one operand")
    spec = pms[0].spec
    for pm in pms[1:]:
        if pm.spec != spec:
            raise PreconditionError("operands use different parameter specs")
    return spec


def block_diag(*pms: ParamMatrix) -> ParamMatrix:
    """Block-diagonal composition; off-diagonal blocks are zero."""
    spec = _common_spec(pms)
    rows = sum(pm.rows for pm in pms)
    cols = sum(pm.cols for pm in pms)
    terms: dict[Monomial, np.ndarray] = {}
    r0 = c0 = 0
    for pm in pms:
        for mono, coeff in pm.terms:
            dst = terms.setdefault(mono, np.zeros((rows, cols)))
            dst[r0 : r0 + pm.rows, c0 : c0 + pm.cols] += coeff
        r0 += pm.rows
        c0 += pm.cols
    return ParamMatrix(spec, rows, cols, tuple(terms.items()))


def vstack(*pms: ParamMatrix) -> ParamMatrix:
    spec = _common_spec(pms)
    cols = pms[0].cols
    if any(pm.cols != cols for pm in pms):
        raise PreconditionError("vstack operands must share a column count")
    rows = sum(pm.rows for pm in pms)
    terms: dict[Monomial, np.ndarray] = {}
    r0 = 0
    for pm in pms:
        for mono, coeff in pm.terms:
            dst = terms.setdefault(mono, np.zeros((rows, cols)))
            dst[r0 : r0 + pm.rows, :] += coeff
        r0 += pm.rows
    return ParamMatrix(spec, rows, cols, tuple(terms.items()))


def hstack(*pms: ParamMatrix) -> ParamMatrix:
    spec = _common_spec(pms)
    rows = pms[0].rows
    if any(pm.rows != rows for pm in pms):
        raise PreconditionError("hstack operands must share a row count")
    cols = sum(pm.cols for pm in pms)
    terms: dict[Monomial, np.ndarray] = {}
    c0 = 0
    for pm in pms:
        for mono, coeff in pm.terms:
            dst = terms.setdefault(mono, np.zeros((rows, cols)))
            dst[:, c0 : c0 + pm.cols] += coeff
        c0 += pm.cols
    return ParamMatrix(spec, rows, cols, tuple(terms.items()))
