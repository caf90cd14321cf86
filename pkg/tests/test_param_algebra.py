"""Polynomial parameter matrices: evaluation, differentiation, structure."""

import dataclasses
import json

import numpy as np
import pytest

from robest import (
    Monomial,
    ParamMatrix,
    ParamVector,
    ParamVectorSpec,
    PreconditionError,
    block_diag,
    hstack,
    vstack,
)

A0 = [[0.0, 1.0], [-20.0, -2.0]]
A1 = [[0.0, 0.0], [-5.0, -0.5]]


def mass_spring(spec):
    return ParamMatrix.build(spec, 2, 2, [({}, A0), ({"theta1": 1}, A1)])


def test_spec_basics():
    spec = ParamVectorSpec(("a", "b"), (0.5, -1.0))
    assert spec.p == 2
    assert spec.index("b") == 1
    assert np.array_equal(spec.nominal_array(), [0.5, -1.0])
    with pytest.raises(PreconditionError):
        spec.index("c")
    with pytest.raises(PreconditionError):
        ParamVectorSpec(("a", "a"), (0.0, 0.0))
    with pytest.raises(PreconditionError):
        ParamVectorSpec(("a",), (0.0, 1.0))


def test_eval_affine_examples(spec1):
    pm = mass_spring(spec1)
    assert np.array_equal(pm.eval([0.0]), A0)
    assert np.array_equal(pm.eval([1.0]), [[0.0, 1.0], [-25.0, -2.5]])
    assert np.allclose(pm.eval([0.5]), [[0.0, 1.0], [-22.5, -2.25]], rtol=1e-15)


def test_eval_empty_terms_is_zero(spec1):
    pm = ParamMatrix.zeros(3, 2, spec1)
    assert np.array_equal(pm.eval([0.7]), np.zeros((3, 2)))
    assert pm.is_constant
    assert not pm.depends_on(0)


def test_eval_rejects_wrong_theta_length(spec2):
    pm = ParamMatrix.constant(np.eye(2), spec2)
    with pytest.raises(PreconditionError):
        pm.eval([1.0])
    with pytest.raises(PreconditionError):
        pm.eval([1.0, 2.0, 3.0])


def test_construction_rejections(spec1):
    with pytest.raises(PreconditionError):
        ParamMatrix(spec1, 2, 2, ((Monomial(), np.eye(3)),))
    with pytest.raises(PreconditionError):
        ParamMatrix(spec1, 2, 2, ((Monomial(), np.full((2, 2), np.nan)),))
    with pytest.raises(PreconditionError):
        ParamMatrix(spec1, 0, 2, ())
    # monomial referencing a parameter the spec does not have
    with pytest.raises(PreconditionError):
        ParamMatrix(spec1, 2, 2, ((Monomial(((1, 1),)), np.eye(2)),))
    with pytest.raises(PreconditionError):
        Monomial(((0, -1),))
    with pytest.raises(PreconditionError):
        Monomial(((0, 1), (0, 2)))


def test_partial_affine_is_slope(spec1):
    pm = mass_spring(spec1)
    dpm = pm.partial(0)
    assert np.array_equal(dpm.eval([0.0]), A1)
    assert np.array_equal(dpm.eval([3.0]), A1)
    assert np.array_equal(pm.partial_at("theta1", [0.2]), A1)


def test_partial_power_rule(spec2):
    coeff = np.array([[2.0]])
    sq = ParamMatrix.build(spec2, 1, 1, [({"theta1": 2}, coeff)])
    assert np.allclose(sq.partial_at(0, [2.0, 0.0]), 2.0 * 2.0 * coeff)
    cross = ParamMatrix.build(spec2, 1, 1, [({"theta1": 1, "theta2": 1}, coeff)])
    assert np.allclose(cross.partial_at(0, [9.0, 3.0]), 3.0 * coeff)
    assert np.allclose(cross.partial_at(1, [9.0, 3.0]), 9.0 * coeff)


def test_partial_of_constant_is_zero(spec1):
    pm = ParamMatrix.constant([[1.0, 2.0]], spec1)
    dpm = pm.partial(0)
    assert dpm.terms == ()
    assert np.array_equal(dpm.eval([5.0]), np.zeros((1, 2)))


def test_partial_index_out_of_range(spec1):
    pm = mass_spring(spec1)
    with pytest.raises(PreconditionError):
        pm.partial(1)
    with pytest.raises(PreconditionError):
        pm.partial(-1)
    with pytest.raises(PreconditionError):
        pm.partial("nope")


def test_partial_matches_central_difference():
    # exact polynomial derivative vs O(h^2) central difference
    spec = ParamVectorSpec(("a", "b", "c"), (0.1, 0.2, 0.3))
    h = 1e-5
    for seed in range(20):
        rng = np.random.default_rng(seed)
        terms = [({}, rng.normal(size=(3, 3)))]
        for _ in range(4):
            powers = {
                int(i): int(e)
                for i, e in zip(rng.integers(0, 3, 2), rng.integers(1, 3, 2))
            }
            terms.append((powers, rng.normal(size=(3, 3))))
        pm = ParamMatrix.build(spec, 3, 3, terms)
        theta = rng.normal(size=3)
        for i in range(3):
            step = np.zeros(3)
            step[i] = h
            fd = (pm.eval(theta + step) - pm.eval(theta - step)) / (2.0 * h)
            exact = pm.partial_at(i, theta)
            scale = max(1.0, float(np.max(np.abs(exact))))
            assert np.max(np.abs(fd - exact)) < 1e-6 * scale


def test_eval_linearity(spec1):
    rng = np.random.default_rng(3)
    pm = ParamMatrix.build(
        spec1, 2, 2,
        [({}, rng.normal(size=(2, 2))), ({"theta1": 2}, rng.normal(size=(2, 2)))],
    )
    other = ParamMatrix.build(spec1, 2, 2, [({"theta1": 1}, rng.normal(size=(2, 2)))])
    theta = [0.7]
    assert np.allclose(
        (pm + other).eval(theta), pm.eval(theta) + other.eval(theta), rtol=1e-14
    )
    # doubling is exact in binary floating point
    assert np.array_equal((pm + pm).eval(theta), pm.scale(2.0).eval(theta))
    assert np.array_equal((-pm).eval(theta), -pm.eval(theta))
    assert np.allclose(
        (pm - other).eval(theta), pm.eval(theta) - other.eval(theta), rtol=1e-14
    )
    assert np.array_equal((2.5 * pm).eval(theta), (pm * 2.5).eval(theta))


def test_add_rejects_mismatched_operands(spec1, spec2):
    a = ParamMatrix.constant(np.eye(2), spec1)
    b = ParamMatrix.constant(np.eye(3), spec1)
    with pytest.raises(PreconditionError):
        a + b
    c = ParamMatrix.constant(np.eye(2), spec2)
    with pytest.raises(PreconditionError):
        a + c


def test_terms_merge_and_drop_zero(spec1):
    one = np.ones((1, 1))
    pm = ParamMatrix(
        spec1, 1, 1,
        ((Monomial(((0, 1),)), one), (Monomial(((0, 1),)), 2.0 * one),
         (Monomial(), np.zeros((1, 1)))),
    )
    assert len(pm.terms) == 1
    assert pm.eval([1.0])[0, 0] == 3.0
    # a term cancelling to zero is dropped entirely
    zero = pm + pm.scale(-1.0)
    assert zero.terms == ()


def test_structural_ops(spec1):
    rng = np.random.default_rng(11)
    a = ParamMatrix.build(
        spec1, 2, 2,
        [({}, rng.normal(size=(2, 2))), ({"theta1": 1}, rng.normal(size=(2, 2)))],
    )
    b = ParamMatrix.build(spec1, 2, 2, [({"theta1": 2}, rng.normal(size=(2, 2)))])
    theta = [0.3]
    bd = block_diag(a, b)
    assert bd.shape == (4, 4)
    want = np.zeros((4, 4))
    want[:2, :2] = a.eval(theta)
    want[2:, 2:] = b.eval(theta)
    assert np.allclose(bd.eval(theta), want, rtol=1e-15)
    vs = vstack(a, b)
    assert vs.shape == (4, 2)
    assert np.allclose(vs.eval(theta), np.vstack([a.eval(theta), b.eval(theta)]))
    hs = hstack(a, b)
    assert hs.shape == (2, 4)
    assert np.allclose(hs.eval(theta), np.hstack([a.eval(theta), b.eval(theta)]))
    with pytest.raises(PreconditionError):
        vstack(a, ParamMatrix.constant(np.eye(3), spec1))
    with pytest.raises(PreconditionError):
        hstack(a, ParamMatrix.constant(np.eye(3), spec1))
    with pytest.raises(PreconditionError):
        block_diag()


def test_immutability(spec1):
    pm = mass_spring(spec1)
    with pytest.raises(dataclasses.FrozenInstanceError):
        pm.rows = 3
    with pytest.raises(ValueError):
        pm.terms[0][1][0, 0] = 99.0


def test_json_round_trip(spec1):
    pm = mass_spring(spec1)
    data = pm.to_dict()
    # wire shape: rows, cols, and one {powers, coeff} object per term
    assert set(data) == {"rows", "cols", "terms"}
    assert data["rows"] == 2 and data["cols"] == 2
    assert data["terms"][0]["powers"] == {}
    assert data["terms"][1]["powers"] == {"theta1": 1}
    assert data["terms"][1]["coeff"] == A1
    back = ParamMatrix.from_dict(json.loads(json.dumps(data)), spec1)
    assert back.shape == pm.shape
    assert len(back.terms) == len(pm.terms)
    for (m1, c1), (m2, c2) in zip(back.terms, pm.terms):
        assert m1 == m2
        assert np.array_equal(c1, c2)


def test_param_vector_single_column(spec1):
    v = ParamVector.constant([1.0, 0.0], spec1)
    assert v.shape == (2, 1)
    assert np.array_equal(v.eval([0.0]).ravel(), [1.0, 0.0])
    with pytest.raises(PreconditionError):
        ParamVector(spec1, 2, 2, ((Monomial(), np.eye(2)),))
    wide = ParamMatrix.constant([[1.0], [2.0]], spec1)
    assert isinstance(wide.as_vector(), ParamVector)


def test_depends_on_and_degree(spec2):
    pm = ParamMatrix.build(
        spec2, 1, 1, [({}, [[1.0]]), ({"theta2": 3}, [[2.0]])]
    )
    assert not pm.depends_on(0)
    assert pm.depends_on("theta2")
    assert not pm.is_constant
    mono = pm.terms[1][0]
    assert mono.degree == 3
    assert mono.partial(0) is None
    factor, reduced = mono.partial(1)
    assert factor == 3.0 and reduced.powers == ((1, 2),)
