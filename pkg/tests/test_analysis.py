"""End-to-end scenario analysis: bounds, oracles, metrics, and flags."""

import numpy as np
import pytest

from robest import (
    InputSignal,
    ParamMatrix,
    ParamVector,
    ParamVectorSpec,
    PreconditionError,
    Scenario,
    StateSpace,
    analyze_scenario,
    builtin_scenario,
)


@pytest.fixture(scope="module")
def affine_analysis():
    return analyze_scenario(builtin_scenario("affine"))


def test_affine_needs_the_preconditioner(affine_analysis):
    an = affine_analysis
    assert an.mu == pytest.approx(9.6837059817537821)
    assert an.flags == ("transformed",)
    assert an.transform_cond is not None and an.transform_cond > 1.0
    with pytest.raises(PreconditionError, match="strict mode"):
        analyze_scenario(builtin_scenario("affine"), mode="strict")


def test_affine_bounds_and_metric(affine_analysis):
    an = affine_analysis
    (rep,) = an.reports
    assert rep.theorem2 is None
    assert "init_state_bound_na" in rep.flags
    assert rep.theorem1 > rep.gramian_baseline > rep.ground_truth_energy
    assert "oracle_mismatch" not in rep.flags
    assert "thm1_below_gt" not in rep.flags
    assert "baseline_below_gt" not in rep.flags
    assert set(an.metrics) == {"ground_truth", "theorem1", "gramian_baseline"}
    assert an.metrics["ground_truth"].R == pytest.approx(
        0.64675184254963636, rel=1e-6
    )
    # conservative bounds can only shrink the metric
    assert an.metrics["theorem1"].R < an.metrics["gramian_baseline"].R
    assert an.metrics["gramian_baseline"].R < an.metrics["ground_truth"].R


def test_affine_oracle_agreement(affine_analysis):
    (rep,) = affine_analysis.reports
    assert rep.gt_energy_fd == pytest.approx(rep.ground_truth_energy, rel=1e-3)
    routes = affine_analysis.sensitivities[0]
    assert set(routes) == {"ode", "fd"}
    assert routes["ode"].times.shape == routes["fd"].times.shape


def test_x0_scenario_uses_initial_state_bound():
    an = analyze_scenario(builtin_scenario("x0_quadratic"))
    assert an.flags == ()
    assert an.transform_cond is None
    (rep,) = an.reports
    assert rep.theorem1 is None
    assert rep.gramian_baseline is None
    assert "dyn_bound_na" in rep.flags
    assert rep.theorem2 == pytest.approx(0.06149468710616398, rel=1e-6)
    assert rep.theorem2 >= rep.ground_truth_energy
    assert set(an.metrics) == {"ground_truth", "theorem2"}
    assert an.metrics["ground_truth"].R == pytest.approx(
        0.53908810798120999, rel=1e-6
    )


def test_two_param_reports_both_parameters():
    an = analyze_scenario(builtin_scenario("two_param"))
    assert [r.param_index for r in an.reports] == [0, 1]
    for rep in an.reports:
        assert rep.theorem1 >= rep.ground_truth_energy
        assert rep.gramian_baseline >= rep.ground_truth_energy
    assert an.metrics["ground_truth"].R == pytest.approx(
        0.61641669423724155, rel=1e-6
    )


def spec2():
    return ParamVectorSpec(("theta1", "theta2"), (0.5, 0.5))


def two_param_inert_scenario():
    spec = spec2()
    a_t = [({}, [[-3.0]]), ({"theta1": 1}, [[-0.5]])]
    a_e = [({}, [[-3.0]]), ({"theta1": 1}, [[-0.45]])]

    def side(a_terms):
        return StateSpace(
            A=ParamMatrix.build(spec, 1, 1, a_terms),
            B=ParamMatrix.constant([[1.0]], spec),
            C=ParamMatrix.constant([[1.0]], spec),
            x0=ParamVector.constant([1.0], spec),
            spec=spec,
        )

    return Scenario(
        name="inert_second_param",
        truth=side(a_t),
        estimate=side(a_e),
        input=InputSignal.step([1.0]),
        N=8.0,
        params_of_interest=(0, 1),
    )


def test_inert_parameter_yields_exact_zeros():
    an = analyze_scenario(two_param_inert_scenario(), mode="strict")
    rep0, rep1 = an.reports
    assert rep0.ground_truth_energy > 0.0
    assert rep1.ground_truth_energy == 0.0
    assert rep1.theorem1 == 0.0
    assert rep1.gramian_baseline == 0.0
    # only the live parameter moves the metric
    gt = an.metrics["ground_truth"]
    assert gt.contributions[1].sens_norm == 0.0


def test_perfect_estimator_gives_r_one():
    base = builtin_scenario("affine")
    sc = Scenario(
        name="self_vs_self",
        truth=base.truth,
        estimate=base.truth,
        input=base.input,
        N=base.N,
        params_of_interest=base.params_of_interest,
    )
    an = analyze_scenario(sc)
    assert an.err_norm == 0.0
    assert "perfect_estimator" in an.flags
    for res in an.metrics.values():
        assert res.R == 1.0


def test_dt_override_changes_grid():
    sc = builtin_scenario("affine")
    coarse = analyze_scenario(sc, dt=0.002)
    fine = analyze_scenario(sc, dt=0.001)
    assert fine.outputs.times.size > coarse.outputs.times.size
    assert fine.metrics["ground_truth"].R == pytest.approx(
        coarse.metrics["ground_truth"].R, rel=1e-4
    )


def test_analysis_serialization(affine_analysis):
    d = affine_analysis.to_dict()
    assert set(d) == {
        "scenario", "mu", "N", "err_energy", "err_norm", "bu_inf",
        "mode_flags", "transform_cond", "reports", "metrics",
    }
    assert d["scenario"] == "affine"
    assert d["mode_flags"] == ["transformed"]
    assert set(d["metrics"]) == {"ground_truth", "theorem1", "gramian_baseline"}
    assert d["reports"][0]["param_index"] == 0


def test_unknown_mode_rejected():
    with pytest.raises(PreconditionError, match="mode"):
        analyze_scenario(builtin_scenario("affine"), mode="fast")


def test_random_scenario_strict_mode_dominance():
    from robest import random_stable_augmented

    sc = random_stable_augmented(3, seed=12, delta=0.5)
    an = analyze_scenario(sc, mode="strict")
    assert an.flags == ()
    assert an.mu == pytest.approx(-0.5, abs=1e-10)
    (rep,) = an.reports
    assert rep.theorem1 >= rep.ground_truth_energy
    assert rep.gramian_baseline >= rep.ground_truth_energy
    assert rep.gt_energy_fd == pytest.approx(rep.ground_truth_energy, rel=1e-3)
