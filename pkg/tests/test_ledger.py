import json
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from conftest import linear_table
from evenpowers.holder import ExponentSet
from evenpowers.ledger import (
    STATED_PHIS,
    STAGE_INPUTS,
    MethodParams,
    Stage,
    full_ledger,
    omega_eta,
    stage_partitions,
    stage_margin,
)

P = MethodParams()


def test_params_defaults_and_validation():
    assert P.theta == pytest.approx(0.25 / 7)
    for bad in (dict(kappa=0.4, tau=0.3), dict(tau=0.5), dict(kappa=0.0), dict(delta={"MINOR_ARCS": 0.0})):
        with pytest.raises(ValueError):
            MethodParams(**bad)
    with pytest.raises(ValueError, match="unknown stage"):
        MethodParams(delta={"NOPE": 0.1})


def test_minor_arcs_discrepancy_flagged():
    r = stage_margin("MINOR_ARCS", P, {"phi1": -0.806, "phi2": -0.801})
    assert r.achieved_exponent == pytest.approx(-1.00025, abs=1e-12)
    assert not r.passed
    assert any("delta discrepancy" in f and "0.00025" in f for f in r.flags)


def test_minor_arcs_passes_at_supported_delta():
    p = MethodParams(delta={Stage.MINOR_ARCS: 0.00025})
    assert stage_margin(Stage.MINOR_ARCS, p, {"phi1": -0.806, "phi2": -0.801}).margin >= -1e-15
    p = MethodParams(delta={Stage.MINOR_ARCS: 0.0002})
    assert stage_margin(Stage.MINOR_ARCS, p, {"phi1": -0.806, "phi2": -0.801}).passed


def test_replace_f4_example():
    r = stage_margin("REPLACE_F4", P, {"phi1": -0.3958, "phi2": -0.895})
    assert r.achieved_exponent == pytest.approx(-0.5015, abs=1e-12)
    assert r.required_bound == pytest.approx(-0.5014, abs=1e-12)
    assert r.passed


def test_prune_kappa_example():
    p = MethodParams(kappa=0.25, theta=1 / 28)
    r = stage_margin("PRUNE_KAPPA", p, {"phi1": -0.3958, "phi2": -0.895})
    assert r.achieved_exponent == pytest.approx(-1.0010714285714286, abs=1e-12)
    assert r.passed


def test_prune_kappa_hypothesis_failure():
    r = stage_margin("PRUNE_KAPPA", P, {"phi1": -0.3, "phi2": -0.895})
    assert not r.passed
    assert any("hypothesis failed" in f for f in r.flags)


def test_log_quarter_small_set_fails():
    p = MethodParams(s=1)
    r = stage_margin("PRUNE_LOG_QUARTER", p, {})
    assert r.inputs["omega"] == 0.5
    assert r.inputs["rho_exp"] < 0
    assert not r.passed


def test_unknown_stage_and_missing_phi():
    with pytest.raises(ValueError, match="unknown stage"):
        stage_margin("SOMETHING", P, {})
    with pytest.raises(ValueError, match="phi2"):
        stage_margin("MINOR_ARCS", P, {"phi1": -0.8})


def test_omega_eta_exact():
    oe = omega_eta(ExponentSet.even(2, 266))
    H = sum(Fraction(1, j) for j in range(1, 134))
    assert oe.omega_exact == H / 2
    assert oe.eta_exact == 3 + H / 2 - Fraction(1, 2) - Fraction(1, 4) - Fraction(1, 6)
    assert oe.rho_exp == pytest.approx((float(H / 2) - 2) / 4, abs=1e-15)
    assert oe.eta > 3
    assert omega_eta(ExponentSet([2])).rho_exp < 0
    assert omega_eta(ExponentSet.even(2, 266), 0.01).omega == pytest.approx(float(H / 2) - 0.01)


def test_full_ledger_stated_inputs():
    run = full_ledger(P, phis=STATED_PHIS)
    failed = [r.stage for r in run.reports if not r.passed]
    assert failed == [Stage.MINOR_ARCS]
    assert not run.errors
    assert not run.passed
    assert len(run.reports) == len(Stage)


def test_full_ledger_large_tau_breaks_f4():
    run = full_ledger(MethodParams(tau=0.49), phis=STATED_PHIS)
    assert not run.report("REPLACE_F4").passed


def test_full_ledger_empty_partitions_lists_missing():
    with pytest.raises(ValueError, match="MINOR_ARCS.*PRUNE_LOG_A"):
        full_ledger(P, partitions={})


def test_full_ledger_collects_coverage_errors():
    run = full_ledger(P, table=linear_table([4, 6], 5))
    assert set(run.errors) == {s.value for s in Stage if STAGE_INPUTS[s]}
    assert [r.stage for r in run.reports] == [Stage.PRUNE_LOG_QUARTER]
    assert "block K1" in run.errors["MINOR_ARCS"]


def test_full_ledger_from_tables():
    table = linear_table(range(4, 267, 2), 2000, slope=0.4)
    run = full_ledger(P, table=table)
    assert not run.errors
    # lambda = 0.4 s gives phi = -1.6 sum 1/k per block
    K1 = ExponentSet.even(6, 52)
    r = run.report(Stage.MINOR_ARCS)
    assert r.inputs["phi1"] == pytest.approx(-1.6 * float(K1.reciprocal_sum), abs=1e-12)
    mix = run.report(Stage.PRUNE_LOG_A).inputs["phi_mix"]
    parts = stage_partitions(133)[Stage.PRUNE_LOG_A].blocks()
    # with powers p the mixed exponent is (0.4 - 2) sum p_k / k
    expect = -1.6 * (3 * float(parts[1].reciprocal_sum) + 4 * float(parts[2].reciprocal_sum))
    assert mix == pytest.approx(expect, abs=1e-12)


def test_full_ledger_order_independent():
    a = full_ledger(P, phis=STATED_PHIS)
    b = full_ledger(P, phis=dict(reversed(list(STATED_PHIS.items()))))
    assert a == b


def test_report_json_schema():
    run = full_ledger(P, phis=STATED_PHIS)
    rows = json.loads(json.dumps(run.to_list()))
    for row in rows:
        assert {"stage", "inputs", "achieved_exponent", "required_bound", "margin", "pass"} <= set(row)
        assert row["pass"] == (row["margin"] >= 0)


def test_stage_partitions_cover_universe():
    parts = stage_partitions(133)
    # each replacement stage removes the exponent it has replaced
    lowest = {Stage.MINOR_ARCS: 4, Stage.REPLACE_F4: 6, Stage.REPLACE_F6: 8, Stage.PRUNE_LOG_A: 8}
    for stage, lo in lowest.items():
        got = set().union(*(set(b) for b in parts[stage].blocks()))
        assert got == set(range(lo, 267, 2))


phi_val = st.floats(-2.0, 0.0, allow_nan=False)


@given(st.sampled_from([s for s in Stage if STAGE_INPUTS[s]]), st.data())
def test_margins_monotone_in_phi(stage, data):
    names = STAGE_INPUTS[stage]
    base = {n: data.draw(phi_val) for n in names}
    which = data.draw(st.sampled_from(names))
    drop = data.draw(st.floats(0.0, 1.0))
    lower = dict(base, **{which: base[which] - drop})
    assert stage_margin(stage, P, lower).margin >= stage_margin(stage, P, base).margin - 1e-15


@given(st.floats(0.26, 0.48), st.floats(0.001, 0.01), phi_val, phi_val)
def test_tau_monotonicity(tau, step, p1, p2):
    lo, hi = MethodParams(tau=tau), MethodParams(tau=tau + step)
    phis = {"phi1": p1, "phi2": p2}
    assert stage_margin("MINOR_ARCS", hi, phis).margin > stage_margin("MINOR_ARCS", lo, phis).margin
    assert stage_margin("REPLACE_F4", hi, phis).margin < stage_margin("REPLACE_F4", lo, phis).margin


def test_epsilon_slack_subtracts():
    base = stage_margin("REPLACE_F2", P, STATED_PHIS[Stage.REPLACE_F2]).margin
    slack = stage_margin("REPLACE_F2", MethodParams(epsilon_slack=1e-6), STATED_PHIS[Stage.REPLACE_F2]).margin
    assert slack == pytest.approx(base - 1e-6, abs=1e-15)
