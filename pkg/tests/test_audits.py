import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conformal_mass.audits import (AuditReport, Verdict, audit_bishop, audit_cauchy_schwarz, audit_diameter,
                                   audit_dF_mass, audit_min_g, audit_selfdual_weyl, audit_squared_chain,
                                   audit_mass_identity, audit_mass_gap, audit_topological_gap, audit_volume_ratio,
                                   gap_function, is_anti_self_dual, topological_bound)

PI2 = math.pi**2
V_ROUND = 8 * PI2 / 3
V_FS = 2 * PI2


@pytest.mark.parametrize("vol,verdict", [(V_ROUND, Verdict.HOLDS), (V_FS, Verdict.HOLDS), (9 * PI2, Verdict.FAILS)])
def test_bishop(vol, verdict):
    e = audit_bishop(vol)
    assert e.verdict is verdict
    if vol == V_ROUND:
        assert e.margin == 0


def test_bishop_domain():
    with pytest.raises(ValueError):
        audit_bishop(0.0)


def test_mass_gap_examples():
    e = audit_mass_gap(0.0, V_ROUND)
    assert e.verdict is Verdict.HOLDS and e.margin == pytest.approx(0.0, abs=1e-9)
    e = audit_mass_gap(1.0, V_FS)
    assert e.verdict is Verdict.HOLDS
    assert e.lhs == pytest.approx(16 * math.pi**4)
    assert e.rhs == pytest.approx(32 * math.pi**4 / 3)
    assert audit_mass_gap(0.1, V_FS).verdict is Verdict.FAILS


def test_gap_function_exact():
    assert gap_function(Fraction(1, 3)) == Fraction(22, 3)
    assert gap_function(Fraction(1, 4)) == 12
    assert gap_function(Fraction(1)) == 0
    assert gap_function(1) == 0
    for bad in (0, -0.5, 1.5):
        with pytest.raises(ValueError):
            gap_function(bad)


def test_gap_function_decreasing_on_grid():
    x = np.linspace(1e-3, 1, 1000)
    vals = np.array([gap_function(v) for v in x])
    assert np.all(np.diff(vals) < 0)


@settings(max_examples=100)
@given(st.fractions(min_value=Fraction(1, 1000), max_value=1), st.fractions(min_value=Fraction(1, 1000), max_value=1))
def test_gap_function_strictly_decreasing(a, b):
    if a < b:
        assert gap_function(a) > gap_function(b)


def test_topological_examples():
    assert topological_bound(2, 0) == Fraction(22, 3)
    assert topological_bound(3, -1) == 12
    # h = 7, e.g. chi = 7, tau = 0
    assert topological_bound(7, 0) < 0
    assert topological_bound(7, 0) == Fraction(-1, 21)
    with pytest.raises(ValueError):
        topological_bound(0, 0)


@settings(max_examples=100)
@given(st.integers(-20, 40), st.integers(-20, 20))
def test_topological_bound_is_gap_function(chi, tau):
    theta = Fraction(2 * chi + 3 * tau, 12)
    if not 0 < theta <= 1:
        return
    assert topological_bound(chi, tau) == gap_function(theta)


def test_min_g():
    e = audit_min_g(0.0, 0.25)
    assert e.verdict is Verdict.NOT_APPLICABLE
    assert e.lhs == e.rhs == 0.0
    assert audit_min_g(1.0, 0.26).verdict is Verdict.NOT_APPLICABLE
    e = audit_min_g(10.0, 2.0)
    assert e.verdict is Verdict.HOLDS and e.rhs == 7.0


def test_diameter():
    e = audit_diameter(0.0, 0.25, math.pi)
    assert e.verdict is Verdict.NOT_APPLICABLE
    assert e.rhs == pytest.approx(math.pi) and e.margin == pytest.approx(0.0)
    e = audit_diameter(1.0, 0.5, math.pi / math.sqrt(2))  # FS: min G = G(L) = 1/2
    assert e.verdict is Verdict.NOT_APPLICABLE and e.margin > 0
    e = audit_diameter(9.0, 2.5, 0.5)
    assert e.verdict is Verdict.FAILS
    assert e.rhs == pytest.approx(2 * math.atan(1 / 3))


def test_mass_identity_and_chain_on_fs_values():
    assert audit_mass_identity(0.0, V_ROUND, 0.0, 0.0).margin == 0
    e = audit_mass_identity(1.0, V_FS, 8 * PI2, 4 * PI2)
    assert e.verdict is Verdict.HOLDS and abs(e.margin) < 1e-12
    assert audit_mass_identity(1.0, V_FS, 8 * PI2, 5 * PI2).verdict is Verdict.FAILS
    assert audit_dF_mass(1.0, V_FS, 4 * PI2).verdict is Verdict.HOLDS
    assert audit_dF_mass(0.1, V_FS, 4 * PI2).verdict is Verdict.FAILS
    assert audit_cauchy_schwarz(4 * PI2, 4 * PI2, 4 * PI2).verdict is Verdict.HOLDS
    assert audit_cauchy_schwarz(5 * PI2, 4 * PI2, 4 * PI2).verdict is Verdict.FAILS
    assert audit_squared_chain(1.0, V_FS, 4 * PI2).verdict is Verdict.HOLDS


def test_weyl_dichotomy():
    # round S^4 (2, 0) and Fubini-Study with the anti-self-dual orientation (3, -1)
    assert is_anti_self_dual(V_ROUND, 2, 0)
    assert is_anti_self_dual(V_FS, 3, -1)
    assert not is_anti_self_dual(V_FS, 3, 1)
    assert audit_selfdual_weyl(V_FS, 3, 1).verdict is Verdict.HOLDS
    assert audit_volume_ratio(V_FS, 3, -1).verdict is Verdict.NOT_APPLICABLE
    e = audit_topological_gap(1.0, V_FS, 3, -1)
    assert e.verdict is Verdict.NOT_APPLICABLE and e.rhs == 12
    # a non-ASD synthetic input is judged
    assert audit_topological_gap(1.0, 5.0, 2, 0).verdict is Verdict.FAILS
    assert audit_topological_gap(8.0, 5.0, 2, 0).verdict is Verdict.HOLDS


@settings(max_examples=200)
@given(st.floats(-10, 10), st.floats(0.1, 30))
def test_verdict_invariant(m, vol):
    for e in (audit_mass_gap(m, vol), audit_min_g(m, vol / 10), audit_bishop(vol)):
        if e.verdict is Verdict.HOLDS:
            assert e.margin >= -e.tolerance
        if e.verdict is Verdict.FAILS:
            assert e.margin < -e.tolerance


def test_report_serialization():
    rep = AuditReport()
    rep.add(audit_bishop(9 * PI2))
    assert rep.failed == ["bishop"]
    d = rep.to_dict()["bishop"]
    assert set(d) == {"reference", "inputs", "lhs", "rhs", "margin", "tolerance", "verdict", "note"}
    assert d["verdict"] == "fails"
