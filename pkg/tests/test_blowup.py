import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conformal_mass.blowup import (FIELD_NAMES, EinsteinRequired, compute_fields, f_asymptote_mass,
                                   fields_from_state, gradient_excess, laplace_F, residual_dF_schouten,
                                   residual_DG, residual_laplace_F)


def _direct(profile, sol, r):
    """Field values straight from the type definitions (no h-variables)."""
    st_ = sol.state(np.array([r]))
    G, dG, d2G = st_["G"][0], st_["dG"][0], st_["d2G"][0]
    a, b = float(profile.a(r)), float(profile.b(r))
    da, db = float(profile.da(r)), float(profile.db(r))
    lr = d2G - dG**2 / G
    la = da / a * dG + dG**2 / G
    lb = db / b * dG + dG**2 / G
    tr = lr + 2 * la + lb
    return {
        "gradG2": dG**2 / G**2,
        "F": (1 + dG**2 / G**2) / G - 4,
        "lapG": tr / G**2,
        "tfHess2": (lr**2 + 2 * la**2 + lb**2 - tr**2 / 4) / G**4,
        "P_rr": -(lr - tr / 4) / G,
    }


@settings(max_examples=30, deadline=None)
@given(st.floats(0.3, 2.0))
def test_stable_formulas_match_definitions(fs_profile, fs_sol, x):
    f = compute_fields(fs_profile, fs_sol, [x])
    d = _direct(fs_profile, fs_sol, x)
    for k, v in d.items():
        assert getattr(f, k)[0] == pytest.approx(v, rel=1e-7, abs=1e-9)


def test_round_blowup_is_flat(round_fields):
    assert np.max(np.abs(round_fields.F)) < 1e-8
    assert np.max(np.abs(round_fields.tfHess2)) < 1e-8


def test_fs_fields(fs_fields):
    assert np.max(fs_fields.F) < 0
    assert np.all(fs_fields.tfHess2 >= 0)
    assert np.all(fs_fields.lapG > 0)


def test_fs_F_closed_form(fs_fields):
    # G = 1/(2 sin^2(r/sqrt2)) gives F = -2 sin^2(r/sqrt2) = -1/G (sympy-checked)
    s = np.sin(fs_fields.r / math.sqrt(2))
    assert np.allclose(fs_fields.F, -2 * s**2, atol=1e-9)


def test_trace_consistency(round_fields, fs_fields, perturbed_fields):
    for f in (round_fields, fs_fields, perturbed_fields):
        tr = f.lam_r + 2 * f.lam_a + f.lam_b
        assert np.max(np.abs(tr - f.G**2 * f.lapG) / np.maximum(1, np.abs(tr))) < 1e-10


def test_identity_residuals(round_profile, round_sol, round_fields, fs_profile, fs_sol, fs_fields):
    assert residual_DG(round_fields) < 1e-8
    assert residual_DG(fs_fields) < 1e-6
    assert residual_dF_schouten(round_fields) < 1e-8
    assert residual_dF_schouten(fs_fields) < 1e-5
    assert residual_laplace_F(round_fields, round_profile, round_sol) < 1e-8
    assert residual_laplace_F(fs_fields, fs_profile, fs_sol) < 1e-4
    # the grid-differenced version also meets the FS tolerance
    assert residual_laplace_F(fs_fields, fs_profile) < 1e-4


def test_F_subharmonic(fs_profile, fs_sol, fs_fields):
    lhs, _ = laplace_F(fs_fields, fs_profile, fs_sol)
    assert np.min(lhs[2:-2]) > -1e-8


def test_schouten_sign(fs_fields):
    mask = (fs_fields.dG > 0) & (fs_fields.P_rr > 0)
    assert np.all(fs_fields.dF[mask] < 0)


def test_gradient_estimate(round_fields, fs_fields):
    for f in (round_fields, fs_fields):
        assert np.max(gradient_excess(f) / np.maximum(1, 4 * f.G)) <= 1e-6
    assert np.max(np.abs(gradient_excess(round_fields))) < 1e-8
    assert np.allclose(gradient_excess(fs_fields), -1.0, atol=1e-9)


def test_F_over_r2_bounded(fs_profile, fs_sol):
    r = np.geomspace(1e-6, 1e-2, 20)
    F = compute_fields(fs_profile, fs_sol, r).F
    assert np.all(np.abs(F / r**2) < 2)


def test_einstein_only_identities_refuse(perturbed_fields):
    for fn in (residual_DG, residual_dF_schouten):
        with pytest.raises(EinsteinRequired):
            fn(perturbed_fields)


def test_falsification_DG_and_F(perturbed_fields):
    assert residual_DG(perturbed_fields, force=True) > 1e-3
    assert np.max(perturbed_fields.F) > 1e-3


def test_f_asymptote(round_sol, fs_sol):
    m0, _ = f_asymptote_mass(round_sol)
    m1, _ = f_asymptote_mass(fs_sol)
    assert abs(m0) < 1e-7
    assert m1 == pytest.approx(1.0, abs=1e-3)
    assert abs(m1 - fs_sol.mass_series) < 1e-3


def test_complex_evaluation_matches_real(fs_profile, fs_sol):
    x = 0.5 * fs_sol.r0
    real = fields_from_state(fs_profile, x, fs_sol.pole_state(np.array(x)))
    cplx = fields_from_state(fs_profile, x + 0j, fs_sol.pole_state(np.array(x + 0j)))
    for k in ("F", "dF", "tfHess2"):
        assert complex(cplx[k]).real == pytest.approx(float(real[k]), rel=1e-12, abs=1e-14)


def test_columns(fs_fields):
    cols = fs_fields.columns()
    assert tuple(cols) == FIELD_NAMES
    assert np.allclose(cols["weight"], 2 * math.pi**2 * fs_fields.G**4 * np.sin(fs_fields.r / math.sqrt(2)) ** 2
                       * 2 * np.sin(math.sqrt(2) * fs_fields.r) / math.sqrt(2))
