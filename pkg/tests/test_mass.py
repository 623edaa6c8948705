import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conformal_mass.mass import (FluxError, flat_chart, flux_from_chart, mass_flux, mass_identity,
                                 mass_report, measure_flux_calibration, schwarzschild_flux)


@settings(max_examples=30)
@given(st.floats(-5, 5))
def test_schwarzschild_oracle(mu):
    assert schwarzschild_flux(mu) == pytest.approx(6 * mu, abs=1e-10)


def test_flux_extrapolation_consistency_check():
    def bumpy(s):
        return 1 + math.sin(s) / s**2, -1.0 / s**2
    with pytest.raises(FluxError):
        flux_from_chart(bumpy)


def test_round_flat_chart(round_profile, round_sol):
    chart = flat_chart(round_profile, round_sol)
    for r in (0.01, 0.5, 1.5):
        assert chart.s(r) == pytest.approx(0.5 / math.tan(r / 2), rel=1e-12)
        _, U, dU = chart.U_and_dU(r)
        assert U == pytest.approx(1.0, abs=1e-10)
    assert abs(mass_flux(round_profile, round_sol)[0]) < 1e-6


def test_flat_chart_limits(perturbed_profile, perturbed_sol):
    chart = flat_chart(perturbed_profile, perturbed_sol)
    for s in (1e2, 1e3):
        _, U, _ = chart.U_and_dU(chart.radius_at(s))
        assert U == pytest.approx(1.0, abs=1e-3)
    # 2 s^2 (U - 1) -> 2 (A + c3/2), c3 = eps - 1/6
    r = chart.radius_at(1e3)
    s, U, _ = chart.U_and_dU(r)
    c3 = 0.1 - 1 / 6
    assert 2 * s**2 * (U - 1) == pytest.approx(2 * (perturbed_sol.A + c3 / 2), abs=1e-5)


def test_flux_independent_of_radii(perturbed_profile, perturbed_sol):
    a = mass_flux(perturbed_profile, perturbed_sol, radii=(5.0, 10.0, 20.0))[0]
    b = mass_flux(perturbed_profile, perturbed_sol, radii=(8.0, 16.0, 32.0))[0]
    assert abs(a - b) < 1e-5


def test_flux_refuses_berger(fs_profile, fs_sol):
    with pytest.raises(FluxError):
        flat_chart(fs_profile, fs_sol)


def test_measured_calibration(round_sol):
    assert measure_flux_calibration(round_sol) == pytest.approx(1.0, rel=1e-6)


def test_identity_route(round_profile, round_sol, fs_profile, fs_sol):
    assert abs(mass_identity(round_profile, round_sol)[0]) < 1e-7
    m, _ = mass_identity(fs_profile, fs_sol)
    assert m == pytest.approx(1.0, abs=1e-3)
    assert abs(m - fs_sol.mass_series) < 1e-3


def test_reports_einstein(round_profile, round_sol, fs_profile, fs_sol):
    for prof, sol, m in ((round_profile, round_sol, 0.0), (fs_profile, fs_sol, 1.0)):
        rep = mass_report(prof, sol)
        assert rep.route_spread < 1e-3
        assert not rep.flags
        for v in rep.routes().values():
            assert v == pytest.approx(m, abs=1e-6)
            assert v >= -1e-6


def test_report_perturbed_is_flagged(perturbed_profile, perturbed_sol):
    rep = mass_report(perturbed_profile, perturbed_sol)
    assert any(f.startswith("not-einstein") for f in rep.flags)
    # the Kind-A blow-up is conformally flat with vanishing flux mass,
    # while 12 A - 1 = 12/30 - 1 because R(0) != 12
    assert abs(rep.mass_flux) < 1e-6
    assert rep.mass_series == pytest.approx(-0.6, abs=1e-9)
    assert rep.route_spread > 1e-3
