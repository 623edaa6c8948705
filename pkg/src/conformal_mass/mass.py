"""Four routes to the blow-up mass, plus their cross-validation.

Routes:
  series      12 A - 1 from the constant term of G at the pole;
  identity    [6 (8 pi^2/3 - V) + I_hess + I_F] / (16 pi^2);
  fasymptote  -lim F / r^2 in inverted normal coordinates;
  flux        coordinate ADM flux in the flat chart of a round-cross-section metric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from ._numerics import richardson_extrapolate
from .blowup import f_asymptote_mass
from .greensolve import GreenSolution, mass_from_expansion
from .profiles import ROUND_VOLUME, ProfileKind, WarpedProfile, volume
from .quadrature import QuadratureOptions, integral_gradF, integral_hess

__all__ = [
    "MassReport",
    "FlatChart",
    "FluxError",
    "mass_identity",
    "flat_chart",
    "flux_from_chart",
    "mass_flux",
    "schwarzschild_flux",
    "measure_flux_calibration",
    "mass_report",
]

FLUX_RADII = (5.0, 10.0, 20.0)


class FluxError(ArithmeticError):
    pass


def mass_identity(profile: WarpedProfile, sol: GreenSolution, opts: QuadratureOptions | None = None,
                  vol: float | None = None) -> tuple[float, float]:
    """(mass, error estimate) from the integral identity for the mass."""
    vol = volume(profile) if vol is None else vol
    ih = integral_hess(sol, opts)
    i_f = integral_gradF(sol, opts)
    m = (6.0 * (ROUND_VOLUME - vol) + ih.value + i_f.value) / (16.0 * math.pi**2)
    return m, (ih.error_estimate + i_f.error_estimate) / (16.0 * math.pi**2)


@dataclass(frozen=True)
class FlatChart:
    """g = U(s)^2 (ds^2 + s^2 g_S3) for a round-cross-section profile.

    ``s`` decreases from infinity at the pole; ``ds/dr = -s/phi``.
    """

    profile: WarpedProfile
    sol: GreenSolution
    G_shift: float = 0.0

    def _log_corrector(self, r: float) -> float:
        phi = self.profile.a
        val, _ = quad(lambda x: 1.0 / float(phi(x)) - 1.0 / x, 0.0, r, epsabs=1e-15, epsrel=1e-13, limit=200)
        return val

    def s(self, r: float) -> float:
        return math.exp(-self._log_corrector(r)) / r

    def U_and_dU(self, r: float) -> tuple[float, float, float]:
        """(s, U, dU/ds) at radius r."""
        st = self.sol.state(np.array([r]))
        G = float(st["G"][0]) + self.G_shift
        dG = float(st["dG"][0])
        phi = float(self.profile.a(r))
        dphi = float(self.profile.da(r))
        s = self.s(r)
        U = G * phi / s
        dU_dr = (dG * phi + G * dphi + G) / s
        return s, U, dU_dr / (-s / phi)

    def radius_at(self, s_target: float) -> float:
        """Invert s(r) = s_target (s is decreasing in r)."""
        r_hi = 0.5 * self.profile.L
        if self.s(r_hi) >= s_target:
            raise FluxError(f"flat radius {s_target} not reached inside (0, L/2)")
        r_lo = 0.5 / s_target
        while self.s(r_lo) < s_target:
            r_lo *= 0.5
        return brentq(lambda r: self.s(r) - s_target, r_lo, r_hi, xtol=1e-16, rtol=1e-15)


def flat_chart(profile: WarpedProfile, sol: GreenSolution) -> FlatChart:
    if profile.kind is not ProfileKind.ROUND_CROSS_SECTION:
        raise FluxError("flat chart exists only for round-cross-section profiles")
    return FlatChart(profile, sol)


def flux_from_chart(U_and_dU: Callable[[float], tuple[float, float]], radii=FLUX_RADII,
                    tol: float = 1e-5) -> tuple[float, float, list[float]]:
    """Raw flux -3 rho^3 d(U^2)/ds extrapolated in 1/rho^2.

    ``U_and_dU(rho)`` returns (U, dU/ds) at flat radius rho. Returns
    (extrapolated, inconsistency, raw values at the radii).
    """
    raw = []
    for rho in radii:
        U, dU = U_and_dU(rho)
        raw.append(-6.0 * rho**3 * U * dU)
    ratio = radii[1] / radii[0]
    fine_first = raw[::-1]
    three = richardson_extrapolate(fine_first, p=2, ratio=ratio)
    two = richardson_extrapolate(fine_first[:2], p=2, ratio=ratio)
    spread = abs(three - two)
    if spread > tol * max(1.0, abs(three)):
        raise FluxError(f"flux extrapolation inconsistent ({spread:.3e})")
    return three, spread, raw


def schwarzschild_flux(mu: float, radii=FLUX_RADII) -> float:
    """Raw flux for the synthetic chart U = 1 + mu / (2 s^2); equals 6 mu."""
    def ud(s):
        return 1.0 + mu / (2 * s**2), -mu / s**3
    return flux_from_chart(ud, radii)[0]


def _chart_flux(chart: FlatChart, radii) -> tuple[float, float]:
    def ud(rho):
        r = chart.radius_at(rho)
        _, U, dU = chart.U_and_dU(r)
        return U, dU
    val, spread, _ = flux_from_chart(ud, radii)
    return val, spread


def measure_flux_calibration(sol: GreenSolution, delta: float = 1e-2, radii=FLUX_RADII) -> float:
    """Ratio of the series-route mass change to the raw-flux change under G -> G + delta.

    Run on the round family: the shift moves A by delta (so 12 A - 1 by 12 delta)
    and leaves the chart untouched, which avoids the 0/0 of calibrating on
    the round metric itself.
    """
    base = flat_chart(sol.profile, sol)
    shifted = FlatChart(sol.profile, sol, G_shift=delta)
    f0, _ = _chart_flux(base, radii)
    f1, _ = _chart_flux(shifted, radii)
    return 12.0 * delta / (f1 - f0)


def mass_flux(profile: WarpedProfile, sol: GreenSolution, calibration: float = 1.0,
              radii=FLUX_RADII) -> tuple[float, float, list[str]]:
    """(calibrated flux mass, extrapolation spread, flags)."""
    flags: list[str] = []
    if abs(sol.kappa) > sol.options.kappa_tol:
        flags.append("log-obstructed")
    chart = flat_chart(profile, sol)
    try:
        raw, spread = _chart_flux(chart, radii)
    except FluxError:
        if not flags:
            raise
        raw, spread = math.nan, math.inf
    return calibration * raw, spread, flags


@dataclass
class MassReport:
    mass_series: float | None
    mass_identity: float | None
    mass_fasymptote: float | None
    mass_flux: float | None
    flux_calibration: float | None
    route_spread: float | None
    errors: dict = field(default_factory=dict)
    flags: list = field(default_factory=list)

    def routes(self) -> dict[str, float]:
        out = {"series": self.mass_series, "identity": self.mass_identity,
               "fasymptote": self.mass_fasymptote, "flux": self.mass_flux}
        return {k: v for k, v in out.items() if v is not None and math.isfinite(v)}

    def to_dict(self) -> dict:
        return {
            "mass_series": self.mass_series,
            "mass_identity": self.mass_identity,
            "mass_fasymptote": self.mass_fasymptote,
            "mass_flux": self.mass_flux,
            "flux_calibration": self.flux_calibration,
            "route_spread": self.route_spread,
            "errors": dict(self.errors),
            "flags": list(self.flags),
        }


def mass_report(profile: WarpedProfile, sol: GreenSolution, route_tol: float = 1e-3,
                opts: QuadratureOptions | None = None, calibration: float | None = None,
                vol: float | None = None) -> MassReport:
    """Evaluate every applicable route and cross-check them."""
    flags: list[str] = []
    errors: dict[str, float] = {}
    if not profile.einstein_certified:
        flags.append("not-einstein: routes are evaluated outside the hypotheses of the mass formulas")
    ms = mass_from_expansion(sol) if abs(sol.kappa) <= sol.options.kappa_tol else None
    if ms is None:
        flags.append("log-obstructed: kappa exceeds tolerance, no constant term A")
    mi = mf = mx = cal = None
    if ms is not None:
        mi, errors["identity"] = mass_identity(profile, sol, opts, vol)
        mf, errors["fasymptote"] = f_asymptote_mass(sol)
    if profile.kind is ProfileKind.ROUND_CROSS_SECTION:
        cal = calibration if calibration is not None else 1.0
        mx, errors["flux"], fl = mass_flux(profile, sol, cal)
        flags.extend(f"flux:{f}" for f in fl)
    report = MassReport(ms, mi, mf, mx, cal, None, errors, flags)
    vals = list(report.routes().values())
    if len(vals) >= 2:
        report.route_spread = float(max(vals) - min(vals))
        if report.route_spread > route_tol:
            flags.append(f"route-spread {report.route_spread:.3e} exceeds {route_tol:g}")
    if ms is not None and ms < -route_tol:
        flags.append("negative mass_series")
    return report
