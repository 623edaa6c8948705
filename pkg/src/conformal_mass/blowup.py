"""Radial fields of the blow-up metric g = G^2 gbar.

Everything is written in terms of ``h = r^2 G`` (and ``h - 1``) so that the
``r^-4``-sized pieces of the Hessian cancel analytically rather than in
floating point near the pole. Hessian eigenvalues ``lam_*`` are components
of Hess_g G in a gbar-orthonormal frame; divide by G^2 for the g-frame.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .greensolve import GreenSolution
from .profiles import OMEGA3, WarpedProfile

__all__ = [
    "BlowupFields",
    "EinsteinRequired",
    "compute_fields",
    "fields_from_state",
    "residual_DG",
    "residual_dF_schouten",
    "residual_laplace_F",
    "f_asymptote_mass",
    "gradient_excess",
    "laplace_F",
    "FIELD_NAMES",
]


class EinsteinRequired(ValueError):
    """An identity that holds only for R = 12 was requested on another profile."""


@dataclass(eq=False)
class BlowupFields:
    r: np.ndarray
    G: np.ndarray
    dG: np.ndarray
    gradG2: np.ndarray
    F: np.ndarray
    dF: np.ndarray
    lam_r: np.ndarray
    lam_a: np.ndarray
    lam_b: np.ndarray
    lapG: np.ndarray
    tfHess2: np.ndarray
    P_rr: np.ndarray
    weight: np.ndarray
    # trace-free parts of (lam_r, lam_a, lam_b); not exported
    t_r: np.ndarray
    t_a: np.ndarray
    t_b: np.ndarray
    einstein: bool = False

    def columns(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in FIELD_NAMES}


FIELD_NAMES = ("r", "G", "dG", "gradG2", "F", "dF", "lam_r", "lam_a", "lam_b",
               "lapG", "tfHess2", "P_rr", "weight")


def fields_from_state(profile: WarpedProfile, r, st: dict) -> dict:
    """Field formulas on a state dict; works for complex ``r`` as well."""
    h, hm1, dh, d2h = st["h"], st["hm1"], st["dh"], st["d2h"]
    G, dG, d2G = st["G"], st["dG"], st["d2G"]
    al, be = profile.alpha(r), profile.beta(r)
    la, lb = 1.0 / r + al, 1.0 / r + be
    logder = dG / G
    gradG2 = logder**2
    F = (r**2 - 4.0 * hm1) / h - 4.0 * r * dh / h**2 + r**2 * dh**2 / h**3
    dF = (2 * r / h - r**2 * dh / h**2 - 8 * dh / h**2 - 4 * r * d2h / h**2
          + 10 * r * dh**2 / h**3 + 2 * r**2 * dh * d2h / h**3 - 3 * r**2 * dh**3 / h**4)
    lam_r = d2G - dG * logder
    lam_a = la * dG + dG * logder
    lam_b = lb * dG + dG * logder
    # differences lam_r - lam_a, lam_r - lam_b without the r^-4 parts
    base = d2h / r**2 - 2 * dh**2 / (r**2 * h) + 3 * dh / r**3
    D_a = base - al * dG
    D_b = base - be * dG
    t_r = (2 * D_a + D_b) / 4
    t_a = (-2 * D_a + D_b) / 4
    t_b = (2 * D_a - 3 * D_b) / 4
    trace = (8 * h / r**4 - 9 * dh / r**3 + d2h / r**2 + 2 * dh**2 / (r**2 * h)
             + (2 * al + be) * dG)
    lapG = trace * r**4 / h**2
    Gm4 = r**8 / h**4
    tfHess2 = Gm4 * (t_r**2 + 2 * t_a**2 + t_b**2)
    return {
        "G": G, "dG": dG, "gradG2": gradG2, "F": F, "dF": dF,
        "lam_r": lam_r, "lam_a": lam_a, "lam_b": lam_b, "lapG": lapG,
        "tfHess2": tfHess2, "P_rr": -t_r / G, "weight": OMEGA3 * G**4 * profile.J(r),
        "t_r": t_r, "t_a": t_a, "t_b": t_b,
    }


def compute_fields(profile: WarpedProfile, sol: GreenSolution, r=None) -> BlowupFields:
    """Blow-up fields on the solution grid (or at the radii ``r`` in (0, L))."""
    r = sol.r if r is None else np.atleast_1d(np.asarray(r, dtype=float))
    st = sol.state(r)
    if np.any(st["G"] <= 0):
        raise ValueError("fields need G > 0")
    f = fields_from_state(profile, r, st)
    return BlowupFields(r=r, einstein=profile.einstein_certified, **f)


def _require_einstein(fields: BlowupFields, force: bool) -> None:
    if not (fields.einstein or force):
        raise EinsteinRequired("identity holds only for Einstein profiles (R = 12)")


def residual_DG(fields: BlowupFields, force: bool = False) -> float:
    """max |Lap_g G - 2 G^-1 (1 + |grad G|^2)| / max |Lap_g G|."""
    _require_einstein(fields, force)
    rhs = 2.0 / fields.G * (1.0 + fields.gradG2)
    return float(np.max(np.abs(fields.lapG - rhs)) / np.max(np.abs(fields.lapG)))


def residual_dF_schouten(fields: BlowupFields, force: bool = False) -> float:
    """Radial part of dF = -2 P(grad G, .): F' against 2 (trace-free lam_r) G'/G^3."""
    _require_einstein(fields, force)
    rhs = 2.0 * fields.t_r * fields.dG / fields.G**3
    scale = max(np.max(np.abs(fields.dF)), np.max(np.abs(rhs)), 1.0)
    return float(np.max(np.abs(fields.dF - rhs)) / scale)


def laplace_F(fields: BlowupFields, profile: WarpedProfile,
              sol: GreenSolution | None = None) -> tuple[np.ndarray, np.ndarray]:
    """(Lap_g F = (G^4 J)^-1 (G^2 J F')', 2 G^-1 |trace-free Hess G|^2) on the field grid.

    The radial flux is differenced with ``np.gradient`` on the grid, or, when
    ``sol`` is given, with a 4th-order stencil on the dense solution whose
    step is not tied to the grid spacing (solver noise in F' is ~1e-11 and
    a 1e-3 grid step would amplify it past 1e-8).
    """
    r = fields.r
    rhs = 2.0 * fields.tfHess2 / fields.G
    if sol is None:
        flux = fields.G**2 * profile.J(r) * fields.dF
        dflux = np.gradient(flux, r, edge_order=2)
    else:
        delta = np.minimum(np.minimum(0.1 * r, 0.1 * (profile.L - r)), 1e-2 * profile.L)

        def flux_at(x):
            st = sol.state(x)
            f = fields_from_state(profile, x, st)
            return f["G"] ** 2 * profile.J(x) * f["dF"]

        dflux = (flux_at(r - 2 * delta) - 8 * flux_at(r - delta) + 8 * flux_at(r + delta)
                 - flux_at(r + 2 * delta)) / (12 * delta)
    lhs = dflux / (fields.G**4 * profile.J(r))
    return lhs, rhs


def residual_laplace_F(fields: BlowupFields, profile: WarpedProfile, sol: GreenSolution | None = None,
                       skip: int = 2, force: bool = False) -> float:
    """Relative residual of Lap_g F = 2 G^-1 |trace-free Hess G|^2, ``skip`` cells dropped at each end."""
    _require_einstein(fields, force)
    lhs, rhs = laplace_F(fields, profile, sol)
    inner = slice(skip, len(lhs) - skip)
    scale = max(np.max(np.abs(rhs[inner])), 1.0)
    return float(np.max(np.abs(lhs[inner] - rhs[inner])) / scale)


def gradient_excess(fields: BlowupFields) -> np.ndarray:
    """|grad G|^2 - 4 G + 1, which equals G F (nonpositive for Einstein inputs)."""
    return fields.G * fields.F


def f_asymptote_mass(sol: GreenSolution, profile: WarpedProfile | None = None,
                     tol: float = 1e-6) -> tuple[float, float]:
    """-lim F / r^2 at the pole by Richardson extrapolation over r0, 2 r0, 4 r0.

    Returns (value, inconsistency) where the inconsistency compares the two-
    and three-level extrapolants; raises when it exceeds ``tol``.
    """
    from ._numerics import richardson_extrapolate

    profile = sol.profile if profile is None else profile
    if abs(sol.kappa) > sol.options.kappa_tol:
        raise ValueError(f"F asymptote needs a log-free expansion (kappa = {sol.kappa:.3e})")
    r = sol.r0 * np.array([1.0, 2.0, 4.0])
    F = compute_fields(profile, sol, r).F
    vals = -F / r**2
    three = richardson_extrapolate(vals, p=2)
    two = richardson_extrapolate(vals[:2], p=2)
    spread = abs(three - two)
    if spread > tol:
        raise ArithmeticError(f"F/r^2 extrapolation inconsistent ({spread:.3e})")
    return three, spread
