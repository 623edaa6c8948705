"""Frobenius series for the radial Green's equation at its two singular endpoints.

The equation is ``G'' + (J'/J) G' - (R/6) G = 0``. Multiplying by ``r^2`` at
the pole gives

    r^2 y'' + (3 + P(r)) r y' - Q(r) y = 0,
    P(r) = r J'/J - 3 = sum_{k>=1} P_k r^k,   Q(r) = r^2 R / 6 = sum_k Q_k r^k,

with indicial roots -2 and 0. The integer gap forces a possible ``log r``
admixture whose coefficient ``kappa`` is read off at the resonance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._numerics import cauchy_taylor, poly_eval, series_div
from .profiles import EndpointClass, ProfileError, WarpedProfile

__all__ = [
    "PoleExpansion",
    "FarExpansion",
    "density_series",
    "pole_basis",
    "far_basis",
]

_N_TAYLOR = 64


def _pole_coefficients(profile: WarpedProfile, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    t = profile._pole_taylor
    a, b = t["a"], t["b"]
    j = np.convolve(np.convolve(a, a)[:_N_TAYLOR], b)[:_N_TAYLOR]
    j /= j[0]
    # P(r) = r j'/j with j = J / r^3
    dj = np.zeros_like(j)
    dj[1:] = j[1:] * np.arange(1, len(j))
    P = series_div(dj, j, n + 1)
    Q = np.zeros(n + 1)
    Q[2:] = t["R"][: n - 1] / 6.0
    return j[: n + 1], P, Q


def density_series(profile: WarpedProfile, order: int = 12) -> np.ndarray:
    """Taylor coefficients ``[1, j_1, j_2, ...]`` of ``J(r) / r^3`` at the pole.

    ``j_2 = -Ric_rr(0)/6``.
    """
    j, _, _ = _pole_coefficients(profile, order)
    return j


@dataclass(frozen=True)
class PoleExpansion:
    """Series bases at the pole.

    ``u1 = r^-2 (1 + sum b_k r^k) + kappa * log(r) * u2`` with ``b_2 = 0`` and
    ``u2 = 1 + sum q_k r^k``. The singular branch is handled through
    ``d = r^2 u1 - 1`` so that nothing cancels near ``r = 0``.
    """

    b_coeffs: np.ndarray
    q_coeffs: np.ndarray
    kappa: float
    order: int
    radius_hint: float
    P: np.ndarray
    Q: np.ndarray

    def singular(self, r):
        """(d, d') for ``d = r^2 u1 - 1``; accepts complex ``r``."""
        b = self.b_coeffs.copy()
        b[0] = 0.0
        d = poly_eval(b, r)
        dd = poly_eval(b, r, 1)
        if self.kappa != 0.0:
            u2, du2 = self.regular(r)
            lg = np.log(r)
            d = d + self.kappa * r**2 * lg * u2
            dd = dd + self.kappa * (2 * r * lg * u2 + r * u2 + r**2 * lg * du2)
        return d, dd

    def regular(self, r):
        """(u2, u2')."""
        return poly_eval(self.q_coeffs, r), poly_eval(self.q_coeffs, r, 1)

    def truncation_error(self, r: float) -> float:
        """Size of the last retained terms at radius r (relative to the leading term)."""
        return float(max(abs(self.b_coeffs[-1]), abs(self.q_coeffs[-1])) * r**self.order
                     + max(abs(self.b_coeffs[-2]), abs(self.q_coeffs[-2])) * r ** (self.order - 1))

    def ode_residual(self, r) -> tuple[np.ndarray, np.ndarray]:
        """Residual of r^2 L[y] for the truncated u1 (as d) and u2, evaluated from the series."""
        P = poly_eval(self.P, r)
        Q = poly_eval(self.Q, r)
        q = np.asarray(self.q_coeffs)
        u2, du2 = self.regular(r)
        d2u2 = poly_eval(q, r, 2)
        res2 = r**2 * d2u2 + (3 + P) * r * du2 - Q * u2
        # u1 = (1 + d)/r^2
        d, dd = self.singular(r)
        b = self.b_coeffs.copy()
        b[0] = 0.0
        d2d = poly_eval(b, r, 2)
        if self.kappa != 0.0:
            lg = np.log(r)
            d2d = d2d + self.kappa * (2 * lg * u2 + 3 * u2 + 4 * r * lg * du2 + 2 * r * du2
                                      + r**2 * lg * d2u2)
        h, dh, d2h = 1 + d, dd, d2d
        u1 = h / r**2
        du1 = dh / r**2 - 2 * h / r**3
        d2u1 = d2h / r**2 - 4 * dh / r**3 + 6 * h / r**4
        res1 = r**2 * d2u1 + (3 + P) * r * du1 - Q * u1
        return res1, res2


def pole_basis(profile: WarpedProfile, order: int = 12) -> PoleExpansion:
    """Solve the pole recurrences for u1, u2 and the log coefficient kappa."""
    if order < 4:
        raise ValueError("order must be at least 4")
    _, P, Q = _pole_coefficients(profile, order)
    q = np.zeros(order + 1)
    q[0] = 1.0
    for n in range(1, order + 1):
        acc = sum((P[k] * (n - k) - Q[k]) * q[n - k] for k in range(1, n + 1))
        q[n] = -acc / (n * (n + 2))

    def log_forcing(m: int) -> float:
        # coefficient of r^m in 2 r u2' + (2 + P) u2
        if m < 0:
            return 0.0
        return (2 * m + 2) * q[m] + sum(P[k] * q[m - k] for k in range(1, m + 1))

    b = np.zeros(order + 1)
    b[0] = 1.0
    kappa = 0.0
    for n in range(1, order + 1):
        acc = sum((P[k] * (n - k - 2) - Q[k]) * b[n - k] for k in range(1, n + 1))
        if n == 2:
            # resonance: b_2 is free (set to 0) and the residual fixes kappa
            kappa = -acc / log_forcing(0)
            b[2] = 0.0
            continue
        acc += kappa * log_forcing(n - 2)
        b[n] = -acc / (n * (n - 2))
    # exact zero when the residual is at rounding level relative to its parts
    scale = abs(P[2]) * 2 + abs(Q[2]) + abs(P[1]) + 1e-300
    if abs(kappa) < 64 * np.finfo(float).eps * scale:
        kappa = 0.0
    return PoleExpansion(b_coeffs=b, q_coeffs=q, kappa=float(kappa), order=order,
                         radius_hint=1e-3 * profile.L, P=P, Q=Q)


@dataclass(frozen=True)
class FarExpansion:
    """Regular solution ``v(u) = 1 + sum v_k u^k`` in ``u = L - r``."""

    endpoint_class: EndpointClass
    v_coeffs: np.ndarray
    order: int
    P: np.ndarray
    Q: np.ndarray

    def evaluate(self, u):
        """(v, dv/du, d2v/du2)."""
        return (poly_eval(self.v_coeffs, u), poly_eval(self.v_coeffs, u, 1),
                poly_eval(self.v_coeffs, u, 2))

    def ode_residual(self, u):
        e = self.endpoint_class.density_exponent
        v, dv, d2v = self.evaluate(u)
        return u**2 * d2v + (e + poly_eval(self.P, u)) * u * dv - poly_eval(self.Q, u) * v


def far_basis(profile: WarpedProfile, order: int = 12) -> FarExpansion:
    """Regular series at r = L; the companion branch is singular (u^-2) or logarithmic."""
    cls = profile.endpoint_class
    e = cls.density_exponent
    L = profile.L
    rho = min(profile.series_radius, 0.5 * L)
    jf = cauchy_taylor(lambda u: profile.J(L - u) / u**e, 0.0, rho)
    if abs(jf[0]) < 1e-12:
        raise ProfileError(f"{profile.name}: far endpoint density does not match {cls.value}")
    rf = profile._far_taylor_R
    djf = np.zeros_like(jf)
    djf[1:] = jf[1:] * np.arange(1, len(jf))
    P = series_div(djf, jf, order + 1)
    Q = np.zeros(order + 1)
    Q[2:] = rf[: order - 1] / 6.0
    v = np.zeros(order + 1)
    v[0] = 1.0
    for n in range(1, order + 1):
        acc = sum((P[k] * (n - k) - Q[k]) * v[n - k] for k in range(1, n + 1))
        v[n] = -acc / (n * (n - 1 + e))
    return FarExpansion(endpoint_class=cls, v_coeffs=v, order=order, P=P, Q=Q)
