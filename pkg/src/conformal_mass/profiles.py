"""Cohomogeneity-one background metrics.

A profile describes the metric

    gbar = dr^2 + a(r)^2 (s1^2 + s2^2) + b(r)^2 s3^2,   0 <= r <= L,

where s1, s2, s3 are the left-invariant coframe of the unit round 3-sphere
(``ds_i = 2 s_j ^ s_k``), so ``a = b = 1`` is the round S^3 of curvature 1.
The volume element is ``2 pi^2 J(r) dr`` with ``J = a^2 b``.

All metric functions must accept complex arrays: Taylor data at the pole
and at the far endpoint are read off by Cauchy integrals on small circles.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np
from scipy import integrate

from ._numerics import cauchy_taylor, poly_eval

__all__ = [
    "ProfileKind",
    "EndpointClass",
    "WarpedProfile",
    "ProfileError",
    "round_s4_profile",
    "fubini_study_profile",
    "perturbed_s4_profile",
    "profile_from_name",
    "PROFILE_NAMES",
    "volume",
    "scalar_curvature_kindA",
    "berger_ricci",
    "einstein_residual",
    "ROUND_VOLUME",
]

ROUND_VOLUME = 8.0 * math.pi**2 / 3.0
OMEGA3 = 2.0 * math.pi**2

Func = Callable[[np.ndarray], np.ndarray]


class ProfileError(ValueError):
    """Invalid profile parameters or an unclassifiable endpoint."""


class ProfileKind(enum.Enum):
    ROUND_CROSS_SECTION = "RoundCrossSection"
    BERGER_CROSS_SECTION = "BergerCrossSection"


class EndpointClass(enum.Enum):
    SMOOTH_POINT = "SmoothPoint"
    COLLAPSED_CIRCLE = "CollapsedCircle"

    @property
    def density_exponent(self) -> int:
        # J ~ u^3 at a smooth point, J ~ c u where a circle collapses
        return 3 if self is EndpointClass.SMOOTH_POINT else 1


def scalar_curvature_kindA(profile: "WarpedProfile", r):
    """Scalar curvature of ``dr^2 + phi^2 g_S3``: -6 phi''/phi + 6 (1 - phi'^2)/phi^2."""
    if profile.kind is not ProfileKind.ROUND_CROSS_SECTION:
        raise ProfileError("scalar_curvature_kindA requires a RoundCrossSection profile")
    r = np.asarray(r)
    if not np.iscomplexobj(r) and (np.any(r <= 0) or np.any(r >= profile.L)):
        raise ProfileError("scalar_curvature_kindA is defined on the open interval (0, L)")
    return _kindA_scalar(profile.a, profile.da, profile.d2a, r)


def _kindA_scalar(phi, dphi, d2phi, r):
    p = phi(r)
    return -6.0 * d2phi(r) / p + 6.0 * (1.0 - dphi(r) ** 2) / p**2


def berger_ricci(profile: "WarpedProfile", r):
    """Ricci eigenvalues (radial, s1/s2 direction, s3 direction) in an orthonormal frame.

    Uses Ric_tt = -sum f_i''/f_i and Ric_ii = Ric3_ii - f_i''/f_i - (f_i'/f_i) sum_{j != i} f_j'/f_j,
    with the Berger-sphere Ricci curvatures Ric3_11 = (4a^2 - 2b^2)/a^4 and Ric3_33 = 2b^2/a^4.
    """
    a, da, d2a = profile.a(r), profile.da(r), profile.d2a(r)
    b, db, d2b = profile.b(r), profile.db(r), profile.d2b(r)
    la, lb = da / a, db / b
    ric_rr = -2.0 * d2a / a - d2b / b
    ric_aa = (4.0 * a**2 - 2.0 * b**2) / a**4 - d2a / a - la * (la + lb)
    ric_bb = 2.0 * b**2 / a**4 - d2b / b - 2.0 * la * lb
    return ric_rr, ric_aa, ric_bb


def einstein_residual(profile: "WarpedProfile", r, einstein_constant: float = 3.0) -> float:
    """max |Ric - 3 gbar| over the sample radii (orthonormal-frame components)."""
    return float(max(np.max(np.abs(c - einstein_constant)) for c in berger_ricci(profile, r)))


@dataclass(frozen=True, eq=False)
class WarpedProfile:
    """Immutable cohomogeneity-one background metric.

    ``scalar_curvature`` may be ``None``, in which case it is derived from
    ``a`` and ``b`` through the curvature formulas.
    """

    name: str
    kind: ProfileKind
    L: float
    a: Func
    da: Func
    d2a: Func
    b: Func
    db: Func
    d2b: Func
    scalar_curvature: Func | None = None
    einstein_certified: bool = False
    euler_characteristic: int | None = None
    signature: int | None = None
    params: dict = field(default_factory=dict)
    series_radius: float = 0.5

    def __post_init__(self):
        if not self.L > 0:
            raise ProfileError("L must be positive")
        eps = 1e-12
        for f, df in ((self.a, self.da), (self.b, self.db)):
            if abs(complex(f(np.array(0.0))).real) > eps or abs(complex(df(np.array(0.0))).real - 1.0) > 1e-10:
                raise ProfileError(f"{self.name}: pole is not smooth (need a(0)=b(0)=0, a'(0)=b'(0)=1)")
        r = np.linspace(0, self.L, 257)[1:-1]
        if np.any(self.a(r) <= 0) or np.any(self.b(r) <= 0):
            raise ProfileError(f"{self.name}: a, b must be positive on (0, L)")

    # ----- basic geometry -------------------------------------------------
    def J(self, r):
        return self.a(r) ** 2 * self.b(r)

    def dJ(self, r):
        a, b = self.a(r), self.b(r)
        return 2.0 * a * self.da(r) * b + a**2 * self.db(r)

    def scalar(self, r):
        """Scalar curvature R(r); Taylor series near both endpoints, where the direct formula cancels."""
        r = np.asarray(r)
        near = np.abs(r) < self._switch
        far = np.abs(self.L - r) < self._switch
        mid = 0.5 * self.L
        out = self._scalar_direct(np.where(near | far, mid, r))
        if np.any(near):
            out = np.where(near, poly_eval(self._pole_taylor["R"], r), out)
        if np.any(far):
            out = np.where(far, poly_eval(self._far_taylor_R, self.L - r), out)
        return out if out.ndim else out[()]

    @cached_property
    def _far_taylor_R(self) -> np.ndarray:
        """Taylor coefficients of R in u = L - r."""
        return cauchy_taylor(lambda u: self._scalar_direct(self.L - u), 0.0,
                             min(self.series_radius, 0.5 * self.L))

    def _scalar_direct(self, r):
        if self.scalar_curvature is not None:
            return np.asarray(self.scalar_curvature(r)) + 0.0 * r
        if self.kind is ProfileKind.ROUND_CROSS_SECTION:
            return _kindA_scalar(self.a, self.da, self.d2a, r)
        ric_rr, ric_aa, ric_bb = berger_ricci(self, r)
        return ric_rr + 2.0 * ric_aa + ric_bb

    @cached_property
    def endpoint_class(self) -> EndpointClass:
        aL, bL = float(np.real(self.a(self.L))), float(np.real(self.b(self.L)))
        daL, dbL = float(np.real(self.da(self.L))), float(np.real(self.db(self.L)))
        tol = 1e-9
        if abs(aL) < tol and abs(bL) < tol and abs(abs(daL) - 1) < 1e-8 and abs(abs(dbL) - 1) < 1e-8:
            return EndpointClass.SMOOTH_POINT
        if abs(bL) < tol and aL > tol:
            return EndpointClass.COLLAPSED_CIRCLE
        raise ProfileError(f"{self.name}: unclassifiable endpoint at r = L (a={aL}, b={bL})")

    # ----- regularized logarithmic derivatives ----------------------------
    @property
    def _switch(self) -> float:
        return 0.5 * self.series_radius

    @cached_property
    def _pole_taylor(self) -> dict[str, np.ndarray]:
        rho = self.series_radius
        at = cauchy_taylor(lambda z: self.a(z) / z, 0.0, rho)
        bt = cauchy_taylor(lambda z: self.b(z) / z, 0.0, rho)
        rt = cauchy_taylor(self._scalar_direct, 0.0, rho)
        return {"a": at, "b": bt, "R": rt}

    def _log_deriv_reg(self, key: str, f: Func, df: Func, r):
        # f'/f - 1/r, exact series near the pole, direct formula elsewhere
        r = np.asarray(r)
        near = np.abs(r) < self._switch
        safe = np.where(near, self._switch, r)
        out = df(safe) / f(safe) - 1.0 / safe
        if np.any(near):
            c = self._pole_taylor[key]
            series = poly_eval(c, r, 1) / poly_eval(c, r)
            out = np.where(near, series, out)
        return out if out.ndim else out[()]

    def alpha(self, r):
        """a'/a - 1/r."""
        return self._log_deriv_reg("a", self.a, self.da, r)

    def beta(self, r):
        """b'/b - 1/r."""
        return self._log_deriv_reg("b", self.b, self.db, r)

    def ptilde(self, r):
        """J'/J - 3/r."""
        return 2.0 * self.alpha(r) + self.beta(r)

    def summary(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind.value,
            "L": self.L,
            "einstein_certified": self.einstein_certified,
            "endpoint_class": self.endpoint_class.value,
            "params": dict(self.params),
        }


def volume(profile: WarpedProfile, rtol: float = 1e-13) -> float:
    """Volume 2 pi^2 int_0^L a^2 b dr."""
    val, err = integrate.quad(lambda r: float(np.real(profile.J(r))), 0.0, profile.L,
                              epsabs=0.0, epsrel=rtol, limit=200)
    if not err <= max(1e-10 * abs(val), 1e-14):
        raise ArithmeticError(f"volume quadrature did not converge (error estimate {err:.3e})")
    return OMEGA3 * val


def round_s4_profile() -> WarpedProfile:
    return WarpedProfile(
        name="round-s4",
        kind=ProfileKind.ROUND_CROSS_SECTION,
        L=math.pi,
        a=np.sin, da=np.cos, d2a=lambda r: -np.sin(r),
        b=np.sin, db=np.cos, d2b=lambda r: -np.sin(r),
        scalar_curvature=lambda r: 12.0,
        einstein_certified=True,
        euler_characteristic=2,
        signature=0,
    )


def fubini_study_profile() -> WarpedProfile:
    s2 = math.sqrt(2.0)
    return WarpedProfile(
        name="fs-cp2",
        kind=ProfileKind.BERGER_CROSS_SECTION,
        L=math.pi / s2,
        a=lambda r: s2 * np.sin(r / s2),
        da=lambda r: np.cos(r / s2),
        d2a=lambda r: -np.sin(r / s2) / s2,
        b=lambda r: np.sin(s2 * r) / s2,
        db=lambda r: np.cos(s2 * r),
        d2b=lambda r: -s2 * np.sin(s2 * r),
        scalar_curvature=lambda r: 12.0,
        einstein_certified=True,
        # orientation of -CP^2, where the Fubini-Study metric is anti-self-dual
        euler_characteristic=3,
        signature=-1,
    )


def perturbed_s4_profile(eps: float) -> WarpedProfile:
    """phi(r) = sin r (1 + eps sin^2 r): smooth at both poles, not Einstein unless eps = 0."""
    eps = float(eps)
    if not abs(eps) < 0.5:
        raise ProfileError("perturbed-s4 requires |eps| < 0.5")

    def phi(r):
        s = np.sin(r)
        return s + eps * s**3

    def dphi(r):
        s, c = np.sin(r), np.cos(r)
        return c + 3.0 * eps * s**2 * c

    def d2phi(r):
        s, c = np.sin(r), np.cos(r)
        return -s + 3.0 * eps * (2.0 * s * c**2 - s**3)

    return WarpedProfile(
        name=f"perturbed-s4:eps={eps!r}",
        kind=ProfileKind.ROUND_CROSS_SECTION,
        L=math.pi,
        a=phi, da=dphi, d2a=d2phi,
        b=phi, db=dphi, d2b=d2phi,
        scalar_curvature=None,
        einstein_certified=False,
        euler_characteristic=2,
        signature=0,
        params={"eps": eps},
    )


PROFILE_NAMES = ("round-s4", "fs-cp2", "perturbed-s4:eps=<v>")


def profile_from_name(spec: str) -> WarpedProfile:
    """Build a profile from ``round-s4``, ``fs-cp2`` or ``perturbed-s4:eps=<v>``."""
    name, _, rest = spec.strip().partition(":")
    if name == "round-s4" and not rest:
        return round_s4_profile()
    if name == "fs-cp2" and not rest:
        return fubini_study_profile()
    if name == "perturbed-s4":
        key, _, value = rest.partition("=")
        if key.strip() != "eps":
            raise ProfileError(f"perturbed-s4 expects ':eps=<value>', got {spec!r}")
        try:
            eps = float(value)
        except ValueError:
            raise ProfileError(f"bad eps value in {spec!r}") from None
        return perturbed_s4_profile(eps)
    raise ProfileError(f"unknown profile {spec!r}; choose from {', '.join(PROFILE_NAMES)}")
