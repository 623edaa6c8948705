"""Global Green's function of the conformal Laplacian for a warped profile.

Pole normalization is ``G ~ r^-2``; ``A`` is the constant term of the
expansion in the radial distance (normal coordinates), so ``m = 12 A - 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .frobenius import FarExpansion, PoleExpansion, far_basis, pole_basis
from .profiles import WarpedProfile

__all__ = [
    "GreenSolveError",
    "SolverOptions",
    "GreenSolution",
    "solve_green",
    "mass_from_expansion",
]


class GreenSolveError(RuntimeError):
    """The two-sided shooting solve could not meet its tolerances."""


@dataclass(frozen=True)
class SolverOptions:
    n: int = 4096
    order: int = 12
    r0: float | None = None
    u0: float | None = None
    r_mid: float | None = None
    rtol: float = 1e-13
    atol: float = 1e-15
    kappa_tol: float = 1e-8
    cond_max: float = 1e10
    log_branch: bool = True

    def resolved(self, L: float) -> tuple[float, float, float]:
        r0 = 1e-3 * L if self.r0 is None else self.r0
        u0 = 1e-3 * L if self.u0 is None else self.u0
        r_mid = 0.5 * L if self.r_mid is None else self.r_mid
        if not (0 < r0 < r_mid < L - u0 < L):
            raise ValueError(f"need 0 < r0 < r_mid < L - u0; got r0={r0}, r_mid={r_mid}, u0={u0}")
        return r0, u0, r_mid


@dataclass(eq=False)
class GreenSolution:
    """Solved Green's function with grid samples and diagnostics.

    Between the endpoints the solution is available everywhere through
    :meth:`state`; ``r``, ``G``, ``dG`` are samples on the uniform open grid
    ``r_i = (i + 1) L / (n + 1)``.
    """

    profile: WarpedProfile
    options: SolverOptions
    pole: PoleExpansion
    far: FarExpansion
    A: float
    kappa: float
    c1: float
    r0: float
    u0: float
    r_mid: float
    condition_number: float
    r: np.ndarray = field(repr=False)
    G: np.ndarray = field(repr=False)
    dG: np.ndarray = field(repr=False)
    ode_defect: float = math.nan
    matching_jump: float = math.nan
    far_end_residual: float = math.nan
    series_truncation: float = math.nan
    _outward: object = field(default=None, repr=False)
    _inward: object = field(default=None, repr=False)

    @property
    def L(self) -> float:
        return self.profile.L

    @property
    def mass_series(self) -> float | None:
        """12 A - 1, or None when a log term obstructs the expansion."""
        if abs(self.kappa) > self.options.kappa_tol:
            return None
        return 12.0 * self.A - 1.0

    @property
    def min_G(self) -> float:
        # G is monotone decreasing for the symmetric families, so the far end wins
        return float(min(self.G.min(), self.state(np.array([self.L * (1 - 1e-12)]))["G"][0]))

    def pole_state(self, r):
        """Series representation valid for |r| <= r0; accepts complex r."""
        r = np.asarray(r)
        d, dd = self.pole.singular(r)
        u2, du2 = self.pole.regular(r)
        hm1 = d + self.A * r**2 * u2
        dh = dd + self.A * (2 * r * u2 + r**2 * du2)
        return self._from_h(r, hm1, dh)

    def far_state(self, r):
        """Series representation valid for L - r <= u0; accepts complex r."""
        r = np.asarray(r)
        v, dv, d2v = self.far.evaluate(self.L - r)
        G, dG, d2G = v / self.c1, -dv / self.c1, d2v / self.c1
        h = r**2 * G
        return {"G": G, "dG": dG, "d2G": d2G, "h": h, "hm1": h - 1.0,
                "dh": 2 * r * G + r**2 * dG, "d2h": 2 * G + 4 * r * dG + r**2 * d2G}

    def _from_h(self, r, hm1, dh):
        p = self.profile.ptilde(r)
        q = self.profile.scalar(r) / 6.0
        h = 1.0 + hm1
        d2h = -(p - 1.0 / r) * dh + (2.0 * p / r + q) * h
        G = h / r**2
        dG = (dh * r - 2.0 * h) / r**3
        d2G = (d2h * r**2 - 4.0 * dh * r + 6.0 * h) / r**4
        return {"G": G, "dG": dG, "d2G": d2G, "h": h, "hm1": hm1, "dh": dh, "d2h": d2h}

    def state(self, r) -> dict[str, np.ndarray]:
        """G, G', G'' and the scaled h = r^2 G (with h - 1 and derivatives) at radii in (0, L)."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        if np.any(r <= 0) or np.any(r >= self.L):
            raise ValueError("state() is defined on the open interval (0, L)")
        keys = ("G", "dG", "d2G", "h", "hm1", "dh", "d2h")
        out = {k: np.empty_like(r) for k in keys}
        regions = (
            (r <= self.r0, self.pole_state),
            ((r > self.r0) & (r <= self.r_mid), self._outward_state),
            ((r > self.r_mid) & (r < self.L - self.u0), self._inward_state),
            (r >= self.L - self.u0, self.far_state),
        )
        for mask, fn in regions:
            if np.any(mask):
                st = fn(r[mask])
                for k in keys:
                    out[k][mask] = np.real(st[k])
        return out

    def basis_wronskian(self, r) -> np.ndarray:
        """J (u1 u2' - u1' u2) for the pole basis on (0, r_mid]; constant (= 2) by Abel's identity."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        if np.any(r <= 0) or np.any(r > self.r_mid):
            raise ValueError("the pole basis is only carried on (0, r_mid]")
        d, dd, u2, du2 = (np.empty_like(r) for _ in range(4))
        near = r <= self.r0
        if np.any(near):
            d[near], dd[near] = self.pole.singular(r[near])
            u2[near], du2[near] = self.pole.regular(r[near])
        if np.any(~near):
            d[~near], dd[~near], u2[~near], du2[~near] = self._outward(r[~near])
        j = self.profile.J(r) / r**3
        return j * (r * (1 + d) * du2 - r * dd * u2 + 2 * (1 + d) * u2)

    def _outward_state(self, r):
        y = self._outward(r)
        d, dd, u2, du2 = y
        hm1 = d + self.A * r**2 * u2
        dh = dd + self.A * (2 * r * u2 + r**2 * du2)
        return self._from_h(r, hm1, dh)

    def _inward_state(self, r):
        w, dw = self._inward(r)
        G, dG = w / self.c1, dw / self.c1
        p = 3.0 / r + self.profile.ptilde(r)
        q = self.profile.scalar(r) / 6.0
        d2G = -p * dG + q * G
        h = r**2 * G
        return {"G": G, "dG": dG, "d2G": d2G, "h": h, "hm1": h - 1.0,
                "dh": 2 * r * G + r**2 * dG, "d2h": 2 * G + 4 * r * dG + r**2 * d2G}

    def summary(self) -> dict:
        return {
            "A": self.A,
            "kappa": self.kappa,
            "mass_series": self.mass_series,
            "condition_number": self.condition_number,
            "r0": self.r0,
            "u0": self.u0,
            "r_mid": self.r_mid,
            "n": int(self.options.n),
            "order": int(self.options.order),
            "ode_defect": self.ode_defect,
            "matching_jump": self.matching_jump,
            "far_end_residual": self.far_end_residual,
            "series_truncation": self.series_truncation,
            "min_G": self.min_G,
        }


def _outward_rhs(profile: WarpedProfile):
    def rhs(r, y):
        d, dd, u2, du2 = y
        p = profile.ptilde(r)
        q = profile.scalar(r) / 6.0
        # h = 1 + d solves h'' + (p - 1/r) h' - (2p/r + q) h = 0
        d2d = -(p - 1.0 / r) * dd + (2.0 * p / r + q) * (1.0 + d)
        d2u2 = -(3.0 / r + p) * du2 + q * u2
        return [dd, d2d, du2, d2u2]
    return rhs


def _inward_rhs(profile: WarpedProfile):
    def rhs(r, y):
        w, dw = y
        p = 3.0 / r + profile.ptilde(r)
        q = profile.scalar(r) / 6.0
        return [dw, -p * dw + q * w]
    return rhs


def solve_green(profile: WarpedProfile, options: SolverOptions | None = None, **kwargs) -> GreenSolution:
    """Two-sided shooting solve with series starts at both singular endpoints."""
    if options is None:
        options = SolverOptions(**kwargs)
    elif kwargs:
        raise TypeError("pass either options or keyword overrides, not both")
    L = profile.L
    r0, u0, r_mid = options.resolved(L)
    pole = pole_basis(profile, options.order)
    far = far_basis(profile, options.order)
    if abs(pole.kappa) > options.kappa_tol and not options.log_branch:
        raise GreenSolveError(f"log term required (kappa = {pole.kappa:.3e}) but log_branch is disabled")

    d0, dd0 = pole.singular(np.array(r0))
    u20, du20 = pole.regular(np.array(r0))
    out = solve_ivp(_outward_rhs(profile), (r0, r_mid), [float(d0), float(dd0), float(u20), float(du20)],
                    method="DOP853", rtol=options.rtol, atol=options.atol, dense_output=True)
    v, dv, _ = far.evaluate(np.array(u0))
    inw = solve_ivp(_inward_rhs(profile), (L - u0, r_mid), [float(v), -float(dv)],
                    method="DOP853", rtol=options.rtol, atol=options.atol, dense_output=True)
    if out.status != 0 or inw.status != 0:
        raise GreenSolveError(f"integrator failed: {out.message} / {inw.message}")

    d, dd, u2, du2 = out.y[:, -1]
    w, dw = inw.y[:, -1]
    rm = r_mid
    u1 = (1.0 + d) / rm**2
    du1 = dd / rm**2 - 2.0 * (1.0 + d) / rm**3
    M = np.array([[u1, u2], [du1, du2]])
    # column scaling so the condition number reflects the matching, not units
    Ms = M / np.abs(M).max(axis=0)
    cond = float(np.linalg.cond(Ms))
    if not cond < options.cond_max:
        raise GreenSolveError(f"matching matrix is ill-conditioned (cond = {cond:.3e})")
    c1, c2 = np.linalg.solve(M, [w, dw])
    if not c1 > 0:
        raise GreenSolveError("matching produced a non-positive pole coefficient")
    A = float(c2 / c1)

    sol = GreenSolution(
        profile=profile, options=options, pole=pole, far=far, A=A, kappa=pole.kappa, c1=float(c1),
        r0=r0, u0=u0, r_mid=r_mid, condition_number=cond,
        r=np.empty(0), G=np.empty(0), dG=np.empty(0),
        _outward=out.sol, _inward=inw.sol,
    )
    grid = L * np.arange(1, options.n + 1) / (options.n + 1)
    st = sol.state(grid)
    sol.r, sol.G, sol.dG = grid, st["G"], st["dG"]
    if np.any(sol.G <= 0):
        raise GreenSolveError("computed Green's function is not positive")
    _diagnose(sol, st)
    return sol


def _diagnose(sol: GreenSolution, st: dict) -> None:
    prof = sol.profile
    r = sol.r
    # G'' of the assembled solution by a local 5-point stencil on the interpolants,
    # independent of the G'' that the ODE itself supplies
    delta = np.minimum(np.minimum(2e-3 * r, 0.3 * (sol.L - r)), 1e-2 * sol.L)
    Gk = [sol.state(r + k * delta)["G"] for k in (-2, -1, 1, 2)]
    d2G_fd = (-Gk[0] + 16 * Gk[1] - 30 * st["G"] + 16 * Gk[2] - Gk[3]) / (12 * delta**2)
    p = 3.0 / r + prof.ptilde(r)
    q = prof.scalar(r) / 6.0
    res = d2G_fd + p * st["dG"] - q * st["G"]
    scale = np.abs(d2G_fd) + np.abs(p * st["dG"]) + np.abs(q * st["G"])
    sol.ode_defect = float(np.max(np.abs(res) / scale))
    # continuity across the matching point
    rm = np.array([sol.r_mid])
    left, right = sol._outward_state(rm), sol._inward_state(rm)
    sol.matching_jump = float(abs(left["G"][0] - right["G"][0]) / abs(right["G"][0])
                              + abs(left["dG"][0] - right["dG"][0]) / abs(right["dG"][0]))
    # regularity at the far end: G' -> 0 (smooth point) or b G' -> 0 (collapsed circle)
    uL = 1e-10 * sol.L
    end_dG = float(np.real(sol.far_state(np.array(sol.L - uL))["dG"]))
    weight = abs(float(prof.b(sol.L - uL))) if prof.endpoint_class.density_exponent == 1 else 1.0
    sol.far_end_residual = abs(end_dG) * weight
    sol.series_truncation = sol.pole.truncation_error(sol.r0)


def mass_from_expansion(sol: GreenSolution) -> float:
    """m = 12 A - 1; raises when the expansion carries a log term."""
    m = sol.mass_series
    if m is None:
        raise ValueError(f"mass from the expansion is undefined: kappa = {sol.kappa:.3e}")
    return m
