"""Radial integrals over the blow-up.

Every g-integral is reduced to ``int_0^L f(r) dr`` with the single weight
``2 pi^2 G^4 J`` (g-volume) or ``2 pi^2 J`` (gbar-volume); G-powers are
spelled out next to each integrand. With the h-variable field formulas all
integrands extend analytically to both endpoints, so composite
Gauss-Legendre on [0, L] converges geometrically. The pole behaviour can
optionally be subtracted with its Taylor polynomial (read off the complex
series on a small circle) and added back in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ._numerics import cauchy_taylor
from .blowup import fields_from_state
from .greensolve import GreenSolution
from .profiles import OMEGA3, volume

__all__ = [
    "IntegralResult",
    "QuadratureError",
    "QuadratureOptions",
    "integrate_panels",
    "radial_integral",
    "integral_IG1",
    "integral_IG2",
    "integral_FG",
    "integral_hess",
    "integral_gradF",
    "integral_Irho_limit",
    "integral_scalar_flux",
    "INTEGRANDS",
]


class QuadratureError(ArithmeticError):
    pass


@dataclass(frozen=True)
class QuadratureOptions:
    rtol: float = 1e-12
    atol: float = 1e-14
    nodes: int = 8
    start_panels: int = 8
    max_doublings: int = 10
    subtraction_order: int = 2
    subtraction_radius: float = 0.05  # as a fraction of L


@dataclass
class IntegralResult:
    value: float
    error_estimate: float
    endpoint_subtraction_order: int
    refinement_table: list[tuple[int, float]] = field(default_factory=list)
    name: str = ""

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "error_estimate": self.error_estimate,
            "endpoint_subtraction_order": self.endpoint_subtraction_order,
            "refinement_table": [[n, v] for n, v in self.refinement_table],
        }


def _panel_sum(func, lo, hi, n_panels, x, w):
    edges = np.linspace(lo, hi, n_panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    vals = np.asarray(func(nodes), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise QuadratureError("non-finite integrand value")
    contrib = (vals.reshape(n_panels, -1) * w[None, :]) * half[:, None]
    # compensated, fixed-order summation for reproducibility
    return math.fsum(contrib.ravel()), math.fsum(np.abs(contrib).ravel()), nodes.size


def integrate_panels(func: Callable[[np.ndarray], np.ndarray], lo: float, hi: float,
                     opts: QuadratureOptions | None = None) -> tuple[float, float, list[tuple[int, float]]]:
    """Composite Gauss-Legendre with panel doubling until successive values agree.

    Returns (value, error_estimate, [(n_nodes, value), ...]).
    """
    opts = opts or QuadratureOptions()
    if hi <= lo:
        return 0.0, 0.0, []
    x, w = np.polynomial.legendre.leggauss(opts.nodes)
    table: list[tuple[int, float]] = []
    prev = None
    panels = opts.start_panels
    for _ in range(opts.max_doublings + 1):
        q, qabs, n = _panel_sum(func, lo, hi, panels, x, w)
        table.append((n, q))
        if prev is not None:
            delta = abs(q - prev)
            floor = 64 * np.finfo(float).eps * qabs
            if delta <= max(opts.atol, opts.rtol * abs(q), floor):
                return q, max(delta, floor), table
        prev = q
        panels *= 2
    raise QuadratureError(f"no convergence after {table[-1][0]} nodes (last delta {abs(table[-1][1] - table[-2][1]):.3e})")


# integrands: f(profile, r, fields, state) -> value against dr
def _ig1(p, r, f, st):
    # |grad_gbar G|^2 G^-2 dv_gbar
    return OMEGA3 * f["gradG2"] * p.J(r)


def _ig2(p, r, f, st):
    return OMEGA3 * st["G"] * p.J(r)


def _fg(p, r, f, st):
    return -OMEGA3 * f["F"] * st["G"] * p.J(r)


def _hess(p, r, f, st):
    # 2 |trace-free Hess_g G|_g^2 |grad_g G|^2 G^-2 dv_g; dv_g = G^4 J
    return 2 * OMEGA3 * f["tfHess2"] * f["gradG2"] * st["G"] ** 2 * p.J(r)


def _gradF(p, r, f, st):
    # |grad_g F|^2 = G^-2 F'^2, dv_g = G^4 J
    return OMEGA3 * f["dF"] ** 2 * st["G"] ** 2 * p.J(r)


def _irho(p, r, f, st):
    # <grad F, grad G>_g G^-2 dv_g = G^-2 F'G' G^-2 G^4 J
    return OMEGA3 * f["dF"] * st["dG"] * p.J(r)


def _scalar(p, r, f, st):
    return OMEGA3 * p.scalar(r) / 6.0 * st["G"] * p.J(r)


INTEGRANDS = {
    "IG1": _ig1,
    "IG2": _ig2,
    "FG": _fg,
    "hess": _hess,
    "gradF": _gradF,
    "Irho": _irho,
    "scalar_flux": _scalar,
}


def _check_kappa(sol: GreenSolution) -> None:
    if abs(sol.kappa) > sol.options.kappa_tol:
        raise QuadratureError(f"log branch present (kappa = {sol.kappa:.3e}); integrands are not analytic at the pole")


def radial_integral(sol: GreenSolution, name: str, opts: QuadratureOptions | None = None) -> IntegralResult:
    """Integrate ``INTEGRANDS[name]`` over (0, L) for the given solution."""
    _check_kappa(sol)
    opts = opts or QuadratureOptions()
    p = sol.profile
    integrand = INTEGRANDS[name]

    def f_real(r):
        st = sol.state(r)
        return integrand(p, r, fields_from_state(p, r, st), st)

    k = opts.subtraction_order
    if k <= 0:
        val, err, table = integrate_panels(f_real, 0.0, sol.L, opts)
        return IntegralResult(val, err, 0, table, name)

    rho = opts.subtraction_radius * sol.L

    def f_complex(z):
        st = sol.pole_state(z)
        return integrand(p, z, fields_from_state(p, z, st), st)

    # Taylor polynomial of the integrand at the pole; the circle stays well
    # inside the region where the pole series is accurate
    c = cauchy_taylor(f_complex, 0.0, 0.5 * rho, n_terms=k + 1, n_points=32)[: k + 1]

    def f_sub(r):
        return f_real(r) - np.polynomial.polynomial.polyval(r, c)

    exact = math.fsum(c[j] * rho ** (j + 1) / (j + 1) for j in range(k + 1))
    v1, e1, t1 = integrate_panels(f_sub, 0.0, rho, opts)
    v2, e2, t2 = integrate_panels(f_real, rho, sol.L, opts)
    n = min(len(t1), len(t2))
    table = [(t1[-n + i][0] + t2[-n + i][0], exact + t1[-n + i][1] + t2[-n + i][1]) for i in range(n)]
    return IntegralResult(exact + v1 + v2, e1 + e2, k, table, name)


def integral_IG1(sol, opts=None) -> IntegralResult:
    """int G^-2 |grad_gbar G|^2 dv_gbar; equals 2 V for Einstein inputs."""
    return radial_integral(sol, "IG1", opts)


def integral_IG2(sol, opts=None) -> IntegralResult:
    """int G dv_gbar; equals 2 pi^2 for Einstein inputs."""
    return radial_integral(sol, "IG2", opts)


def integral_FG(sol, opts=None) -> IntegralResult:
    """-int F G dv_gbar; equals 3 (8 pi^2/3 - V) for Einstein inputs."""
    return radial_integral(sol, "FG", opts)


def integral_hess(sol, opts=None) -> IntegralResult:
    """2 int |trace-free Hess_g G|^2 |grad_g G|^2 G^-2 dv_g."""
    return radial_integral(sol, "hess", opts)


def integral_gradF(sol, opts=None) -> IntegralResult:
    """int |grad_g F|^2 dv_g."""
    return radial_integral(sol, "gradF", opts)


def integral_Irho_limit(sol, opts=None) -> IntegralResult:
    """int <grad F, grad G>_g G^-2 dv_g; equals 6 (8 pi^2/3 - V) for Einstein inputs."""
    return radial_integral(sol, "Irho", opts)


def integral_scalar_flux(sol, opts=None) -> IntegralResult:
    """int (R/6) G dv_gbar, which is 4 pi^2 for any profile (pole flux of L G = 0)."""
    return radial_integral(sol, "scalar_flux", opts)


def fg_consistency(sol, opts=None) -> float:
    """|(-int F G) - (-V - IG1 + 4 IG2)|, an algebraic rearrangement check."""
    fg = integral_FG(sol, opts).value
    rhs = -volume(sol.profile) - integral_IG1(sol, opts).value + 4 * integral_IG2(sol, opts).value
    return abs(fg - rhs)
