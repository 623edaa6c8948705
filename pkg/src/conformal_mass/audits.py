"""Inequality audits on computed data and on pure arithmetic inputs.

Audits record margins and never raise on a violated inequality. A verdict is
``not-applicable`` only when an explicit hypothesis of the inequality fails.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from numbers import Rational

from .profiles import ROUND_VOLUME

__all__ = [
    "Verdict",
    "AuditEntry",
    "AuditReport",
    "audit_bishop",
    "audit_mass_gap",
    "audit_min_g",
    "audit_diameter",
    "audit_mass_identity",
    "audit_dF_mass",
    "audit_cauchy_schwarz",
    "audit_squared_chain",
    "audit_volume_ratio",
    "audit_selfdual_weyl",
    "is_anti_self_dual",
    "selfdual_weyl_energy",
    "audit_topological_gap",
    "gap_function",
    "topological_bound",
]

PI2 = math.pi**2


class Verdict(str, Enum):
    HOLDS = "holds"
    FAILS = "fails"
    NOT_APPLICABLE = "not-applicable"


@dataclass
class AuditEntry:
    name: str
    reference: str
    inputs: dict
    lhs: float
    rhs: float
    margin: float
    tolerance: float
    verdict: Verdict
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "reference": self.reference,
            "inputs": dict(self.inputs),
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "tolerance": self.tolerance,
            "verdict": self.verdict.value,
            "note": self.note,
        }


@dataclass
class AuditReport:
    entries: dict[str, AuditEntry] = field(default_factory=dict)

    def add(self, entry: AuditEntry) -> AuditEntry:
        self.entries[entry.name] = entry
        return entry

    @property
    def failed(self) -> list[str]:
        return [k for k, e in self.entries.items() if e.verdict is Verdict.FAILS]

    def to_dict(self) -> dict:
        return {k: e.to_dict() for k, e in self.entries.items()}


def _judge(name, reference, inputs, lhs, rhs, tol, note="", applicable=True) -> AuditEntry:
    """Entry for the inequality lhs >= rhs."""
    margin = float(lhs - rhs)
    if not applicable:
        verdict = Verdict.NOT_APPLICABLE
    else:
        verdict = Verdict.HOLDS if margin >= -tol else Verdict.FAILS
    return AuditEntry(name, reference, inputs, float(lhs), float(rhs), margin, tol, verdict, note)


def audit_bishop(vol: float, tol: float = 1e-8) -> AuditEntry:
    """Bishop comparison: V <= 8 pi^2 / 3 for Ric = 3."""
    if not vol > 0:
        raise ValueError("volume must be positive")
    return _judge("bishop", "Bishop volume comparison", {"V": vol},
                  ROUND_VOLUME, vol, tol * ROUND_VOLUME)


def audit_mass_gap(m: float, vol: float, tol: float = 1e-6) -> AuditEntry:
    """Mass gap: 8 pi^2 m V >= 12 (8 pi^2/3 - V) (2 pi^2/3 + 8 pi^2/3 - V)."""
    deficit = ROUND_VOLUME - vol
    lhs = 8 * PI2 * m * vol
    rhs = 12 * deficit * (2 * PI2 / 3 + deficit)
    return _judge("mass_volume_gap", "mass-volume gap inequality", {"m": m, "V": vol},
                  lhs, rhs, tol * max(1.0, abs(lhs), abs(rhs)))


def gap_function(theta):
    """f(x) = (1 - x) + 5 (1 - x)^2 / x on (0, 1]; exact for rational input."""
    if isinstance(theta, Rational):
        theta = Fraction(theta)
        one = Fraction(1)
    else:
        theta = float(theta)
        one = 1.0
    if not (0 < theta <= 1):
        raise ValueError(f"gap_function needs theta in (0, 1], got {theta}")
    return (one - theta) + 5 * (one - theta) ** 2 / theta


def topological_bound(chi: int, tau: int):
    """(1 - h/6) + (30/h) (1 - h/6)^2 with h = chi + 3 tau / 2, in exact arithmetic."""
    h = Fraction(chi) + Fraction(3, 2) * Fraction(tau)
    if h <= 0:
        raise ValueError(f"topological_bound needs h = chi + 3 tau/2 > 0, got {h}")
    x = 1 - h / 6
    return x + 30 / h * x**2


def audit_min_g(m: float, min_G: float, tol: float = 1e-8) -> AuditEntry:
    """m >= 4 min G - 1, stated for m > 3."""
    applicable = m > 3
    return _judge("min_G", "mass bounded below by the minimum of G", {"m": m, "minG": min_G},
                  m, 4 * min_G - 1, tol * max(1.0, abs(m)), applicable=applicable,
                  note="" if applicable else "hypothesis m > 3 not met; sides reported")


def audit_diameter(m: float, min_G: float, diam: float, tol: float = 1e-8) -> AuditEntry:
    """diam >= 2 arctan(1/sqrt(4 min G - 1)) and diam >= 2 arctan(1/sqrt(m)), for m > 3."""
    q = 4 * min_G - 1
    b1 = math.pi if q <= 0 else 2 * math.atan(1 / math.sqrt(q))
    b2 = math.pi if m <= 0 else 2 * math.atan(1 / math.sqrt(m))
    applicable = m > 3
    e = _judge("diameter", "diameter bounds from the mass", {"m": m, "minG": min_G, "diam": diam},
               diam, max(b1, b2), tol, applicable=applicable,
               note=f"bound_minG={b1!r}; bound_m={b2!r}"
               + ("" if applicable else "; hypothesis m > 3 not met, sides reported"))
    return e


def audit_mass_identity(m: float, vol: float, i_hess: float, i_F: float, tol: float = 1e-3) -> AuditEntry:
    """Residual of 16 pi^2 m = 6 (8 pi^2/3 - V) + I_hess + I_F (an equality)."""
    lhs = 16 * PI2 * m
    rhs = 6 * (ROUND_VOLUME - vol) + i_hess + i_F
    resid = abs(lhs - rhs)
    e = AuditEntry("mass_identity", "integral mass identity",
                   {"m": m, "V": vol, "I_hess": i_hess, "I_F": i_F},
                   lhs, rhs, -resid, tol * 16 * PI2,
                   Verdict.HOLDS if resid <= tol * 16 * PI2 else Verdict.FAILS,
                   note=f"relative residual {resid / (16 * PI2)!r}")
    return e


def audit_dF_mass(m: float, vol: float, i_F: float, tol: float = 1e-6) -> AuditEntry:
    """I_F <= (48/5) pi^2 m - (18/5) (8 pi^2/3 - V)."""
    rhs = 48 / 5 * PI2 * m - 18 / 5 * (ROUND_VOLUME - vol)
    return _judge("dF_mass_bound", "gradient-of-F bound by the mass", {"m": m, "V": vol, "I_F": i_F},
                  rhs, i_F, tol * max(1.0, abs(rhs)))


def audit_cauchy_schwarz(i_rho: float, i_F: float, ig1: float, tol: float = 1e-8) -> AuditEntry:
    """I_rho <= sqrt(I_F * IG1)."""
    rhs = math.sqrt(max(i_F, 0.0) * max(ig1, 0.0))
    return _judge("cauchy_schwarz", "Cauchy-Schwarz step of the gap argument",
                  {"I_rho": i_rho, "I_F": i_F, "IG1": ig1}, rhs, i_rho, tol)


def audit_squared_chain(m: float, vol: float, i_rho: float, tol: float = 1e-6) -> AuditEntry:
    """Squared chain: (6 (8pi^2/3 - V))^2 <= I_F 2V with I_F bounded by the mass.

    Substituting I_rho = 6 (8 pi^2/3 - V) and the I_F bound reproduces the
    mass gap inequality; this entry checks the squared form on the data.
    """
    deficit = ROUND_VOLUME - vol
    i_F_bound = 48 / 5 * PI2 * m - 18 / 5 * deficit
    lhs = i_F_bound * 2 * vol
    rhs = i_rho**2
    return _judge("squared_chain", "squared Cauchy-Schwarz chain", {"m": m, "V": vol, "I_rho": i_rho},
                  lhs, rhs, tol * max(1.0, abs(lhs)))


def selfdual_weyl_energy(vol: float, chi: int, tau: int) -> float:
    """int |W+|^2 = 2 pi^2 (2 chi + 3 tau) - 3 V for an Einstein metric with R = 12."""
    return 2 * PI2 * (2 * chi + 3 * tau) - 3 * vol


def audit_selfdual_weyl(vol: float, chi: int, tau: int, tol: float = 1e-8) -> AuditEntry:
    """int |W+|^2 >= 0 via Chern-Gauss-Bonnet; zero means anti-self-dual."""
    w = selfdual_weyl_energy(vol, chi, tau)
    asd = abs(w) <= tol * 16 * PI2
    return _judge("selfdual_weyl", "Chern-Gauss-Bonnet and signature formulas",
                  {"V": vol, "chi": chi, "tau": tau}, w, 0.0, tol * 16 * PI2,
                  note="anti-self-dual (W+ = 0)" if asd else "not anti-self-dual")


def is_anti_self_dual(vol: float, chi: int, tau: int, tol: float = 1e-8) -> bool:
    return abs(selfdual_weyl_energy(vol, chi, tau)) <= tol * 16 * PI2


def audit_volume_ratio(vol: float, chi: int, tau: int, tol: float = 1e-8) -> AuditEntry:
    """theta_g = 3 V / (8 pi^2) <= theta_M = (2 chi + 3 tau) / 12, for non-ASD metrics."""
    theta_g = 3 * vol / (8 * PI2)
    theta_M = (2 * chi + 3 * tau) / 12
    asd = is_anti_self_dual(vol, chi, tau)
    return _judge("volume_ratio", "volume ratio against the topological ratio",
                  {"V": vol, "chi": chi, "tau": tau}, theta_M, theta_g, tol, applicable=not asd,
                  note="anti-self-dual: the exceptional case of the dichotomy" if asd else "")


def audit_topological_gap(m: float, vol: float, chi: int, tau: int, tol: float = 1e-6) -> AuditEntry:
    """m >= topological_bound(chi, tau) unless the metric is anti-self-dual."""
    h = chi + 1.5 * tau
    inputs = {"m": m, "V": vol, "chi": chi, "tau": tau}
    if h <= 0:
        return _judge("topological_gap", "topological mass gap", inputs, m, math.nan, tol,
                      applicable=False, note="h <= 0")
    bound = float(topological_bound(chi, tau))
    asd = is_anti_self_dual(vol, chi, tau)
    return _judge("topological_gap", "topological mass gap", inputs, m, bound,
                  tol * max(1.0, abs(bound)), applicable=not asd,
                  note="anti-self-dual: the exceptional case of the dichotomy, bound reported only" if asd else "")
