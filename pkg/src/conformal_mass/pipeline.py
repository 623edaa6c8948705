"""End-to-end run: profile, solve, fields, integrals, masses, audits."""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, replace
from fractions import Fraction

import numpy as np

from . import audits as au
from ._numerics import observed_order
from .blowup import (compute_fields, gradient_excess, residual_dF_schouten,
                     residual_DG, residual_laplace_F)
from .greensolve import GreenSolution, SolverOptions, solve_green
from .mass import mass_report
from .profiles import ROUND_VOLUME, WarpedProfile, profile_from_name, volume
from .quadrature import INTEGRANDS, QuadratureOptions, radial_integral

__all__ = [
    "ScenarioConfig",
    "StageError",
    "run_scenario",
    "convergence_table",
    "falsification_entries",
    "to_jsonable",
]

# tolerance for declaring an Einstein-only identity violated
FALSIFICATION_TOL = 1e-3


@dataclass(frozen=True)
class ScenarioConfig:
    """Every configurable knob; unknown keys are rejected by :meth:`from_mapping`."""

    profile: str = "round-s4"
    n: int = 4096
    order: int = 12
    r0: float | None = None
    u0: float | None = None
    r_mid: float | None = None
    tol: float = 1e-13
    atol: float = 1e-15
    kappa_tol: float = 1e-8
    quad_rtol: float = 1e-12
    subtraction_order: int = 2
    route_tol: float = 1e-3
    levels: tuple[int, ...] = (1024, 2048, 4096)
    out: str | None = None
    fields_out: str | None = None
    deterministic: bool = False
    strict: bool = False

    @classmethod
    def from_mapping(cls, data: dict) -> "ScenarioConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = sorted(set(data) - known)
        if unknown:
            raise KeyError(f"unknown configuration keys: {', '.join(unknown)}")
        return cls().updated(data)

    def updated(self, data: dict) -> "ScenarioConfig":
        kw = {}
        for key, value in data.items():
            if key not in self.__dataclass_fields__:
                raise KeyError(f"unknown configuration key: {key}")
            kw[key] = _coerce(key, value, getattr(ScenarioConfig(), key))
        cfg = replace(self, **kw)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if self.n < 8:
            raise ValueError("n must be at least 8")
        if self.order < 4:
            raise ValueError("order must be at least 4")
        if not 0 < self.tol < 1e-3:
            raise ValueError("tol must be in (0, 1e-3)")
        if len(self.levels) < 3:
            raise ValueError("convergence needs at least 3 refinement levels")
        prof = profile_from_name(self.profile)
        self.solver_options().resolved(prof.L)

    def solver_options(self, n: int | None = None) -> SolverOptions:
        return SolverOptions(n=self.n if n is None else n, order=self.order, r0=self.r0, u0=self.u0,
                             r_mid=self.r_mid, rtol=self.tol, atol=self.atol, kappa_tol=self.kappa_tol)

    def quad_options(self) -> QuadratureOptions:
        return QuadratureOptions(rtol=self.quad_rtol, subtraction_order=self.subtraction_order)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["levels"] = list(self.levels)
        return d


def _coerce(key, value, default):
    if key == "levels":
        if isinstance(value, str):
            value = [v for v in value.replace(",", " ").split() if v]
        return tuple(int(v) for v in value)
    if key in ("r0", "u0", "r_mid", "out", "fields_out"):
        if value is None or (isinstance(value, str) and value.lower() in ("", "none", "null")):
            return None
        return str(value) if key in ("out", "fields_out") else float(value)
    if isinstance(default, bool):
        if isinstance(value, str):
            low = value.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(f"{key}: expected a boolean, got {value!r}")
            return low in ("true", "1", "yes")
        return bool(value)
    if isinstance(default, int):
        if isinstance(value, float) and not value.is_integer():
            raise ValueError(f"{key}: expected an integer, got {value!r}")
        return int(value)
    if isinstance(default, float):
        return float(value)
    return str(value)


class StageError(RuntimeError):
    """A pipeline stage failed; ``partial`` carries whatever was computed."""

    def __init__(self, stage: str, message: str, partial: dict):
        super().__init__(f"{stage}: {message}")
        self.stage = stage
        self.partial = partial


def to_jsonable(obj):
    """Plain JSON types; non-finite floats become None."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}" if obj.denominator != 1 else obj.numerator
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    return obj


def falsification_entries(profile: WarpedProfile, sol: GreenSolution, fields) -> dict:
    """Einstein-only identities evaluated regardless of hypotheses; ``violated`` beyond 1e-3."""
    out = {}
    out["kappa_detected"] = {"value": sol.kappa, "violated": abs(sol.kappa) > sol.options.kappa_tol,
                             "tolerance": sol.options.kappa_tol}
    dg = residual_DG(fields, force=True)
    out["DG_residual"] = {"value": dg, "violated": dg > FALSIFICATION_TOL, "tolerance": FALSIFICATION_TOL}
    fmax = float(np.max(fields.F))
    out["F_nonpositive"] = {"value": fmax, "violated": fmax > FALSIFICATION_TOL, "tolerance": FALSIFICATION_TOL}
    sch = residual_dF_schouten(fields, force=True)
    out["dF_schouten_residual"] = {"value": sch, "violated": sch > FALSIFICATION_TOL,
                                   "tolerance": FALSIFICATION_TOL}
    return out


def _gradient_estimate(fields, einstein: bool) -> au.AuditEntry:
    excess = gradient_excess(fields)
    scaled = excess / np.maximum(1.0, 4 * fields.G)
    worst = float(np.max(scaled))
    e = au._judge("gradient_estimate", "sharp gradient estimate |grad G|^2 <= 4G - 1",
                  {"max_excess": float(np.max(excess))}, 0.0, worst, 1e-6, applicable=einstein,
                  note="max of (|grad G|^2 - 4G + 1)/max(1, 4G)")
    return e


def _pointwise_tf_bound(fields, einstein: bool) -> au.AuditEntry:
    lhs = 3 * fields.tfHess2 * fields.gradG2
    rhs = fields.dF**2
    scale = max(float(np.max(lhs)), 1.0)
    worst = float(np.max(rhs - lhs) / scale)
    return au._judge("pointwise_trace_free_bound", "F'^2 <= 3 |trace-free Hess|^2 |grad G|^2",
                     {"scale": scale}, 0.0, worst, 1e-8, applicable=einstein,
                     note="relative to max(1, max of the right-hand side)")


def _na(entry: au.AuditEntry, reason: str) -> au.AuditEntry:
    entry.verdict = au.Verdict.NOT_APPLICABLE
    entry.note = (entry.note + "; " if entry.note else "") + reason
    return entry


def run_scenario(cfg: ScenarioConfig, profile: WarpedProfile | None = None) -> dict:
    """Full pipeline; raises StageError('solver' | 'quadrature' | ...) with a partial report."""
    t_start = time.perf_counter()
    profile = profile_from_name(cfg.profile) if profile is None else profile
    report: dict = {"config": cfg.to_dict()}
    vol = volume(profile)
    report["profile"] = {**profile.summary(), "volume": vol, "volume_over_round": vol / ROUND_VOLUME,
                         "euler_characteristic": profile.euler_characteristic,
                         "signature": profile.signature}
    try:
        sol = solve_green(profile, cfg.solver_options())
    except Exception as exc:  # noqa: BLE001 - mapped to an exit code
        raise StageError("solver", str(exc), report) from exc
    report["solution"] = sol.summary()
    einstein = profile.einstein_certified
    fields = compute_fields(profile, sol)
    report["fields"] = {
        "max_F": float(np.max(fields.F)),
        "min_F": float(np.min(fields.F)),
        "max_tfHess2": float(np.max(fields.tfHess2)),
        "min_lapG": float(np.min(fields.lapG)),
        "trace_consistency": float(np.max(np.abs(fields.lam_r + 2 * fields.lam_a + fields.lam_b
                                                 - fields.G**2 * fields.lapG)
                                          / np.maximum(1.0, np.abs(fields.G**2 * fields.lapG)))),
    }
    if einstein:
        report["fields"]["residual_DG"] = residual_DG(fields)
        report["fields"]["residual_dF_schouten"] = residual_dF_schouten(fields)
        report["fields"]["residual_laplace_F"] = residual_laplace_F(fields, profile, sol)
    report["falsification"] = falsification_entries(profile, sol, fields)

    ints = {}
    if abs(sol.kappa) <= sol.options.kappa_tol:
        try:
            for name in INTEGRANDS:
                ints[name] = radial_integral(sol, name, cfg.quad_options())
        except Exception as exc:  # noqa: BLE001
            report["integrals"] = {k: v.to_dict() for k, v in ints.items()}
            raise StageError("quadrature", str(exc), report) from exc
    report["integrals"] = {k: v.to_dict() for k, v in ints.items()}

    mrep = mass_report(profile, sol, cfg.route_tol, cfg.quad_options(), vol=vol)
    report["mass"] = mrep.to_dict()

    report["audits"] = run_audits(profile, sol, fields, vol, ints, mrep).to_dict()
    report["arithmetic"] = {
        "gap_function_1_3": au.gap_function(Fraction(1, 3)),
        "gap_function_1_4": au.gap_function(Fraction(1, 4)),
        "topological_bound_2_0": au.topological_bound(2, 0),
        "topological_bound_3_m1": au.topological_bound(3, -1),
    }
    if not cfg.deterministic:
        report["wall_clock_seconds"] = time.perf_counter() - t_start
    return to_jsonable(report)


def run_audits(profile, sol, fields, vol, ints, mrep) -> au.AuditReport:
    """Every audit on the run data; Einstein-only audits are not-applicable otherwise."""
    rep = au.AuditReport()
    einstein = profile.einstein_certified
    why = "background is not Einstein-certified"
    m = mrep.mass_series

    def add(entry, needs_einstein=True):
        if needs_einstein and not einstein:
            entry = _na(entry, why)
        rep.add(entry)

    add(au.audit_bishop(vol))
    add(_gradient_estimate(fields, einstein))
    add(_pointwise_tf_bound(fields, einstein))
    if m is not None:
        add(au.audit_mass_gap(m, vol))
        add(au.audit_min_g(m, sol.min_G), needs_einstein=False)
        add(au.audit_diameter(m, sol.min_G, profile.L), needs_einstein=False)
        if "hess" in ints:
            add(au.audit_mass_identity(m, vol, ints["hess"].value, ints["gradF"].value))
            add(au.audit_dF_mass(m, vol, ints["gradF"].value))
            add(au.audit_cauchy_schwarz(ints["Irho"].value, ints["gradF"].value, ints["IG1"].value))
            add(au.audit_squared_chain(m, vol, ints["Irho"].value))
    chi, tau = profile.euler_characteristic, profile.signature
    if chi is not None and tau is not None:
        add(au.audit_selfdual_weyl(vol, chi, tau))
        add(au.audit_volume_ratio(vol, chi, tau))
        if m is not None:
            add(au.audit_topological_gap(m, vol, chi, tau))
    return rep


def convergence_table(cfg: ScenarioConfig, profile: WarpedProfile | None = None) -> dict:
    """(n, A, mass routes, identity residual) per level, plus observed orders.

    The matching radii shrink like 1/n from their defaults at the finest
    level, so each level is a genuinely different discretization.
    """
    levels = sorted(cfg.levels)
    if len(levels) < 3:
        raise ValueError("convergence needs at least 3 refinement levels")
    profile = profile_from_name(cfg.profile) if profile is None else profile
    vol = volume(profile)
    n_ref = levels[-1]
    rows = []
    for n in levels:
        scale = n_ref / n
        r0 = (cfg.r0 if cfg.r0 is not None else 1e-3 * profile.L) * scale
        u0 = (cfg.u0 if cfg.u0 is not None else 1e-3 * profile.L) * scale
        opts = replace(cfg.solver_options(n), r0=r0, u0=u0)
        try:
            sol = solve_green(profile, opts)
        except Exception as exc:  # noqa: BLE001
            raise StageError("solver", str(exc), {"levels": rows}) from exc
        row = {"n": n, "r0": r0, "u0": u0, "A": sol.A, "kappa": sol.kappa,
               "mass_series": sol.mass_series, "ode_defect": sol.ode_defect}
        if sol.mass_series is not None:
            mr = mass_report(profile, sol, cfg.route_tol, cfg.quad_options(), vol=vol)
            row.update(mass_identity=mr.mass_identity, mass_fasymptote=mr.mass_fasymptote,
                       mass_flux=mr.mass_flux,
                       identity_residual=abs(mr.mass_identity - sol.mass_series))
        rows.append(row)
    orders = {}
    for key in ("A", "mass_series", "mass_identity", "mass_fasymptote"):
        vals = [r.get(key) for r in rows[-3:]]
        if all(v is not None for v in vals):
            orders[key] = observed_order(*vals)
    return to_jsonable({"profile": profile.name, "levels": rows, "observed_order": orders,
                        "note": "nan order means successive differences are at rounding level"})
