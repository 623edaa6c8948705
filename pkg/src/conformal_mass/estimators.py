"""scikit-learn style wrappers.

``fit`` takes a profile (object or name), ``predict`` evaluates G at radii,
``transform`` returns the blow-up field matrix. Hyperparameters live in
``__init__`` so ``get_params``/``set_params``/``clone`` work as usual.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .blowup import FIELD_NAMES, compute_fields
from .greensolve import SolverOptions, solve_green
from .mass import mass_report
from .profiles import WarpedProfile, profile_from_name
from .quadrature import QuadratureOptions

__all__ = ["GreenFunctionSolver", "BlowupMassEstimator", "check_profile", "check_radii"]


def check_profile(profile) -> WarpedProfile:
    """Accept a WarpedProfile or a registered profile name."""
    if isinstance(profile, WarpedProfile):
        return profile
    if isinstance(profile, str):
        return profile_from_name(profile)
    raise TypeError(f"expected a WarpedProfile or profile name, got {type(profile).__name__}")


def check_radii(r, L: float) -> np.ndarray:
    """Validate radii as a 1-D float array inside (0, L); a single column is flattened."""
    arr = check_array(np.asarray(r, dtype=float).reshape(-1, 1) if np.ndim(r) <= 1 else r,
                      ensure_2d=True, dtype=np.float64)
    if arr.shape[1] != 1:
        raise ValueError(f"radii must be a single column, got shape {arr.shape}")
    arr = arr[:, 0]
    if np.any(arr <= 0) or np.any(arr >= L):
        raise ValueError(f"radii must lie in the open interval (0, {L})")
    return arr


class GreenFunctionSolver(TransformerMixin, BaseEstimator):
    """Green's function of the conformal Laplacian for a radial profile."""

    def __init__(self, n=4096, order=12, r0=None, u0=None, r_mid=None, rtol=1e-13, atol=1e-15,
                 kappa_tol=1e-8):
        self.n = n
        self.order = order
        self.r0 = r0
        self.u0 = u0
        self.r_mid = r_mid
        self.rtol = rtol
        self.atol = atol
        self.kappa_tol = kappa_tol

    def _options(self) -> SolverOptions:
        return SolverOptions(n=int(self.n), order=int(self.order), r0=self.r0, u0=self.u0,
                             r_mid=self.r_mid, rtol=float(self.rtol), atol=float(self.atol),
                             kappa_tol=float(self.kappa_tol))

    def fit(self, X, y=None):
        self.profile_ = check_profile(X)
        self.solution_ = solve_green(self.profile_, self._options())
        self.A_ = self.solution_.A
        self.kappa_ = self.solution_.kappa
        self.mass_series_ = self.solution_.mass_series
        return self

    def predict(self, X):
        """G at the given radii."""
        check_is_fitted(self, "solution_")
        r = check_radii(X, self.profile_.L)
        return self.solution_.state(r)["G"]

    def transform(self, X):
        """Field matrix with columns ``FIELD_NAMES`` at the given radii."""
        check_is_fitted(self, "solution_")
        r = check_radii(X, self.profile_.L)
        cols = compute_fields(self.profile_, self.solution_, r).columns()
        return np.column_stack([cols[k] for k in FIELD_NAMES])

    def get_feature_names_out(self, input_features=None):
        return np.asarray(FIELD_NAMES, dtype=object)


class BlowupMassEstimator(BaseEstimator):
    """Fit runs the solve and every mass route; ``predict`` returns the canonical mass."""

    def __init__(self, n=4096, order=12, rtol=1e-13, route_tol=1e-3, quad_rtol=1e-12):
        self.n = n
        self.order = order
        self.rtol = rtol
        self.route_tol = route_tol
        self.quad_rtol = quad_rtol

    def fit(self, X, y=None):
        self.profile_ = check_profile(X)
        self.solution_ = solve_green(self.profile_, SolverOptions(n=int(self.n), order=int(self.order),
                                                                 rtol=float(self.rtol)))
        self.report_ = mass_report(self.profile_, self.solution_, float(self.route_tol),
                                   QuadratureOptions(rtol=float(self.quad_rtol)))
        self.mass_ = self.report_.mass_series
        return self

    def predict(self, X=None):
        check_is_fitted(self, "report_")
        return self.mass_
