"""Small numerical helpers shared across modules."""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "cauchy_taylor",
    "poly_eval",
    "series_div",
    "series_mul",
    "richardson_extrapolate",
    "observed_order",
]


def cauchy_taylor(
    func: Callable[[np.ndarray], np.ndarray],
    center: float,
    radius: float,
    n_terms: int = 64,
    n_points: int = 128,
) -> np.ndarray:
    """Taylor coefficients of an analytic function from samples on a circle.

    ``func`` must accept complex arrays. The trapezoidal rule on the circle
    is spectrally accurate, so the coefficients carry an absolute error of
    roughly ``eps * max|func| / radius**k``.
    """
    if n_points < n_terms:
        raise ValueError("n_points must be at least n_terms")
    theta = 2.0 * np.pi * np.arange(n_points) / n_points
    z = center + radius * np.exp(1j * theta)
    values = np.asarray(func(z), dtype=complex)
    coeffs = np.fft.fft(values) / n_points
    k = np.arange(n_terms)
    return (coeffs[:n_terms] / radius**k).real


def poly_eval(coeffs: np.ndarray, x, deriv: int = 0):
    """Evaluate a power series (ascending coefficients) or its derivative."""
    c = np.asarray(coeffs)
    for _ in range(deriv):
        c = c[1:] * np.arange(1, len(c))
    if len(c) == 0:
        return np.zeros_like(np.asarray(x, dtype=complex if np.iscomplexobj(x) else float))
    # Horner; works for complex arrays too
    x = np.asarray(x)
    out = np.full(x.shape, c[-1], dtype=np.result_type(x, c))
    for ck in c[-2::-1]:
        out = out * x + ck
    return out


def series_mul(a: np.ndarray, b: np.ndarray, n: int | None = None) -> np.ndarray:
    n = min(len(a), len(b)) if n is None else n
    return np.convolve(a, b)[:n]


def series_div(a: np.ndarray, b: np.ndarray, n: int | None = None) -> np.ndarray:
    """Truncated power-series quotient a/b; requires b[0] != 0."""
    n = min(len(a), len(b)) if n is None else n
    if b[0] == 0:
        raise ZeroDivisionError("series denominator has zero constant term")
    out = np.zeros(n)
    for k in range(n):
        acc = a[k] if k < len(a) else 0.0
        for j in range(1, min(k, len(b) - 1) + 1):
            acc -= b[j] * out[k - j]
        out[k] = acc / b[0]
    return out


def richardson_extrapolate(values: Sequence[float], p: float, ratio: float = 2.0) -> float:
    """Richardson extrapolation of a sequence with error ``c * h**p + c2 * h**(2p) + ...``.

    ``values`` are ordered from the finest step to the coarsest, with the
    step growing by ``ratio`` between entries.
    """
    if len(values) < 2:
        raise ValueError("richardson_extrapolate needs at least two values")
    table = [float(v) for v in values]
    for j in range(1, len(table)):
        factor = ratio ** (p * j)
        table = [(factor * table[k] - table[k + 1]) / (factor - 1.0) for k in range(len(table) - 1)]
    return table[0]


def observed_order(coarse: float, mid: float, fine: float, ratio: float = 2.0) -> float:
    """Convergence order from three successive refinements; nan when at the noise floor."""
    d1 = abs(mid - coarse)
    d2 = abs(fine - mid)
    if d1 == 0.0 or d2 == 0.0:
        return math.nan
    return math.log(d1 / d2) / math.log(ratio)
