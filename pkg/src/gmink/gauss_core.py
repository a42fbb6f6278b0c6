"""Scalar Gaussian primitives.

Density, distribution function and its inverse, segment integrals of the
standard normal density, and the radial density ``f_r`` of the Gaussian
surface area measure of a centred ball together with its two-root structure.

All functions accept scalars or numpy arrays unless noted otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from .errors import BracketError, InputError

SQRT2 = math.sqrt(2.0)
SQRT2PI = math.sqrt(2.0 * math.pi)
INV_SQRT2PI = 1.0 / SQRT2PI

POS_INF = math.inf
NEG_INF = -math.inf


@dataclass(frozen=True)
class GaussScalarConfig:
    abs_tol: float = 1e-12
    max_iter: int = 200

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise InputError("abs_tol must be positive")
        if self.max_iter < 1:
            raise InputError("max_iter must be >= 1")


DEFAULT_SCALAR = GaussScalarConfig()


def phi(x):
    """Standard normal density."""
    x = np.asarray(x, dtype=float)
    out = INV_SQRT2PI * np.exp(-0.5 * x * x)
    return out[()] if out.ndim == 0 else out


def big_phi(x):
    """Standard normal CDF, via ``erfc`` so that both tails keep relative accuracy."""
    x = np.asarray(x, dtype=float)
    out = 0.5 * erfc(-x / SQRT2)
    return out[()] if out.ndim == 0 else out


def upper_tail(x):
    """``1 - big_phi(x)`` without cancellation."""
    x = np.asarray(x, dtype=float)
    out = 0.5 * erfc(x / SQRT2)
    return out[()] if out.ndim == 0 else out


# Acklam's rational approximation; relative error about 1.2e-9, polished by Newton below.
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def _acklam(p: float) -> float:
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        return (((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]) / \
            ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0)
    if p > 1.0 - _P_LOW:
        return -_acklam(1.0 - p)
    q = p - 0.5
    r = q * q
    return (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q / \
        (((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0)


def _inv_lower(p: float, cfg: GaussScalarConfig) -> float:
    # p <= 1/2: solve big_phi(x) = p on x <= 0 with a bracketed Newton iteration.
    x = min(_acklam(p), 0.0)
    lo, hi = -40.0, 0.0
    for _ in range(cfg.max_iter):
        f = float(big_phi(x)) - p
        if f > 0:
            hi = x
        else:
            lo = x
        d = float(phi(x))
        step = f / d if d > 0 else math.inf
        x_new = x - step
        if not (lo < x_new < hi):
            x_new = 0.5 * (lo + hi)
        if abs(x_new - x) <= 4e-16 * max(1.0, abs(x)):
            return x_new
        x = x_new
    return x


def inv_big_phi(p, cfg: GaussScalarConfig = DEFAULT_SCALAR):
    """Inverse of the standard normal CDF on the open interval (0, 1)."""
    arr = np.asarray(p, dtype=float)
    if np.any(~(arr > 0.0)) or np.any(~(arr < 1.0)):
        raise InputError("inv_big_phi is defined only on the open interval (0, 1)")
    flat = arr.ravel()
    out = np.empty_like(flat)
    for i, pi in enumerate(flat):
        if pi <= 0.5:
            out[i] = _inv_lower(float(pi), cfg)
        else:
            out[i] = -_inv_lower(1.0 - float(pi), cfg)
    out = out.reshape(arr.shape)
    return out[()] if out.ndim == 0 else out


def inv_big_phi_derivative(p, cfg: GaussScalarConfig = DEFAULT_SCALAR):
    """``d/dp inv_big_phi(p) = sqrt(2 pi) exp(inv_big_phi(p)^2 / 2)``."""
    x = inv_big_phi(p, cfg)
    return SQRT2PI * np.exp(0.5 * np.asarray(x) ** 2)


def gauss_segment_integral(a: float, b: float) -> float:
    """Standard normal mass of ``[a, b]``; infinite endpoints are allowed."""
    if math.isnan(a) or math.isnan(b):
        raise InputError("segment endpoints must not be NaN")
    if a > b:
        raise InputError(f"reversed bounds: a={a!r} > b={b!r}")
    if a == b:
        return 0.0
    if a >= 0.0:
        return float(upper_tail(a) - upper_tail(b))
    if b <= 0.0:
        return float(big_phi(b) - big_phi(a))
    return float(1.0 - upper_tail(b) - big_phi(a))


def ball_density(r, n: int):
    """``(2 pi)^{-n/2} exp(-r^2/2) r^{n-1}``: density of the measure of a ball of radius r."""
    r = np.asarray(r, dtype=float)
    out = (2.0 * math.pi) ** (-0.5 * n) * np.exp(-0.5 * r * r) * r ** (n - 1)
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True)
class BallDensityRoots:
    r_small: float
    r_large: float
    r_peak: float
    dimension: int

    @property
    def is_unique(self) -> bool:
        return self.r_small == self.r_large


@dataclass(frozen=True)
class NoSolution:
    c: float
    peak_value: float
    dimension: int


def _bisect(f, lo: float, hi: float, cfg: GaussScalarConfig) -> float:
    flo = f(lo)
    for _ in range(cfg.max_iter):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo <= 2e-16 * hi:
            break
    root = 0.5 * (lo + hi)
    if abs(f(root)) > cfg.abs_tol:
        raise BracketError("bisection did not reach abs_tol", best=(lo, hi))
    return root


def ball_roots(c: float, n: int, cfg: GaussScalarConfig = DEFAULT_SCALAR):
    """Radii r with ``ball_density(r, n) == c``.

    Returns a :class:`BallDensityRoots` (two roots bracketing the peak
    ``sqrt(n-1)``, or a single repeated root at the peak) or
    :class:`NoSolution` when ``c`` exceeds the maximum density.
    """
    if not c > 0:
        raise InputError("c must be positive")
    if n < 2:
        raise InputError("dimension must be >= 2")
    r_peak = math.sqrt(n - 1)
    peak = float(ball_density(r_peak, n))
    if abs(c - peak) <= cfg.abs_tol:
        return BallDensityRoots(r_peak, r_peak, r_peak, n)
    if c > peak:
        return NoSolution(c, peak, n)

    def f(r):
        return float(ball_density(r, n)) - c

    lo = 0.5 * r_peak
    while f(lo) > 0:
        lo *= 0.5
    hi = 2.0 * r_peak
    while f(hi) > 0:
        hi *= 2.0
    r_small = _bisect(f, lo, r_peak, cfg)
    r_large = _bisect(f, r_peak, hi, cfg)
    return BallDensityRoots(r_small, r_large, r_peak, n)
