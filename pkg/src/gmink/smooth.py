"""Smooth even Gaussian Minkowski problem on the circle.

Unknown: a pi-periodic support function ``h`` sampled at ``theta_j = j pi / N``.
Equation (rearranged so the unknown appears linearly in the leading term)::

    R(h) = h'' + h - 2 pi exp((h'^2 + h^2) / 2) f = 0,

with 4th-order periodic central differences.  Newton's method follows the
homotopy ``f_t = (1 - t) c0 + t f`` from the large constant root ``r0`` of
``exp(-r^2/2) r / (2 pi) = c0``.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import BranchLoss, ConvexityLoss, InputError, MassTooLarge, NoConvergence, StepCollapse
from .gauss_core import INV_SQRT2PI, BallDensityRoots, ball_roots
from .geometry import HBody, half_circle_directions, wulff_shape_2d
from .measure import DEFAULT_QUAD, QuadratureConfig, gaussian_volume

log = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True, eq=False)
class SupportProfile:
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 1 or v.size < 8:
            raise InputError("support profile needs at least 8 samples")
        if not np.all(np.isfinite(v)) or np.any(v <= 0):
            raise InputError("support values must be positive and finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def N(self) -> int:
        return self.values.size

    @property
    def theta(self) -> np.ndarray:
        return np.arange(self.N) * math.pi / self.N

    def curvature_radius(self) -> np.ndarray:
        """``h'' + h`` at the nodes (4th-order differences)."""
        return second_derivative(self.values) + self.values

    def is_convex(self) -> bool:
        return bool(np.all(self.curvature_radius() > 0))


@dataclass(frozen=True, eq=False)
class DensityProfile:
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 1 or v.size < 8:
            raise InputError("density profile needs at least 8 samples")
        if not np.all(np.isfinite(v)) or np.any(v <= 0):
            raise InputError("density values must be positive and finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def N(self) -> int:
        return self.values.size

    @property
    def theta(self) -> np.ndarray:
        return np.arange(self.N) * math.pi / self.N

    @property
    def l1_mass(self) -> float:
        """Trapezoid integral over the full circle."""
        return 2.0 * (math.pi / self.N) * float(np.sum(self.values))


@dataclass(frozen=True)
class SmoothOptions:
    residual_tol: float = 1e-9
    continuation_steps: int = 20
    max_newton_iters: int = 30
    max_halvings: int = 12
    min_step: float = 1e-6
    polish_steps: int = 4
    force: bool = False
    check_branch: bool = True
    quad: QuadratureConfig = DEFAULT_QUAD

    def __post_init__(self):
        if not self.residual_tol > 0:
            raise InputError("residual_tol must be positive")
        if self.continuation_steps < 1 or self.max_newton_iters < 1:
            raise InputError("iteration counts must be positive")


@dataclass
class SmoothReport:
    residual: float
    gamma2: float
    c0: float
    r0: float
    stages: list = field(default_factory=list)
    diagnostics: Optional["AprioriReport"] = None
    warnings: list = field(default_factory=list)


@dataclass(frozen=True)
class AprioriReport:
    min_curvature_radius: float
    max_curvature_radius: float
    min_gradient_norm: float
    max_gradient_norm: float
    min_support: float

    @property
    def admissible(self) -> bool:
        vals = (self.min_curvature_radius, self.max_curvature_radius, self.min_gradient_norm,
                self.max_gradient_norm, self.min_support)
        return all(math.isfinite(v) and v > 0 for v in vals)

    def as_dict(self) -> dict:
        return {"min_curvature_radius": self.min_curvature_radius,
                "max_curvature_radius": self.max_curvature_radius,
                "min_gradient_norm": self.min_gradient_norm,
                "max_gradient_norm": self.max_gradient_norm,
                "min_support": self.min_support}


# ----------------------------------------------------------------------------
# periodic differences on [0, pi)


def _dtheta(N: int) -> float:
    return math.pi / N


def first_derivative(h: np.ndarray) -> np.ndarray:
    d = _dtheta(h.size)
    return (-np.roll(h, -2) + 8.0 * np.roll(h, -1) - 8.0 * np.roll(h, 1) + np.roll(h, 2)) / (12.0 * d)


def second_derivative(h: np.ndarray) -> np.ndarray:
    d = _dtheta(h.size)
    return (-np.roll(h, -2) + 16.0 * np.roll(h, -1) - 30.0 * h + 16.0 * np.roll(h, 1)
            - np.roll(h, 2)) / (12.0 * d * d)


def _circulant(N: int, stencil: dict) -> np.ndarray:
    M = np.zeros((N, N))
    idx = np.arange(N)
    for off, w in stencil.items():
        M[idx, (idx + off) % N] += w
    return M


def difference_matrices(N: int):
    d = _dtheta(N)
    D1 = _circulant(N, {-2: 1.0, -1: -8.0, 1: 8.0, 2: -1.0}) / (12.0 * d)
    D2 = _circulant(N, {-2: -1.0, -1: 16.0, 0: -30.0, 1: 16.0, 2: -1.0}) / (12.0 * d * d)
    return D1, D2


# ----------------------------------------------------------------------------
# residual and forward map


def _as_array(x, kind):
    if isinstance(x, (SupportProfile, DensityProfile)):
        return x.values
    return np.asarray(x, dtype=float)


def residual(h, f) -> np.ndarray:
    """``h'' + h - 2 pi exp((h'^2 + h^2)/2) f`` at every node."""
    hv = _as_array(h, "h")
    fv = _as_array(f, "f")
    if hv.shape != fv.shape:
        raise InputError(f"shape mismatch: h has {hv.size} samples, f has {fv.size}")
    hp = first_derivative(hv)
    return second_derivative(hv) + hv - TWO_PI * np.exp(0.5 * (hp * hp + hv * hv)) * fv


def forward_density(h) -> np.ndarray:
    """The density ``exp(-(h'^2+h^2)/2)(h''+h)/(2 pi)`` of discrete ``h``."""
    hv = _as_array(h, "h")
    hp = first_derivative(hv)
    return np.exp(-0.5 * (hp * hp + hv * hv)) * (second_derivative(hv) + hv) / TWO_PI


def _jacobian(h, f, D1, D2):
    hp = D1 @ h
    g = TWO_PI * np.exp(0.5 * (hp * hp + h * h)) * f
    return D2 + np.eye(h.size) - g[:, None] * (hp[:, None] * D1 + np.diag(h))


# ----------------------------------------------------------------------------
# ellipse oracle


def ellipse_support(a: float, b: float, N: int) -> np.ndarray:
    th = np.arange(N) * math.pi / N
    return np.sqrt(a * a * np.cos(th) ** 2 + b * b * np.sin(th) ** 2)


def ellipse_density(a: float, b: float, N: int) -> np.ndarray:
    """Exact density of the ellipse with semi-axes a, b on the nodes."""
    th = np.arange(N) * math.pi / N
    c, s = np.cos(th), np.sin(th)
    h = np.sqrt(a * a * c * c + b * b * s * s)
    x2 = (a ** 4 * c * c + b ** 4 * s * s) / (h * h)   # |boundary point|^2 = h'^2 + h^2
    return np.exp(-0.5 * x2) * (a * a * b * b / h ** 3) / TWO_PI


# ----------------------------------------------------------------------------
# diagnostics


def apriori_diagnostics(h) -> AprioriReport:
    hv = _as_array(h, "h")
    hp = first_derivative(hv)
    rad = second_derivative(hv) + hv
    grad = np.sqrt(hp * hp + hv * hv)
    rep = AprioriReport(float(rad.min()), float(rad.max()), float(grad.min()), float(grad.max()),
                        float(hv.min()))
    log.info("a-priori diagnostics: %s", rep)
    return rep


def gamma2_of_profile(h, quad: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Gaussian volume of the Wulff polygon on the profile's own N directions."""
    hv = _as_array(h, "h")
    body = HBody(half_circle_directions(hv.size), hv)
    return gaussian_volume(wulff_shape_2d(body), quad)


# ----------------------------------------------------------------------------
# solver


def initial_constant(f: DensityProfile):
    """``c0`` and the large root ``r0``, nudged by 1% while the linearization is singular."""
    c0 = min(float(f.values.min()) / 2.0, 0.5 * INV_SQRT2PI / TWO_PI)
    N = f.N
    k = np.arange(N // 2 + 1)
    # eigenvalues of the discrete second difference on pi-periodic modes exp(2ikθ)
    d = _dtheta(N)
    w = 2.0 * k * d
    lam = (-2.0 * np.cos(2 * w) + 32.0 * np.cos(w) - 30.0) / (12.0 * d * d)
    for _ in range(20):
        roots = ball_roots(c0, 2)
        assert isinstance(roots, BallDensityRoots)
        r0 = roots.r_large
        if np.min(np.abs(lam + 1.0 - r0 * r0)) > 1e-8:
            return c0, r0
        c0 *= 0.99
    raise NoConvergence("could not find a non-resonant starting constant")


def _newton(h, fv, tol, opts, D1, D2):
    R = residual(h, fv)
    res = float(np.max(np.abs(R)))
    hist = [res]
    for _ in range(opts.max_newton_iters):
        if res <= tol:
            return h, res, hist
        dh = np.linalg.solve(_jacobian(h, fv, D1, D2), -R)
        lam = 1.0
        convexity_only = True
        for _ in range(opts.max_halvings):
            h_new = h + lam * dh
            if np.any(h_new <= 0) or np.any(D2 @ h_new + h_new <= 0):
                lam *= 0.5
                continue
            R_new = residual(h_new, fv)
            res_new = float(np.max(np.abs(R_new)))
            if res_new < res:
                h, R, res = h_new, R_new, res_new
                hist.append(res)
                break
            convexity_only = False
            lam *= 0.5
        else:
            if convexity_only:
                raise ConvexityLoss("every damped step left the convex cone", best=h, residual=res)
            raise NoConvergence("line search failed", best=h, residual=res)
    if res <= tol:
        return h, res, hist
    raise NoConvergence("Newton iteration limit reached", best=h, residual=res)


def solve_smooth(f, opts: SmoothOptions = SmoothOptions()):
    """Solve for the even support profile ``h`` with Gaussian density ``f``.

    Returns ``(SupportProfile, SmoothReport)``.
    """
    if not isinstance(f, DensityProfile):
        f = DensityProfile(f)
    warnings = []
    if f.l1_mass >= INV_SQRT2PI:
        msg = f"l1 mass {f.l1_mass!r} >= 1/sqrt(2 pi); the large-volume solution is not guaranteed"
        if not opts.force:
            raise MassTooLarge(msg, mass=f.l1_mass)
        log.warning(msg)
        warnings.append(msg)
    c0, r0 = initial_constant(f)
    N = f.N
    D1, D2 = difference_matrices(N)
    fv = f.values
    h = np.full(N, r0)
    t, dt, base_dt = 0.0, 1.0 / opts.continuation_steps, 1.0 / opts.continuation_steps
    stages = []
    last_exc = None
    while t < 1.0:
        t_next = min(1.0, t + dt)
        ft = (1.0 - t_next) * c0 + t_next * fv
        try:
            h_new, res, hist = _newton(h, ft, opts.residual_tol, opts, D1, D2)
        except (NoConvergence, ConvexityLoss) as exc:
            last_exc = exc
            dt *= 0.5
            if dt < opts.min_step:
                if isinstance(exc, ConvexityLoss):
                    raise ConvexityLoss(f"convexity lost near t={t!r}", best=h, last_t=t) from exc
                raise StepCollapse(f"continuation step underflow at t={t!r}", best=h, last_t=t) from exc
            continue
        t, h = t_next, h_new
        stages.append({"t": t, "iterations": len(hist) - 1, "residual": res})
        dt = min(base_dt, 2.0 * dt)
        if opts.check_branch and t < 1.0:
            g = gamma2_of_profile(h, opts.quad)
            if g <= 0.5:
                raise BranchLoss(f"gamma_2 = {g!r} <= 1/2 at t={t!r}", best=h, last_t=t)
    del last_exc
    # polish: extra steps while the residual keeps falling
    for _ in range(opts.polish_steps):
        try:
            h2, res2, hist = _newton(h, fv, 0.0, _one_step(opts), D1, D2)
        except (NoConvergence, ConvexityLoss):
            break
        h, res = h2, res2
    res = float(np.max(np.abs(residual(h, fv))))
    g = gamma2_of_profile(h, opts.quad)
    if opts.check_branch and g <= 0.5:
        raise BranchLoss(f"gamma_2 = {g!r} <= 1/2 at t=1", best=h, last_t=1.0)
    prof = SupportProfile(h)
    if not prof.is_convex():
        raise ConvexityLoss("final profile is not discretely convex", best=h)
    rep = SmoothReport(residual=res, gamma2=g, c0=c0, r0=r0, stages=stages,
                       diagnostics=apriori_diagnostics(h), warnings=warnings)
    return prof, rep


def _one_step(opts: SmoothOptions) -> SmoothOptions:
    from dataclasses import replace
    return replace(opts, max_newton_iters=1)


# ----------------------------------------------------------------------------
# experiments


def grid_convergence_order(a: float, b: float, grids=(128, 256), opts: SmoothOptions = SmoothOptions()):
    """Observed order from the ellipse round trip, ``log2(err_coarse / err_fine)`` per doubling."""
    errs = []
    for N in grids:
        h, _ = solve_smooth(DensityProfile(ellipse_density(a, b, N)), opts)
        errs.append(float(np.max(np.abs(h.values - ellipse_support(a, b, N)))))
    orders = [math.log(errs[i] / errs[i + 1]) / math.log(grids[i + 1] / grids[i])
              for i in range(len(errs) - 1)]
    return errs, orders


def write_csv(path, h, f) -> None:
    """Columns: theta, h, f, h''+h."""
    hv = _as_array(h, "h")
    fv = _as_array(f, "f")
    th = np.arange(hv.size) * math.pi / hv.size
    rad = second_derivative(hv) + hv
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["theta", "h", "f", "curvature_radius"])
        for row in zip(th, hv, fv, rad):
            w.writerow([repr(float(x)) for x in row])
