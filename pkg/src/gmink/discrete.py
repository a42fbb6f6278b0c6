"""Discrete even Gaussian Minkowski problem.

Two solvers on the same unknowns, the support numbers ``h_i`` on the
prescribed directions:

* :func:`solve_gaussian_minkowski` finds ``K`` with ``S_{gamma_n,K} = mu`` on
  the branch ``gamma_n(K) > 1/2`` by damped Newton iteration in ``u = log h``,
  following the measure homotopy ``c_t = (1 - t) G(h_init) + t c``.
* :func:`solve_normalized` maximizes
  ``Gamma(h) = gamma_n([h])^alpha / alpha - int h dmu`` and polishes the
  stationarity condition ``gamma_n(K)^{alpha-1} G(h) = c`` by Newton.

``G(h)`` denotes the vector of single-atom weights of the Gaussian surface
area measure of ``[h]`` on the prescribed directions.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import (BranchLoss, FacetCollapse, GeometryError, InputError,
                     MassTooLarge, NoAscent, NoConvergence, QuadratureError)
from .gauss_core import INV_SQRT2PI
from .geometry import HBody, hausdorff_distance, wulff_shape
from .measure import TIGHT_QUAD, MeasureVector, QuadratureConfig, gaussian_volume, hbody_measure

log = logging.getLogger(__name__)

MASS_BOUND = INV_SQRT2PI


@dataclass(frozen=True)
class SolveOptions:
    residual_tol: float = 1e-10
    max_newton_iters: int = 60
    fd_step_rel: float = 1e-6
    continuation_steps: int = 20
    initial_support: float = 3.0
    alpha: Optional[float] = None
    start_small: bool = False
    force: bool = False
    max_halvings: int = 12
    min_step: float = 1e-6
    quad: QuadratureConfig = TIGHT_QUAD

    def __post_init__(self):
        if not self.residual_tol > 0:
            raise InputError("residual_tol must be positive")
        if self.max_newton_iters < 1 or self.continuation_steps < 1:
            raise InputError("iteration counts must be positive")
        if not self.initial_support > 0:
            raise InputError("initial_support must be positive")
        if not self.fd_step_rel > 0:
            raise InputError("fd_step_rel must be positive")


@dataclass(frozen=True, eq=False)
class DiscreteProblem:
    measure: MeasureVector

    def __post_init__(self):
        mv = self.measure
        if mv.dimension not in (2, 3):
            raise InputError("discrete problems are supported in dimensions 2 and 3")
        if len(mv) < mv.dimension:
            raise InputError("too few atoms to span the space")
        if np.any(mv.weights <= 0):
            raise InputError("all atom weights must be positive")
        # not concentrated on a great subsphere: every candidate hyperplane normal
        # sees some atom off the hyperplane
        v = mv.directions
        if np.linalg.matrix_rank(v, tol=1e-10) < mv.dimension:
            raise InputError("measure is concentrated in a subspace")
        for w in _candidate_normals(v):
            if float(mv.weights @ np.abs(v @ w)) <= 1e-14:
                raise InputError("measure is concentrated in a subspace")

    @property
    def dimension(self) -> int:
        return self.measure.dimension

    @property
    def directions(self) -> np.ndarray:
        return self.measure.directions

    @property
    def weights(self) -> np.ndarray:
        return self.measure.weights


def _candidate_normals(v):
    n = v.shape[1]
    out = []
    if n == 2:
        out = [np.array([-x[1], x[0]]) for x in v]
    else:
        for i in range(len(v)):
            for j in range(i + 1, len(v)):
                w = np.cross(v[i], v[j])
                nw = np.linalg.norm(w)
                if nw > 1e-12:
                    out.append(w / nw)
    return out


@dataclass
class StageRecord:
    t: float
    iterations: int
    residuals: list


@dataclass
class SolveReport:
    solution: HBody
    gaussian_volume: float
    measure_residual: float
    branch: bool
    stages: list = field(default_factory=list)
    vanished_facets: list = field(default_factory=list)
    normalizer_c: Optional[float] = None
    gamma_value: Optional[float] = None
    converged: bool = True
    mode: str = "plain"
    warnings: list = field(default_factory=list)
    multistart: list = field(default_factory=list)

    @property
    def branch_label(self) -> str:
        return "gamma>1/2" if self.branch else "gamma<=1/2"

    @property
    def support(self) -> np.ndarray:
        return self.solution.support


# ----------------------------------------------------------------------------
# forward map and its Jacobian


def measure_map(problem: DiscreteProblem, h, quad: QuadratureConfig = TIGHT_QUAD):
    """``G(h)`` on the prescribed directions; raises FacetCollapse if a facet vanished."""
    body = HBody(problem.directions, h)
    try:
        w, P = hbody_measure(body, quad)
    except GeometryError as exc:
        raise FacetCollapse(f"Wulff shape failed: {exc}", best=np.array(h)) from exc
    if P.vanished:
        dirs = [problem.directions[i].tolist() for i in P.vanished]
        raise FacetCollapse(f"prescribed facet(s) vanished: {dirs}", best=np.array(h),
                            directions=dirs)
    return w, P


def jacobian_fd(h, problem: DiscreteProblem, opts: SolveOptions = SolveOptions(), base=None,
                fn=None):
    """Forward-difference Jacobian ``dG_i / dh_j`` with steps ``fd_step_rel * h_j``.

    A probe that collapses a facet is retried with the step halved, at most 8 times.
    ``fn`` replaces the forward map (used by the normalized solver).
    """
    h = np.asarray(h, dtype=float)
    fn = fn or (lambda x: measure_map(problem, x, opts.quad)[0])
    g0 = fn(h) if base is None else base
    J = np.empty((g0.size, h.size))
    for j in range(h.size):
        step = opts.fd_step_rel * h[j]
        for attempt in range(9):
            hp = h.copy()
            hp[j] += step
            try:
                J[:, j] = (fn(hp) - g0) / step
                break
            except FacetCollapse:
                if attempt == 8:
                    raise
                step *= 0.5
    return J


def _newton_stage(problem, u, target, tol, opts, fn=None, admissible=None):
    """Damped Newton in log variables; a step is accepted only if the max residual decreases.

    ``admissible(h)`` may veto trial points (used to stay on the large-volume branch).
    """
    fn = fn or (lambda x: measure_map(problem, x, opts.quad)[0])
    h = np.exp(u)
    g = fn(h)
    res = float(np.max(np.abs(g - target)))
    history = [res]
    for it in range(opts.max_newton_iters):
        if res <= tol:
            return u, res, history, it
        J = jacobian_fd(h, problem, opts, base=g, fn=fn) * h[None, :]
        r = g - target
        try:
            du = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError:
            du = np.linalg.lstsq(J, -r, rcond=None)[0]
        lam = 1.0
        vetoed = False
        for _ in range(opts.max_halvings):
            u_new = u + lam * du
            h_try = np.exp(u_new)
            if not (np.all(np.isfinite(h_try)) and np.all(h_try > 0)):
                lam *= 0.5
                continue
            try:
                g_new = fn(np.exp(u_new))
            except (FacetCollapse, QuadratureError):
                lam *= 0.5
                continue
            if admissible is not None and not admissible(np.exp(u_new)):
                vetoed = True
                lam *= 0.5
                continue
            res_new = float(np.max(np.abs(g_new - target)))
            if res_new < res:
                u, h, g, res = u_new, np.exp(u_new), g_new, res_new
                history.append(res)
                break
            lam *= 0.5
        else:
            if vetoed:
                raise BranchLoss("damped steps keep leaving the large-volume branch",
                                 best=np.exp(u), residual=res, history=history)
            raise NoConvergence("line search failed", best=np.exp(u), residual=res,
                                history=history)
    if res <= tol:
        return u, res, history, opts.max_newton_iters
    raise NoConvergence("Newton iteration limit reached", best=np.exp(u), residual=res,
                        history=history)


def _polish(problem, u, target, opts, fn=None, steps=3):
    # extra Newton steps past the tolerance while the residual keeps decreasing
    fn = fn or (lambda x: measure_map(problem, x, opts.quad)[0])
    for _ in range(steps):
        h = np.exp(u)
        g = fn(h)
        r = g - target
        res = float(np.max(np.abs(r)))
        J = jacobian_fd(h, problem, opts, base=g, fn=fn) * h[None, :]
        try:
            du = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError:
            break
        try:
            res_new = float(np.max(np.abs(fn(np.exp(u + du)) - target)))
        except (FacetCollapse, QuadratureError):
            break
        if not res_new < res:
            break
        u = u + du
    return u


# ----------------------------------------------------------------------------
# plain problem


def solve_gaussian_minkowski(problem: DiscreteProblem, opts: SolveOptions = SolveOptions()
                             ) -> SolveReport:
    """Solve ``S_{gamma_n,K} = mu`` on the large-volume branch by continuation.

    Raises MassTooLarge when ``|mu| >= 1/sqrt(2 pi)`` unless ``opts.force``;
    BranchLoss if the volume drops to 1/2 or below (unless ``opts.start_small``);
    NoConvergence if the continuation step length collapses.
    """
    warnings = []
    mass = problem.measure.total
    if mass >= MASS_BOUND:
        msg = f"total mass {mass!r} >= 1/sqrt(2 pi); existence on the large branch is not guaranteed"
        if not opts.force:
            raise MassTooLarge(msg, mass=mass)
        log.warning(msg)
        warnings.append(msg)

    target = problem.weights.copy()
    m = target.size
    u = np.full(m, math.log(opts.initial_support))
    g0, _ = measure_map(problem, np.exp(u), opts.quad)
    stage_tol = max(opts.residual_tol, 1e-8)
    base_dt = 1.0 / opts.continuation_steps
    dt = base_dt
    t = 0.0
    stages = []

    def on_branch(h):
        try:
            return gaussian_volume(HBody(problem.directions, h), opts.quad) > 0.5
        except QuadratureError:
            return False

    admissible = None if opts.start_small else on_branch
    while t < 1.0:
        t_next = min(1.0, t + dt)
        c_t = (1.0 - t_next) * g0 + t_next * target
        tol = opts.residual_tol if t_next == 1.0 else stage_tol
        try:
            u_new, res, hist, its = _newton_stage(problem, u, c_t, tol, opts, admissible=admissible)
        except (NoConvergence, FacetCollapse, BranchLoss) as exc:
            dt *= 0.5
            if dt < opts.min_step:
                kind = BranchLoss if isinstance(exc, BranchLoss) else NoConvergence
                raise kind(f"continuation step collapsed at t={t!r}: {exc}",
                           best=np.exp(u), last_t=t, stages=stages) from exc
            continue
        h_new = np.exp(u_new)
        vol = gaussian_volume(HBody(problem.directions, h_new), opts.quad)
        if vol <= 0.5 and not opts.start_small:
            raise BranchLoss(f"Gaussian volume {vol!r} <= 1/2 at t={t_next!r}",
                             best=np.exp(u), last_t=t, stages=stages)
        u, t = u_new, t_next
        stages.append(StageRecord(t, its, hist))
        dt = min(base_dt, 2.0 * dt)

    u = _polish(problem, u, target, opts)
    h = np.exp(u)
    g, P = measure_map(problem, h, opts.quad)
    body = HBody(problem.directions, h)
    vol = gaussian_volume(P, opts.quad)
    res = float(np.max(np.abs(g - target)))
    return SolveReport(solution=body, gaussian_volume=vol, measure_residual=res,
                       branch=vol > 0.5, stages=stages, vanished_facets=[],
                       converged=res <= opts.residual_tol, mode="plain", warnings=warnings)


# ----------------------------------------------------------------------------
# normalized problem


def gamma_functional(h, problem: DiscreteProblem, alpha: float,
                     quad: QuadratureConfig = TIGHT_QUAD) -> float:
    """``gamma_n([h])^alpha / alpha - int h dmu`` (both atoms of every pair)."""
    h = np.asarray(h, dtype=float)
    vol = gaussian_volume(HBody(problem.directions, h), quad)
    return vol ** alpha / alpha - 2.0 * float(h @ problem.weights)


def _gamma_and_grad(u, problem, alpha, quad):
    h = np.exp(u)
    body = HBody(problem.directions, h)
    w, P = hbody_measure(body, quad)
    vol = gaussian_volume(P, quad)
    val = vol ** alpha / alpha - 2.0 * float(h @ problem.weights)
    grad_h = 2.0 * (vol ** (alpha - 1.0) * w - problem.weights)
    return val, grad_h * h, vol, w


def _bfgs_ascent(problem, u, alpha, quad, max_iter=400, gtol=1e-10):
    val, grad, _, _ = _gamma_and_grad(u, problem, alpha, quad)
    Hinv = np.eye(u.size)
    for _ in range(max_iter):
        if np.max(np.abs(grad)) <= gtol:
            break
        p = Hinv @ grad
        if p @ grad <= 0:
            Hinv = np.eye(u.size)
            p = grad.copy()
        lam = 1.0
        slope = float(p @ grad)
        for _ in range(40):
            u_new = u + lam * p
            try:
                val_new, grad_new, _, _ = _gamma_and_grad(u_new, problem, alpha, quad)
            except GeometryError:
                lam *= 0.5
                continue
            if val_new >= val + 1e-4 * lam * slope:
                break
            lam *= 0.5
        else:
            break
        s = u_new - u
        y = -(grad_new - grad)  # ascent: curvature of -Gamma
        sy = float(s @ y)
        if sy > 1e-16:
            rho = 1.0 / sy
            I = np.eye(u.size)
            Hinv = (I - rho * np.outer(s, y)) @ Hinv @ (I - rho * np.outer(y, s)) + rho * np.outer(s, s)
        u, val, grad = u_new, val_new, grad_new
    return u, val


def _stationarity_fn(problem, alpha, quad):
    def fn(h):
        w, P = measure_map(problem, h, quad)
        vol = gaussian_volume(P, quad)
        return vol ** (alpha - 1.0) * w
    return fn


def solve_normalized(problem: DiscreteProblem, opts: SolveOptions) -> SolveReport:
    """Maximize Gamma from three starts and return the best stationary body.

    On return ``gamma_n(K)^{alpha-1} G(h) = c`` holds within ``residual_tol``.
    """
    alpha = opts.alpha
    n = problem.dimension
    if alpha is None or not 0.0 < alpha < 1.0 / n:
        raise InputError(f"alpha must lie in (0, 1/{n})")
    m = len(problem.measure)
    target = problem.weights.copy()
    fn = _stationarity_fn(problem, alpha, opts.quad)
    results = []
    failures = []
    for r0 in (0.5, 1.0, 2.0):
        u = np.full(m, math.log(r0))
        try:
            u, _ = _bfgs_ascent(problem, u, alpha, opts.quad)
            u, res, hist, its = _newton_stage(problem, u, target, opts.residual_tol, opts, fn)
            u = _polish(problem, u, target, opts, fn)
        except (NoConvergence, FacetCollapse) as exc:
            failures.append((r0, str(exc)))
            continue
        h = np.exp(u)
        val = gamma_functional(h, problem, alpha, opts.quad)
        res = float(np.max(np.abs(fn(h) - target)))
        results.append((val, r0, h, res, hist))
    if not results:
        raise NoAscent(f"no start reached a stationary point: {failures}")
    results.sort(key=lambda r: -r[0])
    val, r0, h, res, hist = results[0]
    body = HBody(problem.directions, h)
    P = wulff_shape(body)
    vol = gaussian_volume(P, opts.quad)
    spread = []
    for other in results[1:]:
        d = hausdorff_distance(P, wulff_shape(HBody(problem.directions, other[2])))
        spread.append({"start": other[1], "gamma_value": other[0], "hausdorff": d})
    return SolveReport(solution=body, gaussian_volume=vol, measure_residual=res, branch=vol > 0.5,
                       stages=[StageRecord(1.0, len(hist) - 1, hist)], normalizer_c=vol ** (alpha - 1.0),
                       gamma_value=val, converged=res <= opts.residual_tol and val > 0,
                       mode="normalized", warnings=[f"start {s} failed: {e}" for s, e in failures],
                       multistart=spread)
