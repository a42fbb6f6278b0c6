"""Falsification checks for Gaussian inequalities, branch uniqueness and the
rectangle codependence phenomenon."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from .discrete import DiscreteProblem, SolveOptions, solve_gaussian_minkowski
from .errors import GminkError, InputError
from .gauss_core import INV_SQRT2PI, gauss_segment_integral, inv_big_phi, phi
from .geometry import (Ball, HBody, Polytope2, SymBox, hausdorff_distance, minkowski_combination,
                       support_value, wulff_shape, wulff_shape_2d)
from .measure import (TIGHT_QUAD, MeasureVector, QuadratureConfig, facet_measures, gaussian_volume,
                      total_gaussian_surface_area)

DEFAULT_T_GRID = tuple(np.round(np.arange(1, 10) / 10.0, 12))
SLACK_TOL = 1e-8
EQUALITY_TOL = 1e-10


@dataclass
class InequalityReport:
    name: str
    grid: list
    lhs: list
    rhs: list
    min_slack: float
    equality_witness: Optional[bool] = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if not len(self.grid) == len(self.lhs) == len(self.rhs):
            raise InputError("report arrays must have equal length")

    @property
    def slack(self) -> list:
        return [l - r for l, r in zip(self.lhs, self.rhs)]

    @property
    def passed(self) -> bool:
        return self.min_slack >= -SLACK_TOL

    def as_dict(self) -> dict:
        out = {"name": self.name, "grid": list(self.grid), "lhs": list(self.lhs),
               "rhs": list(self.rhs), "min_slack": self.min_slack,
               "equality_witness": self.equality_witness}
        out.update(self.extra)
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["grid", "lhs", "rhs", "slack"])
        for g, l, r in zip(self.grid, self.lhs, self.rhs):
            w.writerow([repr(float(g)), repr(float(l)), repr(float(r)), repr(float(l - r))])
        return buf.getvalue()


def _report(name, grid, lhs, rhs, witness=None, **extra) -> InequalityReport:
    lhs = [float(x) for x in lhs]
    rhs = [float(x) for x in rhs]
    slack = min(l - r for l, r in zip(lhs, rhs)) if lhs else math.inf
    return InequalityReport(name, [float(g) for g in grid], lhs, rhs, float(slack), witness, dict(extra))


def _same(K, L) -> bool:
    return hausdorff_distance(K, L) < EQUALITY_TOL


def _volume(B, cfg):
    if isinstance(B, HBody):
        B = wulff_shape(B)
    return gaussian_volume(B, cfg)


def check_ehrhard(K, L, t_grid: Sequence[float] = DEFAULT_T_GRID,
                  cfg: QuadratureConfig = TIGHT_QUAD) -> InequalityReport:
    """``Phi^{-1}(gamma((1-t)K + tL)) >= (1-t) Phi^{-1}(gamma(K)) + t Phi^{-1}(gamma(L))``."""
    gk, gl = _volume(K, cfg), _volume(L, cfg)
    pk, pl = inv_big_phi(gk), inv_big_phi(gl)
    lhs, rhs = [], []
    for t in t_grid:
        lhs.append(inv_big_phi(_volume(minkowski_combination(K, L, t), cfg)))
        rhs.append((1.0 - t) * pk + t * pl)
    return _report("ehrhard", t_grid, lhs, rhs, _same(K, L))


def check_log_concavity(K, L, t_grid: Sequence[float] = DEFAULT_T_GRID,
                        cfg: QuadratureConfig = TIGHT_QUAD) -> InequalityReport:
    """``gamma((1-t)K + tL) >= gamma(K)^{1-t} gamma(L)^t``."""
    gk, gl = _volume(K, cfg), _volume(L, cfg)
    lhs = [_volume(minkowski_combination(K, L, t), cfg) for t in t_grid]
    rhs = [gk ** (1.0 - t) * gl ** t for t in t_grid]
    return _report("log_concavity", t_grid, lhs, rhs, _same(K, L))


def _atoms(K, cfg) -> MeasureVector:
    if isinstance(K, Ball):
        raise InputError("the Minkowski-type check needs a body with an atomic surface measure")
    if isinstance(K, HBody):
        K = wulff_shape(K)
    return facet_measures(K, cfg)


def _support_on(body, dirs):
    if isinstance(body, HBody):
        body = wulff_shape(body)
    return support_value(body, dirs)


def minkowski_integral(K, L, cfg: QuadratureConfig = TIGHT_QUAD) -> float:
    """``int h_L dS_{gamma,K}`` over both atoms of every pair."""
    mv = _atoms(K, cfg)
    return 2.0 * float(np.dot(_support_on(L, mv.directions), mv.weights))


def check_minkowski_inequality(K, L, cfg: QuadratureConfig = TIGHT_QUAD) -> InequalityReport:
    """``int (h_L - h_K) dS_{gamma,K} >= gamma(K) log(gamma(L) / gamma(K))``."""
    mv = _atoms(K, cfg)
    hk = _support_on(K, mv.directions)
    hl = _support_on(L, mv.directions)
    lhs = 2.0 * float(np.dot(hl - hk, mv.weights))
    gk, gl = _volume(K, cfg), _volume(L, cfg)
    rhs = gk * math.log(gl / gk)
    return _report("minkowski", [0.0], [lhs], [rhs], _same(K, L))


def scale_body(B, s: float):
    if not s > 0:
        raise InputError("scale must be positive")
    if isinstance(B, SymBox):
        return SymBox(B.half_widths * s)
    if isinstance(B, Ball):
        return Ball(B.radius * s, B.dimension)
    if isinstance(B, HBody):
        return B.with_support(B.support * s)
    if isinstance(B, Polytope2):
        return wulff_shape_2d(B.to_hbody().with_support(B.to_hbody().support * s))
    return wulff_shape(B.to_hbody().with_support(B.to_hbody().support * s))


def calibrate_volume(L, target: float, cfg: QuadratureConfig = TIGHT_QUAD, xtol: float = 1e-14):
    """Scale ``L`` by bisection so that its Gaussian volume equals ``target``."""
    if not 0.0 < target < 1.0:
        raise InputError("target volume must lie in (0, 1)")

    def g(s):
        return _volume(scale_body(L, s), cfg) - target

    lo, hi = 1.0, 1.0
    while g(lo) > 0:
        lo *= 0.5
    while g(hi) < 0:
        hi *= 2.0
    s = brentq(g, lo, hi, xtol=xtol, rtol=1e-15, maxiter=200)
    return scale_body(L, s), s


def check_equal_volume_minkowski(K, L, cfg: QuadratureConfig = TIGHT_QUAD) -> InequalityReport:
    """With ``L`` rescaled to ``gamma(L) = gamma(K)``: ``int h_L dS_K >= int h_K dS_K``."""
    gk = _volume(K, cfg)
    Lc, s = calibrate_volume(L, gk, cfg)
    lhs = minkowski_integral(K, Lc, cfg)
    rhs = minkowski_integral(K, K, cfg)
    return _report("minkowski_equal_volume", [0.0], [lhs], [rhs], _same(K, Lc), scale=s)


def check_isoperimetric(K, cfg: QuadratureConfig = TIGHT_QUAD) -> InequalityReport:
    """``|S_{gamma,K}| >= phi(Phi^{-1}(gamma(K)))``."""
    if isinstance(K, HBody):
        K = wulff_shape(K)
    g = gaussian_volume(K, cfg)
    lhs = total_gaussian_surface_area(K, cfg)
    rhs = float(phi(inv_big_phi(g)))
    return _report("isoperimetric", [g], [lhs], [rhs], None, gaussian_volume=g)


def isoperimetric_rhs(gamma: float) -> float:
    return float(phi(inv_big_phi(gamma)))


# ----------------------------------------------------------------------------
# uniqueness


@dataclass
class UniquenessReport:
    runs: list
    max_pairwise_hausdorff: float
    counterexample: bool
    small_branch: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {"runs": self.runs, "max_pairwise_hausdorff": self.max_pairwise_hausdorff,
                "counterexample": self.counterexample, "small_branch": self.small_branch}


def uniqueness_experiment(mu: MeasureVector, starts: Sequence[float],
                          opts: SolveOptions = SolveOptions(),
                          small_starts: Sequence[float] = (),
                          agree_tol: float = 1e-7) -> UniquenessReport:
    """Solve from several starts; compare large-branch solutions pairwise.

    ``small_starts`` run with the ``start_small`` override and are reported
    separately: distinct small-branch bodies are the expected non-uniqueness.
    """
    problem = DiscreteProblem(mu)

    def run(s, small):
        o = replace(opts, initial_support=float(s), start_small=small)
        try:
            rep = solve_gaussian_minkowski(problem, o)
        except GminkError as exc:
            return {"start": float(s), "ok": False, "error": f"{type(exc).__name__}: {exc}"}, None
        P = wulff_shape(rep.solution)
        return ({"start": float(s), "ok": True, "support": rep.support.tolist(),
                 "gaussian_volume": rep.gaussian_volume, "branch": rep.branch_label,
                 "measure_residual": rep.measure_residual}, P)

    runs, bodies = [], []
    for s in starts:
        rec, P = run(s, False)
        runs.append(rec)
        if P is not None and rec["gaussian_volume"] > 0.5:
            bodies.append(P)
    dmax = 0.0
    for i in range(len(bodies)):
        for j in range(i + 1, len(bodies)):
            dmax = max(dmax, hausdorff_distance(bodies[i], bodies[j]))
    small = []
    for s in small_starts:
        rec, P = run(s, True)
        if P is not None and bodies:
            rec["hausdorff_to_large"] = hausdorff_distance(P, bodies[0])
        small.append(rec)
    return UniquenessReport(runs, dmax, dmax > agree_tol, small)


# ----------------------------------------------------------------------------
# rectangles


@dataclass(frozen=True)
class RectangleState:
    a1: float
    a2: float
    mu1: float
    mu2: float


_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)


def _mu_single(a_own: float, a_other: float) -> float:
    # sqrt(2/pi) exp(-a_own^2/2) (Phi(a_other) - 1/2)
    return _SQRT_2_OVER_PI * math.exp(-0.5 * a_own * a_own) * gauss_segment_integral(0.0, a_other)


def rectangle_forward(a1: float, a2: float) -> RectangleState:
    if not (a1 > 0 and a2 > 0):
        raise InputError("rectangle half-widths must be positive")
    return RectangleState(float(a1), float(a2), _mu_single(a1, a2), _mu_single(a2, a1))


def a1_bound(mu1_target: float) -> float:
    """Supremum of feasible ``a1``: ``sqrt(-2 log(sqrt(2 pi) mu1))``."""
    return math.sqrt(-2.0 * math.log(math.sqrt(2.0 * math.pi) * mu1_target))


def delta0(eps0: float) -> float:
    """``sqrt(-2 log(1 - sqrt(2 pi) eps0))``, the bound for ``mu1 = 1/sqrt(2 pi) - eps0``."""
    return math.sqrt(-2.0 * math.log1p(-math.sqrt(2.0 * math.pi) * eps0))


def solve_a2(mu1_target: float, a1: float) -> float:
    """The unique ``a2`` with ``mu1(a1, a2) = mu1_target`` (bisection on a monotone map)."""
    if _mu_single(a1, 1e300) <= mu1_target:
        raise InputError(f"a1={a1!r} infeasible for mu1={mu1_target!r}")

    def g(a2):
        return _mu_single(a1, a2) - mu1_target

    hi = 1.0
    while g(hi) <= 0:
        hi *= 2.0
    return brentq(g, 0.0, hi, xtol=1e-15, rtol=1e-15, maxiter=300)


@dataclass
class SweepResult:
    mu1_target: float
    feasible: bool
    explanation: str
    a1_max: float
    a1: list
    a2: list
    mu2: list
    mu2_max: float
    mu2_target: Optional[float] = None
    preimages: list = field(default_factory=list)

    @property
    def solutions(self) -> list:
        return list(zip(self.a1, self.a2))

    def as_dict(self) -> dict:
        return {"mu1_target": self.mu1_target, "feasible": self.feasible,
                "explanation": self.explanation, "a1_max": self.a1_max,
                "a1": self.a1, "a2": self.a2, "mu2": self.mu2, "mu2_max": self.mu2_max,
                "mu2_target": self.mu2_target,
                "preimages": [{"a1": p[0], "a2": p[1]} for p in self.preimages]}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["a1", "a2", "mu2"])
        for row in zip(self.a1, self.a2, self.mu2):
            w.writerow([repr(float(x)) for x in row])
        return buf.getvalue()


def rectangle_sweep(mu1_target: float, grid: int = 200, mu2_target: Optional[float] = None
                    ) -> SweepResult:
    """Curve ``a1 -> (a2, mu2)`` of rectangles with first atom ``mu1_target``.

    ``mu2 -> 0`` at both ends of ``(0, a1_max)``, so interior ``mu2`` values
    below the curve maximum have at least two preimages.
    """
    if grid < 3:
        raise InputError("grid must have at least 3 points")
    if not 0.0 < mu1_target < INV_SQRT2PI:
        return SweepResult(float(mu1_target), False,
                           "mu1 must lie in (0, 1/sqrt(2 pi)) for any rectangle", math.nan,
                           [], [], [], math.nan, mu2_target)
    amax = a1_bound(mu1_target)
    a1s = amax * (np.arange(1, grid + 1) / (grid + 1.0))
    a2s = [solve_a2(mu1_target, a) for a in a1s]
    mu2s = [_mu_single(b, a) for a, b in zip(a1s, a2s)]
    res = SweepResult(float(mu1_target), True, "feasible iff a1 < a1_max", amax,
                      [float(a) for a in a1s], [float(b) for b in a2s], [float(m) for m in mu2s],
                      float(max(mu2s)), mu2_target)
    if mu2_target is not None:
        res.preimages = _preimages(mu1_target, mu2_target, a1s, np.array(mu2s), amax)
    return res


def _preimages(mu1, mu2_target, a1s, mu2s, amax):
    def g(a):
        return _mu_single(solve_a2(mu1, a), a) - mu2_target

    # pad the ends with the limits mu2 -> 0
    xs = np.concatenate([[0.0], a1s, [amax]])
    ys = np.concatenate([[-mu2_target], mu2s - mu2_target, [-mu2_target]])
    out = []
    for i in range(len(xs) - 1):
        if ys[i] == 0.0:
            out.append(float(xs[i]))
        elif ys[i] * ys[i + 1] < 0:
            lo, hi = xs[i], xs[i + 1]
            lo = lo if lo > 0 else 1e-300
            hi = hi if hi < amax else amax * (1 - 1e-15)
            out.append(brentq(g, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=300))
    return [(float(a), float(solve_a2(mu1, a))) for a in out]


# ----------------------------------------------------------------------------
# bundled fixtures


def _random_polygon(rng, m):
    th = np.sort(rng.uniform(0.0, math.pi, m))
    dirs = np.column_stack([np.cos(th), np.sin(th)])
    h = rng.uniform(0.4, 2.5, m)
    return wulff_shape_2d(HBody(dirs, h))


def bundled_pairs(seed: int = 20240601) -> list:
    """Deterministic body pairs: random polygons, nD boxes for n = 2..6, balls."""
    rng = np.random.default_rng(seed)
    pairs = []
    for _ in range(40):
        K = _random_polygon(rng, int(rng.integers(2, 7)))
        L = _random_polygon(rng, int(rng.integers(2, 7)))
        pairs.append((K, L))
    for n in range(2, 7):
        for _ in range(12):
            pairs.append((SymBox(rng.uniform(0.3, 2.5, n)), SymBox(rng.uniform(0.3, 2.5, n))))
    for n in (2, 3, 5):
        for _ in range(2):
            r1, r2 = rng.uniform(0.5, 3.0, 2)
            pairs.append((Ball(r1, n), Ball(r2, n)))
    return pairs


def run_suite(suite: str, pairs=None, cfg: QuadratureConfig = TIGHT_QUAD) -> list:
    """Run one inequality suite over body pairs; returns a list of reports."""
    pairs = bundled_pairs() if pairs is None else pairs
    out = []
    for K, L in pairs:
        if suite == "ehrhard":
            out.append(check_ehrhard(K, L, cfg=cfg))
        elif suite == "log_concavity":
            out.append(check_log_concavity(K, L, cfg=cfg))
        elif suite == "minkowski":
            if isinstance(K, Ball):
                continue
            out.append(check_minkowski_inequality(K, L, cfg))
        elif suite == "isoperimetric":
            out.append(check_isoperimetric(K, cfg))
            out.append(check_isoperimetric(L, cfg))
        else:
            raise InputError(f"unknown suite {suite!r}")
    return out


SUITES = ("ehrhard", "log_concavity", "minkowski", "isoperimetric")
