"""
κu-concavity and (κ,N)-convexity checkers.

Every checker returns a ConvexityCertificate whose margins are oriented so
that margin ≥ −tol means the inequality holds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.common.sampled import SampledFunction
from app.services.base import PreconditionError
from app.services.convexity.problem import (
    TOL,
    ZERO_TOL,
    BumpFunction,
    ConvexityCertificate,
    ConvexityProblem,
    MarginTracker,
    Segment,
    bump_family,
    check_segments,
    default_segments,
    default_t_grid,
    segments_up_to,
)
from app.services.curvature.field import CurvatureField, GeodesicCurvature, restrict_to_geodesic
from app.services.distortion.coefficients import (
    INFINITE,
    TAU_POINTS,
    boundary_derivatives,
    merge_grid,
    sigma_profile,
)
from app.services.ode_comparison.solver import green_integral
from config.config import get_numerics_config
from logger.logger import get_logger

logger = get_logger(__name__)

GAUSS_POINTS = int(get_numerics_config("convexity").get("gauss_points", 8))
_GAUSS_X, _GAUSS_W = np.polynomial.legendre.leggauss(GAUSS_POINTS)


def _times_u(coefficient: float, u: float) -> float:
    """coefficient·u with ∞·0 = 0 for u at or below the zero tolerance"""
    if math.isinf(coefficient):
        if abs(u) <= ZERO_TOL:
            return 0.0
        return coefficient if u > 0 else -coefficient
    return coefficient * u


def _resolve(
    prob_start: float,
    prob_end: float,
    segments: Optional[Sequence[Segment]],
    t_grid: Optional[Sequence[float]],
) -> Tuple[List[Segment], np.ndarray]:
    segs = list(segments) if segments is not None else default_segments(prob_start, prob_end)
    check_segments(prob_start, prob_end, segs)
    ts = np.asarray(t_grid if t_grid is not None else default_t_grid(), dtype=float)
    return segs, ts


def _geodesic_grid(gc: GeodesicCurvature, t_grid: np.ndarray) -> Tuple[np.ndarray, List[float]]:
    """τ-grid on [0,1] holding the t-grid and the κ breakpoints of the segment"""
    cuts = [float(b / gc.length) for b in gc.forward.breakpoints()]
    priority = [*np.asarray(t_grid, dtype=float).tolist(), *cuts]
    return merge_grid(np.linspace(0.0, 1.0, TAU_POINTS), priority), cuts


def _snap(grid: np.ndarray, t: float) -> float:
    return float(grid[int(np.argmin(np.abs(grid - t)))])


# ----------------------------------------------------------------------
# (i) 分布意义下 u'' + κu ≤ 0
# ----------------------------------------------------------------------


def _bump_residual(prob: ConvexityProblem, bump: BumpFunction, cuts: np.ndarray) -> float:
    """∫φ″u + ∫φκu, Gauss–Legendre on every knot piece split at κ jumps"""
    knots = bump.knots
    second = bump.second_derivative_pieces()
    total = 0.0
    for piece in range(3):
        lo, hi = knots[piece], knots[piece + 1]
        inner = cuts[(cuts > lo) & (cuts < hi)]
        edges = np.concatenate([[lo], inner, [hi]])
        for alpha, beta in zip(edges[:-1], edges[1:]):
            half = 0.5 * (beta - alpha)
            xg = 0.5 * (alpha + beta) + half * _GAUSS_X
            ug = np.asarray(prob.u(xg), dtype=float)
            kappa = float(prob.curv.cell_value(0.5 * (alpha + beta))[0])
            integrand = second[piece] * ug + kappa * bump(xg) * ug
            total += half * float(np.dot(_GAUSS_W, integrand))
    return total


def distributional_residual(
    prob: ConvexityProblem, test_functions: Optional[Sequence[BumpFunction]] = None
) -> ConvexityCertificate:
    """margin = −(∫φ″u + ∫φκu) for every bump φ of the family"""
    family = list(test_functions) if test_functions is not None else bump_family(prob.start, prob.end)
    if not family:
        raise PreconditionError("test-function family is empty")
    cuts = prob.curv.breakpoints()
    tracker = MarginTracker("i", prob.tolerance)
    for bump in family:
        tracker.record(-_bump_residual(prob, bump, cuts), bump.to_dict())
    return tracker.certificate()


# ----------------------------------------------------------------------
# (ii) Green 不等式
# ----------------------------------------------------------------------


def green_inequality_check(
    prob: ConvexityProblem,
    segments: Optional[Sequence[Segment]] = None,
    t_grid: Optional[Sequence[float]] = None,
) -> ConvexityCertificate:
    """u(γ_t) ≥ (1−t)u(γ₀) + tu(γ₁) + ∫₀¹g(t,s)κ(γ_s)θ²u(γ_s)ds"""
    segs, ts = _resolve(prob.start, prob.end, segments, t_grid)
    tracker = MarginTracker("ii", prob.tolerance)
    for p, q in segments_up_to(segs, None):
        gc = restrict_to_geodesic(prob.curv, p, q)
        theta = gc.length
        grid, cuts = _geodesic_grid(gc, ts)
        us = np.asarray(prob.u(p + grid * (q - p)), dtype=float)
        right = gc.forward.cell_value(grid * theta, "right") * theta**2
        left = gc.forward.cell_value(grid * theta, "left") * theta**2
        u0, u1 = prob.value(p), prob.value(q)
        for t in ts.tolist():
            tg = _snap(grid, t)
            integral = green_integral(grid, right * us, tg, cuts, left * us)
            lhs = prob.value(p + tg * (q - p))
            margin = lhs - ((1.0 - tg) * u0 + tg * u1) - integral
            tracker.record(margin, {"segment": [p, q], "t": t})
    return tracker.certificate()


# ----------------------------------------------------------------------
# (iii)/(iv) σ 凹性
# ----------------------------------------------------------------------


def _sigma_margins(
    prob: ConvexityProblem, p: float, q: float, ts: np.ndarray
) -> np.ndarray:
    gc = restrict_to_geodesic(prob.curv, p, q)
    theta = gc.length
    minus = sigma_profile(gc.reversed, theta, 1.0 - ts)
    plus = sigma_profile(gc.forward, theta, ts)
    u0, u1 = prob.value(p), prob.value(q)
    out = np.empty(ts.size)
    for j, t in enumerate(ts.tolist()):
        rhs = _times_u(float(minus.values[j]), u0) + _times_u(float(plus.values[j]), u1)
        out[j] = prob.value(p + t * (q - p)) - rhs
    return out


def sigma_concavity_check(
    prob: ConvexityProblem,
    segments: Optional[Sequence[Segment]] = None,
    t_grid: Optional[Sequence[float]] = None,
    max_length: Optional[float] = None,
) -> ConvexityCertificate:
    """
    u(γ_t) ≥ σ^{(1−t)}_{κ⁻_γ}(θ)u(γ₀) + σ^{(t)}_{κ⁺_γ}(θ)u(γ₁) with ∞·0 = 0.
    With max_length only segments with θ ≤ max_length are tested.
    """
    segs, ts = _resolve(prob.start, prob.end, segments, t_grid)
    tracker = MarginTracker("iv" if max_length is None else "iii", prob.tolerance)
    for p, q in segments_up_to(segs, max_length):
        margins = _sigma_margins(prob, p, q, ts)
        for t, margin in zip(ts.tolist(), margins.tolist()):
            tracker.record(margin, {"segment": [p, q], "t": t})
    return tracker.certificate()


@dataclass(frozen=True)
class LengthSearch:
    length: float
    certificate: ConvexityCertificate

    def to_dict(self) -> Dict[str, Any]:
        return {"length": self.length, "certificate": self.certificate.model_dump()}


def largest_passing_length(
    prob: ConvexityProblem,
    segments: Optional[Sequence[Segment]] = None,
    t_grid: Optional[Sequence[float]] = None,
) -> LengthSearch:
    """
    Bisection over the sorted segment lengths for the largest max_length whose
    σ-check passes; 0.0 when even the shortest segments fail.
    """
    segs, ts = _resolve(prob.start, prob.end, segments, t_grid)
    lengths = sorted({abs(q - p) for p, q in segs if p != q})
    if not lengths:
        raise PreconditionError("no non-degenerate segments to search over")
    lo, hi = -1, len(lengths) - 1
    best: Optional[ConvexityCertificate] = None
    while lo < hi:
        mid = (lo + hi + 1) // 2
        cert = sigma_concavity_check(prob, segs, ts, max_length=lengths[mid])
        if cert.passed:
            lo, best = mid, cert
        else:
            hi = mid - 1
    if lo < 0:
        return LengthSearch(0.0, sigma_concavity_check(prob, segs, ts, max_length=lengths[0]))
    assert best is not None
    return LengthSearch(lengths[lo], best)


# ----------------------------------------------------------------------
# 一阶变分
# ----------------------------------------------------------------------


def first_variation_check(
    prob: ConvexityProblem,
    segments: Optional[Sequence[Segment]] = None,
    max_length: Optional[float] = None,
) -> ConvexityCertificate:
    """
    σ′_{κ⁺}|_{t=0}·u(γ₁) ≤ σ′_{κ⁻}|_{t=1}·u(γ₀) + (u∘γ)′(0), both orientations
    of every segment.
    """
    segs, _ = _resolve(prob.start, prob.end, segments, None)
    tracker = MarginTracker("first_variation", prob.tolerance)
    for p0, q0 in segments_up_to(segs, max_length):
        for p, q in ((p0, q0), (q0, p0)):
            gc = restrict_to_geodesic(prob.curv, p, q)
            theta = gc.length
            at0 = boundary_derivatives(gc.forward, theta).at0
            at1 = boundary_derivatives(gc.reversed, theta).at1
            u0, u1 = prob.value(p), prob.value(q)
            plus = _times_u(math.inf if at0 is INFINITE else float(at0), u1)
            minus = _times_u(at1, u0)
            margin = minus + prob.slope(p) * (q - p) - plus
            tracker.record(margin, {"segment": [p, q]})
    return tracker.certificate()


# ----------------------------------------------------------------------
# N = ∞: κ-凸性
# ----------------------------------------------------------------------


def kappa_convexity_check(
    S: SampledFunction,
    curv: CurvatureField,
    segments: Optional[Sequence[Segment]] = None,
    t_grid: Optional[Sequence[float]] = None,
    tol: float = TOL,
) -> ConvexityCertificate:
    """S(γ_t) ≤ (1−t)S(γ₀) + tS(γ₁) − ∫₀¹g(s,t)θ²κ(γ_s)ds"""
    segs, ts = _resolve(S.start, S.end, segments, t_grid)
    tracker = MarginTracker("kappa_convexity", tol)
    for p, q in segments_up_to(segs, None):
        s0, s1 = float(S(p)), float(S(q))
        if math.isinf(s0) or math.isinf(s1):
            continue
        gc = restrict_to_geodesic(curv, p, q)
        theta = gc.length
        grid, cuts = _geodesic_grid(gc, ts)
        right = gc.forward.cell_value(grid * theta, "right") * theta**2
        left = gc.forward.cell_value(grid * theta, "left") * theta**2
        for t in ts.tolist():
            tg = _snap(grid, t)
            integral = green_integral(grid, right, tg, cuts, left)
            margin = (1.0 - tg) * s0 + tg * s1 - integral - float(S(p + tg * (q - p)))
            tracker.record(margin, {"segment": [p, q], "t": t})
    return tracker.certificate()
