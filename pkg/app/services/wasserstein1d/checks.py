"""
Entropic curvature-dimension checks along the (unique) displacement geodesic.
"""

from __future__ import annotations

import math
from typing import Optional, Sequence

import numpy as np

from app.services.base import DomainError, NotApplicableError, PreconditionError
from app.services.convexity.problem import ConvexityCertificate, MarginTracker
from app.services.curvature.field import CurvatureField, PlanCurvature, plan_curvature, restrict_to_geodesic
from app.services.distortion.coefficients import (
    INFINITE,
    TAU_POINTS,
    Extended,
    ext_mul,
    merge_grid,
    sigma_profile,
)
from app.services.ode_comparison.solver import green_integral
from app.services.wasserstein1d.measures import (
    ProbMeasure1D,
    WassersteinGeodesic,
    displacement_geodesic,
)
from app.services.wasserstein1d.space import MMSpace1D, entropy, u_n
from config.config import get_numerics_config
from logger.logger import get_logger

logger = get_logger(__name__)

_cfg = get_numerics_config("wasserstein1d")
TOL = float(_cfg.get("tol", 1e-4))
PARTICLE_STRIDE = int(_cfg.get("particle_stride", 8))


def _t_grid(t_grid: Optional[Sequence[float]]) -> np.ndarray:
    ts = np.asarray(t_grid if t_grid is not None else np.linspace(0.0, 1.0, 21), dtype=float)
    if np.any(ts < 0) or np.any(ts > 1):
        raise DomainError("t-grid must lie in [0,1]")
    return ts


def _trivial(criterion: str) -> ConvexityCertificate:
    return ConvexityCertificate(
        criterion=criterion, verdict="pass", worst_margin=0.0, checked=0, tolerance=TOL, note="Θ = 0"
    )


def _profile(curv: CurvatureField, geo: WassersteinGeodesic, ts: np.ndarray) -> PlanCurvature:
    grid = merge_grid(np.linspace(0.0, 1.0, TAU_POINTS), ts.tolist())
    return plan_curvature(curv, geo, grid)


def _extended(value: float) -> Extended:
    return INFINITE if math.isinf(value) else float(value)


def _margin(lhs: float, *terms: Extended) -> float:
    if any(term is INFINITE for term in terms):
        return -math.inf
    return lhs - sum(float(term) for term in terms)


def entropy_convexity_check(
    space: MMSpace1D,
    curv: CurvatureField,
    mu0: ProbMeasure1D,
    mu1: ProbMeasure1D,
    t_grid: Optional[Sequence[float]] = None,
) -> ConvexityCertificate:
    """(1−t)Ent(μ₀) + tEnt(μ₁) − Ent(μ_t) ≥ ∫₀¹g(s,t)κ_Π(sΘ)Θ²ds"""
    ts = _t_grid(t_grid)
    geo = displacement_geodesic(mu0, mu1, ts)
    if geo.theta == 0.0:
        return _trivial("entropy_convexity")
    e0, e1 = entropy(mu0, space), entropy(mu1, space)
    if math.isinf(e0) or math.isinf(e1):
        raise PreconditionError("endpoint measures must have finite entropy", {"Ent0": e0, "Ent1": e1})
    prof = _profile(curv, geo, ts)
    tracker = MarginTracker("entropy_convexity", TOL)
    for t in ts.tolist():
        et = entropy(geo.interpolant(t), space)
        integral = green_integral(prof.t_grid, prof.profile, t)
        tracker.record((1.0 - t) * e0 + t * e1 - et - integral, {"t": t, "Ent_t": et})
    return tracker.certificate()


def check_entropic_cd(
    space: MMSpace1D,
    curv: CurvatureField,
    N: float,
    mu0: ProbMeasure1D,
    mu1: ProbMeasure1D,
    t_grid: Optional[Sequence[float]] = None,
) -> ConvexityCertificate:
    """
    U_N(μ_t) ≥ σ^{(1−t)}_{κ⁻_Π/N}(Θ)U_N(μ₀) + σ^{(t)}_{κ⁺_Π/N}(Θ)U_N(μ₁),
    with σ read from the plan profile κ_ΠΘ² on [0,1]. N = ∞ runs the
    entropy-convexity inequality instead.
    """
    if math.isinf(N):
        return entropy_convexity_check(space, curv, mu0, mu1, t_grid)
    if not N > 0:
        raise DomainError("N must be positive", {"N": N})
    ts = _t_grid(t_grid)
    geo = displacement_geodesic(mu0, mu1, ts)
    if geo.theta == 0.0:
        return _trivial("cde")
    if math.isinf(entropy(mu0, space)) or math.isinf(entropy(mu1, space)):
        raise PreconditionError("endpoint measures must have finite entropy")
    u0, u1 = u_n(mu0, space, N), u_n(mu1, space, N)
    field = _profile(curv, geo, ts).as_field(N)
    minus = sigma_profile(field.reversed(), 1.0, 1.0 - ts)
    plus = sigma_profile(field, 1.0, ts)
    tracker = MarginTracker("cde", TOL)
    for j, t in enumerate(ts.tolist()):
        ut = u_n(geo.interpolant(t), space, N)
        lo = ext_mul(_extended(float(minus.values[j])), u0)
        hi = ext_mul(_extended(float(plus.values[j])), u1)
        tracker.record(_margin(ut, lo, hi), {"t": t, "U_t": ut, "theta": geo.theta})
    cert = tracker.certificate()
    logger.debug(f"ℹ️ CD^e check over {ts.size} times: worst margin {cert.worst_margin:.3e}")
    return cert


def density_inequality_check(
    space: MMSpace1D,
    curv: CurvatureField,
    N: float,
    mu0: ProbMeasure1D,
    mu1: ProbMeasure1D,
    t_grid: Optional[Sequence[float]] = None,
    stride: int = PARTICLE_STRIDE,
) -> ConvexityCertificate:
    """
    Per particle γ of the monotone plan:
    ρ_t(γ_t)^{−1/N} ≥ σ^{(1−t)}_{κ⁻_γ/N}(|γ̇|)ρ₀(γ₀)^{−1/N} + σ^{(t)}_{κ⁺_γ/N}(|γ̇|)ρ₁(γ₁)^{−1/N},
    where ρ^{−1/N} = (q′·w(q))^{1/N}.
    """
    if math.isinf(N) or not N > 0:
        raise DomainError("the density inequality needs a finite N > 0", {"N": N})
    if mu0.has_atoms or mu1.has_atoms:
        raise NotApplicableError("density inequality needs absolutely continuous measures")
    ts = _t_grid(t_grid)
    geo = displacement_geodesic(mu0, mu1, ts)

    def jacobian(q: np.ndarray, dq: np.ndarray) -> np.ndarray:
        return (dq * np.asarray(space.weight(q), dtype=float)) ** (1.0 / N)

    a0 = jacobian(mu0.q, mu0.dq)
    a1 = jacobian(mu1.q, mu1.dq)
    levels = mu0.levels
    tracker = MarginTracker("density", TOL)
    for j in range(0, mu0.q.size, max(1, stride)):
        x0, x1 = float(mu0.q[j]), float(mu1.q[j])
        theta = abs(x1 - x0)
        gc = restrict_to_geodesic(curv, x0, x1).scaled(1.0 / N)
        minus = sigma_profile(gc.reversed, theta, 1.0 - ts)
        plus = sigma_profile(gc.forward, theta, ts)
        qt = (1.0 - ts) * x0 + ts * x1
        dqt = (1.0 - ts) * mu0.dq[j] + ts * mu1.dq[j]
        at = jacobian(qt, dqt)
        for k, t in enumerate(ts.tolist()):
            lo = ext_mul(_extended(float(minus.values[k])), float(a0[j]))
            hi = ext_mul(_extended(float(plus.values[k])), float(a1[j]))
            tracker.record(_margin(float(at[k]), lo, hi), {"u": float(levels[j]), "t": t})
    return tracker.certificate()
