"""
EVI_{κ,N} residuals and contraction bounds along simulated flows.

Every residual is oriented so that a value ≥ −tol means the inequality holds;
report margins are bound − observed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Dict, Optional, Sequence

import numpy as np
from scipy import integrate

from app.common.sampled import SampledFunction
from app.services.base import DomainError, NotApplicableError, PreconditionError
from app.services.curvature.field import CurvatureField, GeodesicCurvature, restrict_to_geodesic
from app.services.distortion.coefficients import (
    INFINITE,
    TAU_POINTS,
    boundary_derivatives,
    merge_grid,
    sigma_profile,
)
from app.services.evi_flow.trace import EVITrace
from app.services.ode_comparison.solver import constant_cos, constant_sin, piecewise_simpson
from config.config import get_numerics_config
from logger.logger import get_logger

logger = get_logger(__name__)

_cfg = get_numerics_config("evi_flow")
BOUND_POINTS = int(_cfg.get("bound_points", 200))
SHARP_NODES = 4001


@dataclass(frozen=True, eq=False)
class ContractionReport:
    """observed d/dr of the squared distance against the bound, per time"""

    times: np.ndarray
    distance2: np.ndarray
    observed: np.ndarray
    bound: np.ndarray
    rates: np.ndarray
    kind: str = "infinite"

    @property
    def margins(self) -> np.ndarray:
        return self.bound - self.observed

    @property
    def min_margin(self) -> float:
        return float(np.min(self.margins)) if self.margins.size else 0.0

    def to_rows(self) -> list[tuple[float, float, float, float]]:
        return list(
            zip(
                self.times.tolist(),
                self.observed.tolist(),
                self.bound.tolist(),
                self.margins.tolist(),
            )
        )

    def to_dict(self) -> Dict[str, Any]:
        worst = int(np.argmin(self.margins)) if self.margins.size else 0
        return {
            "kind": self.kind,
            "points": int(self.times.size),
            "min_margin": self.min_margin,
            "worst_time": float(self.times[worst]) if self.times.size else None,
        }


# ----------------------------------------------------------------------
# 沿测地线的 τ-积分
# ----------------------------------------------------------------------


def _tau_grid(gc: GeodesicCurvature) -> tuple[np.ndarray, list[float]]:
    if gc.is_degenerate:
        return np.linspace(0.0, 1.0, TAU_POINTS), []
    cuts = [float(b / gc.length) for b in gc.forward.breakpoints()]
    return merge_grid(np.linspace(0.0, 1.0, TAU_POINTS), cuts), cuts


def _kappa_limits(gc: GeodesicCurvature, grid: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    points = grid * gc.length
    return gc.forward.cell_value(points, "right"), gc.forward.cell_value(points, "left")


def _tau_integral(gc: GeodesicCurvature, weight: Any) -> float:
    """∫₀¹ weight(τ)·κ(γ(τ)) dτ"""
    grid, cuts = _tau_grid(gc)
    right, left = _kappa_limits(gc, grid)
    w = weight(grid)
    return piecewise_simpson(grid, w * right, cuts, w * left)


# ----------------------------------------------------------------------
# EVI
# ----------------------------------------------------------------------


def _at_time(trace: EVITrace, z: float, s: float) -> tuple[float, float, float]:
    """x_s, d(x_s, z) and d/ds d(x_s, z)²"""
    if not trace.potential.contains(z):
        raise DomainError("reference point outside the domain of f", {"z": z})
    i = trace.index_of(s)
    x = float(trace.states[i])
    return x, abs(x - z), float(trace.squared_distance_rate(z)[i])


def evi_residual(
    trace: EVITrace, z: float, curv: CurvatureField, N: float, s: float
) -> float:
    """
    N = ∞:  f(z) − f(x_s) − ½ d/ds d² − d²∫₀¹(1−τ)κ(γ_τ)dτ, γ from x_s to z.
    N < ∞:  −(1/2N) d/ds d² + σ′_{κ⁻/N}|_{t=1} − σ′_{κ⁺/N}|_{t=0}·U_N(z)/U_N(x_s).
    """
    f = trace.potential
    x, d, dd2 = _at_time(trace, z, s)
    gc = restrict_to_geodesic(curv, x, z)
    if math.isinf(N):
        a = _tau_integral(gc, lambda tau: 1.0 - tau)
        return float(f(z)) - float(f(x)) - 0.5 * dd2 - d * d * a
    if not N > 0:
        raise DomainError("N must be positive", {"N": N})
    gn = gc.scaled(1.0 / N)
    at0 = boundary_derivatives(gn.forward, d).at0
    at1 = boundary_derivatives(gn.reversed, d).at1
    if at0 is INFINITE or math.isinf(at1):
        raise NotApplicableError(
            "boundary derivative of σ is infinite on this geodesic", {"s": s, "z": z, "N": N}
        )
    ratio = math.exp((float(f(x)) - float(f(z))) / N)
    return -dd2 / (2.0 * N) + at1 - float(at0) * ratio


def evi_residual_constant(trace: EVITrace, z: float, K: float, N: float, s: float) -> float:
    """
    cos_{K/N}(d) − (1/N)·sin_{K/N}(d)·d/ds d − U_N(z)/U_N(x_s), the closed form
    for constant curvature; equals evi_residual·sin_{K/N}(d)/d.
    """
    if not (N > 0) or math.isinf(N):
        raise DomainError("the constant form needs a finite N > 0", {"N": N})
    f = trace.potential
    x, d, dd2 = _at_time(trace, z, s)
    k = K / N
    if k > 0 and d >= math.pi / math.sqrt(k):
        raise NotApplicableError("d exceeds the diameter bound π√(N/K)", {"d": d})
    d_rate = dd2 / (2.0 * d) if d > 0 else 0.0
    ratio = math.exp((float(f(x)) - float(f(z))) / N)
    return float(constant_cos(k, d)) - float(constant_sin(k, d)) * d_rate / N - ratio


def sharp_kappa_N(
    f: SampledFunction, N: float, nodes: Optional[Sequence[float]] = None
) -> CurvatureField:
    """f″ − f′²/N, the curvature for which f is exactly (κ,N)-convex; f″ when N = ∞"""
    xs = np.asarray(nodes, float) if nodes is not None else np.linspace(f.start, f.end, SHARP_NODES)
    if math.isinf(N):
        return CurvatureField.from_function(lambda x: np.asarray(f.derivative(x, 2)), xs)
    if not N > 0:
        raise DomainError("N must be positive", {"N": N})

    def kappa(x: np.ndarray) -> np.ndarray:
        d1 = np.asarray(f.derivative(x, 1), dtype=float)
        return np.asarray(f.derivative(x, 2), dtype=float) - d1 * d1 / N

    return CurvatureField.from_function(kappa, xs)


# ----------------------------------------------------------------------
# 收缩估计
# ----------------------------------------------------------------------


def _same_grid(trace_x: EVITrace, trace_y: EVITrace) -> None:
    if trace_x.times.shape != trace_y.times.shape or not np.allclose(
        trace_x.times, trace_y.times, rtol=0.0, atol=1e-12
    ):
        raise PreconditionError(
            "traces must share the time grid",
            {"points": [int(trace_x.times.size), int(trace_y.times.size)]},
        )


def _rate(values: np.ndarray, times: np.ndarray) -> np.ndarray:
    if times.size < 3:
        return np.gradient(values, times)
    return np.gradient(values, times, edge_order=2)


def contraction_bound_infinite(
    trace_x: EVITrace, trace_y: EVITrace, curv: CurvatureField
) -> ContractionReport:
    """d/ds d(x_s,y_s)² ≤ −2·a_s·d², a_s = ∫₀¹κ(γ^s_τ)dτ along the segment x_s → y_s"""
    _same_grid(trace_x, trace_y)
    times = trace_x.times
    d2 = (trace_x.states - trace_y.states) ** 2
    observed = _rate(d2, times)
    rates = np.array(
        [
            _tau_integral(restrict_to_geodesic(curv, float(x), float(y)), np.ones_like)
            for x, y in zip(trace_x.states, trace_y.states)
        ]
    )
    return ContractionReport(times, d2, observed, -2.0 * rates * d2, rates, "infinite")


def gronwall_bound(report: ContractionReport) -> np.ndarray:
    """d₀²·exp(−2∫₀^s a), the integrated form of the differential bound"""
    exponent = integrate.cumulative_trapezoid(report.rates, report.times, initial=0.0)
    return report.distance2[0] * np.exp(-2.0 * exponent)


def _sqrt_at0(gc: GeodesicCurvature, d: float) -> float:
    at0 = boundary_derivatives(gc, d).at0
    if at0 is INFINITE:
        raise NotApplicableError("σ is INFINITE along the connecting geodesic", {"d": d})
    return math.sqrt(max(float(at0), 0.0))


def _b_coefficient(gc: GeodesicCurvature, N: float, lam: float) -> float:
    """∫₀¹κ(γ_τ)((1−τ)λ + τ/λ)(σ^{(1−τ)}_{κ⁻/N}(θ) + σ^{(τ)}_{κ⁺/N}(θ))dτ"""
    theta = gc.length
    grid, cuts = _tau_grid(gc)
    gn = gc.scaled(1.0 / N)
    minus = sigma_profile(gn.reversed, theta, 1.0 - grid)
    plus = sigma_profile(gn.forward, theta, grid)
    if not (minus.finite and plus.finite):
        raise NotApplicableError("σ is INFINITE along the connecting geodesic", {"theta": theta})
    right, left = _kappa_limits(gc, grid)
    w = ((1.0 - grid) * lam + grid / lam) * (minus.values + plus.values)
    return piecewise_simpson(grid, w * right, cuts, w * left)


def dimensional_contraction_bound(
    trace_x: EVITrace,
    trace_y: EVITrace,
    curv: CurvatureField,
    N: float,
    lam: float = 1.0,
    r_grid: Optional[Sequence[float]] = None,
) -> ContractionReport:
    """
    g(r) = d(x_{λr}, y_{r/λ})² against
    −2b·g + 2N[√(λ·σ′_{κ/N}|₀) − √(λ⁻¹·σ′_{κ⁻/N}|₀)]², γ from x_{λr} to y_{r/λ}.
    """
    if not lam > 0:
        raise DomainError("lambda must be positive", {"lambda": lam})
    if not (N > 0) or math.isinf(N):
        raise DomainError("the dimensional bound needs a finite N > 0", {"N": N})
    r_max = min(trace_x.horizon / lam, trace_y.horizon * lam)
    step = min(trace_x.dt / lam, trace_y.dt * lam)
    r_fine = np.linspace(0.0, r_max, max(3, int(round(r_max / step)) + 1))
    xs = trace_x.position(lam * r_fine)
    ys = trace_y.position(r_fine / lam)
    g = (ys - xs) ** 2
    dg = _rate(g, r_fine)

    if r_grid is None:
        idx = np.unique(np.linspace(0, r_fine.size - 1, min(BOUND_POINTS, r_fine.size)).astype(int))
    else:
        req = np.asarray(r_grid, dtype=float)
        if np.any(req < 0) or np.any(req > r_max * (1 + 1e-12)):
            raise DomainError("r outside the common horizon", {"r_max": r_max})
        idx = np.unique(np.searchsorted(r_fine, req).clip(0, r_fine.size - 1))

    bound = np.empty(idx.size)
    rates = np.empty(idx.size)
    for k, i in enumerate(idx.tolist()):
        x, y = float(xs[i]), float(ys[i])
        d = abs(y - x)
        gc = restrict_to_geodesic(curv, x, y)
        b = _b_coefficient(gc, N, lam)
        gn = gc.scaled(1.0 / N)
        defect = _sqrt_at0(gn.forward, d) * math.sqrt(lam) - _sqrt_at0(gn.reversed, d) / math.sqrt(lam)
        rates[k] = b
        bound[k] = -2.0 * b * g[i] + 2.0 * N * defect**2
    return ContractionReport(r_fine[idx], g[idx], dg[idx], bound, rates, "dimensional")


def asymptotic_contraction_rhs(K: float, N: float, lam: float, d: float) -> float:
    """−K(λ + λ⁻¹)d² + 2N(√λ − √λ⁻¹)²"""
    if not lam > 0:
        raise DomainError("lambda must be positive", {"lambda": lam})
    return -K * (lam + 1.0 / lam) * d * d + 2.0 * N * (math.sqrt(lam) - 1.0 / math.sqrt(lam)) ** 2
