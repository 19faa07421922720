"""
Distortion coefficients σ_κ^{(t)}(θ) = s_κ(tθ)/s_κ(θ).

INFINITE is a tagged value, never a float overflow. It multiplies with the
convention ∞·0 = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Optional, Sequence, Union

import numpy as np

from app.common.grid import span_grid
from app.services.base import DomainError, NotApplicableError
from app.services.curvature.field import (
    CurvatureField,
    GeodesicCurvature,
    combine,
    lsc_approx,
)
from app.services.ode_comparison.solver import (
    DEFAULT_STEPS,
    TAIL_DOUBLINGS,
    TAIL_RTOL,
    green_integral,
    piecewise_simpson,
    solve_generalized_sin,
)
from config.config import get_numerics_config
from logger.logger import get_logger

logger = get_logger(__name__)

_cfg = get_numerics_config("distortion")
INFINITE_THRESHOLD = float(_cfg.get("infinite_threshold", 1e-10))
TAU_POINTS = int(_cfg.get("tau_points", 1001))
LSC_BASE_N = int(_cfg.get("lsc_base_n", 1))
GAUSS_PANELS = int(_cfg.get("gauss_panels", 64))
_GAUSS_X, _GAUSS_W = np.polynomial.legendre.leggauss(int(_cfg.get("gauss_points", 6)))

ArrayLike = Union[float, Sequence[float], np.ndarray]


class _Infinite:
    """σ = ∞"""

    _instance: Optional["_Infinite"] = None

    def __new__(cls) -> "_Infinite":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INFINITE"

    def __str__(self) -> str:
        return "inf"

    def __float__(self) -> float:
        return math.inf

    def __eq__(self, other: object) -> bool:
        return other is self or (isinstance(other, float) and other == math.inf)

    def __hash__(self) -> int:
        return hash(math.inf)


INFINITE = _Infinite()
Extended = Union[float, _Infinite]


def is_infinite(value: Any) -> bool:
    return value is INFINITE


def ext_mul(coefficient: Extended, value: float) -> Extended:
    """coefficient·value with ∞·0 = 0; ∞ times a positive value stays INFINITE"""
    if coefficient is INFINITE:
        if value == 0.0:
            return 0.0
        if value < 0.0:
            raise DomainError("INFINITE times a negative value is undefined")
        return INFINITE
    return float(coefficient) * value


@dataclass(frozen=True)
class DistortionValue:
    t: float
    theta: float
    value: Extended

    @property
    def finite(self) -> bool:
        return self.value is not INFINITE

    def __float__(self) -> float:
        return float(self.value)

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "theta": self.theta,
            "value": float(self.value),
            "finite": self.finite,
        }


@dataclass(frozen=True)
class BoundaryDerivatives:
    """d/dt σ^{(t)} at t = 0 and t = 1"""

    at0: Extended
    at1: float

    @property
    def finite(self) -> bool:
        return self.at0 is not INFINITE

    def to_dict(self) -> dict:
        return {"at0": float(self.at0), "at1": self.at1}


@dataclass(frozen=True, eq=False)
class SigmaProfile:
    """σ^{(t)}(θ) on a t-grid from a single ODE solve; np.inf marks INFINITE"""

    theta: float
    t: np.ndarray
    values: np.ndarray
    finite: bool

    def at(self, t: float) -> Extended:
        j = int(np.argmin(np.abs(self.t - t)))
        v = float(self.values[j])
        return INFINITE if math.isinf(v) else v


def as_field(curv: Union[CurvatureField, GeodesicCurvature]) -> CurvatureField:
    """GeodesicCurvature means its forward field"""
    if isinstance(curv, GeodesicCurvature):
        return curv.forward
    return curv


def _validate(field: CurvatureField, ts: np.ndarray, theta: float) -> None:
    if np.any(ts < 0.0) or np.any(ts > 1.0) or np.any(~np.isfinite(ts)):
        bad = ts[(ts < 0.0) | (ts > 1.0) | ~np.isfinite(ts)]
        raise DomainError("t must lie in [0,1]", {"t": float(bad[0])})
    if not (0.0 <= theta <= field.length * (1 + 1e-12) + 1e-15):
        raise DomainError(
            "theta must lie in [0, L]", {"theta": theta, "L": field.length}
        )


def sigma_profile(
    curv: Union[CurvatureField, GeodesicCurvature],
    theta: float,
    t_grid: ArrayLike,
    step: Optional[float] = None,
) -> SigmaProfile:
    field = as_field(curv)
    ts = np.atleast_1d(np.asarray(t_grid, dtype=float))
    _validate(field, ts, theta)
    if theta == 0.0:
        return SigmaProfile(0.0, ts, ts.copy(), True)
    piece = field.window(field.start, min(field.start + theta, field.end))
    gs = solve_generalized_sin(
        piece, step if step is not None else theta / DEFAULT_STEPS, piece.start + ts * theta
    )
    s_theta = float(gs.s_values[-1])
    finite = gs.first_zero is None and s_theta >= INFINITE_THRESHOLD
    if finite:
        values = np.asarray(gs.s(piece.start + ts * theta)) / s_theta
    else:
        values = np.full(ts.shape, np.inf)
    values = np.where(ts == 0.0, 0.0, np.where(ts == 1.0, 1.0, values))
    return SigmaProfile(theta, ts, values, bool(finite))


def sigma(
    curv: Union[CurvatureField, GeodesicCurvature],
    t: float,
    theta: float,
    step: Optional[float] = None,
) -> DistortionValue:
    """
    σ_κ^{(t)}(θ) for κ read from the start of the field. θ = 0 gives t; the
    endpoints t = 0 and t = 1 give 0 and 1; INFINITE when s_κ vanishes on (0, θ].
    """
    prof = sigma_profile(curv, theta, [t], step)
    v = float(prof.values[0])
    return DistortionValue(float(t), float(theta), INFINITE if math.isinf(v) else v)


def sigma_lsc_limit(
    curv: Union[CurvatureField, GeodesicCurvature],
    t: float,
    theta: float,
    n0: int = LSC_BASE_N,
    doublings: int = TAIL_DOUBLINGS,
    rtol: float = TAIL_RTOL,
) -> DistortionValue:
    """
    sup over the approximants κₙ, n = 2ᵏn₀. The values are non-decreasing in n;
    a tail that has not settled within rtol over the last two doublings is
    reported as INFINITE.
    """
    field = as_field(curv)
    piece = field.window(field.start, field.start + theta) if theta > 0 else field
    values: list[float] = []
    for k in range(doublings + 1):
        dv = sigma(lsc_approx(piece, n0 * 2**k), t, theta)
        values.append(float(dv.value))
    last = values[-1]
    if math.isinf(last):
        return DistortionValue(t, theta, INFINITE)
    if len(values) >= 3 and abs(last - values[-3]) <= rtol * max(abs(last), 1e-300):
        return DistortionValue(t, theta, last)
    logger.warning(f"⚠️ σ 的 κₙ 序列未停滞 (t={t}, θ={theta}), 记为 INFINITE")
    return DistortionValue(t, theta, INFINITE)


# ----------------------------------------------------------------------
# Green 表示: 不动点残差与边界导数
# ----------------------------------------------------------------------


def merge_grid(base: ArrayLike, cuts: Sequence[float], gap: float = 1e-9) -> np.ndarray:
    """base ∪ cuts ∪ {0,1}, spacing ≥ gap; cuts win over nearby base points"""
    return span_grid(0.0, 1.0, np.asarray(base, dtype=float), list(cuts), gap)


def _green_setup(
    curv: Union[CurvatureField, GeodesicCurvature], theta: float, grid: Optional[ArrayLike]
) -> tuple[SigmaProfile, np.ndarray, np.ndarray, list[float]]:
    """σ on grid ∪ breakpoints, with right/left limits of θ²κ and the cut list"""
    field = as_field(curv)
    piece = field.window(field.start, field.start + theta)
    base = np.linspace(0.0, 1.0, TAU_POINTS) if grid is None else np.asarray(grid, float)
    cuts = [float((b - piece.start) / theta) for b in piece.breakpoints()]
    fine = merge_grid(base, cuts)
    prof = sigma_profile(piece, theta, fine)
    points = piece.start + fine * theta
    right = piece.cell_value(points, "right") * theta**2
    left = piece.cell_value(points, "left") * theta**2
    return prof, right, left, cuts


def fixed_point_residual(
    curv: Union[CurvatureField, GeodesicCurvature],
    theta: float,
    grid: Optional[ArrayLike] = None,
) -> float:
    """max over the grid of |σ^{(t)} − ∫₀¹ g(s,t)θ²κ(s)σ^{(s)}ds − t|"""
    if theta == 0.0:
        return 0.0
    prof, right, left, cuts = _green_setup(curv, theta, grid)
    if not prof.finite:
        raise NotApplicableError("σ is INFINITE, no fixed-point identity", {"theta": theta})
    s, sig = prof.t, prof.values
    worst = 0.0
    for t, st in zip(s.tolist(), sig.tolist()):
        integral = green_integral(s, right * sig, t, cuts, left * sig)
        worst = max(worst, abs(st - integral - t))
    return worst


def _gauss_panels(cuts: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    """Gauss–Legendre nodes and weights on [0,1]; no panel straddles a cut"""
    edges = merge_grid(np.linspace(0.0, 1.0, GAUSS_PANELS + 1), cuts)
    lo, hi = edges[:-1], edges[1:]
    half = 0.5 * (hi - lo)
    nodes = 0.5 * (lo + hi)[:, None] + half[:, None] * _GAUSS_X[None, :]
    weights = half[:, None] * _GAUSS_W[None, :]
    return nodes.ravel(), weights.ravel()


def boundary_derivatives(
    curv: Union[CurvatureField, GeodesicCurvature],
    theta: float,
    grid: Optional[ArrayLike] = None,
) -> BoundaryDerivatives:
    """
    at0 = 1 + ∫₀¹(1−s)θ²κσ^{(s)}ds,  at1 = 1 − ∫₀¹ sθ²κσ^{(s)}ds.
    INFINITE σ gives at0 = INFINITE and at1 = −∞.

    Without a grid the integrals use Gauss panels inside the κ cells, where σ
    is smooth; a given grid switches to piecewise Simpson on it.
    """
    if theta == 0.0:
        return BoundaryDerivatives(1.0, 1.0)
    if grid is not None:
        prof, right, left, cuts = _green_setup(curv, theta, grid)
        if not prof.finite:
            return BoundaryDerivatives(INFINITE, -math.inf)
        s, sig = prof.t, prof.values
        at0 = 1.0 + piecewise_simpson(s, (1 - s) * right * sig, cuts, (1 - s) * left * sig)
        at1 = 1.0 - piecewise_simpson(s, s * right * sig, cuts, s * left * sig)
        return BoundaryDerivatives(at0, at1)
    field = as_field(curv)
    piece = field.window(field.start, field.start + theta)
    cuts = [float((b - piece.start) / theta) for b in piece.breakpoints()]
    s, w = _gauss_panels(cuts)
    prof = sigma_profile(piece, theta, s)
    if not prof.finite:
        return BoundaryDerivatives(INFINITE, -math.inf)
    weighted = w * piece.cell_value(piece.start + s * theta, "right") * theta**2 * prof.values
    at0 = 1.0 + float(np.dot(1 - s, weighted))
    at1 = 1.0 - float(np.dot(s, weighted))
    return BoundaryDerivatives(at0, at1)


def finite_difference_derivatives(
    curv: Union[CurvatureField, GeodesicCurvature], theta: float, h: float = 1e-4
) -> BoundaryDerivatives:
    """second-order one-sided differences of σ in t at both ends"""
    ts = np.array([0.0, h, 2 * h, 1 - 2 * h, 1 - h, 1.0])
    prof = sigma_profile(curv, theta, ts)
    if not prof.finite:
        return BoundaryDerivatives(INFINITE, -math.inf)
    v = prof.values
    at0 = (-3 * v[0] + 4 * v[1] - v[2]) / (2 * h)
    at1 = (3 * v[5] - 4 * v[4] + v[3]) / (2 * h)
    return BoundaryDerivatives(float(at0), float(at1))


def taylor_remainder(
    curv: Union[CurvatureField, GeodesicCurvature], t: float, h: float
) -> float:
    """σ^{(t)}(h) − t[1 + (1−t²)κ(0)h²/6]"""
    field = as_field(curv)
    dv = sigma(field, t, h)
    if not dv.finite:
        raise NotApplicableError("σ is INFINITE at this h", {"t": t, "h": h})
    k0 = float(field(field.start))
    return float(dv.value) - t * (1.0 + (1.0 - t * t) * k0 * h * h / 6.0)


# ----------------------------------------------------------------------
# 对数凸性
# ----------------------------------------------------------------------


def log_convex_combine(
    curv_a: Union[CurvatureField, GeodesicCurvature],
    curv_b: Union[CurvatureField, GeodesicCurvature],
    lam: float,
    t: float,
    theta: float,
) -> float:
    """σ_a^{1−λ}·σ_b^{λ} − σ_{(1−λ)a+λb}; non-negative by log-convexity in κ"""
    if not 0.0 <= lam <= 1.0:
        raise DomainError("lambda must lie in [0,1]", {"lambda": lam})
    a = as_field(curv_a)
    b = as_field(curv_b)
    a = a.window(a.start, a.start + theta).shifted_to(0.0) if theta > 0 else a
    b = b.window(b.start, b.start + theta).shifted_to(0.0) if theta > 0 else b
    if lam == 0.0:
        mixed = a
    elif lam == 1.0:
        mixed = b
    else:
        mixed = combine([a, b], [1.0 - lam, lam])
    sa, sb, sm = sigma(a, t, theta), sigma(b, t, theta), sigma(mixed, t, theta)
    if not (sa.finite and sb.finite and sm.finite):
        raise NotApplicableError(
            "log-convexity needs finite σ for all three fields",
            {"t": t, "theta": theta, "lambda": lam},
        )
    va, vb, vm = float(sa.value), float(sb.value), float(sm.value)
    return va ** (1.0 - lam) * vb**lam - vm


def log_convex_G(
    curv: GeodesicCurvature, x: float, y: float, t: float, theta: float
) -> float:
    """G(x, y, κ) = log[σ_{κ⁻}^{(1−t)}(θ)eˣ + σ_{κ⁺}^{(t)}(θ)eʸ]"""
    minus = sigma(curv.reversed, 1.0 - t, theta)
    plus = sigma(curv.forward, t, theta)
    if not (minus.finite and plus.finite):
        raise NotApplicableError("G needs finite σ", {"t": t, "theta": theta})
    return math.log(float(minus.value) * math.exp(x) + float(plus.value) * math.exp(y))
