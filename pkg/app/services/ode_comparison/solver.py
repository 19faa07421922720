"""
v'' + κv = 0 的比较解与 Green 核

- 广义正弦 s_κ (s(0)=0, s'(0)=1) 与广义余弦 c_κ = s_κ'
- 经典四阶 Runge-Kutta, 网格包含 κ 的所有断点
- 首个正零点: 变号 + 二分
- [0,1] 上的 Green 核与按断点分段的 Simpson 求积
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Optional, Sequence, Union

import numpy as np
from scipy import integrate, optimize
from scipy.interpolate import CubicHermiteSpline

from app.common.grid import relative_gap, span_grid
from app.services.base import OrderingError, PreconditionError
from app.services.curvature.field import CurvatureField, lsc_approx
from config.config import get_numerics_config
from logger.logger import get_logger

logger = get_logger(__name__)

_cfg = get_numerics_config("ode_comparison")
DEFAULT_STEPS = int(_cfg.get("default_steps", 1000))
ZERO_XTOL = float(_cfg.get("zero_xtol", 1e-10))
ZERO_ATOL = float(_cfg.get("zero_atol", 1e-12))
TAIL_DOUBLINGS = int(_cfg.get("tail_doublings", 10))
TAIL_RTOL = float(_cfg.get("tail_rtol", 1e-8))
COMPARISON_TOL = float(_cfg.get("comparison_tol", 1e-8))

ArrayLike = Union[float, Sequence[float], np.ndarray]


def _rk4_coefficients(kappa: np.ndarray, h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    One RK4 step of (v, v')' = A(v, v') with A = [[0, 1], [−κ, 0]] is the matrix
    R(hA) = p·I + q·A, R(z) = 1 + z + z²/2 + z³/6 + z⁴/24.
    """
    kh2 = kappa * h * h
    p = 1.0 - 0.5 * kh2 + kh2 * kh2 / 24.0
    q = h * (1.0 - kh2 / 6.0)
    return p, q


def rk4_step(s: float, c: float, kappa: float, h: float) -> tuple[float, float]:
    p, q = _rk4_coefficients(np.array(kappa), np.array(h))
    pf, qf = float(p), float(q)
    return pf * s + qf * c, -kappa * qf * s + pf * c


@dataclass(frozen=True, eq=False)
class GeneralizedSine:
    grid: np.ndarray
    s_values: np.ndarray
    c_values: np.ndarray
    kappa_steps: np.ndarray
    first_zero: Optional[float]

    @property
    def start(self) -> float:
        return float(self.grid[0])

    @property
    def end(self) -> float:
        return float(self.grid[-1])

    @cached_property
    def _spline(self) -> CubicHermiteSpline:
        return CubicHermiteSpline(self.grid, self.s_values, self.c_values)

    def _lookup(self, x: np.ndarray, values: np.ndarray) -> Optional[np.ndarray]:
        idx = np.searchsorted(self.grid, x)
        idx_c = np.minimum(idx, self.grid.size - 1)
        if np.all(self.grid[idx_c] == x):
            return np.asarray(values[idx_c])
        return None

    def s(self, x: ArrayLike) -> Union[float, np.ndarray]:
        arr = np.atleast_1d(np.asarray(x, dtype=float))
        if self.grid.size == 1:
            out = np.zeros_like(arr)
        else:
            exact = self._lookup(arr, self.s_values)
            out = exact if exact is not None else self._spline(arr)
        return float(out[0]) if np.ndim(x) == 0 else out

    def c(self, x: ArrayLike) -> Union[float, np.ndarray]:
        arr = np.atleast_1d(np.asarray(x, dtype=float))
        if self.grid.size == 1:
            out = np.ones_like(arr)
        else:
            exact = self._lookup(arr, self.c_values)
            out = exact if exact is not None else self._spline.derivative()(arr)
        return float(out[0]) if np.ndim(x) == 0 else out

    def to_rows(self) -> Iterable[tuple[float, float, float]]:
        return zip(self.grid.tolist(), self.s_values.tolist(), self.c_values.tolist())


def solver_grid(
    curv: CurvatureField, step: float, extra_points: Iterable[float] = ()
) -> np.ndarray:
    """uniform grid ∪ κ nodes ∪ extra points, all inside the domain"""
    a, b = curv.start, curv.end
    n = max(1, int(math.ceil((b - a) / step - 1e-9)))
    extra = np.asarray(list(extra_points), dtype=float)
    extra = extra[(extra >= a) & (extra <= b)]
    return span_grid(a, b, np.linspace(a, b, n + 1), np.concatenate([curv.nodes, extra]), relative_gap(a, b))


def solve_generalized_sin(
    curv: CurvatureField,
    step: Optional[float] = None,
    extra_points: Iterable[float] = (),
) -> GeneralizedSine:
    """
    s_κ on the domain [a, b] of curv, with s(a) = 0 and s'(a) = 1.
    κ is taken constant on each solver interval, read at its midpoint.
    """
    length = curv.length
    if length == 0.0:
        return GeneralizedSine(
            curv.nodes.copy(), np.zeros(1), np.ones(1), np.array([]), None
        )
    if step is None:
        step = length / DEFAULT_STEPS
    if step <= 0 or step > length / 10 * (1 + 1e-12):
        raise PreconditionError(
            "solver step must satisfy 0 < step <= L/10",
            {"step": step, "L": length},
        )
    grid = solver_grid(curv, step, extra_points)
    h = np.diff(grid)
    kappa = curv.cell_value(0.5 * (grid[:-1] + grid[1:]))
    p, q = _rk4_coefficients(kappa, h)

    s_vals = np.empty(grid.size)
    c_vals = np.empty(grid.size)
    s, c = 0.0, 1.0
    s_vals[0], c_vals[0] = s, c
    for i, (pi, qi, ki) in enumerate(zip(p.tolist(), q.tolist(), kappa.tolist()), start=1):
        s, c = pi * s + qi * c, -ki * qi * s + pi * c
        s_vals[i], c_vals[i] = s, c

    zero = _locate_first_zero(grid, s_vals, c_vals, kappa)
    return GeneralizedSine(grid, s_vals, c_vals, kappa, zero)


def _locate_first_zero(
    grid: np.ndarray, s_vals: np.ndarray, c_vals: np.ndarray, kappa: np.ndarray
) -> Optional[float]:
    hits = np.nonzero(s_vals[1:] < ZERO_ATOL)[0]
    if hits.size == 0:
        return None
    i = int(hits[0]) + 1
    if abs(s_vals[i]) < ZERO_ATOL:
        return float(grid[i])
    x0, s0, c0, k0 = float(grid[i - 1]), float(s_vals[i - 1]), float(c_vals[i - 1]), float(kappa[i - 1])

    def s_at(x: float) -> float:
        return rk4_step(s0, c0, k0, x - x0)[0]

    return float(optimize.bisect(s_at, x0, float(grid[i]), xtol=ZERO_XTOL))


def first_zero(gs: GeneralizedSine) -> Optional[float]:
    """smallest x > start with s_κ(x) = 0, or None if s_κ stays positive"""
    return gs.first_zero


# ----------------------------------------------------------------------
# κ_n 单调尾
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class MonotoneTail:
    ns: tuple[int, ...]
    values: tuple[float, ...]
    stagnated: bool

    @property
    def limit(self) -> float:
        return self.values[-1]


def monotone_tail(
    curv: CurvatureField,
    step: Optional[float] = None,
    n0: int = 1,
    doublings: int = TAIL_DOUBLINGS,
    rtol: float = TAIL_RTOL,
) -> MonotoneTail:
    """s_{κₙ}(L) for n = 2ᵏ·n₀, k = 0..doublings; decreasing towards s_κ(L)"""
    ns: list[int] = []
    values: list[float] = []
    for k in range(doublings + 1):
        n = n0 * 2**k
        gs = solve_generalized_sin(lsc_approx(curv, n), step)
        ns.append(n)
        values.append(float(gs.s_values[-1]))
    stagnated = False
    if len(values) >= 3:
        scale_ = max(abs(values[-1]), 1e-300)
        stagnated = abs(values[-1] - values[-3]) <= rtol * scale_
    if not stagnated:
        logger.warning(f"⚠️ κₙ 尾部未收敛: n₀={n0}, 最后值 {values[-1]}")
    return MonotoneTail(tuple(ns), tuple(values), stagnated)


# ----------------------------------------------------------------------
# Sturm 比较
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class ComparisonReport:
    min_margin: float
    argmin: float
    ok: bool

    def to_dict(self) -> dict:
        return {"min_margin": self.min_margin, "argmin": self.argmin, "ok": self.ok}


def _require_same_domain(a: CurvatureField, b: CurvatureField) -> None:
    if not (math.isclose(a.start, b.start, abs_tol=1e-12) and math.isclose(a.end, b.end, abs_tol=1e-12)):
        raise PreconditionError(
            "fields must share the domain",
            {"lo": [a.start, a.end], "hi": [b.start, b.end]},
        )


def _check_order(curv_lo: CurvatureField, curv_hi: CurvatureField) -> np.ndarray:
    gap = relative_gap(curv_lo.start, curv_lo.end)
    nodes = span_grid(curv_lo.start, curv_lo.end, priority=np.concatenate([curv_lo.nodes, curv_hi.nodes]), gap=gap)
    probes = np.concatenate([nodes, 0.5 * (nodes[:-1] + nodes[1:])])
    diff = np.asarray(curv_hi(probes)) - np.asarray(curv_lo(probes))
    if np.any(diff < -1e-12):
        x = float(probes[int(np.argmin(diff))])
        raise OrderingError("curv_hi must dominate curv_lo pointwise", {"x": x})
    return nodes


def check_sturm_comparison(
    curv_lo: CurvatureField,
    curv_hi: CurvatureField,
    step: Optional[float] = None,
    tol: float = COMPARISON_TOL,
) -> ComparisonReport:
    """min over the shared grid of s_lo − s_hi; success iff ≥ −tol"""
    _require_same_domain(curv_lo, curv_hi)
    nodes = _check_order(curv_lo, curv_hi)
    gs_lo = solve_generalized_sin(curv_lo, step, extra_points=nodes)
    gs_hi = solve_generalized_sin(curv_hi, step, extra_points=nodes)
    if gs_hi.first_zero is not None and gs_hi.first_zero < curv_hi.end - ZERO_XTOL:
        raise OrderingError(
            "s_hi must stay positive on the open domain",
            {"first_zero": gs_hi.first_zero},
        )
    margin = gs_lo.s_values - gs_hi.s_values
    i = int(np.argmin(margin))
    report = ComparisonReport(float(margin[i]), float(gs_lo.grid[i]), bool(margin[i] >= -tol))
    logger.debug(f"Sturm comparison: min margin {report.min_margin:.3e} at {report.argmin}")
    return report


@dataclass(frozen=True)
class InterlacingReport:
    zero_lo: float
    zero_hi: Optional[float]
    interlaced: bool
    proportional: bool

    @property
    def ok(self) -> bool:
        return self.interlaced or self.proportional


def check_interlacing(
    curv_lo: CurvatureField,
    curv_hi: CurvatureField,
    step: Optional[float] = None,
) -> InterlacingReport:
    """
    With s_lo vanishing at the start and at its first zero b, s_hi has a zero
    in (start, b] or the two solutions are proportional there.
    """
    _require_same_domain(curv_lo, curv_hi)
    nodes = _check_order(curv_lo, curv_hi)
    gs_lo = solve_generalized_sin(curv_lo, step, extra_points=nodes)
    gs_hi = solve_generalized_sin(curv_hi, step, extra_points=nodes)
    if gs_lo.first_zero is None:
        raise PreconditionError("s_lo has no zero on the domain")
    b = gs_lo.first_zero
    interlaced = gs_hi.first_zero is not None and gs_hi.first_zero <= b + 1e-8
    inner = (gs_lo.grid > gs_lo.start + 0.05 * (b - gs_lo.start)) & (
        gs_lo.grid < gs_lo.start + 0.95 * (b - gs_lo.start)
    )
    ratio = gs_hi.s_values[inner] / gs_lo.s_values[inner]
    proportional = bool(ratio.size > 1 and float(np.var(ratio)) < 1e-10)
    return InterlacingReport(b, gs_hi.first_zero, bool(interlaced), proportional)


# ----------------------------------------------------------------------
# Green 核与求积
# ----------------------------------------------------------------------


def green_kernel(s: ArrayLike, t: ArrayLike) -> Union[float, np.ndarray]:
    """g(s,t) = s(1−t) for s ≤ t, t(1−s) otherwise"""
    s_arr = np.asarray(s, dtype=float)
    t_arr = np.asarray(t, dtype=float)
    out = np.where(s_arr <= t_arr, s_arr * (1.0 - t_arr), t_arr * (1.0 - s_arr))
    return float(out) if out.ndim == 0 else out


def _cut_indices(x: np.ndarray, cuts: Iterable[float]) -> list[int]:
    idx = {0, x.size - 1}
    span = max(1.0, float(x[-1] - x[0]))
    for cut in cuts:
        if cut <= x[0] or cut >= x[-1]:
            continue
        j = int(np.argmin(np.abs(x - cut)))
        if abs(x[j] - cut) > 1e-9 * span:
            raise PreconditionError("quadrature cut is not a grid point", {"cut": float(cut)})
        idx.add(j)
    return sorted(idx)


def piecewise_simpson(
    x: np.ndarray,
    values: np.ndarray,
    cuts: Iterable[float] = (),
    left_limits: Optional[np.ndarray] = None,
) -> float:
    """
    Composite Simpson on each piece between cuts. values hold right limits,
    left_limits (if given) the limits from the left, so a piece ending at a
    jump uses the value of its own side.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(values, dtype=float)
    total = 0.0
    bounds = _cut_indices(x, cuts)
    for i0, i1 in zip(bounds[:-1], bounds[1:]):
        seg = y[i0 : i1 + 1].copy()
        if left_limits is not None:
            seg[-1] = left_limits[i1]
        xs = x[i0 : i1 + 1]
        if seg.size < 3:
            total += float(integrate.trapezoid(seg, xs))
        else:
            total += float(integrate.simpson(seg, x=xs))
    return total


def green_integral(
    grid: np.ndarray,
    values: np.ndarray,
    t: float,
    cuts: Iterable[float] = (),
    left_limits: Optional[np.ndarray] = None,
) -> float:
    """∫₀¹ g(s,t)·values(s) ds, split at the kink s = t and at cuts"""
    g = np.asarray(green_kernel(grid, t))
    left = None if left_limits is None else g * left_limits
    return piecewise_simpson(grid, g * values, list(cuts) + [t], left)


# ----------------------------------------------------------------------
# 常曲率闭式解
# ----------------------------------------------------------------------


def constant_sin(k: float, x: ArrayLike) -> Union[float, np.ndarray]:
    """s_k(x) for constant k: sin(√k x)/√k, x, or sinh(√−k x)/√−k"""
    arr = np.asarray(x, dtype=float)
    if k > 0:
        r = math.sqrt(k)
        out = np.sin(r * arr) / r
    elif k < 0:
        r = math.sqrt(-k)
        out = np.sinh(r * arr) / r
    else:
        out = arr.copy()
    return float(out) if out.ndim == 0 else out


def constant_cos(k: float, x: ArrayLike) -> Union[float, np.ndarray]:
    """c_k = s_k′"""
    arr = np.asarray(x, dtype=float)
    if k > 0:
        out = np.cos(math.sqrt(k) * arr)
    elif k < 0:
        out = np.cosh(math.sqrt(-k) * arr)
    else:
        out = np.ones_like(arr)
    return float(out) if out.ndim == 0 else out
