"""
梯度流轨迹 x′ = −f′(x) 与能量耗散

- 经典 RK4 单步法, 自动将 dt 减半直到耗散残差达标
- 轨迹离开定义域时截断并标记
- 下降斜率 |∇⁻f| 的采样估计 (两个半径的 Richardson 外推)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Optional

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicHermiteSpline

from app.common.sampled import SampledFunction
from app.services.base import DomainError, PreconditionError
from config.config import get_numerics_config
from logger.logger import get_logger

logger = get_logger(__name__)

_cfg = get_numerics_config("evi_flow")
DISSIPATION_TARGET = float(_cfg.get("dissipation_target", 1e-5))
MIN_DT = float(_cfg.get("min_dt", 1e-6))
SLOPE_CELLS = int(_cfg.get("slope_cells", 3))
SLOPE_POINTS = int(_cfg.get("slope_points", 16))
DEFAULT_STEPS = int(_cfg.get("default_steps", 1000))


@dataclass(frozen=True, eq=False)
class EVITrace:
    """
    A sampled gradient-flow curve: times s_i, states x_{s_i}, velocities ẋ,
    metric speeds |ẋ|, descending slopes |∇⁻f| and f(x_{s_i}).
    """

    times: np.ndarray
    states: np.ndarray
    velocities: np.ndarray
    speeds: np.ndarray
    slopes: np.ndarray
    f_values: np.ndarray
    dt: float
    potential: SampledFunction
    truncated: bool = False
    flagged: bool = False

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    @cached_property
    def _spline(self) -> CubicHermiteSpline:
        return CubicHermiteSpline(self.times, self.states, self.velocities)

    def position(self, s: np.ndarray) -> np.ndarray:
        """x_s between grid times by cubic Hermite interpolation"""
        arr = np.asarray(s, dtype=float)
        tol = 1e-9 * max(1.0, self.horizon)
        if np.any(arr < -tol) or np.any(arr > self.horizon + tol):
            raise DomainError("time outside the trace", {"horizon": self.horizon})
        return np.asarray(self._spline(np.clip(arr, 0.0, self.horizon)), dtype=float)

    def index_of(self, s: float) -> int:
        """grid index of time s; s must be a grid time up to half a step"""
        i = int(np.argmin(np.abs(self.times - s)))
        if abs(self.times[i] - s) > 0.5 * self.dt + 1e-12:
            raise DomainError("time outside the trace", {"s": s, "horizon": self.horizon})
        return i

    def squared_distance_rate(self, z: float) -> np.ndarray:
        """d/ds d(x_s, z)², centered inside, one-sided second order at the ends"""
        d2 = (self.states - z) ** 2
        if self.times.size < 3:
            return np.gradient(d2, self.times)
        return np.gradient(d2, self.times, edge_order=2)

    def to_rows(self) -> list[tuple[float, float, float, float]]:
        return list(
            zip(self.times.tolist(), self.states.tolist(), self.speeds.tolist(), self.f_values.tolist())
        )


def _integrate(f: SampledFunction, x0: float, horizon: float, steps: int) -> EVITrace:
    h = horizon / steps
    xs = [float(x0)]
    truncated = False

    def v(x: float) -> float:
        return -float(f.derivative(x))

    x = float(x0)
    for _ in range(steps):
        try:
            k1 = v(x)
            k2 = v(x + 0.5 * h * k1)
            k3 = v(x + 0.5 * h * k2)
            k4 = v(x + h * k3)
        except DomainError:
            truncated = True
            break
        x = x + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        if not f.contains(x):
            truncated = True
            break
        xs.append(x)

    states = np.asarray(xs)
    times = h * np.arange(states.size)
    grad = np.asarray(f.derivative(states), dtype=float)
    return EVITrace(
        times=times,
        states=states,
        velocities=-grad,
        speeds=np.abs(grad),
        slopes=np.abs(grad),
        f_values=np.asarray(f(states), dtype=float),
        dt=h,
        potential=f,
        truncated=truncated,
    )


def gradient_flow(
    f: SampledFunction,
    x0: float,
    horizon: float,
    dt: Optional[float] = None,
    refine: bool = True,
) -> EVITrace:
    """
    x′ = −f′(x) from x0 up to horizon. With refine, dt is halved until the
    dissipation residual over the whole trace is below the target; below
    MIN_DT the trace is returned flagged.
    """
    if not f.contains(x0):
        raise DomainError("start point outside the domain of f", {"x0": x0})
    if horizon <= 0:
        raise DomainError("horizon must be positive", {"horizon": horizon})
    step = dt if dt is not None else horizon / DEFAULT_STEPS
    if step <= 0:
        raise DomainError("dt must be positive", {"dt": step})

    while True:
        steps = max(1, int(math.ceil(horizon / step - 1e-9)))
        trace = _integrate(f, x0, horizon, steps)
        if trace.truncated:
            logger.warning(f"⚠️ 轨迹在 s={trace.horizon:.6g} 离开定义域, 已截断")
            return trace
        if not refine or trace.times.size < 2:
            return trace
        residual = abs(dissipation_residual(trace, 0.0, trace.horizon))
        if residual <= DISSIPATION_TARGET:
            return trace
        if 0.5 * trace.dt < MIN_DT:
            logger.warning(
                f"⚠️ 耗散残差 {residual:.3e} 未达标且 dt 已到下限, 轨迹已标记"
            )
            return replace(trace, flagged=True)
        logger.debug(f"🔧 耗散残差 {residual:.3e}, dt 减半至 {0.5 * trace.dt:.3e}")
        step = 0.5 * trace.dt


def dissipation_residual(trace: EVITrace, s: float, t: float) -> float:
    """f(x_s) − f(x_t) − ½∫_s^t(|ẋ|² + |∇⁻f|²)dr, trapezoid on the trace grid"""
    i, j = trace.index_of(s), trace.index_of(t)
    if i > j:
        raise PreconditionError("dissipation needs s <= t", {"s": s, "t": t})
    if i == j:
        return 0.0
    integrand = trace.speeds[i : j + 1] ** 2 + trace.slopes[i : j + 1] ** 2
    energy = 0.5 * float(integrate.trapezoid(integrand, trace.times[i : j + 1]))
    return float(trace.f_values[i] - trace.f_values[j]) - energy


# ----------------------------------------------------------------------
# 下降斜率
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class SlopeEstimate:
    value: float
    one_sided: bool = False

    def __float__(self) -> float:
        return self.value


def _max_quotient(f: SampledFunction, x: float, radius: float, points: int) -> tuple[float, bool]:
    offsets = radius * np.arange(1, points + 1) / points
    left = x - offsets
    right = x + offsets
    left = left[left >= f.start]
    right = right[right <= f.end]
    one_sided = left.size < points or right.size < points
    ys = np.concatenate([left, right])
    if ys.size == 0:
        raise PreconditionError("no sample points inside the ball", {"x": x, "radius": radius})
    fx = float(f(x))
    drops = np.maximum(fx - np.asarray(f(ys), dtype=float), 0.0)
    return float(np.max(drops / np.abs(x - ys))), one_sided


def descending_slope(
    f: SampledFunction, x: float, radius: float, points: int = SLOPE_POINTS
) -> SlopeEstimate:
    """
    limsup_{y→x} [f(x) − f(y)]₊/|x − y| from the sampled maximum over the ball
    of the given radius and of half that radius, Richardson-extrapolated.
    """
    if not f.contains(x):
        raise DomainError("point outside the domain of f", {"x": x})
    spacing = f.spacing
    if radius <= 0 or (spacing is not None and radius < SLOPE_CELLS * spacing * (1 - 1e-9)):
        raise PreconditionError(
            f"radius must span at least {SLOPE_CELLS} grid cells",
            {"radius": radius, "spacing": spacing},
        )
    coarse, one_a = _max_quotient(f, x, radius, points)
    fine, one_b = _max_quotient(f, x, 0.5 * radius, points)
    one_sided = one_a or one_b
    if one_sided:
        logger.debug(f"ℹ️ x={x} 靠近边界, 下降斜率只在一侧取样")
    return SlopeEstimate(max(0.0, 2.0 * fine - coarse), one_sided)
