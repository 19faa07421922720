"""
区间上的标量函数 (u、S、势能 f)

表格输入用三次样条插值, 解析输入直接保存可调用对象及其导数。
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Union

import numpy as np
from scipy.interpolate import CubicSpline

from app.common.io import load_table
from app.services.base import DomainError, PreconditionError

ArrayFn = Callable[[np.ndarray], np.ndarray]
ArrayLike = Union[float, np.ndarray]

_FD_STEP = 1e-5


@dataclass(frozen=True, eq=False)
class SampledFunction:
    start: float
    end: float
    fn: ArrayFn
    d1: Optional[ArrayFn] = None
    d2: Optional[ArrayFn] = None
    nodes: Optional[np.ndarray] = field(default=None)
    name: str = "f"

    @classmethod
    def from_callable(
        cls,
        fn: ArrayFn,
        start: float,
        end: float,
        d1: Optional[ArrayFn] = None,
        d2: Optional[ArrayFn] = None,
        name: str = "f",
    ) -> "SampledFunction":
        if not end > start:
            raise DomainError("function domain must have end > start", {"start": start, "end": end})
        return cls(float(start), float(end), fn, d1, d2, None, name)

    @classmethod
    def from_table(cls, x: np.ndarray, y: np.ndarray, name: str = "f") -> "SampledFunction":
        xs = np.asarray(x, dtype=float)
        ys = np.asarray(y, dtype=float)
        if xs.size < 4:
            raise PreconditionError("spline tables need at least 4 rows", {"rows": int(xs.size)})
        spline = CubicSpline(xs, ys, bc_type="not-a-knot", extrapolate=False)
        return cls(
            float(xs[0]),
            float(xs[-1]),
            spline,
            spline.derivative(1),
            spline.derivative(2),
            xs,
            name,
        )

    @classmethod
    def quadratic(cls, start: float = -10.0, end: float = 10.0) -> "SampledFunction":
        """x²/2"""
        return cls.from_callable(
            lambda x: 0.5 * np.asarray(x) ** 2,
            start,
            end,
            lambda x: np.asarray(x, dtype=float),
            lambda x: np.ones_like(np.asarray(x, dtype=float)),
            "quadratic",
        )

    @classmethod
    def quartic(cls, start: float = -10.0, end: float = 10.0) -> "SampledFunction":
        """x⁴/4"""
        return cls.from_callable(
            lambda x: 0.25 * np.asarray(x) ** 4,
            start,
            end,
            lambda x: np.asarray(x) ** 3,
            lambda x: 3.0 * np.asarray(x) ** 2,
            "quartic",
        )

    @classmethod
    def constant(cls, value: float, start: float = -10.0, end: float = 10.0) -> "SampledFunction":
        return cls.from_callable(
            lambda x: np.full(np.shape(x), value, dtype=float),
            start,
            end,
            lambda x: np.zeros(np.shape(x)),
            lambda x: np.zeros(np.shape(x)),
            "constant",
        )

    @property
    def length(self) -> float:
        return self.end - self.start

    @property
    def spacing(self) -> Optional[float]:
        """smallest table spacing, None for analytic functions"""
        if self.nodes is None or self.nodes.size < 2:
            return None
        return float(np.min(np.diff(self.nodes)))

    def contains(self, x: float) -> bool:
        tol = 1e-12 * max(1.0, abs(self.start), abs(self.end))
        return self.start - tol <= x <= self.end + tol

    def _clip(self, x: np.ndarray) -> np.ndarray:
        tol = 1e-12 * max(1.0, abs(self.start), abs(self.end))
        if np.any(x < self.start - tol) or np.any(x > self.end + tol):
            bad = x[(x < self.start - tol) | (x > self.end + tol)]
            raise DomainError(
                f"point outside the domain of {self.name}",
                {"point": float(bad[0]), "domain": [self.start, self.end]},
            )
        return np.clip(x, self.start, self.end)

    def _apply(self, g: ArrayFn, x: ArrayLike) -> ArrayLike:
        arr = self._clip(np.atleast_1d(np.asarray(x, dtype=float)))
        out = np.asarray(g(arr), dtype=float)
        return float(out[0]) if np.ndim(x) == 0 else out

    def __call__(self, x: ArrayLike) -> ArrayLike:
        return self._apply(self.fn, x)

    def derivative(self, x: ArrayLike, order: int = 1) -> ArrayLike:
        """f′ or f″; analytic functions without them fall back to central differences"""
        if order not in (1, 2):
            raise PreconditionError("only first and second derivatives are available")
        exact = self.d1 if order == 1 else self.d2
        if exact is not None:
            return self._apply(exact, x)
        arr = self._clip(np.atleast_1d(np.asarray(x, dtype=float)))
        h = _FD_STEP * max(1.0, self.length)
        lo = np.clip(arr - h, self.start, self.end)
        hi = np.clip(arr + h, self.start, self.end)
        if order == 1:
            out = (self.fn(hi) - self.fn(lo)) / (hi - lo)
        else:
            mid = 0.5 * (lo + hi)
            half = 0.5 * (hi - lo)
            out = (self.fn(hi) - 2.0 * self.fn(mid) + self.fn(lo)) / (half * half)
        out = np.asarray(out, dtype=float)
        return float(out[0]) if np.ndim(x) == 0 else out


def load_function_table(path: Union[str, Path], column: str = "f") -> SampledFunction:
    """`x,<column>` 表 -> 样条函数"""
    xs, ys = load_table(path, ("x", column), min_rows=4)
    return SampledFunction.from_table(xs, ys, name=Path(str(path)).stem)

