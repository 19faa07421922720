"""
直线上的概率测度与精确最优传输

- 测度以 2048 个中点分位水平上的分位函数 q(u) 及其导数 q′(u) 表示
- W₂ 距离即分位函数的 L² 距离, 位移测地线即分位函数的线性插值
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np
from scipy import integrate, stats

from app.common.io import load_table
from app.services.base import DomainError, PreconditionError
from config.config import get_numerics_config
from logger.logger import get_logger

logger = get_logger(__name__)

_cfg = get_numerics_config("wasserstein1d")
QUANTILE_LEVELS = int(_cfg.get("quantile_levels", 2048))
ATOM_TOL = float(_cfg.get("atom_tol", 1e-12))


def quantile_levels(n: int = QUANTILE_LEVELS) -> np.ndarray:
    """u-grid: midpoints of n equal cells of [0,1]"""
    return (np.arange(n) + 0.5) / n


@dataclass(frozen=True, eq=False)
class ProbMeasure1D:
    """
    μ through its quantile function: q[i] = q_μ(u_i) and dq[i] = q_μ′(u_i) = 1/ρ(q[i]).
    dq = 0 on a range of levels means an atom.
    """

    q: np.ndarray
    dq: np.ndarray
    name: str = "mu"

    def __post_init__(self) -> None:
        q = np.asarray(self.q, dtype=float)
        dq = np.asarray(self.dq, dtype=float)
        if q.ndim != 1 or q.shape != dq.shape or q.size < 2:
            raise PreconditionError("quantile arrays must be 1-D of equal length >= 2")
        if np.any(np.diff(q) < -ATOM_TOL * max(1.0, float(np.max(np.abs(q))))):
            raise PreconditionError("quantile function must be non-decreasing")
        if np.any(dq < 0):
            raise PreconditionError("quantile derivative must be >= 0")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "dq", dq)

    # ------------------------------------------------------------------
    # 构造
    # ------------------------------------------------------------------
    @classmethod
    def from_density(
        cls, x: Sequence[float], density: Sequence[float], levels: int = QUANTILE_LEVELS, name: str = "mu"
    ) -> "ProbMeasure1D":
        """
        Piecewise-linear density through (x_i, ρ_i), normalized. Each level is
        inverted exactly inside its cell (a quadratic in the offset).
        """
        xs = np.asarray(x, dtype=float)
        rho = np.asarray(density, dtype=float)
        if xs.size < 2 or xs.size != rho.size:
            raise PreconditionError("density table needs >= 2 matching rows")
        if np.any(rho < 0):
            raise DomainError("density must be non-negative")
        mass = float(integrate.trapezoid(rho, xs))
        if not mass > 0:
            raise DomainError("density has zero mass")
        rho = rho / mass
        cum = integrate.cumulative_trapezoid(rho, xs, initial=0.0)
        cum[-1] = 1.0
        us = quantile_levels(levels)
        cell = np.clip(np.searchsorted(cum, us, side="right") - 1, 0, xs.size - 2)
        h = xs[cell + 1] - xs[cell]
        r0 = rho[cell]
        slope = (rho[cell + 1] - r0) / h
        c = us - cum[cell]
        root = np.sqrt(np.maximum(r0 * r0 + 2.0 * slope * c, 0.0))
        denom = r0 + root
        with np.errstate(divide="ignore", invalid="ignore"):
            delta = np.where(denom > 0, 2.0 * c / denom, 0.0)
        delta = np.clip(delta, 0.0, h)
        q = xs[cell] + delta
        at_q = r0 + slope * delta
        with np.errstate(divide="ignore"):
            dq = np.where(at_q > 0, 1.0 / np.maximum(at_q, 1e-300), np.inf)
        return cls(q, dq, name)

    @classmethod
    def dirac(cls, a: float, levels: int = QUANTILE_LEVELS) -> "ProbMeasure1D":
        return cls(np.full(levels, float(a)), np.zeros(levels), f"dirac({a})")

    @classmethod
    def uniform(cls, a: float, b: float, levels: int = QUANTILE_LEVELS) -> "ProbMeasure1D":
        if not b > a:
            raise DomainError("uniform measure needs b > a", {"a": a, "b": b})
        us = quantile_levels(levels)
        return cls(a + (b - a) * us, np.full(levels, b - a), f"uniform({a},{b})")

    @classmethod
    def gaussian(cls, mean: float, std: float, levels: int = QUANTILE_LEVELS) -> "ProbMeasure1D":
        if not std > 0:
            raise DomainError("gaussian measure needs std > 0", {"std": std})
        dist = stats.norm(loc=mean, scale=std)
        q = dist.ppf(quantile_levels(levels))
        return cls(q, 1.0 / dist.pdf(q), f"gaussian({mean},{std})")

    def translated(self, c: float) -> "ProbMeasure1D":
        return ProbMeasure1D(self.q + c, self.dq, f"{self.name}+{c}")

    # ------------------------------------------------------------------
    # 属性
    # ------------------------------------------------------------------
    @property
    def levels(self) -> np.ndarray:
        return quantile_levels(self.q.size)

    @property
    def support(self) -> tuple[float, float]:
        return float(self.q[0]), float(self.q[-1])

    @property
    def has_atoms(self) -> bool:
        return bool(np.any(self.dq <= ATOM_TOL))

    def cdf(self, x: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
        """fraction of quantile levels at or below x"""
        out = np.searchsorted(self.q, np.asarray(x, dtype=float), side="right") / self.q.size
        return float(out) if np.ndim(out) == 0 else out

    def mean(self) -> float:
        return float(np.mean(self.q))

    def to_dict(self) -> dict:
        return {"name": self.name, "support": list(self.support), "levels": int(self.q.size)}


def _same_levels(mu: ProbMeasure1D, nu: ProbMeasure1D) -> None:
    if mu.q.size != nu.q.size:
        raise PreconditionError(
            "measures must share the quantile grid", {"levels": [mu.q.size, nu.q.size]}
        )


def w2_distance(mu: ProbMeasure1D, nu: ProbMeasure1D) -> float:
    """(∫₀¹|q_μ − q_ν|² du)^½, midpoint rule on the level grid"""
    _same_levels(mu, nu)
    return math.sqrt(float(np.mean((mu.q - nu.q) ** 2)))


@dataclass(frozen=True, eq=False)
class WassersteinGeodesic:
    """t ↦ μ_t with q_t = (1−t)q₀ + tq₁; the plan is the monotone coupling"""

    mu0: ProbMeasure1D
    mu1: ProbMeasure1D
    t_grid: np.ndarray

    @property
    def quantile0(self) -> np.ndarray:
        return self.mu0.q

    @property
    def quantile1(self) -> np.ndarray:
        return self.mu1.q

    @property
    def theta(self) -> float:
        return w2_distance(self.mu0, self.mu1)

    @property
    def particle_speeds(self) -> np.ndarray:
        return np.abs(self.mu1.q - self.mu0.q)

    def interpolant(self, t: float) -> ProbMeasure1D:
        if not 0.0 <= t <= 1.0:
            raise DomainError("t must lie in [0,1]", {"t": t})
        if t == 0.0:
            return self.mu0
        if t == 1.0:
            return self.mu1
        return ProbMeasure1D(
            (1.0 - t) * self.mu0.q + t * self.mu1.q,
            (1.0 - t) * self.mu0.dq + t * self.mu1.dq,
            f"mu_{t:g}",
        )

    def measures(self) -> List[ProbMeasure1D]:
        return [self.interpolant(float(t)) for t in self.t_grid]


def displacement_geodesic(
    mu: ProbMeasure1D, nu: ProbMeasure1D, t_grid: Optional[Sequence[float]] = None
) -> WassersteinGeodesic:
    _same_levels(mu, nu)
    ts = np.asarray(t_grid if t_grid is not None else np.linspace(0.0, 1.0, 21), dtype=float)
    if np.any(ts < 0) or np.any(ts > 1):
        raise DomainError("t-grid must lie in [0,1]")
    return WassersteinGeodesic(mu, nu, ts)


def load_measure_table(path: Union[str, Path]) -> ProbMeasure1D:
    """`x,density` 表 -> 概率测度"""
    xs, rho = load_table(path, ("x", "density"), nonnegative=True)
    mu = ProbMeasure1D.from_density(xs, rho, name=Path(str(path)).stem)
    logger.debug(f"📄 测度表 {path}: 支撑 [{mu.support[0]:.6g}, {mu.support[1]:.6g}]")
    return mu
