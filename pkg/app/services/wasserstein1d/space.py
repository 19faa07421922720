"""
Weighted intervals (X, d, m) with m = w·dx, the relative entropy and U_N.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Callable, Optional, Sequence, Union

import numpy as np

from app.common.io import load_table
from app.common.sampled import SampledFunction
from app.services.base import DomainError, PreconditionError
from app.services.wasserstein1d.measures import ProbMeasure1D
from config.config import get_numerics_config
from logger.logger import get_logger

logger = get_logger(__name__)

_cfg = get_numerics_config("wasserstein1d")
BOUNDARY_EPS = float(_cfg.get("boundary_eps", 1e-3))
WEIGHT_POINTS = 20001


@dataclass(frozen=True, eq=False)
class MMSpace1D:
    """
    [a, b] with the piecewise-linear weight through (nodes, weights), plus an
    optional point mass sitting at the reference point.
    """

    nodes: np.ndarray
    weights: np.ndarray
    reference: float
    point_mass: float = 0.0
    name: str = "space"

    def __post_init__(self) -> None:
        xs = np.asarray(self.nodes, dtype=float)
        ws = np.asarray(self.weights, dtype=float)
        if xs.ndim != 1 or xs.shape != ws.shape or xs.size < 1:
            raise PreconditionError("weight table arrays must be 1-D of equal length")
        if xs.size > 1 and np.any(np.diff(xs) <= 0):
            raise PreconditionError("weight nodes must be strictly increasing")
        if np.any(ws < 0) or not np.all(np.isfinite(ws)):
            raise DomainError("weight must be finite and non-negative")
        if self.point_mass < 0:
            raise DomainError("point mass must be non-negative")
        if not xs[0] <= self.reference <= xs[-1]:
            raise DomainError("reference point outside the interval", {"p": self.reference})
        object.__setattr__(self, "nodes", xs)
        object.__setattr__(self, "weights", ws)
        if self._cum[-1] + self.point_mass <= 0:
            raise DomainError("space has zero total mass")

    @cached_property
    def _cum(self) -> np.ndarray:
        cells = 0.5 * (self.weights[:-1] + self.weights[1:]) * np.diff(self.nodes)
        return np.concatenate([[0.0], np.cumsum(cells)])

    # ------------------------------------------------------------------
    # 构造
    # ------------------------------------------------------------------
    @classmethod
    def from_weight(
        cls, x: Sequence[float], w: Sequence[float], reference: Optional[float] = None, name: str = "space"
    ) -> "MMSpace1D":
        xs = np.asarray(x, dtype=float)
        if xs.size < 2:
            raise PreconditionError("weight table needs >= 2 rows")
        return cls(xs, np.asarray(w, dtype=float), float(xs[0] if reference is None else reference), 0.0, name)

    @classmethod
    def from_function(
        cls,
        fn: Callable[[np.ndarray], np.ndarray],
        a: float,
        b: float,
        points: int = WEIGHT_POINTS,
        reference: Optional[float] = None,
        name: str = "space",
    ) -> "MMSpace1D":
        xs = np.linspace(a, b, points)
        return cls.from_weight(xs, np.asarray(fn(xs), dtype=float), reference, name)

    @classmethod
    def lebesgue(cls, a: float, b: float, reference: Optional[float] = None) -> "MMSpace1D":
        return cls.from_weight([a, b], [1.0, 1.0], reference, f"lebesgue[{a},{b}]")

    @classmethod
    def gaussian(cls, a: float = -12.0, b: float = 12.0) -> "MMSpace1D":
        """weight e^{−x²/2}"""
        return cls.from_function(lambda x: np.exp(-0.5 * x * x), a, b, reference=0.0, name="gaussian")

    @classmethod
    def model_sphere(cls, N: float, eps: float = BOUNDARY_EPS) -> "MMSpace1D":
        """[ε, π−ε] with weight sin^{N−1}"""
        if N < 1:
            raise DomainError("model space needs N >= 1", {"N": N})
        return cls.from_function(
            lambda x: np.sin(x) ** (N - 1.0), eps, math.pi - eps, name=f"sin^{N - 1:g}"
        )

    @classmethod
    def point(cls, p: float, mass: float = 1.0) -> "MMSpace1D":
        return cls(np.array([p]), np.array([0.0]), float(p), mass, f"point({p})")

    # ------------------------------------------------------------------
    # 测度
    # ------------------------------------------------------------------
    @property
    def start(self) -> float:
        return float(self.nodes[0])

    @property
    def end(self) -> float:
        return float(self.nodes[-1])

    @property
    def is_point(self) -> bool:
        return self.nodes.size == 1

    @property
    def total_mass(self) -> float:
        return float(self._cum[-1]) + self.point_mass

    def weight(self, x: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
        arr = np.asarray(x, dtype=float)
        out = np.interp(arr, self.nodes, self.weights, left=0.0, right=0.0)
        return float(out) if out.ndim == 0 else out

    def _cumulative(self, x: np.ndarray) -> np.ndarray:
        """∫_a^x w, exact for the piecewise-linear weight"""
        cum = self._cum
        if self.is_point:
            return np.zeros_like(x)
        xc = np.clip(x, self.start, self.end)
        i = np.clip(np.searchsorted(self.nodes, xc, side="right") - 1, 0, self.nodes.size - 2)
        h = self.nodes[i + 1] - self.nodes[i]
        delta = xc - self.nodes[i]
        w0 = self.weights[i]
        slope = (self.weights[i + 1] - w0) / h
        return cum[i] + w0 * delta + 0.5 * slope * delta * delta

    def mass_between(self, lo: float, hi: float) -> float:
        """m([lo, hi])"""
        if hi < lo:
            return 0.0
        vals = self._cumulative(np.array([lo, hi], dtype=float))
        mass = float(vals[1] - vals[0])
        if self.point_mass and lo <= self.reference <= hi:
            mass += self.point_mass
        return mass

    def ball_volume(self, x0: float, r: float) -> float:
        """m(B̄_r(x0))"""
        return self.mass_between(x0 - r, x0 + r)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "interval": [self.start, self.end],
            "reference": self.reference,
            "total_mass": self.total_mass,
        }


def perturb_space(space: MMSpace1D, V: SampledFunction) -> MMSpace1D:
    """the weight w·e^{−V}"""
    values = np.asarray(V(space.nodes), dtype=float)
    return MMSpace1D(
        space.nodes,
        space.weights * np.exp(-values),
        space.reference,
        space.point_mass * math.exp(-float(V(space.reference))) if space.point_mass else 0.0,
        f"{space.name}·e^-{V.name}",
    )


def load_space_table(path: Union[str, Path], reference: Optional[float] = None) -> MMSpace1D:
    """`x,weight` 表 -> 加权区间"""
    xs, ws = load_table(path, ("x", "weight"), nonnegative=True)
    space = MMSpace1D.from_weight(xs, ws, reference, Path(str(path)).stem)
    logger.debug(f"📄 空间表 {path}: [{space.start}, {space.end}], m(X) = {space.total_mass:.6g}")
    return space


# ----------------------------------------------------------------------
# 相对熵
# ----------------------------------------------------------------------


def entropy(mu: ProbMeasure1D, space: MMSpace1D) -> float:
    """
    Ent(μ) = ∫ρ log ρ dm = −∫₀¹log q′(u)du − ∫₀¹log w(q(u))du; +∞ for atoms,
    mass outside [a, b] or mass where w = 0.
    """
    if space.is_point:
        on_point = mu.has_atoms and np.allclose(mu.q, space.reference)
        return -math.log(space.point_mass) if on_point else math.inf
    if mu.has_atoms:
        return math.inf
    tol = 1e-12 * max(1.0, abs(space.start), abs(space.end))
    lo, hi = mu.support
    if lo < space.start - tol or hi > space.end + tol:
        return math.inf
    w = np.asarray(space.weight(mu.q), dtype=float)
    if np.any(w <= 0) or np.any(~np.isfinite(mu.dq)):
        return math.inf
    return float(-np.mean(np.log(mu.dq)) - np.mean(np.log(w)))


def u_n(mu: ProbMeasure1D, space: MMSpace1D, N: float) -> float:
    """exp(−Ent/N), with Ent = +∞ giving 0"""
    if not N > 0:
        raise DomainError("N must be positive", {"N": N})
    ent = entropy(mu, space)
    if math.isinf(ent):
        return 0.0
    return math.exp(-ent / N)
