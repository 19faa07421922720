"""
Convexity problems, certificates and the sampled families the checkers run over.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from app.common.sampled import SampledFunction
from app.services.base import DomainError
from app.services.curvature.field import CurvatureField, scale
from config.config import get_numerics_config

_cfg = get_numerics_config("convexity")
BUMP_CENTERS = int(_cfg.get("bump_centers", 64))
BUMP_WIDTHS = int(_cfg.get("bump_widths", 4))
GRID_STEP = float(_cfg.get("grid_step", 1e-3))
TOL = float(_cfg.get("tol", 1e-7))
SEGMENT_COUNT = int(_cfg.get("segment_count", 12))
T_POINTS = int(_cfg.get("t_points", 21))
ZERO_TOL = float(_cfg.get("zero_tol", 1e-12))

Segment = Tuple[float, float]

# 一维区间上测地线唯一
WEAK_EQUALS_STRONG = "weak=strong on 1-D"


class ConvexityCertificate(BaseModel):
    """检查结论; fail 时 worst_witness 可复现负的 margin"""

    model_config = ConfigDict(frozen=True)

    criterion: str
    verdict: Literal["pass", "fail"]
    worst_margin: float
    worst_witness: Optional[Dict[str, Any]] = None
    checked: int = 0
    tolerance: float = TOL
    note: str = WEAK_EQUALS_STRONG

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"


class MarginTracker:
    """keeps the smallest margin and the witness that produced it"""

    def __init__(self, criterion: str, tolerance: float) -> None:
        self.criterion = criterion
        self.tolerance = tolerance
        self.worst = math.inf
        self.witness: Optional[Dict[str, Any]] = None
        self.count = 0

    def record(self, margin: float, witness: Dict[str, Any]) -> None:
        self.count += 1
        if margin < self.worst or self.witness is None:
            self.worst = margin
            self.witness = {**witness, "margin": margin}

    def certificate(self) -> ConvexityCertificate:
        worst = self.worst if self.count else 0.0
        verdict: Literal["pass", "fail"] = "pass" if worst >= -self.tolerance else "fail"
        return ConvexityCertificate(
            criterion=self.criterion,
            verdict=verdict,
            worst_margin=worst,
            worst_witness=self.witness,
            checked=self.count,
            tolerance=self.tolerance,
        )


@dataclass(frozen=True, eq=False)
class ConvexityProblem:
    """
    u ≥ 0 on [a, b] against the field curv. Problems built from a potential S
    carry u = exp(−S/N) and the field κ/N.
    """

    u: SampledFunction
    curv: CurvatureField
    N: float = math.inf
    potential: Optional[SampledFunction] = None
    grid_step: float = GRID_STEP

    def __post_init__(self) -> None:
        tol = 1e-12 * max(1.0, abs(self.start), abs(self.end))
        if self.curv.start > self.start + tol or self.curv.end < self.end - tol:
            raise DomainError(
                "curvature field does not cover the problem interval",
                {"interval": [self.start, self.end], "field": [self.curv.start, self.curv.end]},
            )
        probe = np.asarray(self.u(np.linspace(self.start, self.end, 1001)))
        if np.nanmin(probe) < -ZERO_TOL:
            raise DomainError("u must be non-negative", {"min": float(np.nanmin(probe))})

    @classmethod
    def from_function(
        cls,
        u: Any,
        curv: CurvatureField,
        a: float,
        b: float,
        du: Any = None,
    ) -> "ConvexityProblem":
        return cls(SampledFunction.from_callable(u, a, b, d1=du, name="u"), curv)

    @classmethod
    def from_potential(
        cls, S: SampledFunction, curv: CurvatureField, N: float
    ) -> "ConvexityProblem":
        """U_N = exp(−S/N) against κ/N, with e^{−∞} = 0"""
        if not (N >= 1.0) or math.isinf(N):
            raise DomainError("potential problems need a finite N >= 1", {"N": N})

        def u_n(x: np.ndarray) -> np.ndarray:
            with np.errstate(over="ignore"):
                return np.exp(-np.asarray(S(x), dtype=float) / N)

        def du_n(x: np.ndarray) -> np.ndarray:
            return -np.asarray(S.derivative(x), dtype=float) / N * u_n(x)

        fn = SampledFunction.from_callable(u_n, S.start, S.end, d1=du_n, name="U_N")
        return cls(fn, scale(curv, 1.0 / N), N, S, S.spacing or GRID_STEP)

    @property
    def start(self) -> float:
        return self.u.start

    @property
    def end(self) -> float:
        return self.u.end

    @property
    def tolerance(self) -> float:
        return TOL * max(1.0, self.grid_step / GRID_STEP)

    def value(self, x: float) -> float:
        """u(x), with values below the zero tolerance reported as 0"""
        v = float(self.u(x))
        return 0.0 if abs(v) <= ZERO_TOL else v

    def slope(self, x: float) -> float:
        return float(self.u.derivative(x))


def default_segments(a: float, b: float, count: int = SEGMENT_COUNT) -> List[Segment]:
    """all pairs of `count` evenly spaced points"""
    pts = np.linspace(a, b, count).tolist()
    return [(p, q) for p, q in itertools.combinations(pts, 2)]


def default_t_grid(points: int = T_POINTS) -> np.ndarray:
    return np.linspace(0.0, 1.0, points)


def segments_up_to(segments: Iterable[Segment], max_length: Optional[float]) -> List[Segment]:
    out = [(float(p), float(q)) for p, q in segments if p != q]
    if max_length is None:
        return out
    return [s for s in out if abs(s[1] - s[0]) <= max_length * (1 + 1e-12)]


def check_segments(prob_start: float, prob_end: float, segments: Sequence[Segment]) -> None:
    tol = 1e-12 * max(1.0, abs(prob_start), abs(prob_end))
    for p, q in segments:
        if min(p, q) < prob_start - tol or max(p, q) > prob_end + tol:
            raise DomainError("segment leaves the problem interval", {"segment": [p, q]})


# ----------------------------------------------------------------------
# 二次 B 样条试验函数
# ----------------------------------------------------------------------

# 标准二次 B 样条在 [0,1], [1,2], [2,3] 上的二阶导数
_B2_SECOND = (1.0, -2.0, 1.0)


@dataclass(frozen=True)
class BumpFunction:
    index: int
    center: float
    half_width: float

    @property
    def knots(self) -> np.ndarray:
        w = self.half_width
        c = self.center
        return np.array([c - w, c - w / 3.0, c + w / 3.0, c + w])

    @property
    def knot_spacing(self) -> float:
        return 2.0 * self.half_width / 3.0

    def __call__(self, x: np.ndarray) -> np.ndarray:
        y = (np.asarray(x, dtype=float) - (self.center - self.half_width)) / self.knot_spacing
        out = np.zeros_like(y)
        a = (y >= 0) & (y < 1)
        b = (y >= 1) & (y < 2)
        c = (y >= 2) & (y <= 3)
        out[a] = 0.5 * y[a] ** 2
        out[b] = 0.5 * (-2.0 * y[b] ** 2 + 6.0 * y[b] - 3.0)
        out[c] = 0.5 * (3.0 - y[c]) ** 2
        return out

    def second_derivative_pieces(self) -> Tuple[float, float, float]:
        h2 = self.knot_spacing**2
        return (_B2_SECOND[0] / h2, _B2_SECOND[1] / h2, _B2_SECOND[2] / h2)

    def to_dict(self) -> dict:
        return {"test_function": self.index, "center": self.center, "half_width": self.half_width}


def bump_family(
    a: float, b: float, centers: int = BUMP_CENTERS, widths: int = BUMP_WIDTHS
) -> List[BumpFunction]:
    """centers × widths bumps with support strictly inside (a, b)"""
    length = b - a
    out: List[BumpFunction] = []
    cs = np.linspace(a, b, centers + 2)[1:-1]
    for k in range(widths):
        w = length * 0.2 / 2**k
        for c in cs:
            if c - w > a and c + w < b:
                out.append(BumpFunction(len(out), float(c), float(w)))
    return out

