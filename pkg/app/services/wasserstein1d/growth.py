"""
Bishop–Gromov comparison and the volume growth integral on weighted intervals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np
from scipy import integrate

from app.common.grid import relative_gap, span_grid
from app.services.base import DomainError
from app.services.ode_comparison.solver import constant_sin
from app.services.wasserstein1d.space import MMSpace1D
from config.config import get_numerics_config
from logger.logger import get_logger

logger = get_logger(__name__)

_cfg = get_numerics_config("wasserstein1d")
MINKOWSKI_DELTAS = tuple(float(d) for d in _cfg.get("minkowski_deltas", [1e-3, 5e-4]))
TAIL_WINDOWS = int(_cfg.get("growth_tail_windows", 8))
TOL = float(_cfg.get("tol", 1e-4))
_GAUSS_X, _GAUSS_W = np.polynomial.legendre.leggauss(8)
_CELLS = 2000


def minkowski_content(
    space: MMSpace1D, x0: float, r: float, deltas: Sequence[float] = MINKOWSKI_DELTAS
) -> float:
    """
    s(r) = limsup_{δ→0} m(B̄_{r+δ} ∖ B_r)/δ: the largest of the outer quotients
    at two δ and their Richardson extrapolation.
    """
    if r < 0:
        raise DomainError("radius must be >= 0", {"r": r})
    d1, d2 = float(deltas[0]), float(deltas[1])
    v = space.ball_volume(x0, r)
    q1 = (space.ball_volume(x0, r + d1) - v) / d1
    q2 = (space.ball_volume(x0, r + d2) - v) / d2
    return max(0.0, q1, q2, (d1 * q2 - d2 * q1) / (d1 - d2))


@dataclass(frozen=True)
class BishopGromovReport:
    x0: float
    r: float
    R: float
    s_ratio: float
    model_s_ratio: float
    v_ratio: float
    model_v_ratio: float
    tolerance: float = TOL

    @property
    def s_margin(self) -> float:
        return self.s_ratio - self.model_s_ratio

    @property
    def v_margin(self) -> float:
        return self.v_ratio - self.model_v_ratio

    @property
    def ok(self) -> bool:
        return self.s_margin >= -self.tolerance and self.v_margin >= -self.tolerance

    def to_dict(self) -> dict:
        return {
            "x0": self.x0,
            "r": self.r,
            "R": self.R,
            "s_ratio": self.s_ratio,
            "model_s_ratio": self.model_s_ratio,
            "v_ratio": self.v_ratio,
            "model_v_ratio": self.model_v_ratio,
            "ok": self.ok,
        }


def _model_ratios(k: float, power: float, r: float, R: float) -> tuple[float, float]:
    """sin_k^p(r)/sin_k^p(R) and ∫₀^r sin_k^p / ∫₀^R sin_k^p"""
    if power == 0:
        return 1.0, r / R

    def density(x: float) -> float:
        return float(constant_sin(k, x)) ** power

    s_model = density(r) / density(R)
    v_r = integrate.quad(density, 0.0, r, limit=200)[0]
    v_R = integrate.quad(density, 0.0, R, limit=200)[0]
    return s_model, v_r / v_R


def bishop_gromov_check(
    space: MMSpace1D,
    x0: float,
    r: float,
    R: float,
    kappa_lower: float,
    N: float,
    profile: Literal["entropic", "sharp"] = "entropic",
) -> BishopGromovReport:
    """
    s(r)/s(R) and m(B_r)/m(B_R) against the model ratios built from
    sin_{κ̲/N}^N ("entropic") or sin_{κ̲/(N−1)}^{N−1} ("sharp").
    N = 1 requires κ̲ ≤ 0 and compares with s-ratio 1 and v-ratio r/R.
    """
    if not 0 < r < R:
        raise DomainError("need 0 < r < R", {"r": r, "R": R})
    if not N >= 1 or math.isinf(N):
        raise DomainError("Bishop–Gromov needs a finite N >= 1", {"N": N})
    if not space.start <= x0 <= space.end:
        raise DomainError("center outside the interval", {"x0": x0})
    if N == 1:
        if kappa_lower > 0:
            raise DomainError("N = 1 needs kappa_lower <= 0", {"kappa_lower": kappa_lower})
        power, k = 0.0, 0.0
    elif profile == "sharp":
        power, k = N - 1.0, kappa_lower / (N - 1.0)
    elif profile == "entropic":
        power, k = N, kappa_lower / N
    else:
        raise DomainError(f"unknown model profile '{profile}'", {"known": ["entropic", "sharp"]})
    if k > 0 and R > math.pi / math.sqrt(k) * (1 + 1e-12):
        raise DomainError("R exceeds the diameter bound", {"R": R, "bound": math.pi / math.sqrt(k)})

    s_r, s_R = minkowski_content(space, x0, r), minkowski_content(space, x0, R)
    v_r, v_R = space.ball_volume(x0, r), space.ball_volume(x0, R)
    if s_R <= 0 or v_R <= 0:
        raise DomainError("ball of radius R carries no mass", {"x0": x0, "R": R})
    model_s, model_v = _model_ratios(k, power, r, R)
    report = BishopGromovReport(x0, r, R, s_r / s_R, model_s, v_r / v_R, model_v)
    logger.debug(f"ℹ️ Bishop–Gromov at x0={x0}: {report.to_dict()}")
    return report


# ----------------------------------------------------------------------
# 体积增长
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class GrowthReport:
    value: float
    finite: bool = True
    extrapolated_tail: float = 0.0

    def to_dict(self) -> dict:
        return {"value": self.value, "finite": self.finite, "extrapolated_tail": self.extrapolated_tail}


def _window_integrals(space: MMSpace1D, c: float, edges: np.ndarray) -> np.ndarray:
    """∫ e^{−c(x−p)²}w(x)dx over each [edges_i, edges_{i+1}], 8-point Gauss per sub-cell"""
    lo, hi = edges[:-1], edges[1:]
    half = 0.5 * (hi - lo)
    pts = 0.5 * (lo + hi)[:, None] + half[:, None] * _GAUSS_X[None, :]
    vals = np.exp(-c * (pts - space.reference) ** 2) * np.asarray(space.weight(pts.ravel())).reshape(pts.shape)
    return half * (vals @ _GAUSS_W)


def _cells(space: MMSpace1D, lo: float, hi: float) -> np.ndarray:
    inner = space.nodes[(space.nodes > lo) & (space.nodes < hi)]
    return span_grid(lo, hi, np.linspace(lo, hi, _CELLS + 1), inner, relative_gap(lo, hi))


def _tail(space: MMSpace1D, c: float, side: str) -> tuple[bool, float]:
    """(divergent, geometric tail estimate) for one side of the interval"""
    quarter = 0.25 * (space.end - space.start)
    if side == "right":
        edges = np.linspace(space.end - quarter, space.end, TAIL_WINDOWS + 1)
    else:
        edges = np.linspace(space.start + quarter, space.start, TAIL_WINDOWS + 1)
    contrib = np.array(
        [
            float(np.sum(_window_integrals(space, c, _cells(space, min(a, b), max(a, b)))))
            for a, b in zip(edges[:-1], edges[1:])
        ]
    )
    last, prev = contrib[-1], contrib[-2]
    if last >= prev and last > 0:
        return True, math.inf
    if last <= 0 or prev <= 0:
        return False, 0.0
    ratio = last / prev
    return False, last * ratio / (1.0 - ratio)


def volume_growth_check(space: MMSpace1D, c: float, extrapolate_tails: bool = False) -> GrowthReport:
    """
    ∫e^{−c·d(p,x)²}dm(x). With extrapolate_tails the table is read as the
    truncation of an unbounded weight: each side whose window contributions
    do not decay outward is flagged divergent, otherwise the tail is
    continued geometrically.
    """
    if not c > 0:
        raise DomainError("c must be positive", {"c": c})
    atom = space.point_mass
    if space.is_point:
        return GrowthReport(atom)
    value = float(np.sum(_window_integrals(space, c, _cells(space, space.start, space.end)))) + atom
    if not extrapolate_tails:
        return GrowthReport(value)
    tail = 0.0
    for side, end in (("left", space.start), ("right", space.end)):
        if end == space.reference:
            continue
        divergent, extra = _tail(space, c, side)
        if divergent:
            logger.warning(f"⚠️ volume growth integrand does not decay on the {side} tail (c={c})")
            return GrowthReport(math.inf, False, math.inf)
        tail += extra
    return GrowthReport(value + tail, True, tail)
