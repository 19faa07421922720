"""
Curvature fields: piecewise-constant lower semi-continuous κ on an interval.

Storage convention:
- nodes x_0 < ... < x_m
- cell_values[i] is the value on the open cell (x_i, x_{i+1})
- node_values[i] is the value at x_i, never above the adjacent cells

Evaluation at a node returns the node value, elsewhere the covering cell value,
so sampling never raises an lsc function above itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Protocol, Sequence, Union

import numpy as np

from app.common.grid import relative_gap, span_grid
from app.services.base import DomainError, PreconditionError
from config.config import get_numerics_config

ArrayLike = Union[float, Sequence[float], np.ndarray]

# 端点容差, 相对区间长度
_EDGE_RTOL = 1e-12
LSC_REFINE_CELLS = int(get_numerics_config("curvature").get("lsc_refine_cells", 1000))


@dataclass(frozen=True, eq=False)
class CurvatureField:
    nodes: np.ndarray
    node_values: np.ndarray
    cell_values: np.ndarray

    def __post_init__(self) -> None:
        nodes = np.asarray(self.nodes, dtype=float)
        node_values = np.asarray(self.node_values, dtype=float)
        cell_values = np.asarray(self.cell_values, dtype=float)
        if nodes.ndim != 1 or nodes.size < 1:
            raise PreconditionError("curvature field needs at least one node")
        if node_values.shape != nodes.shape or cell_values.size != nodes.size - 1:
            raise PreconditionError(
                "curvature field arrays have inconsistent sizes",
                {"nodes": nodes.size, "node_values": node_values.size, "cells": cell_values.size},
            )
        if nodes.size > 1 and np.any(np.diff(nodes) <= 0):
            raise PreconditionError("curvature field nodes must be strictly increasing")
        if not (np.all(np.isfinite(node_values)) and np.all(np.isfinite(cell_values))):
            raise PreconditionError("curvature values must be finite")
        for name, arr in (("nodes", nodes), ("node_values", node_values), ("cell_values", cell_values)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    # ------------------------------------------------------------------
    # 构造
    # ------------------------------------------------------------------
    @classmethod
    def constant(cls, value: float, length: float, start: float = 0.0) -> "CurvatureField":
        if length < 0:
            raise DomainError("interval length must be >= 0", {"length": length})
        if length == 0:
            return cls(np.array([start]), np.array([value]), np.array([]))
        return cls(
            np.array([start, start + length]),
            np.array([value, value]),
            np.array([value]),
        )

    @classmethod
    def from_table(cls, x: ArrayLike, kappa: ArrayLike) -> "CurvatureField":
        """
        Rows (x_i, κ_i) read as left-closed steps: κ_i holds on [x_i, x_{i+1}).
        Node values take the minimum of the two adjacent cells, so the result is lsc.
        """
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        ks = np.atleast_1d(np.asarray(kappa, dtype=float))
        if xs.size != ks.size or xs.size < 2:
            raise PreconditionError("curvature table needs >= 2 rows of (x, kappa)")
        cells = ks[:-1].copy()
        node_values = np.empty_like(xs)
        node_values[0] = cells[0]
        node_values[1:-1] = np.minimum(cells[:-1], cells[1:])
        node_values[-1] = min(cells[-1], ks[-1])
        return cls(xs, node_values, cells)

    @classmethod
    def step(
        cls, breaks: Sequence[float], values: Sequence[float], start: float, end: float
    ) -> "CurvatureField":
        """values[i] on the i-th piece between consecutive breaks; breaks are interior points."""
        if len(values) != len(breaks) + 1:
            raise PreconditionError("step field needs len(values) == len(breaks) + 1")
        xs = np.concatenate([[start], np.asarray(breaks, dtype=float), [end]])
        return cls.from_table(xs, np.concatenate([np.asarray(values, float), [values[-1]]]))

    @classmethod
    def from_function(
        cls, fn: Callable[[np.ndarray], np.ndarray], nodes: ArrayLike
    ) -> "CurvatureField":
        """
        Samples a continuous κ. Node values are exact; each cell keeps the
        minimum over its endpoints and midpoint.
        """
        xs = np.asarray(nodes, dtype=float)
        at_nodes = np.asarray(fn(xs), dtype=float)
        mids = 0.5 * (xs[:-1] + xs[1:])
        at_mids = np.asarray(fn(mids), dtype=float)
        cells = np.minimum(np.minimum(at_nodes[:-1], at_nodes[1:]), at_mids)
        return cls(xs, at_nodes, cells)

    # ------------------------------------------------------------------
    # 基本属性
    # ------------------------------------------------------------------
    @property
    def start(self) -> float:
        return float(self.nodes[0])

    @property
    def end(self) -> float:
        return float(self.nodes[-1])

    @property
    def length(self) -> float:
        return self.end - self.start

    @property
    def lower_bound(self) -> float:
        """K = min of the table"""
        values = np.concatenate([self.node_values, self.cell_values])
        return float(values.min())

    @property
    def upper_bound(self) -> float:
        values = np.concatenate([self.node_values, self.cell_values])
        return float(values.max())

    def _check_inside(self, x: np.ndarray) -> np.ndarray:
        tol = _EDGE_RTOL * max(1.0, abs(self.start), abs(self.end))
        if np.any(x < self.start - tol) or np.any(x > self.end + tol):
            bad = x[(x < self.start - tol) | (x > self.end + tol)]
            raise DomainError(
                "point outside curvature domain",
                {"point": float(bad[0]), "domain": [self.start, self.end]},
            )
        return np.clip(x, self.start, self.end)

    def __call__(self, x: ArrayLike) -> Union[float, np.ndarray]:
        arr = self._check_inside(np.atleast_1d(np.asarray(x, dtype=float)))
        out = self._evaluate(arr)
        return float(out[0]) if np.ndim(x) == 0 else out

    def _evaluate(self, x: np.ndarray) -> np.ndarray:
        if self.nodes.size == 1:
            return np.full(x.shape, self.node_values[0])
        left = np.searchsorted(self.nodes, x, side="left")
        left_c = np.minimum(left, self.nodes.size - 1)
        on_node = self.nodes[left_c] == x
        cell = np.clip(np.searchsorted(self.nodes, x, side="right") - 1, 0, self.cell_values.size - 1)
        return np.where(on_node, self.node_values[left_c], self.cell_values[cell])

    def cell_value(self, x: ArrayLike, side: str = "right") -> np.ndarray:
        """
        One-sided limits: side="right" gives the value of the cell [x, ·),
        side="left" the cell (·, x]. Used for piecewise quadrature.
        """
        arr = self._check_inside(np.atleast_1d(np.asarray(x, dtype=float)))
        if self.cell_values.size == 0:
            return np.full(arr.shape, self.node_values[0])
        if side == "right":
            idx = np.searchsorted(self.nodes, arr, side="right") - 1
        else:
            idx = np.searchsorted(self.nodes, arr, side="left") - 1
        return self.cell_values[np.clip(idx, 0, self.cell_values.size - 1)]

    def breakpoints(self) -> np.ndarray:
        """Interior nodes where the cell value changes."""
        if self.cell_values.size < 2:
            return np.array([])
        jumps = np.nonzero(self.cell_values[1:] != self.cell_values[:-1])[0] + 1
        return self.nodes[jumps]

    # ------------------------------------------------------------------
    # 变换
    # ------------------------------------------------------------------
    def window(self, lo: float, hi: float) -> "CurvatureField":
        """The field restricted to [lo, hi] ⊂ domain, coordinates unchanged."""
        self._check_inside(np.array([lo, hi]))
        lo, hi = max(lo, self.start), min(hi, self.end)
        if hi < lo:
            raise DomainError("empty window", {"lo": lo, "hi": hi})
        if hi == lo:
            return CurvatureField(np.array([lo]), np.array([self(lo)]), np.array([]))
        inner = self.nodes[(self.nodes > lo) & (self.nodes < hi)]
        nodes = np.concatenate([[lo], inner, [hi]])
        node_values = np.asarray(self._evaluate(nodes), dtype=float)
        cells = self.cell_value(0.5 * (nodes[:-1] + nodes[1:]))
        return CurvatureField(nodes, node_values, cells)

    def shifted_to(self, origin: float) -> "CurvatureField":
        """Translate so the domain starts at origin."""
        return CurvatureField(self.nodes - self.start + origin, self.node_values, self.cell_values)

    def reversed(self) -> "CurvatureField":
        """x ↦ κ(start + end − x); an exact involution on the node table."""
        nodes = (self.start + self.end) - self.nodes[::-1]
        return CurvatureField(nodes, self.node_values[::-1], self.cell_values[::-1])

    def rescaled(self, theta: float) -> "CurvatureField":
        """κθ² on [0, L/θ]: σ_κ^{(t)}(θ) = σ_{κθ²}^{(t)}(1)."""
        if theta <= 0:
            raise DomainError("rescale factor must be positive", {"theta": theta})
        return CurvatureField(
            (self.nodes - self.start) / theta,
            self.node_values * theta**2,
            self.cell_values * theta**2,
        )

    def refined(self, max_spacing: float) -> "CurvatureField":
        """Same field on a finer node set; new interior nodes carry their cell value."""
        if self.nodes.size < 2 or max_spacing <= 0:
            return self
        pieces = [self.nodes[:1]]
        node_vals = [self.node_values[:1]]
        cells: list[np.ndarray] = []
        for i, width in enumerate(np.diff(self.nodes)):
            k = max(1, int(math.ceil(width / max_spacing - 1e-9)))
            sub = np.linspace(self.nodes[i], self.nodes[i + 1], k + 1)[1:]
            sub[-1] = self.nodes[i + 1]
            pieces.append(sub)
            vals = np.full(k, self.cell_values[i])
            vals[-1] = self.node_values[i + 1]
            node_vals.append(vals)
            cells.append(np.full(k, self.cell_values[i]))
        return CurvatureField(
            np.concatenate(pieces), np.concatenate(node_vals), np.concatenate(cells)
        )

    def to_dict(self) -> dict:
        return {
            "domain": [self.start, self.end],
            "lower_bound": self.lower_bound,
            "nodes": int(self.nodes.size),
        }


# ----------------------------------------------------------------------
# 逐点运算
# ----------------------------------------------------------------------


def scale(field: CurvatureField, c: float) -> CurvatureField:
    """c·κ; c < 0 would turn lsc into usc and is rejected."""
    if c < 0:
        raise DomainError("curvature can only be scaled by c >= 0", {"c": c})
    return CurvatureField(field.nodes, field.node_values * c, field.cell_values * c)


def shift(field: CurvatureField, c: float) -> CurvatureField:
    """κ + c"""
    return CurvatureField(field.nodes, field.node_values + c, field.cell_values + c)


def add(field: CurvatureField, other: CurvatureField) -> CurvatureField:
    """κ₁ + κ₂ on the union of both node sets; domains must agree."""
    tol = _EDGE_RTOL * max(1.0, abs(field.start), abs(field.end))
    if abs(field.start - other.start) > tol or abs(field.end - other.end) > tol:
        raise DomainError(
            "curvature fields live on different intervals",
            {"a": [field.start, field.end], "b": [other.start, other.end]},
        )
    if field.nodes.size == 1:
        return CurvatureField(field.nodes, field.node_values + other._evaluate(field.nodes), np.array([]))
    gap = relative_gap(field.start, field.end)
    nodes = span_grid(field.start, field.end, priority=np.concatenate([field.nodes, other.nodes]), gap=gap)
    mids = 0.5 * (nodes[:-1] + nodes[1:])
    node_values = field._evaluate(nodes) + other._evaluate(nodes)
    cells = field.cell_value(mids) + other.cell_value(mids)
    return CurvatureField(nodes, node_values, cells)


def combine(fields: Sequence[CurvatureField], weights: Sequence[float]) -> CurvatureField:
    """Σ wᵢκᵢ with wᵢ ≥ 0"""
    if not fields or len(fields) != len(weights):
        raise PreconditionError("combine needs matching non-empty fields and weights")
    out = scale(fields[0], weights[0])
    for f, w in zip(fields[1:], weights[1:]):
        out = add(out, scale(f, w))
    return out


def lsc_approx(
    field: CurvatureField, n: int, max_spacing: Optional[float] = None
) -> CurvatureField:
    """
    κₙ(x) = min[ min_y {κ(y) + n|x−y|}, n ].

    The minimum over y runs over the node set, refined to max_spacing
    (default L/LSC_REFINE_CELLS) so the n-Lipschitz ramps are resolved. The inf-convolution
    with n|·| is done by one forward and one backward running minimum.
    """
    if n < 1:
        raise PreconditionError("approximation index n must be >= 1", {"n": n})
    if field.nodes.size == 1:
        v = min(float(field.node_values[0]), float(n))
        return CurvatureField(field.nodes, np.array([v]), np.array([]))
    spacing = max_spacing if max_spacing is not None else field.length / LSC_REFINE_CELLS
    fine = field.refined(spacing)
    x, v = fine.nodes, fine.node_values
    forward = np.minimum.accumulate(v - n * x) + n * x
    backward = (np.minimum.accumulate((v + n * x)[::-1]))[::-1] - n * x
    kn = np.minimum(np.minimum(forward, backward), float(n))
    # the n-Lipschitz function is above min(κn_i, κn_{i+1}) on each cell
    cells = np.minimum(kn[:-1], kn[1:])
    return CurvatureField(x, kn, cells)


# ----------------------------------------------------------------------
# 沿测地线
# ----------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GeodesicCurvature:
    """κ along a constant-speed geodesic of length θ, parametrized by arclength."""

    length: float
    forward: CurvatureField
    reversed: CurvatureField

    @classmethod
    def from_field(cls, forward: CurvatureField) -> "GeodesicCurvature":
        fwd = forward.shifted_to(0.0)
        return cls(fwd.length, fwd, fwd.reversed())

    def scaled(self, c: float) -> "GeodesicCurvature":
        return GeodesicCurvature(self.length, scale(self.forward, c), scale(self.reversed, c))

    @property
    def is_degenerate(self) -> bool:
        return self.length == 0.0


def restrict_to_geodesic(
    field: CurvatureField, start: float, end: float
) -> GeodesicCurvature:
    """
    κ_γ for the segment γ from start to end of the interval model space.
    forward(s) = κ(start + s·sign), reversed(s) = forward(θ − s).
    """
    lo, hi = min(start, end), max(start, end)
    field._check_inside(np.array([lo, hi]))
    if lo == hi:
        point = CurvatureField(np.array([0.0]), np.array([field(lo)]), np.array([]))
        return GeodesicCurvature(0.0, point, point)
    piece = field.window(lo, hi).shifted_to(0.0)
    if start <= end:
        return GeodesicCurvature(piece.length, piece, piece.reversed())
    return GeodesicCurvature(piece.length, piece.reversed(), piece)


# ----------------------------------------------------------------------
# 沿传输计划
# ----------------------------------------------------------------------


class QuantilePlan(Protocol):
    """The monotone plan between two measures on the line, as quantile pairs."""

    @property
    def quantile0(self) -> np.ndarray: ...

    @property
    def quantile1(self) -> np.ndarray: ...

    @property
    def theta(self) -> float: ...


@dataclass(frozen=True, eq=False)
class PlanCurvature:
    """t ↦ ∫κ(e_t(γ))|γ̇|²dΠ(γ) on a t-grid, i.e. κ_Π(tΘ)Θ²."""

    theta: float
    t_grid: np.ndarray
    profile: np.ndarray

    def __call__(self, t: ArrayLike) -> Union[float, np.ndarray]:
        return self.as_field()(t)

    def as_field(self, divisor: float = 1.0) -> CurvatureField:
        """
        The profile as a curvature field on [0,1] (already multiplied by Θ²),
        divided by N. Cells take the smaller endpoint value.
        """
        values = self.profile / divisor
        if self.t_grid.size == 1:
            return CurvatureField(self.t_grid, values, np.array([]))
        return CurvatureField(self.t_grid, values, np.minimum(values[:-1], values[1:]))

    def to_dict(self) -> dict:
        return {"theta": self.theta, "t": self.t_grid, "profile": self.profile}


def plan_curvature(
    field: CurvatureField, plan: QuantilePlan, t_grid: ArrayLike
) -> PlanCurvature:
    """
    profile(t) = mean over quantile levels of κ(q_t(u))·(q₁(u) − q₀(u))²,
    the midpoint rule on the u-grid the plan is sampled on.
    """
    ts = np.asarray(t_grid, dtype=float)
    if np.any(ts < 0) or np.any(ts > 1):
        raise DomainError("t-grid must lie in [0,1]")
    q0, q1 = np.asarray(plan.quantile0, float), np.asarray(plan.quantile1, float)
    theta = float(plan.theta)
    if theta == 0.0:
        return PlanCurvature(0.0, ts, np.zeros_like(ts))
    speed2 = (q1 - q0) ** 2
    positions = (1.0 - ts)[:, None] * q0[None, :] + ts[:, None] * q1[None, :]
    kappa = np.asarray(field(positions.ravel()), dtype=float).reshape(positions.shape)
    profile = np.mean(kappa * speed2[None, :], axis=1)
    return PlanCurvature(theta, ts, profile)


def mixture_profile(
    profiles: Sequence[PlanCurvature], weights: Sequence[float]
) -> PlanCurvature:
    """Convex combination of plan profiles sharing Θ and t-grid."""
    if not profiles or len(profiles) != len(weights):
        raise PreconditionError("mixture needs matching non-empty profiles and weights")
    w = np.asarray(weights, dtype=float)
    if np.any(w < 0) or not math.isclose(float(w.sum()), 1.0, rel_tol=1e-12):
        raise DomainError("mixture weights must be non-negative and sum to 1")
    base = profiles[0]
    for p in profiles[1:]:
        if p.t_grid.shape != base.t_grid.shape or not np.allclose(p.t_grid, base.t_grid):
            raise PreconditionError("mixture profiles must share the t-grid")
        if not math.isclose(p.theta, base.theta, rel_tol=1e-9, abs_tol=1e-12):
            raise PreconditionError("mixture profiles must share Θ")
    profile = sum((wi * p.profile for wi, p in zip(w, profiles)), np.zeros_like(base.profile))
    return PlanCurvature(base.theta, base.t_grid, profile)
