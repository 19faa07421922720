"""
Parameter sweeps over the checkers on a thread pool.

Cells are built in a fixed order and mapped with `ThreadPoolExecutor.map`,
so the CSV rows come out in grid order for any thread count.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.common.sampled import SampledFunction, load_function_table
from app.services.base import DomainError
from app.services.convexity.criteria import certify_kappa_N_convex
from app.services.convexity.problem import ConvexityCertificate
from app.services.curvature.field import CurvatureField
from app.services.curvature.service import load_curvature_table
from app.services.distortion.coefficients import sigma
from app.services.evi_flow.inequalities import (
    contraction_bound_infinite,
    dimensional_contraction_bound,
    evi_residual,
    sharp_kappa_N,
)
from app.services.evi_flow.trace import gradient_flow
from app.services.sweep.config import SweepConfig
from app.services.wasserstein1d.checks import check_entropic_cd, density_inequality_check
from app.services.wasserstein1d.growth import bishop_gromov_check
from app.services.wasserstein1d.measures import load_measure_table
from app.services.wasserstein1d.space import load_space_table
from config.config import get_numerics_config
from logger.logger import get_logger

logger = get_logger(__name__)

CHECK_TOL = float(get_numerics_config("evi_flow").get("check_tol", 1e-4))
EVI_POINTS = int(get_numerics_config("sweep").get("evi_points", 50))

HEADERS: Dict[str, Tuple[str, ...]] = {
    "sigma": ("theta", "t", "value", "finite"),
    "evi": ("N", "x0", "z", "min_margin", "worst_s"),
    "contraction": ("lambda", "N", "min_margin", "worst_time"),
    "bg": ("x0", "r", "R", "N", "s_ratio", "model_s_ratio", "v_ratio", "model_v_ratio", "margin"),
    "certify": ("N", "criterion", "verdict", "worst_margin", "checked"),
    "cde": ("N", "criterion", "verdict", "worst_margin", "checked"),
}


@dataclass(frozen=True)
class CellResult:
    row: Tuple[Any, ...]
    margin: Optional[float] = None
    ok: bool = True


@dataclass
class SweepResult:
    checker: str
    header: Tuple[str, ...]
    cells: List[CellResult] = field(default_factory=list)
    seed: int = 0

    @property
    def rows(self) -> List[Tuple[Any, ...]]:
        return [cell.row for cell in self.cells]

    @property
    def failures(self) -> int:
        return sum(1 for cell in self.cells if not cell.ok)

    def summary(self) -> Dict[str, Any]:
        scored = [cell for cell in self.cells if cell.margin is not None]
        worst = min(scored, key=lambda c: float(c.margin), default=None)  # type: ignore[arg-type]
        return {
            "checker": self.checker,
            "cells": len(self.cells),
            "failures": self.failures,
            "seed": self.seed,
            "min_margin": None if worst is None else worst.margin,
            "worst": None if worst is None else dict(zip(self.header, worst.row)),
        }


# ----------------------------------------------------------------------
# 曲率与势函数
# ----------------------------------------------------------------------


def _potential(cfg: SweepConfig) -> SampledFunction:
    return load_function_table(cfg.f, column="f") if cfg.f else SampledFunction.quadratic()


def _field_for(cfg: SweepConfig, f: SampledFunction, N: float) -> CurvatureField:
    """κ 表 > 常数 κ > 使 f 恰好 (κ,N)-凸的曲率"""
    if cfg.kappa:
        return load_curvature_table(cfg.kappa)
    if cfg.kappa_value is not None:
        return CurvatureField.constant(cfg.kappa_value, f.end - f.start, f.start)
    return sharp_kappa_N(f, N)


# ----------------------------------------------------------------------
# 各检查器的单元
# ----------------------------------------------------------------------


def _sigma_cells(cfg: SweepConfig) -> List[Callable[[], CellResult]]:
    if cfg.kappa:
        curv = load_curvature_table(cfg.kappa)
    else:
        length = max(cfg.theta, default=0.0)
        curv = CurvatureField.constant(cfg.kappa_value if cfg.kappa_value is not None else 0.0, length)

    def cell(theta: float, t: float) -> CellResult:
        value = sigma(curv, t, theta)
        return CellResult((theta, t, float(value.value), value.finite))

    return [lambda th=th, t=t: cell(th, t) for th, t in itertools.product(cfg.theta, cfg.t)]


def _comparison_points(cfg: SweepConfig, f: SampledFunction) -> List[float]:
    if cfg.z or cfg.samples <= 0:
        return list(cfg.z)
    rng = np.random.default_rng(cfg.seed)
    return sorted(rng.uniform(f.start, f.end, cfg.samples).tolist())


def _evi_cells(cfg: SweepConfig) -> List[Callable[[], CellResult]]:
    f = _potential(cfg)
    zs = _comparison_points(cfg, f)
    fields = {N: _field_for(cfg, f, N) for N in cfg.N}

    def cell(N: float, x0: float, z: float) -> CellResult:
        trace = gradient_flow(f, x0, cfg.horizon, cfg.dt)
        idx = np.unique(np.linspace(0, trace.times.size - 1, min(EVI_POINTS, trace.times.size)).astype(int))
        residuals = [(evi_residual(trace, z, fields[N], N, float(trace.times[i])), float(trace.times[i])) for i in idx]
        margin, s = min(residuals)
        return CellResult((N, x0, z, margin, s), margin, margin >= -CHECK_TOL)

    return [
        lambda N=N, x0=x0, z=z: cell(N, x0, z) for N, x0, z in itertools.product(cfg.N, cfg.x0, zs)
    ]


def _contraction_cells(cfg: SweepConfig) -> List[Callable[[], CellResult]]:
    if not cfg.x0 or not cfg.y0:
        raise DomainError("contraction sweeps need x0 and y0")
    f = _potential(cfg)
    x0, y0 = cfg.x0[0], cfg.y0[0]
    step = min(gradient_flow(f, x0, cfg.horizon, cfg.dt).dt, gradient_flow(f, y0, cfg.horizon, cfg.dt).dt)
    trace_x = gradient_flow(f, x0, cfg.horizon, step, refine=False)
    trace_y = gradient_flow(f, y0, cfg.horizon, step, refine=False)
    fields = {N: _field_for(cfg, f, N) for N in cfg.N}

    def cell(lam: float, N: float) -> CellResult:
        if math.isinf(N):
            report = contraction_bound_infinite(trace_x, trace_y, fields[N])
        else:
            report = dimensional_contraction_bound(trace_x, trace_y, fields[N], N, lam)
        worst = int(np.argmin(report.margins)) if report.margins.size else 0
        margin = report.min_margin
        at = float(report.times[worst]) if report.times.size else 0.0
        return CellResult((lam, N, margin, at), margin, margin >= -CHECK_TOL)

    return [lambda lam=lam, N=N: cell(lam, N) for lam, N in itertools.product(cfg.lam, cfg.N)]


def _bg_cells(cfg: SweepConfig) -> List[Callable[[], CellResult]]:
    if not cfg.space:
        raise DomainError("bg sweeps need a space table")
    space = load_space_table(cfg.space)

    def cell(x0: float, r: float, R: float, N: float) -> CellResult:
        report = bishop_gromov_check(space, x0, r, R, cfg.kappa_lower, N, cfg.profile)
        margin = min(report.s_margin, report.v_margin)
        row = (x0, r, R, N, report.s_ratio, report.model_s_ratio, report.v_ratio, report.model_v_ratio, margin)
        return CellResult(row, margin, report.ok)

    grid = [
        (x0, r, R, N)
        for x0, r, R, N in itertools.product(cfg.x_center, cfg.r, cfg.R, cfg.N)
        if r < R
    ]
    return [lambda x0=x0, r=r, R=R, N=N: cell(x0, r, R, N) for x0, r, R, N in grid]


def _certificate_cell(N: float, cert: ConvexityCertificate) -> CellResult:
    row = (N, cert.criterion, cert.verdict, cert.worst_margin, cert.checked)
    return CellResult(row, cert.worst_margin, cert.passed)


def _certify_cells(cfg: SweepConfig) -> List[Callable[[], CellResult]]:
    f = _potential(cfg)
    fields = {N: _field_for(cfg, f, N) for N in cfg.N}

    def cell(N: float) -> CellResult:
        return _certificate_cell(N, certify_kappa_N_convex(f, fields[N], N, cfg.criterion))

    return [lambda N=N: cell(N) for N in cfg.N]


def _cde_cells(cfg: SweepConfig) -> List[Callable[[], CellResult]]:
    if not (cfg.space and cfg.mu0 and cfg.mu1):
        raise DomainError("cde sweeps need space, mu0 and mu1 tables")
    space = load_space_table(cfg.space)
    mu0, mu1 = load_measure_table(cfg.mu0), load_measure_table(cfg.mu1)
    if cfg.kappa:
        curv = load_curvature_table(cfg.kappa)
    else:
        value = cfg.kappa_value if cfg.kappa_value is not None else 0.0
        curv = CurvatureField.constant(value, space.end - space.start, space.start)

    def cell(N: float) -> CellResult:
        if cfg.per_particle:
            cert = density_inequality_check(space, curv, N, mu0, mu1)
        else:
            cert = check_entropic_cd(space, curv, N, mu0, mu1)
        return _certificate_cell(N, cert)

    return [lambda N=N: cell(N) for N in cfg.N]


_BUILDERS: Dict[str, Callable[[SweepConfig], Sequence[Callable[[], CellResult]]]] = {
    "sigma": _sigma_cells,
    "evi": _evi_cells,
    "contraction": _contraction_cells,
    "bg": _bg_cells,
    "certify": _certify_cells,
    "cde": _cde_cells,
}


def run_sweep(cfg: SweepConfig, threads: int = 1) -> SweepResult:
    """evaluates every cell of the grid; results keep grid order"""
    cells = list(_BUILDERS[cfg.checker](cfg))
    result = SweepResult(cfg.checker, HEADERS[cfg.checker], seed=cfg.seed)
    if not cells:
        logger.warning(f"⚠️ sweep '{cfg.checker}' has an empty grid")
        return result
    logger.info(f"🔧 sweep '{cfg.checker}': {len(cells)} cells on {threads} thread(s)")
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        result.cells.extend(pool.map(lambda job: job(), cells))
    return result
