"""
Curvature Service - 曲率场的加载、逼近与限制
"""

from __future__ import annotations

from pathlib import Path
from typing import Union

import numpy as np

from app.common.io import load_table
from app.services.base import BaseService
from app.services.curvature.field import (
    CurvatureField,
    GeodesicCurvature,
    PlanCurvature,
    QuantilePlan,
    lsc_approx,
    plan_curvature,
    restrict_to_geodesic,
)
from config.config import get_numerics_config
from logger.logger import get_logger

logger = get_logger(__name__)


def load_curvature_table(path: Union[str, Path]) -> CurvatureField:
    """读取 `x,kappa` 表; K 取表中最小值"""
    xs, ks = load_table(path, ("x", "kappa"))
    field = CurvatureField.from_table(xs, ks)
    logger.debug(
        f"📄 曲率表 {path}: 区间 [{field.start}, {field.end}], K = {field.lower_bound}"
    )
    return field


class CurvatureService(BaseService):
    """曲率场相关操作"""

    def __init__(self) -> None:
        super().__init__("curvature", get_numerics_config("curvature"))

    def load(self, path: Union[str, Path]) -> CurvatureField:
        return load_curvature_table(path)

    def approximants(self, field: CurvatureField, n: int) -> CurvatureField:
        self.log_request("lsc_approx", {"n": n})
        return lsc_approx(field, n)

    def restrict(
        self, field: CurvatureField, start: float, end: float
    ) -> GeodesicCurvature:
        self.log_request("restrict_to_geodesic", {"start": start, "end": end})
        return restrict_to_geodesic(field, start, end)

    def along_plan(
        self, field: CurvatureField, plan: QuantilePlan, t_grid: np.ndarray
    ) -> PlanCurvature:
        self.log_request("plan_curvature", {"theta": plan.theta, "t_points": len(t_grid)})
        return plan_curvature(field, plan, t_grid)
