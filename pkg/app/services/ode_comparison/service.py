"""
ODE Comparison Service - 广义正弦求解与 Sturm 比较
"""

from __future__ import annotations

from typing import Optional

from app.services.base import BaseService
from app.services.curvature.field import CurvatureField
from app.services.ode_comparison.solver import (
    ComparisonReport,
    GeneralizedSine,
    MonotoneTail,
    check_sturm_comparison,
    monotone_tail,
    solve_generalized_sin,
)
from config.config import get_numerics_config
from logger.logger import get_logger

logger = get_logger(__name__)


class OdeComparisonService(BaseService):
    """v'' + κv = 0 相关服务"""

    def __init__(self) -> None:
        super().__init__("ode_comparison", get_numerics_config("ode_comparison"))

    def generalized_sin(
        self, curv: CurvatureField, length: Optional[float] = None, step: Optional[float] = None
    ) -> GeneralizedSine:
        field = curv if length is None else curv.window(curv.start, curv.start + length)
        self.log_request("solve_generalized_sin", {"L": field.length, "step": step})
        gs = solve_generalized_sin(field, step)
        if gs.first_zero is not None:
            logger.info(f"ℹ️ s_κ 的首个零点: {gs.first_zero:.12g}")
        return gs

    def compare(
        self, curv_lo: CurvatureField, curv_hi: CurvatureField, step: Optional[float] = None
    ) -> ComparisonReport:
        report = check_sturm_comparison(
            curv_lo, curv_hi, step, tol=float(self.setting("comparison_tol", 1e-8))
        )
        status = "✅" if report.ok else "❌"
        logger.info(f"{status} Sturm 比较: min(s_lo − s_hi) = {report.min_margin:.3e}")
        return report

    def tail(self, curv: CurvatureField, n0: int = 1, step: Optional[float] = None) -> MonotoneTail:
        self.log_request("monotone_tail", {"n0": n0})
        return monotone_tail(curv, step, n0)
