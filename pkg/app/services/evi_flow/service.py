"""
EVI Flow Service - 梯度流模拟与 EVI / 耗散 / 收缩诊断
"""

from __future__ import annotations

import math
from typing import List, Optional, Tuple

import numpy as np

from app.common.sampled import SampledFunction
from app.services.base import BaseService
from app.services.curvature.field import CurvatureField
from app.services.evi_flow.inequalities import (
    BOUND_POINTS,
    ContractionReport,
    contraction_bound_infinite,
    dimensional_contraction_bound,
    evi_residual,
)
from app.services.evi_flow.trace import EVITrace, dissipation_residual, gradient_flow
from config.config import get_numerics_config
from logger.logger import get_logger

logger = get_logger(__name__)

Row = Tuple[float, float, float, float]


def _sample_indices(size: int, points: int = BOUND_POINTS) -> List[int]:
    return np.unique(np.linspace(0, size - 1, min(points, size)).astype(int)).tolist()


class EviFlowService(BaseService):
    """梯度流诊断服务; 报告行统一为 (s, value, bound, margin)"""

    def __init__(self) -> None:
        super().__init__("evi_flow", get_numerics_config("evi_flow"))

    def flow(
        self, f: SampledFunction, x0: float, horizon: float, dt: Optional[float] = None
    ) -> EVITrace:
        self.log_request("gradient_flow", {"x0": x0, "horizon": horizon, "dt": dt})
        trace = gradient_flow(f, x0, horizon, dt)
        logger.info(
            f"✅ trace with {trace.times.size} points, dt={trace.dt:.3e}"
            + (" (truncated)" if trace.truncated else "")
            + (" (flagged)" if trace.flagged else "")
        )
        return trace

    def flow_pair(
        self, f: SampledFunction, x0: float, y0: float, horizon: float, dt: Optional[float] = None
    ) -> Tuple[EVITrace, EVITrace]:
        """两条轨迹共用同一时间网格 (取各自细化后的较小步长)"""
        step = min(self.flow(f, x0, horizon, dt).dt, self.flow(f, y0, horizon, dt).dt)
        trace_x = gradient_flow(f, x0, horizon, step, refine=False)
        trace_y = gradient_flow(f, y0, horizon, step, refine=False)
        return trace_x, trace_y

    def evi_rows(
        self, trace: EVITrace, z: float, curv: CurvatureField, N: float
    ) -> List[Row]:
        """value = residual, bound = 0"""
        self.log_request("evi_residual", {"z": z, "N": N})
        rows: List[Row] = []
        for i in _sample_indices(trace.times.size):
            s = float(trace.times[i])
            r = evi_residual(trace, z, curv, N, s)
            rows.append((s, r, 0.0, r))
        return rows

    def dissipation_rows(self, trace: EVITrace) -> List[Row]:
        """value = f(x₀) − f(x_s), bound = ½∫₀^s(|ẋ|² + |∇⁻f|²)"""
        self.log_request("dissipation_residual", {"points": int(trace.times.size)})
        rows: List[Row] = []
        for i in _sample_indices(trace.times.size):
            s = float(trace.times[i])
            drop = float(trace.f_values[0] - trace.f_values[i])
            residual = dissipation_residual(trace, 0.0, s)
            rows.append((s, drop, drop - residual, residual))
        return rows

    def contraction(
        self,
        trace_x: EVITrace,
        trace_y: EVITrace,
        curv: CurvatureField,
        N: float = math.inf,
        lam: float = 1.0,
    ) -> ContractionReport:
        self.log_request("contraction", {"N": N, "lambda": lam})
        if math.isinf(N):
            report = contraction_bound_infinite(trace_x, trace_y, curv)
        else:
            report = dimensional_contraction_bound(trace_x, trace_y, curv, N, lam)
        logger.info(f"ℹ️ contraction ({report.kind}): min margin {report.min_margin:.3e}")
        return report
