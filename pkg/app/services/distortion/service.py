"""
Distortion Service - 畸变系数 σ 及其边界导数
"""

from __future__ import annotations

from typing import Optional, Union

from app.services.base import BaseService
from app.services.curvature.field import CurvatureField, GeodesicCurvature
from app.services.distortion.coefficients import (
    BoundaryDerivatives,
    DistortionValue,
    boundary_derivatives,
    sigma,
    sigma_lsc_limit,
)
from config.config import get_numerics_config
from logger.logger import get_logger

logger = get_logger(__name__)


class DistortionService(BaseService):
    """σ_κ^{(t)}(θ) 计算服务"""

    def __init__(self) -> None:
        super().__init__("distortion", get_numerics_config("distortion"))

    def coefficient(
        self,
        curv: Union[CurvatureField, GeodesicCurvature],
        t: float,
        theta: float,
        lsc_n0: Optional[int] = None,
    ) -> DistortionValue:
        self.log_request("sigma", {"t": t, "theta": theta, "lsc_n0": lsc_n0})
        if lsc_n0 is not None:
            value = sigma_lsc_limit(curv, t, theta, lsc_n0)
        else:
            value = sigma(curv, t, theta)
        if not value.finite:
            logger.info(f"ℹ️ σ^({t})({theta}) = INFINITE")
        return value

    def derivatives(
        self, curv: Union[CurvatureField, GeodesicCurvature], theta: float
    ) -> BoundaryDerivatives:
        self.log_request("boundary_derivatives", {"theta": theta})
        return boundary_derivatives(curv, theta)
