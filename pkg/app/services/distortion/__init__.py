"""
Distortion Service Package
"""

from typing import Optional

from app.services.base import ServiceRegistry
from app.services.distortion.coefficients import (
    INFINITE,
    BoundaryDerivatives,
    DistortionValue,
    Extended,
    SigmaProfile,
    as_field,
    boundary_derivatives,
    ext_mul,
    finite_difference_derivatives,
    fixed_point_residual,
    is_infinite,
    log_convex_G,
    log_convex_combine,
    merge_grid,
    sigma,
    sigma_lsc_limit,
    sigma_profile,
    taylor_remainder,
)
from app.services.distortion.service import DistortionService
from logger.logger import get_logger

logger = get_logger(__name__)

_instance: Optional[DistortionService] = None


def get_distortion_service() -> DistortionService:
    """
    Factory function to get the singleton instance of DistortionService.
    """
    global _instance
    if _instance is None:
        logger.debug("🔧 Creating new instance of DistortionService...")
        _instance = DistortionService()
        ServiceRegistry.register("distortion", _instance)
    return _instance


__all__ = [
    "INFINITE",
    "BoundaryDerivatives",
    "DistortionService",
    "DistortionValue",
    "Extended",
    "SigmaProfile",
    "as_field",
    "boundary_derivatives",
    "ext_mul",
    "finite_difference_derivatives",
    "fixed_point_residual",
    "get_distortion_service",
    "is_infinite",
    "log_convex_G",
    "log_convex_combine",
    "merge_grid",
    "sigma",
    "sigma_lsc_limit",
    "sigma_profile",
    "taylor_remainder",
]
