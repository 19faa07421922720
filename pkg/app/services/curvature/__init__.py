"""
Curvature Service Package
"""

from typing import Optional

from app.services.base import ServiceRegistry
from app.services.curvature.field import (
    CurvatureField,
    GeodesicCurvature,
    PlanCurvature,
    add,
    combine,
    lsc_approx,
    mixture_profile,
    plan_curvature,
    restrict_to_geodesic,
    scale,
    shift,
)
from app.services.curvature.service import CurvatureService, load_curvature_table
from logger.logger import get_logger

logger = get_logger(__name__)

_instance: Optional[CurvatureService] = None


def get_curvature_service() -> CurvatureService:
    """
    Factory function to get the singleton instance of CurvatureService.
    """
    global _instance
    if _instance is None:
        logger.debug("🔧 Creating new instance of CurvatureService...")
        _instance = CurvatureService()
        ServiceRegistry.register("curvature", _instance)
    return _instance


__all__ = [
    "CurvatureField",
    "CurvatureService",
    "GeodesicCurvature",
    "PlanCurvature",
    "add",
    "combine",
    "get_curvature_service",
    "load_curvature_table",
    "lsc_approx",
    "mixture_profile",
    "plan_curvature",
    "restrict_to_geodesic",
    "scale",
    "shift",
]
