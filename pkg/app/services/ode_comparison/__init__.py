"""
ODE Comparison Service Package
"""

from typing import Optional

from app.services.base import ServiceRegistry
from app.services.ode_comparison.service import OdeComparisonService
from app.services.ode_comparison.solver import (
    ComparisonReport,
    GeneralizedSine,
    InterlacingReport,
    MonotoneTail,
    check_interlacing,
    check_sturm_comparison,
    constant_cos,
    constant_sin,
    first_zero,
    green_integral,
    green_kernel,
    monotone_tail,
    piecewise_simpson,
    solve_generalized_sin,
)
from logger.logger import get_logger

logger = get_logger(__name__)

_instance: Optional[OdeComparisonService] = None


def get_ode_comparison_service() -> OdeComparisonService:
    """
    Factory function to get the singleton instance of OdeComparisonService.
    """
    global _instance
    if _instance is None:
        logger.debug("🔧 Creating new instance of OdeComparisonService...")
        _instance = OdeComparisonService()
        ServiceRegistry.register("ode_comparison", _instance)
    return _instance


__all__ = [
    "ComparisonReport",
    "GeneralizedSine",
    "InterlacingReport",
    "MonotoneTail",
    "OdeComparisonService",
    "check_interlacing",
    "check_sturm_comparison",
    "constant_cos",
    "constant_sin",
    "first_zero",
    "get_ode_comparison_service",
    "green_integral",
    "green_kernel",
    "monotone_tail",
    "piecewise_simpson",
    "solve_generalized_sin",
]
