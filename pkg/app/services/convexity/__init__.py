"""
Convexity Service Package
"""

from typing import Optional

from app.services.base import ServiceRegistry
from app.services.convexity.checks import (
    LengthSearch,
    distributional_residual,
    first_variation_check,
    green_inequality_check,
    kappa_convexity_check,
    largest_passing_length,
    sigma_concavity_check,
)
from app.services.convexity.criteria import (
    BaseCriterion,
    CriterionManager,
    certify_kappa_N_convex,
)
from app.services.convexity.problem import (
    BumpFunction,
    ConvexityCertificate,
    ConvexityProblem,
    Segment,
    bump_family,
    default_segments,
    default_t_grid,
)
from app.services.convexity.service import ConvexityService
from logger.logger import get_logger

logger = get_logger(__name__)

_instance: Optional[ConvexityService] = None


def get_convexity_service() -> ConvexityService:
    """
    Factory function to get the singleton instance of ConvexityService.
    """
    global _instance
    if _instance is None:
        logger.debug("🔧 Creating new instance of ConvexityService...")
        _instance = ConvexityService()
        ServiceRegistry.register("convexity", _instance)
    return _instance


__all__ = [
    "BaseCriterion",
    "BumpFunction",
    "ConvexityCertificate",
    "ConvexityProblem",
    "ConvexityService",
    "CriterionManager",
    "LengthSearch",
    "Segment",
    "bump_family",
    "certify_kappa_N_convex",
    "default_segments",
    "default_t_grid",
    "distributional_residual",
    "first_variation_check",
    "get_convexity_service",
    "green_inequality_check",
    "kappa_convexity_check",
    "largest_passing_length",
    "sigma_concavity_check",
]
