"""
Wasserstein1D Service Package
"""

from typing import Optional

from app.services.base import ServiceRegistry
from app.services.wasserstein1d.checks import (
    check_entropic_cd,
    density_inequality_check,
    entropy_convexity_check,
)
from app.services.wasserstein1d.growth import (
    BishopGromovReport,
    GrowthReport,
    bishop_gromov_check,
    minkowski_content,
    volume_growth_check,
)
from app.services.wasserstein1d.measures import (
    ProbMeasure1D,
    WassersteinGeodesic,
    displacement_geodesic,
    load_measure_table,
    quantile_levels,
    w2_distance,
)
from app.services.wasserstein1d.service import Wasserstein1DService
from app.services.wasserstein1d.space import (
    MMSpace1D,
    entropy,
    load_space_table,
    perturb_space,
    u_n,
)
from logger.logger import get_logger

logger = get_logger(__name__)

_instance: Optional[Wasserstein1DService] = None


def get_wasserstein1d_service() -> Wasserstein1DService:
    """
    Factory function to get the singleton instance of Wasserstein1DService.
    """
    global _instance
    if _instance is None:
        logger.debug("🔧 Creating new instance of Wasserstein1DService...")
        _instance = Wasserstein1DService()
        ServiceRegistry.register("wasserstein1d", _instance)
    return _instance


__all__ = [
    "BishopGromovReport",
    "GrowthReport",
    "MMSpace1D",
    "ProbMeasure1D",
    "Wasserstein1DService",
    "WassersteinGeodesic",
    "bishop_gromov_check",
    "check_entropic_cd",
    "density_inequality_check",
    "displacement_geodesic",
    "entropy",
    "entropy_convexity_check",
    "get_wasserstein1d_service",
    "load_measure_table",
    "load_space_table",
    "minkowski_content",
    "perturb_space",
    "quantile_levels",
    "u_n",
    "volume_growth_check",
    "w2_distance",
]
