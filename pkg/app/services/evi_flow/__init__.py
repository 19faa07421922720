"""
EVI Flow Service Package
"""

from typing import Optional

from app.services.base import ServiceRegistry
from app.services.evi_flow.inequalities import (
    ContractionReport,
    asymptotic_contraction_rhs,
    contraction_bound_infinite,
    dimensional_contraction_bound,
    evi_residual,
    evi_residual_constant,
    gronwall_bound,
    sharp_kappa_N,
)
from app.services.evi_flow.service import EviFlowService
from app.services.evi_flow.trace import (
    EVITrace,
    SlopeEstimate,
    descending_slope,
    dissipation_residual,
    gradient_flow,
)
from logger.logger import get_logger

logger = get_logger(__name__)

_instance: Optional[EviFlowService] = None


def get_evi_flow_service() -> EviFlowService:
    """
    Factory function to get the singleton instance of EviFlowService.
    """
    global _instance
    if _instance is None:
        logger.debug("🔧 Creating new instance of EviFlowService...")
        _instance = EviFlowService()
        ServiceRegistry.register("evi_flow", _instance)
    return _instance


__all__ = [
    "ContractionReport",
    "EVITrace",
    "EviFlowService",
    "SlopeEstimate",
    "asymptotic_contraction_rhs",
    "contraction_bound_infinite",
    "descending_slope",
    "dimensional_contraction_bound",
    "dissipation_residual",
    "evi_residual",
    "evi_residual_constant",
    "get_evi_flow_service",
    "gradient_flow",
    "gronwall_bound",
    "sharp_kappa_N",
]
