"""
Sweep Service Package
"""

from typing import Optional

from app.services.base import ServiceRegistry
from app.services.sweep.config import SweepConfig, load_sweep_config, parse_grid
from app.services.sweep.runner import HEADERS, CellResult, SweepResult, run_sweep
from app.services.sweep.service import SweepService, summary_path
from logger.logger import get_logger

logger = get_logger(__name__)

_instance: Optional[SweepService] = None


def get_sweep_service() -> SweepService:
    """
    Factory function to get the singleton instance of SweepService.
    """
    global _instance
    if _instance is None:
        logger.debug("🔧 Creating new instance of SweepService...")
        _instance = SweepService()
        ServiceRegistry.register("sweep", _instance)
    return _instance


__all__ = [
    "HEADERS",
    "CellResult",
    "SweepConfig",
    "SweepResult",
    "SweepService",
    "get_sweep_service",
    "load_sweep_config",
    "parse_grid",
    "run_sweep",
    "summary_path",
]
