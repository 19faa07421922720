"""
Convexity Service - κu-凹性与 (κ,N)-凸性证书
"""

from __future__ import annotations

from typing import Dict, Optional, Sequence

from app.common.sampled import SampledFunction
from app.services.base import BaseService
from app.services.convexity.checks import (
    LengthSearch,
    first_variation_check,
    largest_passing_length,
)
from app.services.convexity.criteria import CriterionManager, certify_kappa_N_convex
from app.services.convexity.problem import ConvexityCertificate, ConvexityProblem, Segment
from app.services.curvature.field import CurvatureField
from config.config import get_numerics_config
from logger.logger import get_logger

logger = get_logger(__name__)


def _log_verdict(what: str, cert: ConvexityCertificate) -> None:
    if cert.passed:
        logger.info(f"✅ {what} [{cert.criterion}]: pass, worst margin {cert.worst_margin:.3e}")
    else:
        logger.info(
            f"❌ {what} [{cert.criterion}]: fail, worst margin {cert.worst_margin:.3e} "
            f"at {cert.worst_witness}"
        )


class ConvexityService(BaseService):
    """凸性检查服务"""

    def __init__(self) -> None:
        super().__init__("convexity", get_numerics_config("convexity"))
        self._criterion_manager = CriterionManager()

    def certify(
        self,
        prob: ConvexityProblem,
        criterion: str = "iv",
        segments: Optional[Sequence[Segment]] = None,
        t_grid: Optional[Sequence[float]] = None,
        max_length: Optional[float] = None,
    ) -> ConvexityCertificate:
        self.log_request("certify", {"criterion": criterion, "max_length": max_length})
        config = {"max_length": max_length} if max_length is not None else None
        cert = self._criterion_manager.get_criterion(criterion, config).check(
            prob, segments, t_grid
        )
        _log_verdict("κu-concavity", cert)
        return cert

    def certify_potential(
        self,
        S: SampledFunction,
        curv: CurvatureField,
        N: float,
        criterion: str = "iv",
        segments: Optional[Sequence[Segment]] = None,
        t_grid: Optional[Sequence[float]] = None,
    ) -> ConvexityCertificate:
        self.log_request("certify_kappa_N_convex", {"N": N, "criterion": criterion})
        cert = certify_kappa_N_convex(S, curv, N, criterion, segments, t_grid)
        _log_verdict(f"(κ,{N})-convexity", cert)
        return cert

    def all_criteria(
        self,
        prob: ConvexityProblem,
        segments: Optional[Sequence[Segment]] = None,
        t_grid: Optional[Sequence[float]] = None,
    ) -> Dict[str, ConvexityCertificate]:
        """the four criteria side by side; on smooth problems their verdicts agree"""
        return {
            name: self._criterion_manager.get_criterion(name).check(prob, segments, t_grid)
            for name in self._criterion_manager.names()
        }

    def first_variation(
        self, prob: ConvexityProblem, segments: Optional[Sequence[Segment]] = None
    ) -> ConvexityCertificate:
        self.log_request("first_variation_check", {})
        return first_variation_check(prob, segments)

    def largest_length(
        self,
        prob: ConvexityProblem,
        segments: Optional[Sequence[Segment]] = None,
        t_grid: Optional[Sequence[float]] = None,
    ) -> LengthSearch:
        self.log_request("largest_passing_length", {})
        result = largest_passing_length(prob, segments, t_grid)
        logger.info(f"ℹ️ largest passing segment length: {result.length}")
        return result
