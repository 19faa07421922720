"""
Criterion Manager (Factory) - Maps criterion names to checker classes.
"""

from __future__ import annotations

import abc
import math
from typing import Any, Dict, Optional, Sequence, Type

from app.common.sampled import SampledFunction
from app.services.base import DomainError
from app.services.convexity.checks import (
    distributional_residual,
    green_inequality_check,
    kappa_convexity_check,
    sigma_concavity_check,
)
from app.services.convexity.problem import (
    ConvexityCertificate,
    ConvexityProblem,
    Segment,
    default_segments,
)
from app.services.curvature.field import CurvatureField
from logger.logger import get_logger

logger = get_logger(__name__)


class BaseCriterion(abc.ABC):
    """
    One of the four equivalent characterizations of κu-concavity.
    """

    label = ""

    def __init__(self, criterion_name: str, config: Optional[Dict[str, Any]] = None) -> None:
        self._criterion_name = criterion_name
        self._config = config or {}

    @property
    def name(self) -> str:
        return self._criterion_name

    @abc.abstractmethod
    def check(
        self,
        prob: ConvexityProblem,
        segments: Optional[Sequence[Segment]] = None,
        t_grid: Optional[Sequence[float]] = None,
    ) -> ConvexityCertificate:
        """
        Runs the criterion on the problem.
        Subclasses must implement this.
        """
        pass


class DistributionalCriterion(BaseCriterion):
    label = "u'' + κu ≤ 0 against B-spline bumps"

    def check(
        self,
        prob: ConvexityProblem,
        segments: Optional[Sequence[Segment]] = None,
        t_grid: Optional[Sequence[float]] = None,
    ) -> ConvexityCertificate:
        # 试验函数族不依赖线段
        return distributional_residual(prob)


class GreenCriterion(BaseCriterion):
    label = "Green-function inequality"

    def check(
        self,
        prob: ConvexityProblem,
        segments: Optional[Sequence[Segment]] = None,
        t_grid: Optional[Sequence[float]] = None,
    ) -> ConvexityCertificate:
        return green_inequality_check(prob, segments, t_grid)


class LocalSigmaCriterion(BaseCriterion):
    """σ-inequality on segments no longer than max_length (half the longest by default)"""

    label = "σ-inequality on short segments"

    def check(
        self,
        prob: ConvexityProblem,
        segments: Optional[Sequence[Segment]] = None,
        t_grid: Optional[Sequence[float]] = None,
    ) -> ConvexityCertificate:
        segs = list(segments) if segments is not None else default_segments(prob.start, prob.end)
        max_length = self._config.get("max_length")
        if max_length is None:
            max_length = 0.5 * max(abs(q - p) for p, q in segs)
        return sigma_concavity_check(prob, segs, t_grid, max_length=float(max_length))


class SigmaCriterion(BaseCriterion):
    label = "σ-inequality on all segments"

    def check(
        self,
        prob: ConvexityProblem,
        segments: Optional[Sequence[Segment]] = None,
        t_grid: Optional[Sequence[float]] = None,
    ) -> ConvexityCertificate:
        return sigma_concavity_check(prob, segments, t_grid)


class CriterionManager:
    """
    Acts as a factory to create the appropriate criterion instance
    based on the criterion name.
    """

    _aliases = {"distributional": "i", "green": "ii", "local": "iii", "sigma": "iv"}

    def __init__(self) -> None:
        self._criterion_map: Dict[str, Type[BaseCriterion]] = {
            "i": DistributionalCriterion,
            "ii": GreenCriterion,
            "iii": LocalSigmaCriterion,
            "iv": SigmaCriterion,
        }
        logger.debug("✅ CriterionManager (Factory) initialized.")

    def names(self) -> list[str]:
        return list(self._criterion_map.keys())

    def get_criterion(self, name: str, config: Optional[Dict[str, Any]] = None) -> BaseCriterion:
        key = self._aliases.get(name, name)
        CriterionClass = self._criterion_map.get(key)
        if CriterionClass is None:
            raise DomainError(
                f"unknown convexity criterion '{name}'", {"known": self.names()}
            )
        return CriterionClass(key, config)


_manager = CriterionManager()


def certify_kappa_N_convex(
    S: SampledFunction,
    curv: CurvatureField,
    N: float,
    criterion: str = "iv",
    segments: Optional[Sequence[Segment]] = None,
    t_grid: Optional[Sequence[float]] = None,
    max_length: Optional[float] = None,
) -> ConvexityCertificate:
    """
    Finite N: the chosen criterion on U_N = exp(−S/N) against κ/N.
    N = ∞: the Green-weighted κ-convexity inequality for S itself.
    """
    if math.isinf(N):
        return kappa_convexity_check(S, curv, segments, t_grid)
    prob = ConvexityProblem.from_potential(S, curv, N)
    config = {"max_length": max_length} if max_length is not None else None
    return _manager.get_criterion(criterion, config).check(prob, segments, t_grid)
