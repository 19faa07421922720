"""
Wasserstein1D Service - 一维最优传输、熵曲率维数条件与体积比较
"""

from __future__ import annotations

from typing import Dict, Optional, Sequence

from app.services.base import BaseService
from app.services.convexity.problem import ConvexityCertificate
from app.services.curvature.field import CurvatureField
from app.services.wasserstein1d.checks import check_entropic_cd, density_inequality_check
from app.services.wasserstein1d.growth import (
    BishopGromovReport,
    GrowthReport,
    bishop_gromov_check,
    volume_growth_check,
)
from app.services.wasserstein1d.measures import ProbMeasure1D, w2_distance
from app.services.wasserstein1d.space import MMSpace1D, entropy
from config.config import get_numerics_config
from logger.logger import get_logger

logger = get_logger(__name__)


class Wasserstein1DService(BaseService):
    """加权区间上的 CD^e / Bishop–Gromov 服务"""

    def __init__(self) -> None:
        super().__init__("wasserstein1d", get_numerics_config("wasserstein1d"))

    def describe(self, space: MMSpace1D, mu0: ProbMeasure1D, mu1: ProbMeasure1D) -> Dict[str, float]:
        return {
            "theta": w2_distance(mu0, mu1),
            "Ent0": entropy(mu0, space),
            "Ent1": entropy(mu1, space),
        }

    def entropic_cd(
        self,
        space: MMSpace1D,
        curv: CurvatureField,
        N: float,
        mu0: ProbMeasure1D,
        mu1: ProbMeasure1D,
        t_grid: Optional[Sequence[float]] = None,
        per_particle: bool = False,
    ) -> ConvexityCertificate:
        self.log_request("check_entropic_cd", {"N": N, "space": space.name, "per_particle": per_particle})
        if per_particle:
            cert = density_inequality_check(space, curv, N, mu0, mu1, t_grid)
        else:
            cert = check_entropic_cd(space, curv, N, mu0, mu1, t_grid)
        if cert.passed:
            logger.info(f"✅ CD^e [{cert.criterion}] holds, worst margin {cert.worst_margin:.3e}")
        else:
            logger.info(f"❌ CD^e [{cert.criterion}] fails at {cert.worst_witness}")
        return cert

    def bishop_gromov(
        self,
        space: MMSpace1D,
        x0: float,
        r: float,
        R: float,
        kappa_lower: float,
        N: float,
        profile: str = "entropic",
    ) -> BishopGromovReport:
        self.log_request("bishop_gromov_check", {"x0": x0, "r": r, "R": R, "N": N})
        return bishop_gromov_check(space, x0, r, R, kappa_lower, N, profile)  # type: ignore[arg-type]

    def growth(self, space: MMSpace1D, c: float, extrapolate_tails: bool = False) -> GrowthReport:
        self.log_request("volume_growth_check", {"c": c})
        return volume_growth_check(space, c, extrapolate_tails)
