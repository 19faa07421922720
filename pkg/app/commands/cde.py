"""
cde 命令 - 加权区间上的熵曲率维数条件 CD^e(κ,N)
"""

from __future__ import annotations

import argparse

import numpy as np

from app.commands.base import BaseCommand
from app.services.curvature import load_curvature_table
from app.services.wasserstein1d import (
    get_wasserstein1d_service,
    load_measure_table,
    load_space_table,
)


class CdeCommand(BaseCommand):
    name = "cde"
    help = "check CD^e(κ,N) along the displacement geodesic between two measures"

    def _setup_arguments(self) -> None:
        self.parser.add_argument("--space", required=True, help="x,weight table")
        self.parser.add_argument("--kappa", required=True, help="x,kappa table")
        self.parser.add_argument("--N", type=float, required=True, help="dimension bound, 'inf' allowed")
        self.parser.add_argument("--mu0", required=True, help="x,density table")
        self.parser.add_argument("--mu1", required=True, help="x,density table")
        self.parser.add_argument("--t-points", type=int, default=21, help="times on [0,1]")
        self.parser.add_argument(
            "--per-particle", action="store_true", help="check the density inequality along each particle"
        )

    def execute(self, args: argparse.Namespace) -> int:
        space = load_space_table(args.space)
        field = load_curvature_table(args.kappa)
        mu0, mu1 = load_measure_table(args.mu0), load_measure_table(args.mu1)
        service = get_wasserstein1d_service()
        cert = service.entropic_cd(
            space,
            field,
            args.N,
            mu0,
            mu1,
            np.linspace(0.0, 1.0, max(2, args.t_points)),
            per_particle=args.per_particle,
        )
        return self.conclude(
            args, cert, f"CD^e(κ,{args.N})", {"N": args.N, **service.describe(space, mu0, mu1)}
        )
