"""
certify 命令 - (κ,N)-凸性证书
"""

from __future__ import annotations

import argparse

from app.commands.base import BaseCommand
from app.common.sampled import load_function_table
from app.services.convexity import get_convexity_service
from app.services.curvature import load_curvature_table


class CertifyCommand(BaseCommand):
    name = "certify"
    help = "certify that S is (κ,N)-convex; exit 1 with a witness when it is not"

    def _setup_arguments(self) -> None:
        self.parser.add_argument("--S", required=True, help="x,S table")
        self.parser.add_argument("--kappa", required=True, help="x,kappa table")
        self.parser.add_argument("--N", type=float, required=True, help="dimension bound, 'inf' allowed")
        self.parser.add_argument("--criterion", choices=["i", "ii", "iii", "iv"], default="iv")

    def execute(self, args: argparse.Namespace) -> int:
        S = load_function_table(args.S, column="S")
        field = load_curvature_table(args.kappa)
        cert = get_convexity_service().certify_potential(S, field, args.N, args.criterion)
        return self.conclude(args, cert, f"({args.N},κ)-convexity", {"N": args.N})
