"""
sigma 命令 - 畸变系数 σ_κ^{(t)}(θ)
"""

from __future__ import annotations

import argparse

from app.commands.base import BaseCommand
from app.common.errors import EXIT_OK
from app.common.io import format_float
from app.services.curvature import load_curvature_table
from app.services.distortion import get_distortion_service


class SigmaCommand(BaseCommand):
    name = "sigma"
    help = "distortion coefficient σ_κ^(t)(θ); prints the value or inf"

    def _setup_arguments(self) -> None:
        self.parser.add_argument("--kappa", required=True, help="x,kappa table")
        self.parser.add_argument("--theta", type=float, required=True)
        self.parser.add_argument("--t", type=float, required=True)
        self.parser.add_argument(
            "--lsc-n0", type=int, default=None, help="sup over the approximants κ_n, n = 2^k·n0"
        )

    def execute(self, args: argparse.Namespace) -> int:
        field = load_curvature_table(args.kappa)
        value = get_distortion_service().coefficient(field, args.t, args.theta, args.lsc_n0)
        if args.json:
            self.write_json(value.to_dict())
        else:
            self.write_text(format_float(float(value.value)))
        return EXIT_OK
