"""
sin 命令 - 广义正弦 s_κ 与余弦 c_κ
"""

from __future__ import annotations

import argparse

from app.commands.base import BaseCommand
from app.common.errors import EXIT_OK
from app.services.curvature import load_curvature_table
from app.services.ode_comparison import get_ode_comparison_service


class SinCommand(BaseCommand):
    name = "sin"
    help = "solve v'' + κv = 0 with v(0)=0, v'(0)=1"

    def _setup_arguments(self) -> None:
        self.parser.add_argument("--kappa", required=True, help="x,kappa table")
        self.parser.add_argument("--L", type=float, default=None, help="length (default: whole table)")
        self.parser.add_argument("--step", type=float, default=None, help="RK4 step")

    def execute(self, args: argparse.Namespace) -> int:
        field = load_curvature_table(args.kappa)
        gs = get_ode_comparison_service().generalized_sin(field, args.L, args.step)
        if args.json:
            self.write_json(
                {
                    "L": gs.end - gs.start,
                    "first_zero": gs.first_zero,
                    "s_L": float(gs.s_values[-1]),
                    "c_L": float(gs.c_values[-1]),
                }
            )
        else:
            self.write_rows(("x", "s", "c"), gs.to_rows())
        return EXIT_OK
