"""
bg 命令 - Bishop–Gromov 体积比较
"""

from __future__ import annotations

import argparse

from app.commands.base import BaseCommand
from app.common.errors import EXIT_OK
from app.services.base import CheckFailedError
from app.services.wasserstein1d import get_wasserstein1d_service, load_space_table

HEADER = ("x0", "r", "R", "s_ratio", "model_s_ratio", "v_ratio", "model_v_ratio", "ok")


class BgCommand(BaseCommand):
    name = "bg"
    help = "compare sphere and ball ratios with the model space of curvature κ̲"

    def _setup_arguments(self) -> None:
        self.parser.add_argument("--space", required=True, help="x,weight table")
        self.parser.add_argument("--x0", type=float, required=True, help="center")
        self.parser.add_argument("--r", type=float, required=True)
        self.parser.add_argument("--R", type=float, required=True)
        self.parser.add_argument("--kappa-lower", type=float, required=True)
        self.parser.add_argument("--N", type=float, required=True)
        self.parser.add_argument("--profile", choices=["entropic", "sharp"], default="entropic")

    def execute(self, args: argparse.Namespace) -> int:
        space = load_space_table(args.space)
        report = get_wasserstein1d_service().bishop_gromov(
            space, args.x0, args.r, args.R, args.kappa_lower, args.N, args.profile
        )
        if not report.ok:
            raise CheckFailedError("Bishop–Gromov comparison fails", report.to_dict())
        if args.json:
            self.write_json(report.to_dict())
        else:
            self.write_rows(HEADER, [tuple(report.to_dict()[key] for key in HEADER)])
        return EXIT_OK
