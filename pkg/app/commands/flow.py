"""
flow 命令 - 梯度流轨迹上的 EVI / 能量耗散 / 收缩诊断
"""

from __future__ import annotations

import argparse
from typing import List, Sequence, Tuple

from app.commands.base import BaseCommand
from app.common.errors import EXIT_OK
from app.common.sampled import load_function_table
from app.services.base import CheckFailedError, DomainError
from app.services.curvature import load_curvature_table
from app.services.evi_flow import get_evi_flow_service
from config.config import get_numerics_config

HEADER = ("s", "value", "bound", "margin")
CHECK_TOL = float(get_numerics_config("evi_flow").get("check_tol", 1e-4))


class FlowCommand(BaseCommand):
    name = "flow"
    help = "simulate x' = -f'(x) and report EVI, dissipation or contraction rows"

    def _setup_arguments(self) -> None:
        self.parser.add_argument("--f", required=True, help="x,f table")
        self.parser.add_argument("--kappa", required=True, help="x,kappa table")
        self.parser.add_argument("--N", type=float, required=True, help="dimension bound, 'inf' allowed")
        self.parser.add_argument("--x0", type=float, required=True)
        self.parser.add_argument("--horizon", type=float, required=True)
        self.parser.add_argument("--dt", type=float, default=None)
        self.parser.add_argument(
            "--report", choices=["evi", "dissipation", "contraction"], default="evi"
        )
        self.parser.add_argument("--z", type=float, default=None, help="comparison point (evi)")
        self.parser.add_argument("--y0", type=float, default=None, help="second start (contraction)")
        self.parser.add_argument("--lambda", dest="lam", type=float, default=1.0, help="time rescaling")
        self.parser.add_argument(
            "--check", action="store_true", help="exit 1 when the smallest margin is below -tol"
        )
        self.parser.add_argument("--tol", type=float, default=CHECK_TOL)

    def execute(self, args: argparse.Namespace) -> int:
        f = load_function_table(args.f, column="f")
        field = load_curvature_table(args.kappa)
        service = get_evi_flow_service()

        rows: Sequence[Tuple[float, float, float, float]]
        if args.report == "contraction":
            if args.y0 is None:
                raise DomainError("--report contraction needs --y0")
            trace_x, trace_y = service.flow_pair(f, args.x0, args.y0, args.horizon, args.dt)
            rows = service.contraction(trace_x, trace_y, field, args.N, args.lam).to_rows()
        else:
            trace = service.flow(f, args.x0, args.horizon, args.dt)
            if args.report == "evi":
                if args.z is None:
                    raise DomainError("--report evi needs --z")
                rows = service.evi_rows(trace, args.z, field, args.N)
            else:
                rows = service.dissipation_rows(trace)

        if args.check:
            self._check(args, rows)
        if args.json:
            self.write_json([dict(zip(HEADER, row)) for row in rows])
        else:
            self.write_rows(HEADER, rows)
        return EXIT_OK

    def _check(self, args: argparse.Namespace, rows: Sequence[Tuple[float, float, float, float]]) -> None:
        margins: List[float] = [row[3] for row in rows]
        if not margins:
            return
        if args.report == "dissipation":
            # 耗散恒等式两侧都不能偏离
            worst = max(range(len(margins)), key=lambda i: abs(margins[i]))
            failed = abs(margins[worst]) > args.tol
        else:
            worst = min(range(len(margins)), key=margins.__getitem__)
            failed = margins[worst] < -args.tol
        if failed:
            s, value, bound, margin = rows[worst]
            raise CheckFailedError(
                f"{args.report} report below tolerance",
                {"report": args.report, "s": s, "value": value, "bound": bound, "margin": margin, "tol": args.tol},
            )
