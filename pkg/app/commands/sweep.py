"""
sweep 命令 - 按 KEY=value 配置文件做参数扫描
"""

from __future__ import annotations

import argparse

from app.commands.base import BaseCommand
from app.common.errors import EXIT_OK
from app.services.base import CheckFailedError
from app.services.sweep import get_sweep_service


class SweepCommand(BaseCommand):
    name = "sweep"
    help = "run a checker over a parameter grid; CSV plus a summary JSON"

    def _setup_arguments(self) -> None:
        self.parser.add_argument("--config", required=True, help="KEY=value sweep file")
        self.parser.add_argument("--output", default=None, help="CSV path (overrides the config)")
        self.parser.add_argument("--threads", type=int, default=None, help="defaults to KCURVE_THREADS")

    def execute(self, args: argparse.Namespace) -> int:
        service = get_sweep_service()
        cfg = service.load(args.config)
        output = args.output or cfg.output
        result = service.run(cfg, args.threads)
        summary = result.summary()
        if output:
            service.write(result, output)
        if result.failures:
            raise CheckFailedError(f"sweep '{cfg.checker}' has {result.failures} failing cell(s)", summary)
        if output or args.json:
            self.write_json(summary)
        else:
            self.write_rows(result.header, result.rows)
        return EXIT_OK
