"""
基础命令抽象类
为所有子命令提供统一的参数注册、输出格式和结论处理
"""

from __future__ import annotations

import argparse
import sys
from abc import ABC, abstractmethod
from typing import Any, Iterable, Optional, Sequence

from app.common.errors import EXIT_OK
from app.common.io import csv_text, json_text
from app.services.base import CheckFailedError
from app.services.convexity.problem import ConvexityCertificate


class BaseCommand(ABC):
    """
    基础命令抽象类
    在 argparse 子命令上注册参数, 执行时返回退出码
    """

    name = ""
    help = ""

    def __init__(self, subparsers: Any) -> None:
        self.parser: argparse.ArgumentParser = subparsers.add_parser(self.name, help=self.help)
        self._setup_arguments()
        self._setup_common_arguments()
        self.parser.set_defaults(command=self)

    @abstractmethod
    def _setup_arguments(self) -> None:
        """
        设置子命令特有的参数。
        子类必须实现此方法。
        """
        pass

    @abstractmethod
    def execute(self, args: argparse.Namespace) -> int:
        """执行命令并返回退出码"""
        pass

    def _setup_common_arguments(self) -> None:
        """设置通用参数"""
        self.parser.add_argument("--json", action="store_true", help="emit JSON instead of text/CSV")
        self.parser.add_argument("--verbose", "-v", action="store_true", help="debug logging on stderr")

    # ------------------------------------------------------------------
    # 输出
    # ------------------------------------------------------------------
    def write_json(self, payload: Any) -> None:
        sys.stdout.write(json_text(payload) + "\n")

    def write_rows(self, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
        sys.stdout.write(csv_text(header, rows))

    def write_text(self, text: str) -> None:
        sys.stdout.write(text + "\n")

    def conclude(
        self, args: argparse.Namespace, cert: ConvexityCertificate, what: str, extra: Optional[dict] = None
    ) -> int:
        """pass → 0 (certificate on stdout); fail → CheckFailedError carrying the witness"""
        payload = {**cert.model_dump(), **(extra or {})}
        if not cert.passed:
            raise CheckFailedError(f"{what} fails", payload)
        if args.json:
            self.write_json(payload)
        else:
            self.write_text(f"pass {cert.worst_margin!r}")
        return EXIT_OK
