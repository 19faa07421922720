"""
kcurve 命令行入口

退出码: 0 通过, 1 检查失败 (stdout 上为 witness JSON), 2 参数/定义域/表格错误
"""

import argparse
from typing import Optional, Sequence

from dotenv import load_dotenv

from app import __version__
from app.commands import COMMANDS
from app.common.errors import handle_command_error
from logger.logger import config_from_settings, get_logger, log_context, setup_logging

logger = get_logger(__name__)


def build_parser() -> argparse.ArgumentParser:
    """
    创建并配置参数解析器, 每个子命令由 app.commands 中的类注册
    """
    parser = argparse.ArgumentParser(
        prog="kcurve",
        description="variable-curvature distortion coefficients, (κ,N)-convexity and EVI diagnostics",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="subcommand", required=True)
    for command_cls in COMMANDS:
        command_cls(subparsers)
    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    # .env 中的 KCURVE_* 变量先于日志配置读入
    load_dotenv()
    args = build_parser().parse_args(argv)
    setup_logging(config_from_settings(verbose=args.verbose))
    with log_context(args.subcommand):
        logger.debug(f"🔧 kcurve {args.subcommand}")
        try:
            return int(args.command.execute(args))
        except Exception as exc:
            return handle_command_error(exc)


if __name__ == "__main__":
    raise SystemExit(run())
