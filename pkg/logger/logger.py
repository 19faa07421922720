"""
kcurve 日志模块，基于 loguru

- 控制台 sink 固定为 stderr，stdout 只留给 CSV/JSON 结果
- KCURVE_LOG_FILE 打开一个带轮转的文件 sink (长时间的 sweep 用)
- runtime.json_logs 切换为逐行 JSON
- --verbose 把级别降到 DEBUG
"""

import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional, TextIO

from loguru import logger

CONSOLE_FORMAT = (
    "<level>{level: <8}</level> | "
    "<cyan>{extra[name]}</cyan> | "
    "<level>{message}</level>"
)
FILE_FORMAT = (
    "{time:YYYY-MM-DD HH:mm:ss.SSS} | {level: <8} | "
    "{extra[name]}:{function}:{line} | {extra[subcommand]} | {message}"
)


@dataclass(frozen=True)
class LogConfig:
    """日志配置: 级别、格式与可选的日志文件"""

    level: str = "WARNING"
    json_logs: bool = False
    log_file: Optional[Path] = None
    rotation: str = "10 MB"
    retention: str = "1 week"


def setup_logging(config: Optional[LogConfig] = None, stream: Optional[TextIO] = None) -> None:
    """
    重新配置全局 logger

    Args:
        config: 日志配置，缺省为 WARNING 级别的控制台输出
        stream: 控制台 sink，缺省为调用时的 sys.stderr
    """
    config = config or LogConfig()

    logger.remove()
    logger.configure(extra={"name": "kcurve", "subcommand": "-"})
    logger.add(
        stream if stream is not None else sys.stderr,
        format=format_json if config.json_logs else CONSOLE_FORMAT,
        level=config.level,
        colorize=False if config.json_logs else None,
    )

    if config.log_file is not None:
        config.log_file.parent.mkdir(parents=True, exist_ok=True)
        logger.add(
            str(config.log_file),
            format=format_json if config.json_logs else FILE_FORMAT,
            level=config.level,
            rotation=config.rotation,
            retention=config.retention,
            enqueue=True,
        )


def format_json(record: Any) -> str:
    return (
        json.dumps(
            {
                "timestamp": record["time"].strftime("%Y-%m-%d %H:%M:%S.%f"),
                "level": record["level"].name,
                "message": record["message"],
                "module": record["extra"].get("name", record["name"]),
                "subcommand": record["extra"].get("subcommand", "-"),
                "function": record["function"],
                "line": record["line"],
                "thread_id": record["thread"].id,
            },
            default=str,
            ensure_ascii=False,
        )
        + "\n"
    ).replace("{", "{{").replace("}", "}}")


def get_logger(name: Optional[str] = None) -> Any:
    """
    获取绑定了模块名的 logger

    Args:
        name: 日志记录器名称，通常为 __name__
    """
    return logger.bind(name=name or "kcurve")


def log_context(subcommand: str) -> Any:
    """给本次运行的所有日志记录打上子命令标签"""
    return logger.contextualize(subcommand=subcommand)


def config_from_settings(verbose: bool = False) -> LogConfig:
    """由 basic-config.yaml 的 runtime 段与 KCURVE_* 环境变量组装日志配置"""
    from config.config import get_runtime_config, get_runtime_settings

    runtime_config = get_runtime_config()
    settings = get_runtime_settings()
    level = "DEBUG" if verbose else (settings.log_level or runtime_config.get("log_level", "warning"))
    return LogConfig(
        level=level.upper(),
        json_logs=bool(runtime_config.get("json_logs", False)),
        log_file=Path(settings.log_file) if settings.log_file else None,
    )


def _init_from_config() -> None:
    try:
        setup_logging(config_from_settings())
    except Exception:
        # 配置不可读时退回默认配置
        setup_logging()


_init_from_config()
