from __future__ import annotations
import os
from typing import Any, Optional

from pydantic_settings import BaseSettings, SettingsConfigDict

from .basic_config import get_basic_config

config = get_basic_config()


class RuntimeSettings(BaseSettings):
    """
    环境变量配置 (前缀 KCURVE_)，可由 .env 文件提供。
    """

    model_config = SettingsConfigDict(env_prefix="KCURVE_", extra="ignore")

    threads: int = max(1, os.cpu_count() or 1)
    log_level: Optional[str] = None
    log_file: Optional[str] = None


def get_runtime_config() -> Any:
    """
    Returns the runtime configuration section.
    Returns an empty dict if not found.
    """
    return config.get("runtime", {})


def get_routes_config() -> Any:
    """
    Returns the routes configuration section.
    Returns an empty dict if not found.
    """
    return config.get("routes", {})


def get_numerics_config(section: Optional[str] = None) -> Any:
    """
    Retrieves the numerics file inlined under routes, optionally one module's section.
    """
    routes = get_routes_config()
    numerics_data = routes.get("numerics", [])

    if len(numerics_data) < 1:
        return {}

    # copy, the loaded config is shared across callers
    numerics = dict(numerics_data[0] or {})
    if section is None:
        return numerics
    return dict(numerics.get(section, {}))


def get_runtime_settings() -> RuntimeSettings:
    """Reads KCURVE_* environment variables fresh on every call."""
    return RuntimeSettings()


if __name__ == "__main__":
    import json

    print(json.dumps(get_numerics_config(), indent=2, ensure_ascii=False))
