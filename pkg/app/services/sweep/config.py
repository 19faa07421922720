"""
Sweep configuration: a KEY=value file read with python-dotenv.

List keys take comma-separated values (`0.5,1,2`) or an inclusive range
`start:stop:step`; an empty value gives an empty list.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Any, List, Literal, Optional, Union

from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from app.services.base import DomainError
from config.config import get_runtime_config

LIST_KEYS = ("theta", "t", "N", "lam", "x0", "y0", "z", "x_center", "r", "R")
PATH_KEYS = ("kappa", "f", "space", "mu0", "mu1", "output")


def parse_grid(text: Any) -> List[float]:
    """`a,b,c` 或 `start:stop:step` (含端点) -> 数值列表"""
    if text is None:
        return []
    if isinstance(text, (int, float)):
        return [float(text)]
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    raw = str(text).strip()
    if not raw:
        return []
    if ":" in raw:
        parts = raw.split(":")
        if len(parts) != 3:
            raise ValueError(f"range must be start:stop:step, got {raw!r}")
        start, stop, step = (float(p) for p in parts)
        if not step > 0:
            raise ValueError("range step must be positive")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [start + k * step for k in range(max(0, count))]
    return [float(p) for p in raw.split(",") if p.strip()]


class SweepConfig(BaseModel):
    model_config = ConfigDict(populate_by_name=True, extra="forbid")

    checker: Literal["sigma", "evi", "contraction", "bg", "certify", "cde"]
    kappa: Optional[str] = None
    kappa_value: Optional[float] = None
    f: Optional[str] = None
    space: Optional[str] = None
    mu0: Optional[str] = None
    mu1: Optional[str] = None
    output: Optional[str] = None

    theta: List[float] = Field(default_factory=list)
    t: List[float] = Field(default_factory=list)
    N: List[float] = Field(default_factory=list)
    lam: List[float] = Field(default_factory=lambda: [1.0], alias="lambda")
    x0: List[float] = Field(default_factory=list)
    y0: List[float] = Field(default_factory=list)
    z: List[float] = Field(default_factory=list)
    x_center: List[float] = Field(default_factory=list)
    r: List[float] = Field(default_factory=list)
    R: List[float] = Field(default_factory=list)

    horizon: float = 1.0
    dt: Optional[float] = None
    kappa_lower: float = 0.0
    profile: Literal["entropic", "sharp"] = "entropic"
    criterion: Literal["i", "ii", "iii", "iv"] = "iv"
    per_particle: bool = False
    seed: int = Field(default_factory=lambda: int(get_runtime_config().get("default_seed", 0)))
    # z 为空时按 seed 随机抽取的比较点个数
    samples: int = 0

    @field_validator(*LIST_KEYS, mode="before")
    @classmethod
    def _grid(cls, value: Any) -> List[float]:
        return parse_grid(value)

    @field_validator("kappa_value", "dt", mode="before")
    @classmethod
    def _blank_is_none(cls, value: Any) -> Any:
        return None if isinstance(value, str) and not value.strip() else value


def load_sweep_config(path: Union[str, Path]) -> SweepConfig:
    """读取 KEY=value 文件; 相对路径以配置文件所在目录为基准"""
    cfg_path = Path(path)
    if not cfg_path.is_file():
        raise DomainError(f"sweep config not found: {cfg_path}")
    values = {k: v for k, v in dotenv_values(cfg_path).items() if v is not None}
    for key in PATH_KEYS:
        if values.get(key):
            p = Path(values[key])
            values[key] = str(p if p.is_absolute() else cfg_path.parent / p)
    try:
        return SweepConfig.model_validate(values)
    except ValidationError as e:
        raise DomainError(
            "invalid sweep config", {"path": str(cfg_path), "errors": e.errors(include_url=False, include_context=False, include_input=False)}
        ) from e
