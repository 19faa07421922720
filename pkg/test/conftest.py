"""
共享测试夹具: 临时表格文件与常用曲率场
"""

from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np
import pytest

from app.services.curvature import CurvatureField

TableWriter = Callable[[str, Sequence[str], Iterable[Sequence[float]]], Path]


@pytest.fixture
def write_table(tmp_path: Path) -> TableWriter:
    """writes `header` plus rows as a CSV under tmp_path and returns the path"""

    def _write(name: str, header: Sequence[str], rows: Iterable[Sequence[float]]) -> Path:
        path = tmp_path / name
        lines = [",".join(header)] + [",".join(repr(float(v)) for v in row) for row in rows]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    return _write


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240601)


def constant_field(value: float, length: float = 1.0, start: float = 0.0) -> CurvatureField:
    return CurvatureField.constant(value, length, start)


def step_field(values: Sequence[float], length: float = 1.0) -> CurvatureField:
    """equal pieces on [0, length]"""
    breaks = np.linspace(0.0, length, len(values) + 1)[1:-1].tolist()
    return CurvatureField.step(breaks, list(values), 0.0, length)
