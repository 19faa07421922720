"""
表格读取与结果输出

- 两列文本表 (`x,kappa` / `x,density` / `x,weight` / `x,f`), 出错时给出行号
- CSV 输出使用固定列顺序和 17 位有效数字, 便于 golden 文件比对
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence, TextIO, Tuple, Union

import numpy as np

from app.services.base import TableFormatError
from config.config import get_runtime_config
from logger.logger import get_logger

logger = get_logger(__name__)

PathLike = Union[str, Path]


def load_table(
    path: PathLike,
    columns: Tuple[str, str],
    *,
    nonnegative: bool = False,
    min_rows: int = 2,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    读取两列数值表。

    允许: 空行、以 '#' 开头的注释行、首个数据行之前的一行表头 (例如 `x,kappa`)。
    要求: x 严格递增, 所有值有限; nonnegative=True 时第二列非负。
    """
    path_str = str(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            raw_lines = f.readlines()
    except OSError as e:
        raise TableFormatError(path_str, 0, f"cannot read table: {e}") from e

    xs: list[float] = []
    ys: list[float] = []
    last_line = 0
    for lineno, raw in enumerate(raw_lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        last_line = lineno
        parts = [p.strip() for p in line.replace(";", ",").split(",")]
        if len(parts) != 2:
            raise TableFormatError(
                path_str, lineno, f"expected 2 columns {columns}, got {len(parts)}"
            )
        try:
            x, y = float(parts[0]), float(parts[1])
        except ValueError:
            if not xs and [p.lower() for p in parts] == [c.lower() for c in columns]:
                continue
            raise TableFormatError(path_str, lineno, f"non-numeric row: {line!r}")
        if not (math.isfinite(x) and math.isfinite(y)):
            raise TableFormatError(path_str, lineno, "values must be finite")
        if xs and x <= xs[-1]:
            raise TableFormatError(
                path_str, lineno, f"{columns[0]} must be strictly increasing"
            )
        if nonnegative and y < 0:
            raise TableFormatError(path_str, lineno, f"{columns[1]} must be >= 0")
        xs.append(x)
        ys.append(y)

    if len(xs) < min_rows:
        raise TableFormatError(
            path_str, last_line, f"need at least {min_rows} rows, found {len(xs)}"
        )
    logger.debug(f"📄 已读取表格 {path_str}: {len(xs)} 行")
    return np.asarray(xs, dtype=float), np.asarray(ys, dtype=float)


def format_float(value: Any) -> str:
    """17 位有效数字; ±inf 与 nan 写成 inf/-inf/nan"""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        digits = int(get_runtime_config().get("float_digits", 17))
        return f"{v:.{digits}g}"
    return str(value)


def write_csv(
    stream: TextIO, header: Sequence[str], rows: Iterable[Sequence[Any]]
) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_float(v) for v in row])


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    write_csv(buf, header, rows)
    return buf.getvalue()


def _jsonable(obj: Any) -> Any:
    if obj is None or isinstance(obj, (bool, int, str)):
        return obj
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return "nan"
        return v
    if hasattr(obj, "model_dump"):
        return _jsonable(obj.model_dump())
    if hasattr(obj, "to_dict"):
        return _jsonable(obj.to_dict())
    if hasattr(obj, "__float__") and not isinstance(obj, str):
        # INFINITE 标记值
        return _jsonable(float(obj))
    return obj


def json_text(payload: Any, indent: Optional[int] = None) -> str:
    """确定性的 JSON 文本 (键排序, 无穷写成字符串)"""
    return json.dumps(
        _jsonable(payload), sort_keys=True, indent=indent, ensure_ascii=False
    )
