"""
Sweep Service - 参数扫描与结果落盘
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Union

from app.common.io import json_text, write_csv
from app.services.base import BaseService
from app.services.sweep.config import SweepConfig, load_sweep_config
from app.services.sweep.runner import SweepResult, run_sweep
from config.config import get_numerics_config, get_runtime_settings
from logger.logger import get_logger

logger = get_logger(__name__)


def summary_path(output: Union[str, Path]) -> Path:
    """results.csv -> results.summary.json"""
    out = Path(output)
    return out.with_name(out.stem + ".summary.json")


class SweepService(BaseService):
    def __init__(self) -> None:
        super().__init__("sweep", get_numerics_config("sweep"))

    def load(self, path: Union[str, Path]) -> SweepConfig:
        cfg = load_sweep_config(path)
        logger.debug(f"📄 sweep config {path}: checker={cfg.checker}, seed={cfg.seed}")
        return cfg

    def run(self, cfg: SweepConfig, threads: Optional[int] = None) -> SweepResult:
        workers = threads if threads is not None else get_runtime_settings().threads
        self.log_request("run_sweep", {"checker": cfg.checker, "threads": workers})
        result = run_sweep(cfg, workers)
        status = "✅" if result.failures == 0 else "❌"
        logger.info(f"{status} sweep '{cfg.checker}': {len(result.cells)} cells, {result.failures} failing")
        return result

    def write(self, result: SweepResult, output: Union[str, Path]) -> Path:
        """CSV 写入 output, 汇总 JSON 写在旁边"""
        out = Path(output)
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", encoding="utf-8", newline="") as f:
            write_csv(f, result.header, result.rows)
        side = summary_path(out)
        side.write_text(json_text(result.summary(), indent=2) + "\n", encoding="utf-8")
        logger.info(f"📄 wrote {out} and {side}")
        return side
