import json
from pathlib import Path
from typing import Any, Dict, List

import yaml
from loguru import logger

CONFIG_DIR = Path(__file__).resolve().parent
BASIC_CONFIG = CONFIG_DIR / "basic-config.yaml"


def load_route_file(relative: str, base: Path = CONFIG_DIR) -> Any:
    """
    读取 routes 中列出的一个文件 (路径相对于 config 目录)

    缺失的文件记一条 warning 并返回 None；格式错误直接抛出，数值参数不能静默丢失
    """
    path = base / relative
    if not path.is_file():
        logger.warning(f"⚠️ 配置文件不存在: {path}")
        return None
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".json":
        return json.loads(text)
    try:
        return yaml.safe_load(text) or {}
    except yaml.YAMLError as e:
        logger.error(f"❌ 加载配置文件失败 {path}: {e}")
        raise


def get_basic_config(path: Path = BASIC_CONFIG) -> Dict[str, Any]:
    """读取 basic-config.yaml，并把 routes 下的每个文件列表替换为文件内容"""
    config: Dict[str, Any] = yaml.safe_load(path.read_text(encoding="utf-8")) or {}

    routes = config.get("routes")
    if isinstance(routes, dict):
        for route_key, files in routes.items():
            loaded: List[Any] = []
            for relative in files if isinstance(files, list) else []:
                content = load_route_file(relative, path.parent)
                if content is not None:
                    loaded.append(content)
            routes[route_key] = loaded

    return config


if __name__ == "__main__":
    print(json.dumps(get_basic_config(), indent=2, ensure_ascii=False))
