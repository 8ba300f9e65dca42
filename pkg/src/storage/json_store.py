"""本地JSON对象存储"""
import hashlib
import json
import logging
import os
import tempfile
import threading
from pathlib import Path
from typing import Any

logger = logging.getLogger(__name__)


def canonical_json(data: Any) -> str:
    """键排序、缩进固定的JSON文本 (相同数据 -> 相同字节)"""
    return json.dumps(data, ensure_ascii=False, indent=2, sort_keys=True) + "\n"


def content_hash(data: Any) -> str:
    """规范JSON文本的SHA-256"""
    return hashlib.sha256(canonical_json(data).encode("utf-8")).hexdigest()


class LocalJSONStore:
    """
    缓存目录下按键存放的JSON对象

    键形如 "coverings/3x3_torus.json"; 写入经临时文件原子替换,
    每个键只有单一写入者。
    """

    # 常量定义，避免魔法字符串
    COVERINGS_PREFIX = "coverings/"
    CLASSES_PREFIX = "classes/"
    RESULTS_PREFIX = "results/"
    BOUNDS_PREFIX = "bounds/"

    def __init__(self, root: str | Path):
        """
        初始化存储

        Args:
            root: 缓存目录, 不存在时创建
        """
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def _path(self, key: str) -> Path:
        path = (self.root / key).resolve()
        if self.root.resolve() not in path.parents:
            raise ValueError(f"key escapes the store root: {key}")
        return path

    def get_json(self, key: str) -> dict[str, Any] | None:
        """
        读取JSON对象

        Returns:
            JSON对象或None(如果不存在)

        Raises:
            ValueError: 文件内容不是合法JSON
        """
        path = self._path(key)
        if not path.exists():
            return None
        try:
            return json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise ValueError(f"corrupt JSON object at {key}: {e}") from e

    def put_json(self, key: str, data: dict[str, Any]) -> str:
        """
        保存JSON对象

        Args:
            key: 对象键
            data: 要保存的数据

        Returns:
            新内容的哈希
        """
        path = self._path(key)
        body = canonical_json(data)
        with self._lock:
            path.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=".json")
            try:
                with os.fdopen(fd, "w", encoding="utf-8") as fh:
                    fh.write(body)
                os.replace(tmp, path)
            except BaseException:
                if os.path.exists(tmp):
                    os.unlink(tmp)
                raise
        logger.debug(f"Stored {key} ({len(body)} bytes)")
        return hashlib.sha256(body.encode("utf-8")).hexdigest()

    def list_keys(self, prefix: str) -> list[str]:
        """列出指定前缀的所有键 (排序)"""
        base = self.root / prefix
        directory = base if prefix.endswith("/") else base.parent
        if not directory.exists():
            return []
        keys = []
        for path in directory.rglob("*.json"):
            if path.name.startswith(".tmp-"):
                continue
            key = path.relative_to(self.root).as_posix()
            if key.startswith(prefix):
                keys.append(key)
        return sorted(keys)

    def exists(self, key: str) -> bool:
        return self._path(key).exists()

    def delete(self, key: str) -> None:
        """删除对象, 不存在时静默成功"""
        self._path(key).unlink(missing_ok=True)
