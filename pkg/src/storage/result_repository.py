"""结果仓库: 临界耦合报告、扫描CSV与界值缓存"""
import logging
import threading
from pathlib import Path
from typing import Any

import numpy as np

from ..models.run import SweepPoint
from .json_store import LocalJSONStore, canonical_json

logger = logging.getLogger(__name__)

SWEEP_HEADER = "epsilon,beta_c,beta_q"


def write_json_file(path: str | Path, data: dict[str, Any]) -> None:
    """以规范JSON写到任意路径 (相同数据 -> 相同字节)"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(canonical_json(data), encoding="utf-8")


def write_sweep_csv(path: str | Path, points: list[SweepPoint]) -> None:
    """
    写扫描数据 (epsilon, beta_c, beta_q)

    %.17g 保证浮点数往返无损。
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows = np.array([p.as_row() for p in points], dtype=np.float64).reshape(-1, 3)
    np.savetxt(path, rows, fmt="%.17g", delimiter=",", header=SWEEP_HEADER, comments="")


def read_sweep_csv(path: str | Path) -> list[SweepPoint]:
    """
    读扫描数据

    Raises:
        ValueError: 表头不符
    """
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        header = fh.readline().strip()
    if header != SWEEP_HEADER:
        raise ValueError(f"unexpected sweep header: {header!r}")
    rows = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2, dtype=np.float64)
    return [
        SweepPoint(epsilon=float(e), beta_c=float(c), beta_q=float(q))
        for e, c, q in rows.reshape(-1, 3)
    ]


class ResultRepository:
    """
    结果仓库类

    负责结果JSON的持久化与检索
    """

    def __init__(self, store: LocalJSONStore):
        self.store = store

    def _key(self, name: str) -> str:
        return f"{LocalJSONStore.RESULTS_PREFIX}{name}.json"

    def save(self, name: str, payload: dict[str, Any]) -> str:
        """保存结果, 返回内容哈希"""
        return self.store.put_json(self._key(name), payload)

    def get(self, name: str) -> dict[str, Any] | None:
        return self.store.get_json(self._key(name))

    def list_all(self) -> list[str]:
        prefix = LocalJSONStore.RESULTS_PREFIX
        return [k[len(prefix) : -len(".json")] for k in self.store.list_keys(prefix)]


class BoundCache:
    """
    (覆盖ID, 求解器标记, ε) -> 界值 的线程安全缓存

    并发读; 每个键只接受第一次写入。可选地在存储中持久化,
    每个覆盖一个对象: bounds/<lattice>/<covering_id>.json。
    """

    CLASSICAL = "classical"

    def __init__(self, store: LocalJSONStore | None = None, lattice_name: str | None = None):
        self.store = store
        self.lattice_name = lattice_name
        self._values: dict[tuple[str, str, str], float] = {}
        self._lock = threading.Lock()
        self._loaded: set[str] = set()
        self._dirty: set[str] = set()

    @staticmethod
    def _eps_key(epsilon: float) -> str:
        return float(epsilon).hex()

    def _object_key(self, covering_id: str) -> str:
        return f"{LocalJSONStore.BOUNDS_PREFIX}{self.lattice_name}/{covering_id}.json"

    def _warm(self, covering_id: str) -> None:
        if self.store is None or self.lattice_name is None or covering_id in self._loaded:
            return
        data = self.store.get_json(self._object_key(covering_id)) or {}
        for tag, entries in data.items():
            for eps_hex, value in entries.items():
                self._values.setdefault((covering_id, tag, eps_hex), float(value))
        self._loaded.add(covering_id)

    def get(self, covering_id: str, tag: str, epsilon: float) -> float | None:
        with self._lock:
            self._warm(covering_id)
            return self._values.get((covering_id, tag, self._eps_key(epsilon)))

    def put(self, covering_id: str, tag: str, epsilon: float, value: float) -> float:
        """写入并返回生效值 (已有值时保留旧值)"""
        with self._lock:
            self._warm(covering_id)
            key = (covering_id, tag, self._eps_key(epsilon))
            if key not in self._values:
                self._values[key] = float(value)
                self._dirty.add(covering_id)
            return self._values[key]

    def __len__(self) -> int:
        return len(self._values)

    def flush(self) -> int:
        """把修改过的覆盖写回存储, 返回写入的对象数"""
        if self.store is None or self.lattice_name is None:
            return 0
        with self._lock:
            dirty = sorted(self._dirty)
            self._dirty.clear()
            snapshot = dict(self._values)
        for covering_id in dirty:
            grouped: dict[str, dict[str, float]] = {}
            for (cid, tag, eps_hex), value in snapshot.items():
                if cid == covering_id:
                    grouped.setdefault(tag, {})[eps_hex] = value
            self.store.put_json(self._object_key(covering_id), grouped)
        if dirty:
            logger.info(f"Persisted bound cache for {len(dirty)} coverings")
        return len(dirty)
