"""
存储层单元测试
"""
import json

import pytest

from src.models.lattice import BoundaryCondition
from src.models.run import SweepPoint
from src.storage.covering_repository import CoveringRepository, lattice_key
from src.storage.json_store import (
    LocalJSONStore,
    canonical_json,
    content_hash,
)
from src.storage.result_repository import (
    BoundCache,
    ResultRepository,
    read_sweep_csv,
    write_json_file,
    write_sweep_csv,
)


@pytest.mark.unit
class TestLocalJSONStore:
    """本地JSON存储"""

    def test_put_get(self, store):
        digest = store.put_json("results/a.json", {"b": 1, "a": [1.5, None]})
        assert store.get_json("results/a.json") == {"b": 1, "a": [1.5, None]}
        assert digest == content_hash({"a": [1.5, None], "b": 1})

    def test_missing_key(self, store):
        assert store.get_json("results/none.json") is None
        assert not store.exists("results/none.json")

    def test_canonical_bytes(self, store, tmp_path):
        store.put_json("x.json", {"z": 1, "a": 2})
        text = (tmp_path / "cache" / "x.json").read_text(encoding="utf-8")
        assert text == canonical_json({"a": 2, "z": 1})
        assert text.index('"a"') < text.index('"z"')

    def test_overwrite_replaces_content(self, store, tmp_path):
        """同一键再次写入直接覆盖, 不留临时文件"""
        store.put_json("k.json", {"v": 1})
        second = store.put_json("k.json", {"v": 2})
        assert store.get_json("k.json") == {"v": 2}
        assert second == content_hash({"v": 2})
        assert [p.name for p in (tmp_path / "cache").iterdir()] == ["k.json"]

    def test_list_and_delete(self, store):
        store.put_json("results/b.json", {})
        store.put_json("results/a.json", {})
        store.put_json("bounds/3x3_torus/c.json", {})
        assert store.list_keys("results/") == ["results/a.json", "results/b.json"]
        assert store.list_keys("bounds/") == ["bounds/3x3_torus/c.json"]
        store.delete("results/a.json")
        store.delete("results/a.json")
        assert store.list_keys("results/") == ["results/b.json"]

    def test_key_escape_rejected(self, store):
        with pytest.raises(ValueError, match="escapes"):
            store.get_json("../outside.json")

    def test_corrupt_object(self, store, tmp_path):
        (tmp_path / "cache" / "bad.json").write_text("{not json", encoding="utf-8")
        with pytest.raises(ValueError, match="corrupt JSON"):
            store.get_json("bad.json")


@pytest.mark.unit
class TestCoveringRepository:
    """覆盖与类文件"""

    def test_lattice_key(self):
        assert lattice_key(3, BoundaryCondition.TORUS) == "3x3_torus"
        assert lattice_key(5, "klein") == "5x5_klein"

    def test_coverings_roundtrip(self, store, torus3_coverings):
        repo = CoveringRepository(store)
        assert repo.load_coverings(3, BoundaryCondition.TORUS) is None
        digest = repo.save_coverings(3, BoundaryCondition.TORUS, torus3_coverings)
        assert repo.load_coverings(3, BoundaryCondition.TORUS) == torus3_coverings
        assert repo.coverings_hash(3, BoundaryCondition.TORUS) == digest

    def test_classes_roundtrip(self, store, torus3_coverings, torus3_classes):
        repo = CoveringRepository(store)
        repo.save_classes(3, BoundaryCondition.TORUS, torus3_classes)
        loaded = repo.load_classes(3, BoundaryCondition.TORUS, torus3_coverings)
        assert [c.members for c in loaded] == [c.members for c in torus3_classes]
        assert repo.classes_hash(3, BoundaryCondition.KLEIN) is None

    def test_lattice_mismatch(self, store, torus3_coverings):
        repo = CoveringRepository(store)
        repo.save_coverings(3, BoundaryCondition.TORUS, torus3_coverings)
        data = store.get_json("coverings/3x3_torus.json")
        store.put_json("coverings/3x3_klein.json", data)
        with pytest.raises(ValueError, match="different lattice"):
            repo.load_coverings(3, BoundaryCondition.KLEIN)

    def test_invalid_file(self, store):
        store.put_json("coverings/3x3_torus.json", {"n": 3, "boundary": "torus"})
        with pytest.raises(ValueError, match="failed to parse"):
            CoveringRepository(store).load_coverings(3, BoundaryCondition.TORUS)


@pytest.mark.unit
class TestResultRepository:
    """结果JSON与扫描CSV"""

    def test_save_and_list(self, store):
        repo = ResultRepository(store)
        repo.save("critical_3x3_torus", {"results": []})
        assert repo.get("critical_3x3_torus") == {"results": []}
        assert repo.list_all() == ["critical_3x3_torus"]

    def test_write_json_file(self, tmp_path):
        path = tmp_path / "nested" / "out.json"
        write_json_file(path, {"b": 2.5, "a": 1})
        assert json.loads(path.read_text(encoding="utf-8")) == {"a": 1, "b": 2.5}

    def test_sweep_csv(self, tmp_path):
        points = [
            SweepPoint(epsilon=0.1, beta_c=-14.4, beta_q=-20.123456789012345),
            SweepPoint(epsilon=1.0, beta_c=-16.0, beta_q=-22.627416997969522),
        ]
        path = tmp_path / "sweep.csv"
        write_sweep_csv(path, points)
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "epsilon,beta_c,beta_q"
        assert len(lines) == 3
        assert read_sweep_csv(path) == points

    def test_sweep_csv_header_checked(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("eps,c,q\n0,1,2\n", encoding="utf-8")
        with pytest.raises(ValueError, match="unexpected sweep header"):
            read_sweep_csv(path)


@pytest.mark.unit
class TestBoundCache:
    """界值缓存"""

    def test_first_write_wins(self):
        cache = BoundCache()
        assert cache.put("cov", "classical", 0.5, -10.0) == -10.0
        assert cache.put("cov", "classical", 0.5, -11.0) == -10.0
        assert cache.get("cov", "classical", 0.5) == -10.0
        assert cache.get("cov", "classical", 0.25) is None

    def test_exact_epsilon_keys(self):
        cache = BoundCache()
        cache.put("cov", "classical", 0.1 + 0.2, -1.0)
        assert cache.get("cov", "classical", 0.3) is None

    def test_persisted_across_instances(self, store):
        cache = BoundCache(store, "3x3_torus")
        cache.put("abc", "classical:transfer", 0.5, -12.5)
        cache.put("abc", "auto:1e-08:0", 0.5, -15.25)
        assert cache.flush() == 1
        assert cache.flush() == 0

        reloaded = BoundCache(store, "3x3_torus")
        assert reloaded.get("abc", "classical:transfer", 0.5) == -12.5
        assert reloaded.get("abc", "auto:1e-08:0", 0.5) == -15.25
        assert store.list_keys("bounds/") == ["bounds/3x3_torus/abc.json"]

    def test_memory_only_flush(self):
        cache = BoundCache()
        cache.put("abc", "classical", 1.0, -4.0)
        assert cache.flush() == 0
        assert len(cache) == 1
