"""
集成测试: enumerate → classify → critical 流水线

通过CLI入口跑完整流程, 检查缓存复用、输出可复现与违背区间性质。
"""
import json

import pytest

from src.cli.main import main
from src.models.lattice import BoundaryCondition
from src.services.critical_service import BoundEvaluator, CriticalService
from src.storage.covering_repository import CoveringRepository
from src.storage.json_store import LocalJSONStore, content_hash


@pytest.fixture
def cache_dir(tmp_path, restore_root_logger):
    return tmp_path / "cache"


def _run(cache_dir, *args: str) -> int:
    return main(["--cache-dir", str(cache_dir), "--log-level", "WARNING", *args])


@pytest.mark.integration
class TestTorus3Pipeline:
    """3×3 环面完整流程"""

    def test_full_pipeline(self, cache_dir, tmp_path, torus3):
        lattice = ["--n", "3", "--boundary", "torus"]
        assert _run(cache_dir, "enumerate", *lattice) == 0
        assert _run(cache_dir, "classify", *lattice) == 0

        out = tmp_path / "critical.json"
        assert _run(cache_dir, "--out", str(out), "critical", *lattice) == 0
        data = json.loads(out.read_text(encoding="utf-8"))

        repo = CoveringRepository(LocalJSONStore(cache_dir))
        assert data["inputs"]["coverings"] == repo.coverings_hash(3, BoundaryCondition.TORUS)
        assert data["inputs"]["classes"] == repo.classes_hash(3, BoundaryCondition.TORUS)
        assert data["version"]
        assert data["config"]["n"] == 3

        coverings = repo.load_coverings(3, BoundaryCondition.TORUS)
        classes = repo.load_classes(3, BoundaryCondition.TORUS, coverings)
        evaluator = BoundEvaluator(torus3)

        assert len(data["results"]) == 3
        for row in data["results"]:
            assert row["error"] is None
            assert row["converged"]
            assert row["crossing_low"] and row["crossing_high"]
            assert row["eps_low"] < 1.0 < row["eps_high"]
            cov = classes[row["class_id"]].representative
            assert abs(evaluator.ratio(cov, row["eps_low"])) <= 1e-3
            assert abs(evaluator.ratio(cov, row["eps_high"])) <= 1e-3

    def test_rerun_is_byte_identical(self, cache_dir, tmp_path):
        lattice = ["--n", "3", "--boundary", "torus"]
        out = tmp_path / "critical.json"
        assert _run(cache_dir, "--out", str(out), "critical", *lattice, "--jobs", "2") == 0
        first = out.read_bytes()
        assert _run(cache_dir, "--out", str(out), "critical", *lattice, "--jobs", "2") == 0
        assert out.read_bytes() == first

    def test_cached_coverings_reused(self, cache_dir):
        lattice = ["--n", "3", "--boundary", "klein"]
        assert _run(cache_dir, "classify", *lattice) == 0
        store = LocalJSONStore(cache_dir)
        before = content_hash(store.get_json("classes/3x3_klein.json"))
        assert _run(cache_dir, "quantum-value", *lattice, "--epsilon", "1") == 0
        assert content_hash(store.get_json("classes/3x3_klein.json")) == before

    def test_critical_csv_per_class(self, cache_dir, tmp_path):
        csv = tmp_path / "sweep.csv"
        code = _run(
            cache_dir, "critical", "--n", "3", "--boundary", "torus",
            "--grid", "0:2:0.5", "--csv", str(csv),
        )
        assert code == 0
        for class_id in range(3):
            lines = (tmp_path / f"sweep_class{class_id}.csv").read_text().splitlines()
            assert lines[0] == "epsilon,beta_c,beta_q"
            assert len(lines) == 6


@pytest.mark.integration
class TestViolationIntervals:
    """违背区间性质 (3×3 与 4×4, 两种边界)"""

    @pytest.mark.parametrize("fixture", ["torus3", "klein3"])
    def test_no_violation_at_zero(self, fixture, request):
        """ε=0 均匀耦合下没有违背"""
        lattice = request.getfixturevalue(fixture)
        classes = request.getfixturevalue(f"{fixture}_classes")
        evaluator = BoundEvaluator(lattice)
        for cls in classes:
            assert evaluator.ratio(cls.representative, 0.0) < 0

    @pytest.mark.parametrize("fixture", ["torus4", "klein4"])
    def test_no_violation_at_zero_four_by_four(self, fixture, request):
        """4×4 均匀耦合: β_Q(0) 高于 β_C(0) = −64"""
        lattice = request.getfixturevalue(fixture)
        coverings = request.getfixturevalue(f"{fixture}_coverings")
        evaluator = BoundEvaluator(lattice)
        cov = coverings[0]
        beta_c = evaluator.classical(cov, 0.0)
        beta_q = evaluator.quantum(cov, 0.0)
        assert beta_c == -64.0
        assert beta_q > beta_c
        assert evaluator.ratio(cov, 0.0) < 0
        # ε=0 时所有覆盖的权重相同
        assert evaluator.classical(coverings[-1], 0.0) == beta_c

    def test_klein3_batch(self, klein3, klein3_classes, klein3_coverings):
        service = CriticalService(klein3, jobs=4)
        results = service.run_sync(klein3_classes, klein3_coverings, representatives=3)
        assert len(results) == 11
        for result in results:
            assert result.error is None
            assert result.eps_low < 1.0 < result.eps_high
            assert result.spread <= 2e-3

        summary = service.summarize(results)
        assert summary.num_classes == 11
        assert summary.min_eps_low == min(r.eps_low for r in results)
        assert summary.max_eps_high == max(r.eps_high for r in results)
        assert summary.widest_class is not None
