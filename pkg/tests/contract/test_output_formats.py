"""
契约测试: JSON/CSV 输出格式

这些格式被外部脚本 (绘图、汇总) 读取, 字段名与结构不能随意改变。
"""
import json

import pytest

from src.cli.main import main
from src.services.lattice_service import build_lattice

PROVENANCE_KEYS = {"config", "version", "inputs"}


@pytest.fixture
def run(tmp_path, restore_root_logger):
    cache = tmp_path / "cache"

    def _run(*args: str) -> int:
        return main(["--cache-dir", str(cache), "--log-level", "ERROR", *args])

    _run.cache = cache
    return _run


def _load(path):
    return json.loads(path.read_text(encoding="utf-8"))


@pytest.mark.contract
class TestStructuredFiles:
    """覆盖文件、类文件、晶格JSON"""

    def test_covering_file(self, run):
        assert run("enumerate", "--n", "3", "--boundary", "klein") == 0
        data = _load(run.cache / "coverings" / "3x3_klein.json")
        assert set(data) == {"n", "boundary", "coverings"}
        assert data["n"] == 3
        assert data["boundary"] == "klein"
        assert all(len(c) == 4 and c == sorted(c) for c in data["coverings"])

    def test_class_file(self, run):
        assert run("classify", "--n", "3", "--boundary", "torus") == 0
        data = _load(run.cache / "classes" / "3x3_torus.json")
        assert set(data) == {"classes"}
        for entry in data["classes"]:
            assert set(entry) == {"id", "representative", "members"}
            assert entry["representative"] in entry["members"]

    def test_lattice_json(self):
        data = build_lattice(3, "torus").to_json_dict()
        assert set(data) == {"n", "boundary", "edges"}
        assert len(data["edges"]) == 18
        assert all(a < b for a, b in data["edges"])


@pytest.mark.contract
class TestResultFiles:
    """CLI结果JSON"""

    def test_critical_result(self, run, tmp_path):
        out = tmp_path / "critical.json"
        assert run("--out", str(out), "critical", "--n", "3", "--boundary", "torus") == 0
        data = _load(out)
        assert PROVENANCE_KEYS | {"results", "summary"} <= set(data)
        assert set(data["inputs"]) == {"coverings", "classes"}
        for row in data["results"]:
            assert {
                "class_id", "eps_low", "eps_high", "converged", "crossing_low", "crossing_high",
                "trace",
            } <= set(row)
            for point in row["trace"]:
                assert len(point) == 3
        assert {
            "min_eps_low",
            "classes_min_eps_low",
            "max_eps_high",
            "classes_max_eps_high",
        } <= set(data["summary"])

    def test_classical_bound_rows(self, run, tmp_path):
        out = tmp_path / "bounds.json"
        args = ["classical-bound", "--n", "3", "--boundary", "klein", "--grid", "0:1:0.5"]
        assert run("--out", str(out), *args) == 0
        data = _load(out)
        assert PROVENANCE_KEYS <= set(data)
        assert len(data["bounds"]) == 11 * 3
        assert {"class_id", "beta_c", "epsilon", "method"} <= set(data["bounds"][0])
        assert data["config"]["epsilons"] == [0.0, 0.5, 1.0]

    def test_quantum_value_rows(self, run, tmp_path):
        out = tmp_path / "values.json"
        args = ["quantum-value", "--n", "3", "--boundary", "torus", "--epsilon", "0.5"]
        assert run("--out", str(out), *args) == 0
        row = _load(out)["values"][0]
        assert {"class_id", "epsilon", "beta_q", "method", "residual", "converged"} <= set(row)

    def test_bellmap(self, run, capsys):
        assert run("bellmap", "--m", "3") == 0
        data = json.loads(capsys.readouterr().out)
        assert {"m", "alpha", "rank", "unique"} <= set(data)
        assert len(data["alpha"]) == 9
        assert data["unique"] is False

    def test_error_payload(self, run, capsys):
        assert run("enumerate", "--n", "3", "--boundary", "torus", "--max-coverings", "1") == 1
        err = capsys.readouterr().err
        payload = json.loads(err[err.index("{") :])
        assert set(payload) == {"error", "message", "details"}
        assert payload["error"] == "usage_error"


@pytest.mark.contract
class TestSweepCsv:
    """扫描CSV"""

    def test_columns_and_precision(self, run, tmp_path):
        path = tmp_path / "sweep.csv"
        args = ["sweep", "--n", "3", "--boundary", "torus", "--epsilon", "1", "--csv", str(path)]
        assert run(*args) == 0
        header, row = path.read_text(encoding="utf-8").splitlines()
        assert header == "epsilon,beta_c,beta_q"
        epsilon, beta_c, beta_q = (float(v) for v in row.split(","))
        assert (epsilon, beta_c) == (1.0, -16.0)
        assert beta_q == pytest.approx(-16 * 2**0.5, abs=1e-10)
