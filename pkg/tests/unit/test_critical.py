"""
临界耦合搜索单元测试

搜索逻辑用解析的ratio函数检验; 真实晶格上只检验区间与收敛的不变量。
"""
import math

import pytest

from src.models.run import SearchConfig, Side, ViolationResult
from src.services.critical_service import (
    BoundEvaluator,
    CriticalService,
    DegenerateBoundError,
    bracketed_root,
    find_critical,
    pick_representatives,
    ratio,
    sweep,
)
from src.storage.result_repository import BoundCache


class _AnalyticEvaluator:
    """ratio(ε) 由给定函数决定"""

    def __init__(self, func):
        self.func = func
        self.calls: list[float] = []

    def ratio(self, covering, epsilon):
        self.calls.append(epsilon)
        return self.func(epsilon)


class _ZeroClassical(BoundEvaluator):
    def classical(self, covering, epsilon):
        return 0.0

    def quantum(self, covering, epsilon):
        return -1.0


class _LowSideOnly(BoundEvaluator):
    """ratio(ε) = min(ε − 0.4, 0.6): 低侧变号, 高侧始终为正"""

    def classical(self, covering, epsilon):
        return -1.0

    def quantum(self, covering, epsilon):
        return -(1.0 + min(epsilon - 0.4, 0.6))


def _search(func, side, **overrides):
    return find_critical(
        None, None, side, SearchConfig(**overrides), evaluator=_AnalyticEvaluator(func)
    )


@pytest.mark.unit
class TestBracketedRoot:
    """Brent–Dekker 求根"""

    def test_sqrt_two(self):
        root, converged, iterations = bracketed_root(lambda x: x * x - 2, 1.0, 2.0, xtol=1e-12)
        assert root == pytest.approx(math.sqrt(2.0), abs=1e-11)
        assert converged
        assert iterations > 0

    def test_unsigned_bracket(self):
        with pytest.raises(ValueError):
            bracketed_root(lambda x: x * x + 1, 1.0, 2.0, xtol=1e-6)


@pytest.mark.unit
class TestFindCritical:
    """单侧搜索"""

    def test_low_side(self):
        point = _search(lambda e: e - 0.4, Side.LOW)
        assert point.crossing and point.converged
        assert point.epsilon_star == pytest.approx(0.4, abs=1e-3)
        assert point.bracket == (0.05, 1.0)

    def test_high_side(self):
        point = _search(lambda e: 1.6 - e, "high")
        assert point.side is Side.HIGH
        assert point.epsilon_star == pytest.approx(1.6, abs=1e-3)

    def test_bracket_expands_towards_edge(self):
        """初始区间无号时向可行域边缘扩大"""
        point = _search(lambda e: e - 0.02, Side.LOW)
        assert point.bracket[0] == 0.0
        assert point.epsilon_star == pytest.approx(0.02, abs=1e-3)

    def test_high_bracket_expands(self):
        point = _search(lambda e: 1.98 - e, Side.HIGH)
        assert point.bracket[1] == 2.0
        assert point.epsilon_star == pytest.approx(1.98, abs=1e-3)

    def test_no_crossing(self):
        point = _search(lambda e: 1.0, Side.LOW)
        assert not point.crossing
        assert not point.converged
        assert point.epsilon_star is None
        assert point.bracket == (0.0, 1.0)

    def test_root_on_endpoint(self):
        point = _search(lambda e: 1.0 - e, Side.HIGH)
        assert point.epsilon_star == 1.0
        assert point.ratio == 0.0

    def test_ratio_tolerance_enforced(self):
        point = _search(lambda e: 50.0 * (e - 0.4), Side.LOW, ratio_tol=1e-6)
        assert abs(point.ratio) <= 1e-6
        assert point.converged

    def test_custom_bracket(self):
        point = _search(lambda e: e - 0.7, Side.LOW, bracket_low=(0.6, 0.9))
        assert point.bracket == (0.6, 0.9)
        assert point.epsilon_star == pytest.approx(0.7, abs=1e-3)

    def test_invalid_bracket_config(self):
        with pytest.raises(ValueError, match="sub-interval"):
            SearchConfig(bracket_low=(0.5, 0.2))


@pytest.mark.unit
class TestBoundEvaluator:
    """β_C/β_Q 记忆化"""

    def test_ratio_at_epsilon_one(self, torus3, torus3_coverings):
        """ε=1: β_Q/β_C = √2"""
        assert ratio(torus3, torus3_coverings[0], 1.0) == pytest.approx(
            math.sqrt(2.0) - 1.0, abs=1e-10
        )

    def test_cached_values_reused(self, torus3, torus3_coverings):
        cache = BoundCache()
        evaluator = BoundEvaluator(torus3, cache=cache)
        first = evaluator.evaluate(torus3_coverings[0], 0.5)
        assert len(cache) == 2
        second = evaluator.evaluate(torus3_coverings[0], 0.5)
        assert first == second
        assert len(cache) == 2
        assert evaluator.trace(torus3_coverings[0]) == [first]

    def test_bruteforce_method_agrees(self, klein3, klein3_coverings):
        cov = klein3_coverings[5]
        transfer = BoundEvaluator(klein3).classical(cov, 0.5)
        brute = BoundEvaluator(klein3, classical_method="bruteforce").classical(cov, 0.5)
        assert transfer == brute

    def test_degenerate_bound(self, torus3, torus3_coverings):
        with pytest.raises(DegenerateBoundError, match="vanishes"):
            _ZeroClassical(torus3).ratio(torus3_coverings[0], 0.5)


@pytest.mark.unit
class TestSweep:
    """ε扫描"""

    def test_sorted_and_deduplicated(self, torus3, torus3_coverings):
        points = sweep(torus3, torus3_coverings[0], [1.0, 0.0, 1.0, 0.5])
        assert [p.epsilon for p in points] == [0.0, 0.5, 1.0]
        assert points[-1].beta_c == -16.0
        assert points[-1].beta_q == pytest.approx(-16 * math.sqrt(2.0), abs=1e-9)

    def test_bounds_negative(self, klein3, klein3_coverings):
        """两个界在可行域内均为负"""
        for point in sweep(klein3, klein3_coverings[0], [0.5, 1.0, 1.5]):
            assert point.beta_q < 0 and point.beta_c < 0

    def test_empty(self, torus3, torus3_coverings):
        with pytest.raises(ValueError, match="at least one"):
            sweep(torus3, torus3_coverings[0], [])


@pytest.mark.unit
class TestCriticalService:
    """批量分析"""

    def test_pick_representatives(self, torus3_classes):
        cls = max(torus3_classes, key=lambda c: c.size)
        picked = pick_representatives(cls, 3)
        assert picked[0] == cls.representative_index
        assert len(set(picked)) == 3
        assert set(picked) <= set(cls.members)
        assert pick_representatives(cls, 1) == [cls.representative_index]

    def test_torus3_intervals(self, torus3, torus3_classes, torus3_coverings):
        service = CriticalService(torus3, jobs=2)
        results = service.run_sync(torus3_classes, torus3_coverings)
        assert [r.class_id for r in results] == [0, 1, 2]
        for result in results:
            assert result.error is None
            if result.eps_low is not None:
                lo, hi = result.bracket_low
                assert lo <= result.eps_low <= hi
                assert result.eps_low <= 1.0
            if result.eps_high is not None:
                lo, hi = result.bracket_high
                assert lo <= result.eps_high <= hi
                assert result.eps_high >= 1.0
            assert [p.epsilon for p in result.evaluations] == sorted(
                p.epsilon for p in result.evaluations
            )

    async def test_run_inside_event_loop(self, torus3, torus3_classes, torus3_coverings):
        service = CriticalService(torus3, jobs=2)
        results = await service.run(torus3_classes[:2], torus3_coverings)
        assert [r.class_id for r in results] == [0, 1]

    def test_parallel_matches_serial(self, klein3, klein3_classes, klein3_coverings):
        classes = klein3_classes[:3]
        serial = CriticalService(klein3, jobs=1).run_sync(classes, klein3_coverings)
        parallel = CriticalService(klein3, jobs=3).run_sync(classes, klein3_coverings)
        assert [r.to_json_dict() for r in serial] == [r.to_json_dict() for r in parallel]

    def test_representatives_agree(self, torus3, torus3_classes, torus3_coverings):
        service = CriticalService(torus3)
        result = service.analyze_class(torus3_classes[0], torus3_coverings, representatives=3)
        assert len(result.representatives) == 3
        assert result.spread <= service.search.root_tol

    def test_failure_recorded_not_raised(self, torus3, torus3_classes, torus3_coverings):
        service = CriticalService(torus3)
        service.evaluator = _ZeroClassical(torus3)
        result = service.analyze_class(torus3_classes[0], torus3_coverings)
        assert "vanishes" in result.error
        assert result.eps_low is None and not result.converged

    def test_missing_crossing_reported(self, torus3, torus3_classes, torus3_coverings):
        """高侧无变号: crossing_high=False 且写入JSON"""
        service = CriticalService(torus3)
        service.evaluator = _LowSideOnly(torus3)
        result = service.analyze_class(torus3_classes[0], torus3_coverings)
        assert result.error is None
        assert result.crossing_low is True
        assert result.eps_low == pytest.approx(0.4, abs=1e-3)
        assert result.crossing_high is False
        assert result.eps_high is None
        assert not result.converged
        data = result.to_json_dict()
        assert (data["crossing_low"], data["crossing_high"]) == (True, False)

    def test_failed_class_has_no_crossing_flags(self, torus3, torus3_classes, torus3_coverings):
        service = CriticalService(torus3)
        service.evaluator = _ZeroClassical(torus3)
        data = service.analyze_class(torus3_classes[0], torus3_coverings).to_json_dict()
        assert data["crossing_low"] is None and data["crossing_high"] is None

    def test_summarize_ties(self, torus3):
        service = CriticalService(torus3)
        results = [
            ViolationResult(class_id=0, eps_low=0.3, eps_high=1.7, converged=True),
            ViolationResult(class_id=1, eps_low=0.3005, eps_high=1.6, converged=True),
            ViolationResult(class_id=2, error="failed"),
        ]
        summary = service.summarize(results)
        assert summary.num_classes == 3
        assert summary.num_converged == 2
        assert summary.min_eps_low == 0.3
        assert summary.classes_min_eps_low == [0, 1]
        assert summary.max_eps_high == 1.7
        assert summary.classes_max_eps_high == [0]
        assert summary.widest_class == 0
        assert summary.max_width == pytest.approx(1.4)
