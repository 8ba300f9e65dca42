"""
运行配置与结果模型单元测试
"""
import pytest
from pydantic import ValidationError

from src.config import Settings
from src.models.bounds import ClassicalBoundResult, SolverMethod
from src.models.run import (
    RunConfig,
    SearchConfig,
    SolverConfig,
    SweepPoint,
    ViolationResult,
    expand_grid,
)


@pytest.mark.unit
class TestExpandGrid:
    """a:b:step 网格"""

    def test_inclusive(self):
        assert expand_grid("0:2:0.25") == [k * 0.25 for k in range(9)]

    def test_partial_last_step(self):
        assert expand_grid("0:1:0.3") == pytest.approx([0.0, 0.3, 0.6, 0.9])

    def test_single_point(self):
        assert expand_grid("1:1:0.5") == [1.0]

    @pytest.mark.parametrize(
        "spec,message",
        [
            ("0:1", "a:b:step"),
            ("0:1:0", "positive"),
            ("1:0:0.1", "precede"),
        ],
    )
    def test_invalid(self, spec, message):
        with pytest.raises(ValueError, match=message):
            expand_grid(spec)


@pytest.mark.unit
class TestSolverConfig:
    """求解器配置"""

    def test_auto_resolution(self):
        config = SolverConfig()
        assert config.resolve(9) is SolverMethod.DENSE
        assert config.resolve(12) is SolverMethod.DENSE
        assert config.resolve(16) is SolverMethod.LANCZOS

    def test_forced_method(self):
        assert SolverConfig(solver="lanczos").resolve(4) is SolverMethod.LANCZOS

    def test_tag_distinguishes_settings(self):
        assert SolverConfig().tag != SolverConfig(lanczos_tol=1e-10).tag
        assert SolverConfig().tag != SolverConfig(seed=1).tag

    def test_from_settings_overrides(self):
        settings = Settings(lanczos_tol=1e-6, seed=4)
        config = SolverConfig.from_settings(settings, solver="dense", seed=None)
        assert config.solver == "dense"
        assert config.lanczos_tol == 1e-6
        assert config.seed == 4

    def test_rejects_bad_values(self):
        with pytest.raises(ValidationError):
            SolverConfig(lanczos_tol=0.0)
        with pytest.raises(ValidationError):
            SolverConfig(solver="arpack")


@pytest.mark.unit
class TestSearchConfig:
    """根搜索配置"""

    def test_defaults(self):
        config = SearchConfig()
        assert config.bracket_low == (0.05, 1.0)
        assert config.bracket_high == (1.0, 1.95)
        assert config.root_tol == 1e-3

    def test_from_settings(self):
        config = SearchConfig.from_settings(Settings(root_tol=1e-4), ratio_tol=1e-5)
        assert config.root_tol == 1e-4
        assert config.ratio_tol == 1e-5

    def test_domain_order(self):
        with pytest.raises(ValidationError, match="below eps_max"):
            SearchConfig(eps_min=2.0, eps_max=1.0)

    def test_bracket_outside_domain(self):
        with pytest.raises(ValidationError, match="sub-interval"):
            SearchConfig(bracket_high=(1.0, 2.5))


@pytest.mark.unit
class TestRunConfig:
    """RunConfig 校验"""

    def test_epsilons_sorted_unique(self):
        config = RunConfig(command="sweep", epsilons=[0.5, 0.1, 0.5])
        assert config.epsilons == [0.1, 0.5]

    def test_outside_domain_needs_flag(self):
        with pytest.raises(ValidationError, match="--wide-epsilon"):
            RunConfig(command="sweep", epsilons=[2.5])
        assert RunConfig(command="sweep", epsilons=[2.5], allow_wide_epsilon=True).epsilons == [
            2.5
        ]

    def test_non_finite(self):
        with pytest.raises(ValidationError, match="finite"):
            RunConfig(command="sweep", epsilons=[float("inf")], allow_wide_epsilon=True)

    def test_boundary_coerced(self):
        config = RunConfig(command="enumerate", n=3, boundary="klein")
        assert config.boundary.value == "klein"

    def test_serializable(self):
        data = RunConfig(command="critical", n=4, boundary="torus").model_dump(mode="json")
        assert data["solver"]["solver"] == "auto"
        assert data["search"]["bracket_low"] == [0.05, 1.0]


@pytest.mark.unit
class TestResultModels:
    """结果模型"""

    def test_violation_json(self):
        result = ViolationResult(
            class_id=2,
            eps_low=0.25,
            eps_high=1.5,
            bracket_low=(0.05, 1.0),
            evaluations=[SweepPoint(epsilon=0.5, beta_c=-10.0, beta_q=-11.0)],
            converged=True,
        )
        data = result.to_json_dict()
        assert {"class_id", "eps_low", "eps_high", "converged", "trace"} <= set(data)
        assert data["trace"] == [[0.5, -10.0, -11.0]]
        assert data["width"] == 1.25
        assert data["bracket_high"] is None

    def test_width_missing_endpoint(self):
        assert ViolationResult(class_id=0, eps_low=0.3).width is None

    def test_classical_result_strategies(self):
        with pytest.raises(ValidationError, match="strategies"):
            ClassicalBoundResult(beta_c=-4.0, epsilon=0.0, optimal_assignment=[0, 5])
