"""
运行配置与临界耦合结果模型

RunConfig 随每个输出一起序列化, 保证结果可复现。
"""

import math
from enum import Enum
from typing import Any, Literal

from pydantic import BaseModel, Field, field_validator, model_validator

from ..config import Settings
from .bounds import SolverMethod
from .lattice import BoundaryCondition


class Side(str, Enum):
    """违背区间的左端 (ε < 1) 或右端 (ε > 1)"""

    LOW = "low"
    HIGH = "high"


def expand_grid(spec: str) -> list[float]:
    """
    展开 "a:b:step" 网格 (两端包含)

    Args:
        spec: 形如 "0:2:0.25" 的字符串

    Returns:
        升序ε列表

    Raises:
        ValueError: 格式错误或步长非正
    """
    parts = spec.split(":")
    if len(parts) != 3:
        raise ValueError(f"grid must look like a:b:step, got '{spec}'")
    start, stop, step = (float(p) for p in parts)
    if step <= 0:
        raise ValueError("grid step must be positive")
    if stop < start:
        raise ValueError("grid end must not precede its start")

    count = math.floor((stop - start) / step + 1e-9) + 1
    return [start + k * step for k in range(count)]


class SolverConfig(BaseModel):
    """量子求解器配置"""

    solver: Literal["auto", "dense", "lanczos"] = "auto"
    lanczos_tol: float = Field(default=1e-8, gt=0.0)
    krylov_dim: int = Field(default=200, ge=2)
    max_restarts: int = Field(default=20, ge=0)
    seed: int = 0
    dense_max_sites: int = 12
    lanczos_max_sites: int = 26
    transfer_max_n: int = 6

    def resolve(self, num_sites: int) -> SolverMethod:
        """auto: 站点数 ≤ dense_max_sites 时用dense, 否则lanczos"""
        if self.solver == "auto":
            if num_sites <= self.dense_max_sites:
                return SolverMethod.DENSE
            return SolverMethod.LANCZOS
        return SolverMethod(self.solver)

    @property
    def tag(self) -> str:
        """写入缓存键, 区分不同求解器设定下的β_Q"""
        return f"{self.solver}:{self.lanczos_tol:g}:{self.seed}"

    @classmethod
    def from_settings(cls, settings: Settings, **overrides: Any) -> "SolverConfig":
        values = {
            "lanczos_tol": settings.lanczos_tol,
            "krylov_dim": settings.krylov_dim,
            "max_restarts": settings.max_restarts,
            "seed": settings.seed,
            "dense_max_sites": settings.dense_max_sites,
            "lanczos_max_sites": settings.lanczos_max_sites,
            "transfer_max_n": settings.transfer_max_n,
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


class SearchConfig(BaseModel):
    """Brent–Dekker 临界耦合搜索配置"""

    root_tol: float = Field(default=1e-3, gt=0.0)
    ratio_tol: float = Field(default=1e-3, gt=0.0)
    eps_min: float = 0.0
    eps_max: float = 2.0
    bracket_low: tuple[float, float] = (0.05, 1.0)
    bracket_high: tuple[float, float] = (1.0, 1.95)
    bracket_growth: float = Field(default=1.5, gt=1.0)
    max_iterations: int = Field(default=100, ge=1)

    @model_validator(mode="after")
    def validate_brackets(self) -> "SearchConfig":
        if self.eps_min >= self.eps_max:
            raise ValueError("eps_min must be below eps_max")
        for name in ("bracket_low", "bracket_high"):
            a, b = getattr(self, name)
            if not (self.eps_min <= a < b <= self.eps_max):
                raise ValueError(f"{name} {a, b} must be an ordered sub-interval of the domain")
        return self

    @classmethod
    def from_settings(cls, settings: Settings, **overrides: Any) -> "SearchConfig":
        values = {
            "root_tol": settings.root_tol,
            "ratio_tol": settings.ratio_tol,
            "eps_min": settings.eps_min,
            "eps_max": settings.eps_max,
            "bracket_low": settings.bracket_low,
            "bracket_high": settings.bracket_high,
            "bracket_growth": settings.bracket_growth,
            "max_iterations": settings.max_root_iterations,
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


class RunConfig(BaseModel):
    """
    一次CLI运行的完整配置

    Attributes:
        command: 子命令名
        n / boundary: 晶格 (bellmap不需要)
        epsilons: 显式ε值与网格展开的并集, 升序去重
        allow_wide_epsilon: 允许ε超出 [eps_min, eps_max]
        solver / search: 求解器与根搜索配置
        cache_dir / out: 缓存目录与输出路径
        jobs: 并行类数
        representatives: 每个类计算的代表元个数
    """

    command: str
    n: int | None = Field(default=None, ge=1)
    boundary: BoundaryCondition | None = None
    epsilons: list[float] = Field(default_factory=list)
    allow_wide_epsilon: bool = False
    solver: SolverConfig = Field(default_factory=SolverConfig)
    search: SearchConfig = Field(default_factory=SearchConfig)
    cache_dir: str = ".dimer_bell_cache"
    out: str | None = None
    jobs: int = Field(default=1, ge=1)
    representatives: int = Field(default=1, ge=1)
    class_id: int | None = None
    max_coverings: int = Field(default=200_000, gt=0)
    options: dict[str, Any] = Field(default_factory=dict)

    @field_validator("epsilons")
    @classmethod
    def normalize_epsilons(cls, v: list[float]) -> list[float]:
        if any(not math.isfinite(e) for e in v):
            raise ValueError("epsilon values must be finite")
        return sorted(set(v))

    @model_validator(mode="after")
    def validate_domain(self) -> "RunConfig":
        if self.allow_wide_epsilon:
            return self
        low, high = self.search.eps_min, self.search.eps_max
        outside = [e for e in self.epsilons if e < low or e > high]
        if outside:
            raise ValueError(
                f"epsilon values {outside} outside [{low}, {high}]; pass --wide-epsilon to allow"
            )
        return self


class SweepPoint(BaseModel):
    """一次 (ε, β_C, β_Q) 评估"""

    epsilon: float
    beta_c: float
    beta_q: float

    def as_row(self) -> list[float]:
        return [self.epsilon, self.beta_c, self.beta_q]


class CriticalPoint(BaseModel):
    """
    单侧临界耦合搜索结果

    crossing=False 表示可行域内 ratio 不变号 (该侧从未违背)。
    """

    side: Side
    epsilon_star: float | None = None
    converged: bool = False
    crossing: bool = True
    bracket: tuple[float, float]
    iterations: int = 0
    ratio: float | None = None


class ViolationResult(BaseModel):
    """
    单个覆盖类的违背区间

    Attributes:
        eps_low / eps_high: 区间端点, 未找到时为None
        bracket_low / bracket_high: 最终的有号区间
        evaluations: 搜索中所有 (ε, β_C, β_Q) 评估, 按ε排序
        converged: 两侧都收敛
        crossing_low / crossing_high: 该侧可行域内 ratio 是否变号 (False 时该侧未找到违背端点)
        width: eps_high − eps_low
        representatives: 参与计算的成员下标
        spread: 代表元之间ε*的最大差
        error: 数值失败信息 (批处理中不中断)
    """

    class_id: int
    eps_low: float | None = None
    eps_high: float | None = None
    bracket_low: tuple[float, float] | None = None
    bracket_high: tuple[float, float] | None = None
    evaluations: list[SweepPoint] = Field(default_factory=list)
    converged: bool = False
    crossing_low: bool | None = None
    crossing_high: bool | None = None
    representatives: list[int] = Field(default_factory=list)
    spread: float = 0.0
    error: str | None = None

    @property
    def width(self) -> float | None:
        if self.eps_low is None or self.eps_high is None:
            return None
        return self.eps_high - self.eps_low

    def to_json_dict(self) -> dict[str, Any]:
        """{"class_id", "eps_low", "eps_high", "converged", "trace", ...}"""
        return {
            "class_id": self.class_id,
            "eps_low": self.eps_low,
            "eps_high": self.eps_high,
            "converged": self.converged,
            "crossing_low": self.crossing_low,
            "crossing_high": self.crossing_high,
            "trace": [p.as_row() for p in self.evaluations],
            "bracket_low": list(self.bracket_low) if self.bracket_low else None,
            "bracket_high": list(self.bracket_high) if self.bracket_high else None,
            "width": self.width,
            "representatives": self.representatives,
            "spread": self.spread,
            "error": self.error,
        }


class CriticalSummary(BaseModel):
    """(n, boundary) 的汇总行: 最小ε*_l、最大ε*_h及达到它们的类"""

    n: int
    boundary: BoundaryCondition
    num_classes: int
    num_converged: int
    min_eps_low: float | None = None
    classes_min_eps_low: list[int] = Field(default_factory=list)
    max_eps_high: float | None = None
    classes_max_eps_high: list[int] = Field(default_factory=list)
    widest_class: int | None = None
    max_width: float | None = None
