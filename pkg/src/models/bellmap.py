"""
双体哈密顿量 -> Bell表达式系数 映射的数据模型
"""

from enum import Enum
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator


class Components(str, Enum):
    """CORRELATORS 只保留 k₁=k₂=1 的关联项列; FULL 保留全部 4m² 列"""

    CORRELATORS = "correlators"
    FULL = "full"


class MeasurementAngles(BaseModel):
    """
    测量角 θ_x^{(k)}, 两方相同 (θ = φ)

    theta 长度为 2m, 下标 k·m + x; A_x^{(k)} = cos θ σx + sin θ σz。

    Examples:
        >>> import math
        >>> MeasurementAngles(m=2, theta=[0.0, 0.0, 0.0, math.pi / 2]).angle(1, 1)
        1.5707963267948966
    """

    m: int = Field(ge=2)
    theta: list[float]

    @model_validator(mode="after")
    def validate_length(self) -> "MeasurementAngles":
        if len(self.theta) != 2 * self.m:
            raise ValueError(f"expected {2 * self.m} angles for m={self.m}, got {len(self.theta)}")
        return self

    def angle(self, x: int, k: int) -> float:
        return self.theta[k * self.m + x]


class LinearSystem(BaseModel):
    """
    线性方程组 T·α = b

    列按 (x₁, x₂, k₁, k₂) 字典序排列 (CORRELATORS 模式下只有 (x₁, x₂))。
    solve_alpha 之后填充 alpha / rank / unique / residual。
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    m: int = Field(ge=2)
    components: Components = Components.CORRELATORS
    angles: MeasurementAngles
    T: np.ndarray
    b: np.ndarray
    columns: list[tuple[int, ...]]
    alpha: np.ndarray | None = None
    rank: int | None = None
    unique: bool | None = None
    residual: float | None = None

    @model_validator(mode="after")
    def validate_shapes(self) -> "LinearSystem":
        if self.T.shape != (4, len(self.columns)):
            raise ValueError(f"T must be 4x{len(self.columns)}, got {self.T.shape}")
        if self.b.shape != (4,):
            raise ValueError("b must be a 4-vector")
        if self.alpha is not None and self.alpha.shape != (len(self.columns),):
            raise ValueError("alpha length must match the number of columns")
        return self


class BellMapResult(BaseModel):
    """CLI输出: {"m", "alpha", "rank", "unique"}"""

    m: int
    alpha: list[float]
    rank: int
    unique: bool
    components: Components = Components.CORRELATORS
    residual: float = 0.0
    deterministic_minimum: float | None = None

    @classmethod
    def from_system(cls, system: LinearSystem, deterministic_minimum: float | None = None):
        if system.alpha is None:
            raise ValueError("system has not been solved")
        return cls(
            m=system.m,
            alpha=[float(a) for a in system.alpha],
            rank=int(system.rank),
            unique=bool(system.unique),
            components=system.components,
            residual=float(system.residual),
            deterministic_minimum=deterministic_minimum,
        )

    def to_json_dict(self) -> dict[str, Any]:
        return self.model_dump(mode="json")
