"""
经典界与量子值的结果模型
"""

from enum import Enum

from pydantic import BaseModel, ConfigDict, Field, field_validator


class PauliOp(str, Enum):
    X = "X"
    Z = "Z"


class SolverMethod(str, Enum):
    DENSE = "dense"
    LANCZOS = "lanczos"


class ClassicalBoundResult(BaseModel):
    """
    经典界 β_C

    Attributes:
        beta_c: 所有局域确定性策略上的最小Bell值
        epsilon: 耦合ε
        optimal_assignment: 可选的最优策略向量 (行优先, 取值0..3)
        method: "bruteforce" | "transfer" | "transfer-row" | "chain"
    """

    beta_c: float
    epsilon: float
    optimal_assignment: list[int] | None = None
    method: str = "transfer"

    @field_validator("optimal_assignment")
    @classmethod
    def validate_strategies(cls, v: list[int] | None) -> list[int] | None:
        if v is not None and any(s not in (0, 1, 2, 3) for s in v):
            raise ValueError("strategies must lie in {0, 1, 2, 3}")
        return v


class PauliTermSpec(BaseModel):
    """
    两体Pauli项 coefficient · P_a ⊗ P_b

    Attributes:
        site_a / site_b: 作用站点
        ops: (P_a, P_b), 取自 {X, Z}
        coefficient: 实系数
    """

    model_config = ConfigDict(frozen=True)

    site_a: int = Field(ge=0)
    site_b: int = Field(ge=0)
    ops: tuple[PauliOp, PauliOp]
    coefficient: float

    @field_validator("site_b")
    @classmethod
    def validate_distinct(cls, v: int, info) -> int:
        if info.data.get("site_a") == v:
            raise ValueError("a two-body term needs two distinct sites")
        return v


class QuantumValueResult(BaseModel):
    """
    量子值 β_Q (Bell算符的基态能量)

    Attributes:
        beta_q: 基态能量
        method: dense 或 lanczos
        residual: ‖Hv − β_Q v‖ / ‖v‖
        iterations: Krylov步数 (dense为0)
        converged: 残差是否达到容差
    """

    beta_q: float
    method: SolverMethod
    residual: float = Field(ge=0.0)
    iterations: int = Field(default=0, ge=0)
    converged: bool = True
