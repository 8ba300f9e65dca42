"""
Bell表达式核心

局域确定性策略 s ∈ {0,1,2,3}: φ_0(x)=0, φ_1(x)=x, φ_2(x)=1−x, φ_3(x)=1,
结果a映射为观测值 (−1)^a。每条链接使用CHSH
A₀B₀ + A₀B₁ + A₁B₀ − A₁B₁ (所有站点测量相同)。
"""

import logging
import math

import numpy as np

from ..exceptions import UsageError
from ..models.dimer import DimerCovering
from ..models.lattice import Lattice

logger = logging.getLogger(__name__)

NUM_STRATEGIES = 4

# STRATEGY_OUTPUTS[s, x] = φ_s(x)
STRATEGY_OUTPUTS = np.array([[0, 0], [0, 1], [1, 0], [1, 1]], dtype=np.int64)
OBSERVABLES = 1.0 - 2.0 * STRATEGY_OUTPUTS
_CHSH_SIGNS = np.array([[1.0, 1.0], [1.0, -1.0]])

# CHSH_TABLE[s_i, s_j]: 16个取值均为 ±2
CHSH_TABLE: np.ndarray = OBSERVABLES @ _CHSH_SIGNS @ OBSERVABLES.T
CHSH_TABLE.setflags(write=False)


class EpsilonDomainError(UsageError):
    """ε 超出允许范围"""
    pass


def chsh_link_value(s_i: int, s_j: int) -> float:
    """
    单条链接的CHSH取值

    Args:
        s_i: 站点i的策略
        s_j: 站点j的策略

    Returns:
        +2 或 −2

    Raises:
        ValueError: 策略不在 {0,1,2,3}
    """
    if s_i not in range(NUM_STRATEGIES) or s_j not in range(NUM_STRATEGIES):
        raise ValueError(f"strategies must lie in {{0,1,2,3}}, got ({s_i}, {s_j})")
    return float(CHSH_TABLE[s_i, s_j])


def validate_epsilon(
    epsilon: float, eps_min: float = 0.0, eps_max: float = 2.0, allow_wide: bool = False
) -> float:
    """
    校验ε在 [eps_min, eps_max] 内 (allow_wide时只要求有限)

    Raises:
        EpsilonDomainError: 非有限值或超出范围
    """
    if not math.isfinite(epsilon):
        raise EpsilonDomainError(f"epsilon must be finite, got {epsilon}")
    if not allow_wide and not eps_min <= epsilon <= eps_max:
        raise EpsilonDomainError(
            f"epsilon {epsilon} outside [{eps_min}, {eps_max}]; wider values need allow_wide"
        )
    return float(epsilon)


def edge_weights(lattice: Lattice, covering: DimerCovering, epsilon: float) -> np.ndarray:
    """
    每条边的权重 f_ij(ε): 二聚体边 1+ε, 其余 1−ε

    Returns:
        长度为边数的数组, 按边编号排列
    """
    if covering.lattice_ref != (lattice.n, lattice.boundary):
        raise ValueError("covering belongs to a different lattice")
    weights = np.full(lattice.num_edges, 1.0 - epsilon)
    weights[list(covering.dimer_edges)] = 1.0 + epsilon
    return weights


def edge_pairs(lattice: Lattice) -> np.ndarray:
    """(边数, 2) 的端点数组"""
    return np.array([edge.pair for edge in lattice.edges], dtype=np.int64)


def bell_value(
    lattice: Lattice,
    covering: DimerCovering,
    epsilon: float,
    assignment: list[int] | np.ndarray,
) -> float:
    """
    在给定策略向量下计算 I(ε) = Σ_edges f_ij(ε) · chsh(s_i, s_j)

    Args:
        lattice: 晶格
        covering: 覆盖
        epsilon: 耦合
        assignment: 长度n²的策略向量 (行优先)

    Raises:
        ValueError: 长度不符或策略越界
    """
    s = np.asarray(assignment, dtype=np.int64)
    if s.shape != (lattice.num_sites,):
        raise ValueError(f"assignment must have {lattice.num_sites} entries")
    if s.min() < 0 or s.max() >= NUM_STRATEGIES:
        raise ValueError("strategies must lie in {0, 1, 2, 3}")
    pairs = edge_pairs(lattice)
    links = CHSH_TABLE[s[pairs[:, 0]], s[pairs[:, 1]]]
    return float(np.dot(edge_weights(lattice, covering, epsilon), links))


def bell_slope(lattice: Lattice, covering: DimerCovering, assignment: list[int]) -> float:
    """固定策略下 I(ε) 关于ε的斜率: Σ_dimer chsh − Σ_nondimer chsh"""
    return bell_value(lattice, covering, 1.0, assignment) - bell_value(
        lattice, covering, 0.0, assignment
    )


def chain_weights(num_sites: int, epsilon: float) -> list[float]:
    """
    周期链权重 f_i = 1 + (−1)^i ε, 作用于链接 (i, i+1 mod N)

    Raises:
        ValueError: N 不是不小于4的偶数
    """
    if num_sites < 4 or num_sites % 2:
        raise ValueError(
            f"a periodic dimerized chain needs an even number (at least 4) of sites, "
            f"got {num_sites}"
        )
    return [1.0 + epsilon if i % 2 == 0 else 1.0 - epsilon for i in range(num_sites)]
