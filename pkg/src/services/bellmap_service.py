"""
双体哈密顿量 -> Bell表达式系数

把 chained-Bell 型双体哈密顿量
H₂ = m (c² XX + cs XZ + sc ZX − c² ZZ),  c = cos(π/2m), s = sin(π/2m)
投影到 {XX, XZ, ZX, ZZ} 基, 求解 T·α = b, 其中
b = 2m (2c², sin(π/m), sin(π/m), −2c²),
T 的每一列对应一组 (x₁, x₂, k₁, k₂), 四行依次为
cosθ cosφ, cosθ sinφ, sinθ cosφ, sinθ sinφ (θ = θ_{x₁}^{(k₁)}, φ = θ_{x₂}^{(k₂)})。
"""

import itertools
import logging
import math

import numpy as np

from ..exceptions import NumericalError
from ..models.bellmap import Components, LinearSystem, MeasurementAngles

logger = logging.getLogger(__name__)

RANK_RTOL = 1e-10
RESIDUAL_TOL = 1e-10

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]])
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]])


class BellMapInconsistentError(NumericalError):
    """b 不在 T 的列空间中"""
    pass


def default_angles(m: int) -> MeasurementAngles:
    """
    默认等间隔测量角: θ_x^{(1)} = x·π/m, θ_x^{(0)} = −x·π/m

    m=2 时给出 (0, π/2), 即 σx 与 σz。
    """
    if m < 2:
        raise ValueError("m must be at least 2")
    step = math.pi / m
    theta = [-x * step for x in range(m)] + [x * step for x in range(m)]
    return MeasurementAngles(m=m, theta=theta)


def chained_b_vector(m: int) -> np.ndarray:
    """b = 2m (2cos²(π/2m), sin(π/m), sin(π/m), −2cos²(π/2m))"""
    c2 = math.cos(math.pi / (2 * m)) ** 2
    s = math.sin(math.pi / m)
    return 2 * m * np.array([2 * c2, s, s, -2 * c2])


def chained_hamiltonian(m: int) -> np.ndarray:
    """双体哈密顿量 H₂ 的4×4矩阵"""
    c = math.cos(math.pi / (2 * m))
    s = math.sin(math.pi / (2 * m))
    return m * (
        c * c * np.kron(PAULI_X, PAULI_X)
        + c * s * np.kron(PAULI_X, PAULI_Z)
        + s * c * np.kron(PAULI_Z, PAULI_X)
        - c * c * np.kron(PAULI_Z, PAULI_Z)
    )


def _columns(m: int, components: Components) -> list[tuple[int, ...]]:
    if components is Components.CORRELATORS:
        return [(x1, x2) for x1 in range(m) for x2 in range(m)]
    return list(itertools.product(range(m), range(m), range(2), range(2)))


def _column_angles(angles: MeasurementAngles, column: tuple[int, ...]) -> tuple[float, float]:
    if len(column) == 2:
        x1, x2 = column
        return angles.angle(x1, 1), angles.angle(x2, 1)
    x1, x2, k1, k2 = column
    return angles.angle(x1, k1), angles.angle(x2, k2)


def build_system(
    m: int,
    angles: MeasurementAngles | None = None,
    components: Components | str = Components.CORRELATORS,
) -> LinearSystem:
    """
    组装 T 与 b (alpha 未求解)

    Args:
        m: 输入数, 至少为2
        angles: 测量角 (2m个), 默认 default_angles(m)
        components: CORRELATORS (4×m²) 或 FULL (4×4m²)

    Raises:
        ValueError: m < 2 或角度数与m不符
    """
    if m < 2:
        raise ValueError("m must be at least 2")
    angles = angles or default_angles(m)
    if angles.m != m:
        raise ValueError(f"angles were given for m={angles.m}, expected m={m}")
    components = Components(components)

    columns = _columns(m, components)
    T = np.empty((4, len(columns)))
    for col, column in enumerate(columns):
        theta, phi = _column_angles(angles, column)
        T[:, col] = [
            math.cos(theta) * math.cos(phi),
            math.cos(theta) * math.sin(phi),
            math.sin(theta) * math.cos(phi),
            math.sin(theta) * math.sin(phi),
        ]
    # 消除 cos(π/2) 之类的舍入残留
    T[np.abs(T) < 1e-15] = 0.0

    return LinearSystem(
        m=m, components=components, angles=angles, T=T, b=chained_b_vector(m), columns=columns
    )


def numerical_rank(T: np.ndarray, rtol: float = RANK_RTOL) -> int:
    """奇异值大于 rtol·σ_max 的个数"""
    singular = np.linalg.svd(T, compute_uv=False)
    if singular.size == 0 or singular[0] == 0.0:
        return 0
    return int(np.sum(singular > rtol * singular[0]))


def solve_alpha(system: LinearSystem) -> LinearSystem:
    """
    求解 T·α = b

    T 为满秩方阵时返回唯一解; 否则返回最小范数解并标记 unique=False (解族)。

    Returns:
        填充了 alpha / rank / unique / residual 的LinearSystem副本

    Raises:
        BellMapInconsistentError: ‖Tα − b‖ 超过 1e-10 (b 不在列空间中)
    """
    T, b = system.T, system.b
    rank = numerical_rank(T)
    square = T.shape[0] == T.shape[1]
    unique = square and rank == T.shape[1]

    if unique:
        alpha = np.linalg.solve(T, b)
    else:
        alpha = np.linalg.lstsq(T, b, rcond=RANK_RTOL)[0]

    residual = float(np.linalg.norm(T @ alpha - b))
    if residual > RESIDUAL_TOL * max(1.0, float(np.linalg.norm(b))):
        raise BellMapInconsistentError(
            f"T·alpha = b has no solution (rank {rank}, residual {residual:.3e})"
        )

    logger.info(f"Solved bell map for m={system.m}: rank={rank}, unique={unique}")
    return system.model_copy(
        update={"alpha": alpha, "rank": rank, "unique": unique, "residual": residual}
    )


def _observable(theta: float) -> np.ndarray:
    return math.cos(theta) * PAULI_X + math.sin(theta) * PAULI_Z


def bell_operator(system: LinearSystem) -> np.ndarray:
    """由系数重建 Σ α · A ⊗ B (4×4)"""
    if system.alpha is None:
        raise ValueError("system has not been solved")
    B = np.zeros((4, 4))
    for coefficient, column in zip(system.alpha, system.columns, strict=True):
        theta, phi = _column_angles(system.angles, column)
        B += coefficient * np.kron(_observable(theta), _observable(phi))
    return B


def deterministic_minimum(system: LinearSystem) -> float:
    """
    重建的Bell表达式在确定性 ±1 结果赋值下的最小值

    k=1 分量取 ±1; k=0 分量为平凡边缘项, 取值恒为1。
    """
    if system.alpha is None:
        raise ValueError("system has not been solved")
    m = system.m
    best = math.inf
    for a in itertools.product((1.0, -1.0), repeat=m):
        for b in itertools.product((1.0, -1.0), repeat=m):
            total = 0.0
            for coefficient, column in zip(system.alpha, system.columns, strict=True):
                if len(column) == 2:
                    x1, x2 = column
                    total += coefficient * a[x1] * b[x2]
                else:
                    x1, x2, k1, k2 = column
                    total += coefficient * (a[x1] if k1 else 1.0) * (b[x2] if k2 else 1.0)
            best = min(best, total)
    return best
