"""
热带 (min-plus) 半环线性代数与经典界计算

(A ⊕ B)_ij = min(A_ij, B_ij), (A ⊙ B)_ij = min_l (A_il + B_lj), +∞ 为 ⊕ 的单位元、⊙ 的吸收元。

经典界 β_C = min_s I(ε, s) 的两种计算方式:
- 暴力枚举全部 4^N 个策略向量 (oracle, N ≤ 10)
- 按列分组的转移矩阵: T_j[u, v] = C_j(u) + H_j(u, v), β_C = tr(T_0 ⊙ … ⊙ T_{n−1})
  C_j 包含第j列的竖直链接, H_j 包含第j列到第j+1列的水平链接;
  克莱因瓶只在闭合因子 T_{n−1} 中使用翻转配对 v_{n−1−i}。
"""

import logging
from collections.abc import Iterator

import numpy as np

from ..exceptions import NumericalError, UsageError
from ..models.bounds import ClassicalBoundResult
from ..models.dimer import DimerCovering
from ..models.lattice import BoundaryCondition, Lattice
from .bell_service import CHSH_TABLE, NUM_STRATEGIES, bell_value, edge_pairs, edge_weights
from .lattice_service import horizontal_edge_grid, vertical_edge_grid

logger = logging.getLogger(__name__)

INF = np.inf
DEFAULT_BLOCK_ELEMENTS = 1 << 22


class TropicalError(UsageError):
    """热带矩阵维数或取值非法"""
    pass


class BoundSizeError(UsageError):
    """问题规模超过暴力枚举或转移矩阵上限"""
    pass


class AssignmentRecoveryError(NumericalError):
    """回溯得到的策略向量与β_C不一致"""
    pass


def as_tropical(A) -> np.ndarray:
    """
    转为float64二维数组并校验取值属于 ℝ ∪ {+∞}

    Raises:
        TropicalError: 非二维、含NaN或−∞
    """
    M = np.asarray(A, dtype=np.float64)
    if M.ndim != 2:
        raise TropicalError(f"tropical matrices are 2-dimensional, got shape {M.shape}")
    if np.isnan(M).any() or np.isneginf(M).any():
        raise TropicalError("tropical entries must be real or +inf")
    return M


def trop_identity(dim: int) -> np.ndarray:
    """对角为0、其余为+∞"""
    eye = np.full((dim, dim), INF)
    np.fill_diagonal(eye, 0.0)
    return eye


def trop_add(A, B) -> np.ndarray:
    A, B = as_tropical(A), as_tropical(B)
    if A.shape != B.shape:
        raise TropicalError(f"shape mismatch for tropical addition: {A.shape} vs {B.shape}")
    return np.minimum(A, B)


def _matmul_blocks(A: np.ndarray, B: np.ndarray, max_block_elements: int, with_argmin: bool):
    if A.shape[1] != B.shape[0]:
        raise TropicalError(f"dimension mismatch: {A.shape} ⊙ {B.shape}")
    rows, inner = A.shape
    cols = B.shape[1]
    out = np.full((rows, cols), INF)
    args = np.zeros((rows, cols), dtype=np.int32) if with_argmin else None
    # 中间张量 (行块, 内维块, cols) 不超过 max_block_elements
    inner_step = max(1, min(inner, max_block_elements // max(1, cols)))
    row_step = max(1, max_block_elements // (inner_step * cols))
    for start in range(0, rows, row_step):
        stop = min(rows, start + row_step)
        for k0 in range(0, inner, inner_step):
            k1 = min(inner, k0 + inner_step)
            block = A[start:stop, k0:k1, None] + B[None, k0:k1, :]
            if with_argmin:
                idx = np.argmin(block, axis=1)
                best = np.take_along_axis(block, idx[:, None, :], axis=1)[:, 0, :]
                # 严格小于: 并列时保留较小的内维下标
                better = best < out[start:stop]
                out[start:stop] = np.where(better, best, out[start:stop])
                args[start:stop] = np.where(better, idx + k0, args[start:stop])
            else:
                np.minimum(out[start:stop], block.min(axis=1), out=out[start:stop])
    return out, args


def trop_matmul(A, B, max_block_elements: int = DEFAULT_BLOCK_ELEMENTS) -> np.ndarray:
    """
    热带矩阵乘法 (A⊙B)_ij = min_l (A_il + B_lj)

    按行与内维分块, 每块中间张量不超过 max_block_elements 个元素。

    Raises:
        TropicalError: 维数不匹配
    """
    out, _ = _matmul_blocks(as_tropical(A), as_tropical(B), max_block_elements, False)
    return out


def trop_matmul_argmin(
    A, B, max_block_elements: int = DEFAULT_BLOCK_ELEMENTS
) -> tuple[np.ndarray, np.ndarray]:
    """热带乘法并返回取得最小值的中间下标 (并列时取最小下标)"""
    return _matmul_blocks(as_tropical(A), as_tropical(B), max_block_elements, True)


def trop_power(A, k: int) -> np.ndarray:
    """A^{⊙k}, k=0时为热带单位阵"""
    A = as_tropical(A)
    if A.shape[0] != A.shape[1]:
        raise TropicalError("tropical powers need a square matrix")
    if k < 0:
        raise TropicalError("tropical powers need k >= 0")
    result = trop_identity(A.shape[0])
    for _ in range(k):
        result = trop_matmul(result, A)
    return result


def trop_trace(A) -> float:
    """对角元的最小值"""
    A = as_tropical(A)
    if A.shape[0] != A.shape[1]:
        raise TropicalError(f"trace needs a square matrix, got {A.shape}")
    return float(np.min(np.diag(A)))


def _strategy_digits(num_sites: int) -> np.ndarray:
    """(4^N, N): 第k列为站点k的策略 (基4, 站点0为最低位)"""
    index = np.arange(NUM_STRATEGIES**num_sites, dtype=np.int64)
    powers = NUM_STRATEGIES ** np.arange(num_sites, dtype=np.int64)
    return ((index[:, None] // powers[None, :]) % NUM_STRATEGIES).astype(np.int8)


def minimize_pairwise_bruteforce(
    num_sites: int,
    pairs: np.ndarray | list[tuple[int, int]],
    weights: np.ndarray | list[float],
    max_sites: int = 10,
) -> tuple[float, list[int]]:
    """
    暴力求 min_s Σ_k w_k · chsh(s_{a_k}, s_{b_k})

    Args:
        num_sites: 站点数
        pairs: 链接端点
        weights: 链接权重
        max_sites: 站点数上限

    Returns:
        (最小值, 最小基4编号对应的策略向量)

    Raises:
        BoundSizeError: 站点数超过上限
    """
    if num_sites > max_sites:
        raise BoundSizeError(
            f"brute force over 4^{num_sites} assignments exceeds the cap of {max_sites} sites"
        )
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    weights = np.asarray(weights, dtype=np.float64)
    if len(pairs) != len(weights):
        raise ValueError("one weight per link is required")

    digits = _strategy_digits(num_sites)
    values = np.zeros(len(digits))
    for (a, b), w in zip(pairs, weights, strict=True):
        values += w * CHSH_TABLE[digits[:, a], digits[:, b]]
    best = int(np.argmin(values))
    return float(values[best]), [int(s) for s in digits[best]]


def classical_bound_bruteforce(
    lattice: Lattice, covering: DimerCovering, epsilon: float, max_sites: int = 10
) -> ClassicalBoundResult:
    """
    枚举全部 4^{n²} 个局域确定性策略求β_C

    Raises:
        BoundSizeError: n² 超过 max_sites
    """
    beta_c, assignment = minimize_pairwise_bruteforce(
        lattice.num_sites,
        edge_pairs(lattice),
        edge_weights(lattice, covering, epsilon),
        max_sites=max_sites,
    )
    return ClassicalBoundResult(
        beta_c=beta_c, epsilon=epsilon, optimal_assignment=assignment, method="bruteforce"
    )


def _column_matrices(
    w_vert: np.ndarray, w_horiz: np.ndarray, twisted_closure: bool
) -> Iterator[np.ndarray]:
    """逐列生成转移矩阵, 同一时刻只保留一个 4^n × 4^n 因子"""
    n = w_vert.shape[0]
    digits = _strategy_digits(n).astype(np.int64)
    dim = len(digits)
    below = (np.arange(n) + 1) % n

    for j in range(n):
        column = np.zeros(dim)
        for i in range(n):
            column += w_vert[i, j] * CHSH_TABLE[digits[:, i], digits[:, below[i]]]
        T = np.repeat(column[:, None], dim, axis=1)
        flipped = twisted_closure and j == n - 1
        for i in range(n):
            partner = n - 1 - i if flipped else i
            T += w_horiz[i, j] * CHSH_TABLE[digits[:, i][:, None], digits[:, partner][None, :]]
        yield T


def classical_bound_transfer(
    lattice: Lattice,
    covering: DimerCovering,
    epsilon: float,
    group_by: str = "column",
    recover_assignment: bool = False,
    max_n: int = 6,
) -> ClassicalBoundResult:
    """
    按列分组的热带转移矩阵求β_C

    Args:
        lattice: 晶格
        covering: 覆盖
        epsilon: 耦合
        group_by: "column" 或 "row" (行分组仅用于环面, 作转置交叉检验)
        recover_assignment: 回溯argmin表给出一个最优策略向量
        max_n: 转移维数 4^n 的上限

    Returns:
        ClassicalBoundResult

    Raises:
        BoundSizeError: n 超过 max_n
        TropicalError: 克莱因瓶请求行分组或分组方式未知
    """
    n = lattice.n
    if n > max_n:
        raise BoundSizeError(f"transfer dimension 4^{n} exceeds the cap n <= {max_n}")
    if group_by not in ("column", "row"):
        raise TropicalError(f"unknown grouping: {group_by}")
    if group_by == "row" and lattice.boundary is not BoundaryCondition.TORUS:
        raise TropicalError("row grouping is only defined for the torus")

    weights = edge_weights(lattice, covering, epsilon)
    w_vert = weights[np.array(vertical_edge_grid(lattice))]
    w_horiz = weights[np.array(horizontal_edge_grid(lattice))]
    if group_by == "row":
        w_vert, w_horiz = w_horiz.T, w_vert.T

    matrices = _column_matrices(w_vert, w_horiz, lattice.boundary is BoundaryCondition.KLEIN)

    product = next(matrices)
    argmins = []
    for T in matrices:
        if recover_assignment:
            product, args = trop_matmul_argmin(product, T)
            argmins.append(args)
        else:
            product = trop_matmul(product, T)
    beta_c = trop_trace(product)

    method = "transfer" if group_by == "column" else "transfer-row"
    assignment = None
    if recover_assignment:
        assignment = _backtrack(product, argmins, n, transpose=group_by == "row")
        check = bell_value(lattice, covering, epsilon, assignment)
        if abs(check - beta_c) > 1e-9 * max(1.0, abs(beta_c)):
            raise AssignmentRecoveryError(
                f"recovered assignment gives {check}, expected {beta_c}"
            )

    logger.debug(f"Transfer bound {beta_c} at epsilon={epsilon} ({method}, n={n})")
    return ClassicalBoundResult(
        beta_c=beta_c, epsilon=epsilon, optimal_assignment=assignment, method=method
    )


def _backtrack(
    product: np.ndarray, argmins: list[np.ndarray], n: int, transpose: bool
) -> list[int]:
    u0 = int(np.argmin(np.diag(product)))
    states = [0] * n
    states[0] = u0
    nxt = u0
    for j in range(n - 1, 0, -1):
        states[j] = int(argmins[j - 1][u0, nxt])
        nxt = states[j]

    assignment = [0] * (n * n)
    for j, state in enumerate(states):
        for i in range(n):
            digit = (state // NUM_STRATEGIES**i) % NUM_STRATEGIES
            site = j * n + i if transpose else i * n + j
            assignment[site] = digit
    return assignment


def classical_bound_chain(weights: list[float]) -> ClassicalBoundResult:
    """
    周期链的经典界: β_C = tr(F_0 ⊙ … ⊙ F_{N−1}), F_i = w_i · CHSH表

    Args:
        weights: 链接 (i, i+1 mod N) 的权重

    Returns:
        ClassicalBoundResult (epsilon 由偶数链接权重反推)
    """
    if len(weights) < 2:
        raise TropicalError("a periodic chain needs at least two links")
    product = weights[0] * CHSH_TABLE
    for w in weights[1:]:
        product = trop_matmul(product, w * CHSH_TABLE)
    return ClassicalBoundResult(
        beta_c=trop_trace(product), epsilon=float(weights[0]) - 1.0, method="chain"
    )
