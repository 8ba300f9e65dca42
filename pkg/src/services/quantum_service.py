"""
量子值服务

Bell算符哈密顿量 H = Σ_edges f_ij(ε) (σxσx + σxσz + σzσx − σzσz) 的基态能量 β_Q:
- dense: 组装 2^N × 2^N 实对称矩阵后直接对角化 (N ≤ 12)
- lanczos: 无矩阵Krylov迭代, 完全重正交化, 固定种子起始向量

计算基约定: 站点k对应基态编号的第k位; X翻转该位, Z给出符号 (−1)^bit。
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh, eigh_tridiagonal
from scipy.sparse.linalg import LinearOperator

from ..exceptions import NumericalError, UsageError
from ..models.bounds import PauliOp, PauliTermSpec, QuantumValueResult, SolverMethod
from ..models.dimer import DimerCovering
from ..models.lattice import Lattice
from ..models.run import SolverConfig
from .bell_service import chain_weights, edge_weights

logger = logging.getLogger(__name__)

# 每条链接的四项: (P_a, P_b, 符号)
CHSH_PAULI_PATTERN: tuple[tuple[PauliOp, PauliOp, float], ...] = (
    (PauliOp.X, PauliOp.X, 1.0),
    (PauliOp.X, PauliOp.Z, 1.0),
    (PauliOp.Z, PauliOp.X, 1.0),
    (PauliOp.Z, PauliOp.Z, -1.0),
)

# Krylov基向量占用内存上限
KRYLOV_MEMORY_BYTES = 1 << 31
# 预存系数向量的元素上限, 超过则每次matvec现算
PRECOMPUTE_ELEMENTS = 1 << 26


class SolverSizeError(UsageError):
    """站点数超过求解器上限"""
    pass


class SolverConvergenceError(NumericalError):
    """Lanczos未在迭代预算内收敛; result携带最佳估计与残差"""

    def __init__(self, message: str, result: QuantumValueResult):
        super().__init__(message)
        self.result = result


def _link_terms(a: int, b: int, weight: float) -> list[PauliTermSpec]:
    return [
        PauliTermSpec(site_a=a, site_b=b, ops=(pa, pb), coefficient=weight * sign)
        for pa, pb, sign in CHSH_PAULI_PATTERN
    ]


def build_hamiltonian(
    lattice: Lattice, covering: DimerCovering, epsilon: float
) -> list[PauliTermSpec]:
    """
    构造晶格Bell算符的Pauli项

    Returns:
        4·|edges| 项, 按边编号排列
    """
    weights = edge_weights(lattice, covering, epsilon)
    terms: list[PauliTermSpec] = []
    for edge, w in zip(lattice.edges, weights, strict=True):
        terms.extend(_link_terms(edge.a, edge.b, float(w)))
    return terms


def build_chain_hamiltonian(num_sites: int, epsilon: float) -> list[PauliTermSpec]:
    """周期二聚化链 f_i = 1 + (−1)^i ε 的Bell算符"""
    terms: list[PauliTermSpec] = []
    for i, w in enumerate(chain_weights(num_sites, epsilon)):
        terms.extend(_link_terms(i, (i + 1) % num_sites, w))
    return terms


@dataclass
class _FlipGroup:
    """同一翻转掩码下的所有项: coef(x) = constant + Σ c·z_site(x)"""

    mask: int
    constant: float = 0.0
    signed: list[tuple[int, float]] = field(default_factory=list)
    coef: np.ndarray | None = None


class PauliSumOperator(LinearOperator):
    """
    Pauli项之和的无矩阵线性算符

    (Hv)[x] = diag(x)·v[x] + Σ_mask coef_mask(x) · v[x ^ mask]
    实对称, 可直接交给scipy.sparse.linalg或本模块的Lanczos。
    """

    def __init__(self, terms: list[PauliTermSpec], num_sites: int):
        dim = 1 << num_sites
        super().__init__(dtype=np.float64, shape=(dim, dim))
        self.num_sites = num_sites
        self._index = np.arange(dim, dtype=np.int64)
        self._diag = np.zeros(dim)
        groups: dict[int, _FlipGroup] = {}

        for term in terms:
            a, b = term.site_a, term.site_b
            if max(a, b) >= num_sites:
                raise ValueError(f"term acts on site {max(a, b)} outside {num_sites} sites")
            c = term.coefficient
            if c == 0.0:
                continue
            pa, pb = term.ops
            if pa is PauliOp.Z and pb is PauliOp.Z:
                self._diag += c * self._z(a) * self._z(b)
                continue
            mask = (1 << a if pa is PauliOp.X else 0) | (1 << b if pb is PauliOp.X else 0)
            group = groups.setdefault(mask, _FlipGroup(mask=mask))
            if pa is PauliOp.X and pb is PauliOp.X:
                group.constant += c
            elif pa is PauliOp.X:
                group.signed.append((b, c))
            else:
                group.signed.append((a, c))

        self._groups = sorted(groups.values(), key=lambda g: g.mask)
        if dim * len(self._groups) <= PRECOMPUTE_ELEMENTS:
            for group in self._groups:
                if group.signed:
                    group.coef = self._group_coefficients(group)

    def _z(self, site: int) -> np.ndarray:
        return 1.0 - 2.0 * ((self._index >> site) & 1)

    def _group_coefficients(self, group: _FlipGroup) -> np.ndarray:
        coef = np.full(self.shape[0], group.constant)
        for site, c in group.signed:
            coef += c * self._z(site)
        return coef

    @property
    def flip_groups(self) -> list[tuple[int, np.ndarray | float]]:
        """(掩码, 系数) 列表; 纯XX组系数为常数"""
        out = []
        for group in self._groups:
            if group.signed:
                coef = group.coef if group.coef is not None else self._group_coefficients(group)
                out.append((group.mask, coef))
            else:
                out.append((group.mask, group.constant))
        return out

    @property
    def diagonal(self) -> np.ndarray:
        return self._diag

    def _matvec(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=np.float64).ravel()
        out = self._diag * v
        for group in self._groups:
            gathered = v[self._index ^ group.mask]
            if not group.signed:
                out += group.constant * gathered
            elif group.coef is not None:
                out += group.coef * gathered
            else:
                out += self._group_coefficients(group) * gathered
        return out

    def _rmatvec(self, v: np.ndarray) -> np.ndarray:
        return self._matvec(v)


def assemble_dense(terms: list[PauliTermSpec], num_sites: int, max_sites: int = 12) -> np.ndarray:
    """
    组装稠密哈密顿量矩阵

    Raises:
        SolverSizeError: num_sites 超过 max_sites
    """
    if num_sites > max_sites:
        raise SolverSizeError(f"dense solver limited to {max_sites} sites, got {num_sites}")
    op = PauliSumOperator(terms, num_sites)
    idx = np.arange(op.shape[0])
    H = np.diag(op.diagonal)
    for mask, coef in op.flip_groups:
        H[idx, idx ^ mask] += coef
    return H


def ground_energy_dense(
    terms: list[PauliTermSpec], num_sites: int, max_sites: int = 12
) -> QuantumValueResult:
    """
    稠密对角化求最低本征值

    Raises:
        SolverSizeError: 站点数超过上限
    """
    H = assemble_dense(terms, num_sites, max_sites)
    values, vectors = eigh(H, subset_by_index=[0, 0])
    vec = vectors[:, 0]
    residual = float(np.linalg.norm(H @ vec - values[0] * vec) / np.linalg.norm(vec))
    return QuantumValueResult(
        beta_q=float(values[0]),
        method=SolverMethod.DENSE,
        residual=residual,
        iterations=0,
        converged=True,
    )


def _lanczos_pass(
    op: LinearOperator, start: np.ndarray, krylov_dim: int, tol: float
) -> tuple[float, np.ndarray, int]:
    dim = op.shape[0]
    basis = np.empty((krylov_dim, dim))
    basis[0] = start / np.linalg.norm(start)
    alphas: list[float] = []
    betas: list[float] = []

    for j in range(krylov_dim):
        w = op.matvec(basis[j])
        alpha = float(basis[j] @ w)
        alphas.append(alpha)
        w -= alpha * basis[j]
        if j > 0:
            w -= betas[-1] * basis[j - 1]
        # 完全重正交化 (两遍)
        for _ in range(2):
            w -= basis[: j + 1].T @ (basis[: j + 1] @ w)
        beta = float(np.linalg.norm(w))

        if j == 0:
            theta, y = alphas[0], np.ones(1)
        else:
            evals, evecs = eigh_tridiagonal(
                np.array(alphas), np.array(betas), select="i", select_range=(0, 0)
            )
            theta, y = float(evals[0]), evecs[:, 0]

        scale = max(1.0, abs(theta))
        estimate = beta * abs(y[-1])
        if estimate <= 0.1 * tol or beta <= 1e-12 * scale or j == krylov_dim - 1:
            ritz = basis[: j + 1].T @ y
            ritz /= np.linalg.norm(ritz)
            logger.debug(f"Lanczos pass ended after {j + 1} steps (estimate {estimate:.3e})")
            return theta, ritz, j + 1

        betas.append(beta)
        basis[j + 1] = w / beta

    raise AssertionError("unreachable")


def ground_energy_lanczos(
    terms: list[PauliTermSpec],
    num_sites: int,
    tol: float = 1e-8,
    krylov_dim: int = 200,
    max_restarts: int = 20,
    seed: int = 0,
    max_sites: int = 26,
) -> QuantumValueResult:
    """
    无矩阵Lanczos求最低本征值

    未收敛时从Ritz向量重启; 起始向量由固定种子生成, 结果可复现。

    Args:
        terms: Pauli项
        num_sites: 站点数
        tol: 残差容差 ‖Hv − λv‖
        krylov_dim: 每轮Krylov维数上限
        max_restarts: 重启次数上限
        seed: 起始向量种子
        max_sites: 站点数上限

    Returns:
        QuantumValueResult

    Raises:
        SolverSizeError: 站点数超过上限
        SolverConvergenceError: 重启预算用尽仍未达到容差
    """
    if num_sites > max_sites:
        raise SolverSizeError(f"Lanczos solver limited to {max_sites} sites, got {num_sites}")
    if tol <= 0:
        raise ValueError("tolerance must be positive")

    op = PauliSumOperator(terms, num_sites)
    dim = op.shape[0]
    affordable = max(2, KRYLOV_MEMORY_BYTES // (8 * dim))
    kdim = min(krylov_dim, dim, affordable)
    if kdim < min(krylov_dim, dim):
        logger.warning(f"Krylov dimension capped at {kdim} by the memory budget")

    rng = np.random.default_rng(seed)
    vec = rng.standard_normal(dim)
    total = 0
    theta, residual = 0.0, float("inf")

    for restart in range(max_restarts + 1):
        theta, vec, steps = _lanczos_pass(op, vec, kdim, tol)
        total += steps
        residual = float(np.linalg.norm(op.matvec(vec) - theta * vec))
        if residual <= tol:
            return QuantumValueResult(
                beta_q=theta,
                method=SolverMethod.LANCZOS,
                residual=residual,
                iterations=total,
                converged=True,
            )
        logger.debug(f"Lanczos restart {restart + 1}: energy={theta:.12f} residual={residual:.3e}")

    result = QuantumValueResult(
        beta_q=theta,
        method=SolverMethod.LANCZOS,
        residual=residual,
        iterations=total,
        converged=False,
    )
    raise SolverConvergenceError(
        f"Lanczos did not reach residual {tol:g} after {max_restarts} restarts "
        f"(best energy {theta:.12f}, residual {residual:.3e})",
        result,
    )


def ground_energy(
    terms: list[PauliTermSpec], num_sites: int, config: SolverConfig | None = None
) -> QuantumValueResult:
    """按配置选择求解器 (auto: 站点数 ≤ dense_max_sites 时dense)"""
    config = config or SolverConfig()
    method = config.resolve(num_sites)
    if method is SolverMethod.DENSE:
        return ground_energy_dense(terms, num_sites, max_sites=config.dense_max_sites)
    return ground_energy_lanczos(
        terms,
        num_sites,
        tol=config.lanczos_tol,
        krylov_dim=config.krylov_dim,
        max_restarts=config.max_restarts,
        seed=config.seed,
        max_sites=config.lanczos_max_sites,
    )


def quantum_value(
    lattice: Lattice,
    covering: DimerCovering,
    epsilon: float,
    config: SolverConfig | None = None,
) -> QuantumValueResult:
    """晶格覆盖在ε处的量子值"""
    terms = build_hamiltonian(lattice, covering, epsilon)
    return ground_energy(terms, lattice.num_sites, config)


def rayleigh_quotient(terms: list[PauliTermSpec], num_sites: int, vec: np.ndarray) -> float:
    """⟨v|H|v⟩ / ⟨v|v⟩, 用于变分上界检查"""
    op = PauliSumOperator(terms, num_sites)
    vec = np.asarray(vec, dtype=np.float64)
    return float(vec @ op.matvec(vec) / (vec @ vec))
