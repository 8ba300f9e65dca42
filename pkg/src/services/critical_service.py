"""
临界耦合服务

在 ratio(ε) = β_Q(ε)/β_C(ε) − 1 上做 Brent–Dekker 求根, 得到违背区间端点
ε*_l < 1 < ε*_h; 同时提供 (ε, β_C, β_Q) 扫描数据。

并发模型: 不同覆盖类在线程池中并行, 单个类内的搜索顺序执行;
β_C / β_Q 经 BoundCache 按 (覆盖ID, ε) 记忆化, 两侧搜索共享。
"""

import asyncio
import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from ..exceptions import NumericalError
from ..models.dimer import CoveringClass, DimerCovering
from ..models.lattice import Lattice
from ..models.run import (
    CriticalPoint,
    CriticalSummary,
    SearchConfig,
    Side,
    SolverConfig,
    SweepPoint,
    ViolationResult,
)
from ..storage.result_repository import BoundCache
from .quantum_service import quantum_value
from .tropical_service import classical_bound_bruteforce, classical_bound_transfer

logger = logging.getLogger(__name__)

DEGENERATE_BOUND = 1e-12


class DegenerateBoundError(NumericalError):
    """β_C 为零, 比值无定义"""
    pass


def bracketed_root(
    func: Callable[[float], float], a: float, b: float, xtol: float, maxiter: int = 100
) -> tuple[float, bool, int]:
    """
    有号区间上的 Brent–Dekker 求根

    Args:
        func: 连续函数, func(a)·func(b) < 0
        a, b: 区间端点
        xtol: 根移动量容差
        maxiter: 迭代上限

    Returns:
        (根, 是否收敛, 迭代次数)

    Raises:
        ValueError: 区间端点同号
    """
    root, info = brentq(func, a, b, xtol=xtol, maxiter=maxiter, full_output=True, disp=False)
    return float(root), bool(info.converged), int(info.iterations)


class BoundEvaluator:
    """
    某一晶格上 β_C / β_Q 的记忆化求值器

    线程安全 (缓存带锁, 求解本身无共享可变状态); 记录每个覆盖被求值过的点。
    """

    def __init__(
        self,
        lattice: Lattice,
        solver: SolverConfig | None = None,
        cache: BoundCache | None = None,
        classical_method: str = "transfer",
    ):
        self.lattice = lattice
        self.solver = solver or SolverConfig()
        self.cache = cache if cache is not None else BoundCache()
        self.classical_method = classical_method
        self._trace: dict[str, dict[float, SweepPoint]] = {}
        self._trace_lock = threading.Lock()

    def classical(self, covering: DimerCovering, epsilon: float) -> float:
        covering_id = covering.covering_id
        tag = f"{BoundCache.CLASSICAL}:{self.classical_method}"
        cached = self.cache.get(covering_id, tag, epsilon)
        if cached is not None:
            return cached
        if self.classical_method == "bruteforce":
            result = classical_bound_bruteforce(self.lattice, covering, epsilon)
        else:
            result = classical_bound_transfer(
                self.lattice, covering, epsilon, max_n=self.solver.transfer_max_n
            )
        return self.cache.put(covering_id, tag, epsilon, result.beta_c)

    def quantum(self, covering: DimerCovering, epsilon: float) -> float:
        covering_id = covering.covering_id
        cached = self.cache.get(covering_id, self.solver.tag, epsilon)
        if cached is not None:
            return cached
        result = quantum_value(self.lattice, covering, epsilon, self.solver)
        return self.cache.put(covering_id, self.solver.tag, epsilon, result.beta_q)

    def evaluate(self, covering: DimerCovering, epsilon: float) -> SweepPoint:
        epsilon = float(epsilon)
        point = SweepPoint(
            epsilon=epsilon,
            beta_c=self.classical(covering, epsilon),
            beta_q=self.quantum(covering, epsilon),
        )
        with self._trace_lock:
            self._trace.setdefault(covering.covering_id, {})[epsilon] = point
        return point

    def ratio(self, covering: DimerCovering, epsilon: float) -> float:
        """
        β_Q/β_C − 1

        Raises:
            DegenerateBoundError: |β_C| < 1e-12
        """
        point = self.evaluate(covering, epsilon)
        if abs(point.beta_c) < DEGENERATE_BOUND:
            raise DegenerateBoundError(f"classical bound vanishes at epsilon={epsilon}")
        return point.beta_q / point.beta_c - 1.0

    def trace(self, covering: DimerCovering) -> list[SweepPoint]:
        """该覆盖的全部求值点, 按ε排序"""
        with self._trace_lock:
            points = self._trace.get(covering.covering_id, {})
            return [points[e] for e in sorted(points)]


def ratio(
    lattice: Lattice,
    covering: DimerCovering,
    epsilon: float,
    solver_config: SolverConfig | None = None,
) -> float:
    """β_Q(ε)/β_C(ε) − 1, β_C 由转移矩阵给出"""
    return BoundEvaluator(lattice, solver_config).ratio(covering, epsilon)


def _initial_bracket(side: Side, config: SearchConfig) -> tuple[float, float]:
    return config.bracket_low if side is Side.LOW else config.bracket_high


def find_critical(
    lattice: Lattice,
    covering: DimerCovering,
    side: Side | str,
    config: SearchConfig | None = None,
    evaluator: BoundEvaluator | None = None,
    solver_config: SolverConfig | None = None,
) -> CriticalPoint:
    """
    单侧临界耦合 ε*

    初始区间无号时, 区间宽度按 bracket_growth 几何扩大, 朝可行域边缘延伸;
    到达边缘仍无号则报告 crossing=False。根处 |ratio| 超过 ratio_tol 时
    用更小的容差再求一次。

    Args:
        lattice: 晶格
        covering: 覆盖
        side: LOW (ε < 1) 或 HIGH (ε > 1)
        config: 搜索配置
        evaluator: 共享的求值器 (缓存与轨迹)
        solver_config: 未给evaluator时使用的求解器配置

    Returns:
        CriticalPoint
    """
    side = Side(side)
    config = config or SearchConfig()
    evaluator = evaluator or BoundEvaluator(lattice, solver_config)

    def f(eps: float) -> float:
        return evaluator.ratio(covering, eps)

    a, b = _initial_bracket(side, config)
    fa, fb = f(a), f(b)
    width = b - a
    while fa * fb > 0:
        width *= config.bracket_growth
        if side is Side.LOW:
            expanded = max(config.eps_min, b - width)
            if expanded == a:
                break
            a, fa = expanded, f(expanded)
        else:
            expanded = min(config.eps_max, a + width)
            if expanded == b:
                break
            b, fb = expanded, f(expanded)
        logger.debug(f"Expanded {side.value} bracket to ({a}, {b})")

    if fa * fb > 0:
        logger.info(f"No {side.value} crossing in [{a}, {b}]")
        return CriticalPoint(side=side, converged=False, crossing=False, bracket=(a, b))

    if fa == 0.0 or fb == 0.0:
        root = a if fa == 0.0 else b
        return CriticalPoint(
            side=side, epsilon_star=root, converged=True, bracket=(a, b), ratio=0.0
        )

    root, converged, iterations = bracketed_root(
        f, a, b, xtol=config.root_tol, maxiter=config.max_iterations
    )
    value = f(root)
    if abs(value) > config.ratio_tol:
        root, converged, extra = bracketed_root(
            f, a, b, xtol=config.root_tol * 1e-3, maxiter=config.max_iterations
        )
        iterations += extra
        value = f(root)
        logger.debug(f"Refined {side.value} root to {root} (ratio {value:.3e})")

    converged = converged and abs(value) <= config.ratio_tol
    return CriticalPoint(
        side=side,
        epsilon_star=root,
        converged=converged,
        bracket=(a, b),
        iterations=iterations,
        ratio=value,
    )


def sweep(
    lattice: Lattice,
    covering: DimerCovering,
    epsilons: list[float],
    solver_config: SolverConfig | None = None,
    evaluator: BoundEvaluator | None = None,
) -> list[SweepPoint]:
    """
    在每个ε上计算 (β_C, β_Q), 结果按ε排序

    Raises:
        ValueError: ε列表为空
    """
    if not epsilons:
        raise ValueError("sweep needs at least one epsilon")
    evaluator = evaluator or BoundEvaluator(lattice, solver_config)
    return [evaluator.evaluate(covering, eps) for eps in sorted(set(epsilons))]


def pick_representatives(cls: CoveringClass, count: int) -> list[int]:
    """代表元 (最小下标) 加上在成员中均匀选取的其余成员"""
    if count <= 1 or cls.size == 1:
        return [cls.representative_index]
    positions = np.linspace(0, cls.size - 1, min(count, cls.size)).round().astype(int)
    picked = [cls.members[p] for p in dict.fromkeys(positions.tolist())]
    if cls.representative_index not in picked:
        picked[0] = cls.representative_index
    return picked


class CriticalService:
    """
    批量临界耦合分析

    核心职责:
    1. 对每个覆盖类求 ε*_l、ε*_h
    2. 多代表元一致性检查
    3. 线程池内并行各类, 单类失败不中断批处理
    4. 汇总 (n, boundary) 的极值
    """

    def __init__(
        self,
        lattice: Lattice,
        solver: SolverConfig | None = None,
        search: SearchConfig | None = None,
        cache: BoundCache | None = None,
        jobs: int = 1,
    ):
        """
        初始化临界耦合服务

        Args:
            lattice: 晶格
            solver: 量子求解器配置
            search: 根搜索配置
            cache: 共享界值缓存
            jobs: 并行类数
        """
        self.lattice = lattice
        self.search = search or SearchConfig()
        self.evaluator = BoundEvaluator(lattice, solver, cache)
        self.jobs = max(1, jobs)

    def analyze_class(
        self, cls: CoveringClass, coverings: list[DimerCovering], representatives: int = 1
    ) -> ViolationResult:
        """计算一个类的违背区间; 数值失败记录在 error 字段中"""
        picked = pick_representatives(cls, representatives)
        try:
            per_member = []
            for index in picked:
                covering = coverings[index]
                low = find_critical(
                    self.lattice, covering, Side.LOW, self.search, self.evaluator
                )
                high = find_critical(
                    self.lattice, covering, Side.HIGH, self.search, self.evaluator
                )
                per_member.append((low, high))
        except NumericalError as e:
            logger.warning(f"Class {cls.class_id} failed: {e}")
            return ViolationResult(
                class_id=cls.class_id,
                evaluations=self.evaluator.trace(coverings[picked[0]]),
                representatives=picked,
                error=str(e),
            )

        low, high = per_member[0]
        spread = 0.0
        for side_index in (0, 1):
            stars = [pair[side_index].epsilon_star for pair in per_member]
            stars = [s for s in stars if s is not None]
            if len(stars) > 1:
                spread = max(spread, max(stars) - min(stars))

        result = ViolationResult(
            class_id=cls.class_id,
            eps_low=low.epsilon_star,
            eps_high=high.epsilon_star,
            bracket_low=low.bracket,
            bracket_high=high.bracket,
            evaluations=self.evaluator.trace(coverings[picked[0]]),
            converged=all(p.converged for pair in per_member for p in pair),
            crossing_low=all(pair[0].crossing for pair in per_member),
            crossing_high=all(pair[1].crossing for pair in per_member),
            representatives=picked,
            spread=spread,
        )
        logger.info(
            f"Class {cls.class_id}: eps_low={result.eps_low} eps_high={result.eps_high} "
            f"converged={result.converged}"
        )
        return result

    async def run(
        self,
        classes: list[CoveringClass],
        coverings: list[DimerCovering],
        representatives: int = 1,
    ) -> list[ViolationResult]:
        """
        并行分析全部类

        Returns:
            按class_id排序的结果
        """
        loop = asyncio.get_running_loop()
        with ThreadPoolExecutor(max_workers=self.jobs) as pool:
            tasks = [
                loop.run_in_executor(pool, self.analyze_class, cls, coverings, representatives)
                for cls in classes
            ]
            results = await asyncio.gather(*tasks)
        return sorted(results, key=lambda r: r.class_id)

    def run_sync(
        self,
        classes: list[CoveringClass],
        coverings: list[DimerCovering],
        representatives: int = 1,
    ) -> list[ViolationResult]:
        return asyncio.run(self.run(classes, coverings, representatives))

    def summarize(self, results: list[ViolationResult]) -> CriticalSummary:
        """最小ε*_l、最大ε*_h (容差 root_tol 内并列) 及区间最宽的类"""
        tol = self.search.root_tol
        lows = [(r.eps_low, r.class_id) for r in results if r.eps_low is not None]
        highs = [(r.eps_high, r.class_id) for r in results if r.eps_high is not None]
        widths = [(r.width, r.class_id) for r in results if r.width is not None]

        summary = CriticalSummary(
            n=self.lattice.n,
            boundary=self.lattice.boundary,
            num_classes=len(results),
            num_converged=sum(r.converged for r in results),
        )
        if lows:
            best = min(v for v, _ in lows)
            summary.min_eps_low = best
            summary.classes_min_eps_low = sorted(c for v, c in lows if v <= best + tol)
        if highs:
            best = max(v for v, _ in highs)
            summary.max_eps_high = best
            summary.classes_max_eps_high = sorted(c for v, c in highs if v >= best - tol)
        if widths:
            widest = max(w for w, _ in widths)
            summary.max_width = widest
            summary.widest_class = min(c for w, c in widths if w == widest)
        return summary
