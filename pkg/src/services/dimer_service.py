"""
二聚体覆盖服务

负责:
1. 回溯枚举全部最大二聚体覆盖
2. 环面 / 克莱因瓶对称操作 (站点置换 -> 边置换)
3. 深度优先搜索划分群轨道 (覆盖类)
4. 生成元关系校验与分类统计
"""

import logging
from collections import Counter
from functools import lru_cache

import numpy as np

from ..exceptions import NumericalError, UsageError
from ..models.dimer import (
    ClassStatistics,
    CoveringClass,
    DimerCovering,
    OrbitEdge,
    SymmetryOp,
    generators_for,
)
from ..models.lattice import BoundaryCondition, Lattice, SiteId
from .lattice_service import get_lattice, site_coords, site_index

logger = logging.getLogger(__name__)


class SymmetryError(UsageError):
    """对称操作与边界条件不匹配"""
    pass


class CoveringLimitError(UsageError):
    """覆盖数超过配置上限"""
    pass


class SymmetryClosureError(NumericalError):
    """对称像不在枚举结果中 (枚举缺陷)"""
    pass


_TORUS_OPS = frozenset(generators_for(BoundaryCondition.TORUS))
_KLEIN_OPS = frozenset(generators_for(BoundaryCondition.KLEIN))


def _check_applicable(op: SymmetryOp, boundary: BoundaryCondition) -> None:
    allowed = _TORUS_OPS if boundary is BoundaryCondition.TORUS else _KLEIN_OPS
    if op not in allowed:
        raise SymmetryError(f"{op.value} does not act on the {boundary.value} lattice")


def _map_site(op: SymmetryOp, n: int, i: int, j: int) -> tuple[int, int]:
    if op is SymmetryOp.RIGHT_SHIFT:
        return i, (j - 1) % n
    if op is SymmetryOp.UP_SHIFT:
        return (i + 1) % n, j
    if op is SymmetryOp.VERTICAL_MIRROR:
        return i, n - 1 - j
    if op is SymmetryOp.HORIZONTAL_MIRROR:
        return n - 1 - i, j
    if op is SymmetryOp.ROTATION_90:
        return j, n - 1 - i
    if op is SymmetryOp.KB_RIGHT_SHIFT:
        # 列左移一格, 第0列经过翻转的接缝回到第n−1列
        return (i, j - 1) if j >= 1 else (n - 1 - i, n - 1)
    if op is SymmetryOp.KB_VERTICAL_MIRROR:
        return (n - 1 - i, 0) if j == 0 else (i, n - j)
    raise SymmetryError(f"unknown symmetry operation: {op}")


def site_permutation(lattice: Lattice, op: SymmetryOp) -> list[SiteId]:
    """
    对称操作的站点映射

    Args:
        lattice: 晶格
        op: 生成元

    Returns:
        perm, perm[旧站点] = 新站点

    Raises:
        SymmetryError: op不作用于该边界条件
    """
    op = SymmetryOp(op)
    _check_applicable(op, lattice.boundary)
    n = lattice.n
    perm = []
    for site in range(lattice.num_sites):
        ni, nj = _map_site(op, n, *site_coords(site, n))
        perm.append(site_index(ni, nj, n))
    return perm


@lru_cache(maxsize=128)
def _edge_permutation_cached(n: int, boundary: BoundaryCondition, op: SymmetryOp) -> np.ndarray:
    lattice = get_lattice(n, boundary)
    perm = site_permutation(lattice, op)
    images = np.empty(lattice.num_edges, dtype=np.int64)
    for k, edge in enumerate(lattice.edges):
        a, b = perm[edge.a], perm[edge.b]
        if not lattice.has_edge(a, b):
            raise SymmetryError(f"{op.value} is not a lattice automorphism (edge {k})")
        images[k] = lattice.edge_index(a, b)
    images.setflags(write=False)
    return images


def edge_permutation(lattice: Lattice, op: SymmetryOp) -> np.ndarray:
    """对称操作诱导的边置换 (只读数组, 按 (n, boundary, op) 缓存)"""
    op = SymmetryOp(op)
    _check_applicable(op, lattice.boundary)
    return _edge_permutation_cached(lattice.n, lattice.boundary, op)


def apply_symmetry(cov: DimerCovering, op: SymmetryOp) -> DimerCovering:
    """
    对覆盖施加对称操作

    Args:
        cov: 覆盖
        op: 生成元

    Returns:
        同一晶格上的新覆盖

    Raises:
        SymmetryError: op与覆盖的边界条件不匹配
    """
    op = SymmetryOp(op)
    _check_applicable(op, cov.boundary)
    perm = edge_permutation(get_lattice(cov.n, cov.boundary), op)
    images = tuple(sorted(int(perm[e]) for e in cov.dimer_edges))
    return DimerCovering(n=cov.n, boundary=cov.boundary, dimer_edges=images)


def permute_assignment(lattice: Lattice, op: SymmetryOp, assignment: list[int]) -> list[int]:
    """把策略向量随站点一起搬运: new[perm[k]] = old[k]"""
    perm = site_permutation(lattice, op)
    moved = [0] * lattice.num_sites
    for old, new in enumerate(perm):
        moved[new] = assignment[old]
    return moved


def assert_matching(lattice: Lattice, cov: DimerCovering) -> None:
    """
    校验覆盖是该晶格上的最大匹配

    Raises:
        ValueError: 晶格不符、边编号越界或两条二聚体共享站点
    """
    if cov.lattice_ref != (lattice.n, lattice.boundary):
        raise ValueError("covering belongs to a different lattice")
    seen: set[int] = set()
    for e in cov.dimer_edges:
        if e >= lattice.num_edges:
            raise ValueError(f"edge index {e} out of range")
        edge = lattice.edges[e]
        if edge.a in seen or edge.b in seen:
            raise ValueError(f"dimers share a site at edge {e}")
        seen.update(edge.pair)


def enumerate_maximal(lattice: Lattice, max_coverings: int | None = None) -> list[DimerCovering]:
    """
    回溯枚举全部最大二聚体覆盖

    每一步取编号最小的未覆盖站点, 要么与一个未覆盖邻居配对, 要么 (奇数站点时)
    留作唯一的单体。若某个未覆盖站点已无未覆盖邻居, 且单体名额用尽, 则剪枝。

    Args:
        lattice: 晶格
        max_coverings: 覆盖数上限, None表示不限

    Returns:
        按二聚体边集合排序的覆盖列表

    Raises:
        CoveringLimitError: 覆盖数超过上限
    """
    num_sites = lattice.num_sites
    adjacency: list[list[tuple[int, int]]] = [[] for _ in range(num_sites)]
    for k, edge in enumerate(lattice.edges):
        adjacency[edge.a].append((edge.b, k))
        adjacency[edge.b].append((edge.a, k))
    for entries in adjacency:
        entries.sort()

    covered = [False] * num_sites
    chosen: list[int] = []
    found: list[tuple[int, ...]] = []

    def isolated(site: int) -> bool:
        return all(covered[other] for other, _ in adjacency[site])

    def pruned(sites: tuple[int, ...], monomers_left: int) -> bool:
        stranded = 0
        checked = set()
        for s in sites:
            for other, _ in adjacency[s]:
                if not covered[other] and other not in checked:
                    checked.add(other)
                    if isolated(other):
                        stranded += 1
        return stranded > monomers_left

    def search(start: int, monomers_left: int) -> None:
        site = start
        while site < num_sites and covered[site]:
            site += 1
        if site == num_sites:
            found.append(tuple(sorted(chosen)))
            if max_coverings is not None and len(found) > max_coverings:
                raise CoveringLimitError(
                    f"more than {max_coverings} coverings on the {lattice.n}x{lattice.n} "
                    f"{lattice.boundary.value} lattice"
                )
            return

        covered[site] = True
        for other, k in adjacency[site]:
            if covered[other]:
                continue
            covered[other] = True
            chosen.append(k)
            if not pruned((site, other), monomers_left):
                search(site + 1, monomers_left)
            chosen.pop()
            covered[other] = False
        if monomers_left > 0 and not pruned((site,), monomers_left - 1):
            search(site + 1, monomers_left - 1)
        covered[site] = False

    search(0, num_sites % 2)
    found.sort()

    coverings = [
        DimerCovering(n=lattice.n, boundary=lattice.boundary, dimer_edges=edges)
        for edges in found
    ]
    for cov in coverings:
        assert_matching(lattice, cov)

    logger.info(
        f"Enumerated {len(coverings)} maximum coverings on "
        f"{lattice.n}x{lattice.n} {lattice.boundary.value}"
    )
    return coverings


def classify(
    coverings: list[DimerCovering],
    boundary: BoundaryCondition,
    with_graph: bool = False,
) -> list[CoveringClass] | tuple[list[CoveringClass], list[OrbitEdge]]:
    """
    按对称群轨道划分覆盖

    从每个未访问覆盖出发做显式栈DFS, 递归施加全部生成元。
    每个对称像都必须出现在输入列表中。

    Args:
        coverings: enumerate_maximal的完整输出
        boundary: 边界条件
        with_graph: 同时返回DFS发现的轨道图

    Returns:
        覆盖类列表 (按发现顺序编号), with_graph时附带轨道图边

    Raises:
        SymmetryClosureError: 对称像缺失
        ValueError: 覆盖不属于同一晶格
    """
    boundary = BoundaryCondition(boundary)
    if not coverings:
        return ([], []) if with_graph else []

    n = coverings[0].n
    if any(c.lattice_ref != (n, boundary) for c in coverings):
        raise ValueError(f"all coverings must live on the {n}x{n} {boundary.value} lattice")

    lattice = get_lattice(n, boundary)
    generators = generators_for(boundary)
    perms = {op: edge_permutation(lattice, op) for op in generators}
    index = {c.dimer_edges: k for k, c in enumerate(coverings)}
    if len(index) != len(coverings):
        raise ValueError("covering list contains duplicates")

    class_of = [-1] * len(coverings)
    classes: list[CoveringClass] = []
    graph: list[OrbitEdge] = []

    for seed in range(len(coverings)):
        if class_of[seed] >= 0:
            continue
        class_id = len(classes)
        class_of[seed] = class_id
        members = [seed]
        stack = [seed]
        while stack:
            current = stack.pop()
            edges = coverings[current].dimer_edges
            for op in generators:
                perm = perms[op]
                image = tuple(sorted(int(perm[e]) for e in edges))
                target = index.get(image)
                if target is None:
                    raise SymmetryClosureError(
                        f"{op.value} maps covering {current} outside the enumerated set: "
                        f"{list(image)}"
                    )
                if with_graph:
                    graph.append(OrbitEdge(source=current, op=op, target=target))
                if class_of[target] < 0:
                    class_of[target] = class_id
                    members.append(target)
                    stack.append(target)
                elif class_of[target] != class_id:
                    raise SymmetryClosureError(
                        f"covering {target} reached from two different orbits"
                    )

        members.sort()
        classes.append(
            CoveringClass(
                class_id=class_id,
                representative=coverings[members[0]],
                representative_index=members[0],
                members=members,
                size=len(members),
            )
        )

    fixed = [c.class_id for c in classes if c.size == 1]
    if fixed:
        logger.info(f"Classes fixed by the whole group: {fixed}")
    logger.info(
        f"Classified {len(coverings)} coverings into {len(classes)} classes "
        f"({n}x{n} {boundary.value})"
    )
    return (classes, graph) if with_graph else classes


def class_statistics(
    classes: list[CoveringClass], n: int, boundary: BoundaryCondition
) -> ClassStatistics:
    """汇总类数、最小/最大类大小、大小直方图与不动点类"""
    sizes = [c.size for c in classes]
    histogram = dict(sorted(Counter(sizes).items()))
    return ClassStatistics(
        n=n,
        boundary=boundary,
        num_classes=len(classes),
        min_size=min(sizes) if sizes else 0,
        max_size=max(sizes) if sizes else 0,
        total_coverings=sum(sizes),
        size_histogram=histogram,
        fixed_point_classes=[c.class_id for c in classes if c.size == 1],
    )


def _compose(*perms: np.ndarray) -> np.ndarray:
    """依次施加perms[0], perms[1], ... 后的复合置换"""
    result = np.arange(len(perms[0]))
    for perm in perms:
        result = perm[result]
    return result


def _power(perm: np.ndarray, k: int) -> np.ndarray:
    return _compose(*([perm] * k)) if k > 0 else np.arange(len(perm))


def _inverse(perm: np.ndarray) -> np.ndarray:
    return np.argsort(perm)


def verify_group_relations(lattice: Lattice) -> dict[str, bool]:
    """
    在边置换上校验生成元的定义关系

    乘积 XY 表示先施加Y再施加X。

    Returns:
        关系名 -> 是否成立
    """
    identity = np.arange(lattice.num_edges)
    n = lattice.n

    def same(p: np.ndarray, q: np.ndarray) -> bool:
        return bool(np.array_equal(p, q))

    if lattice.boundary is BoundaryCondition.TORUS:
        rs = edge_permutation(lattice, SymmetryOp.RIGHT_SHIFT)
        us = edge_permutation(lattice, SymmetryOp.UP_SHIFT)
        vm = edge_permutation(lattice, SymmetryOp.VERTICAL_MIRROR)
        hm = edge_permutation(lattice, SymmetryOp.HORIZONTAL_MIRROR)
        r = edge_permutation(lattice, SymmetryOp.ROTATION_90)
        return {
            "rs^n=e": same(_power(rs, n), identity),
            "us^n=e": same(_power(us, n), identity),
            "vm^2=e": same(_power(vm, 2), identity),
            "hm^2=e": same(_power(hm, 2), identity),
            "r^4=e": same(_power(r, 4), identity),
            "vm.rs=rs^-1.vm": same(_compose(rs, vm), _compose(vm, _inverse(rs))),
            "hm.us=us^-1.hm": same(_compose(us, hm), _compose(hm, _inverse(us))),
            "vm.r=r^-1.vm": same(_compose(r, vm), _compose(vm, _inverse(r))),
            "hm.r=r^-1.hm": same(_compose(r, hm), _compose(hm, _inverse(r))),
        }

    rs = edge_permutation(lattice, SymmetryOp.KB_RIGHT_SHIFT)
    vm = edge_permutation(lattice, SymmetryOp.KB_VERTICAL_MIRROR)
    return {
        "rs^2n.vm^2=e": same(_compose(_power(vm, 2), _power(rs, 2 * n)), identity),
        "vm.rs=rs^-1.vm": same(_compose(rs, vm), _compose(vm, _inverse(rs))),
    }
