"""
晶格几何服务

构造 n×n 方格晶格的边集合并提供最近邻查询。

克莱因瓶约定: 竖直方向 (列内) 普通周期; 水平方向跨越右边界时行号翻转,
即 (i, n−1) 的右邻居为 (n−1−i, 0)。
"""

import logging
from functools import lru_cache

from ..exceptions import UsageError
from ..models.lattice import (
    BoundaryCondition,
    Direction,
    Edge,
    Lattice,
    Orientation,
    SiteId,
)

logger = logging.getLogger(__name__)


class LatticeError(UsageError):
    """晶格参数非法"""
    pass


def site_index(i: int, j: int, n: int) -> SiteId:
    """(行, 列) -> 行优先编号"""
    return i * n + j


def site_coords(site: SiteId, n: int) -> tuple[int, int]:
    """行优先编号 -> (行, 列)"""
    return divmod(site, n)


def _step(n: int, boundary: BoundaryCondition, i: int, j: int, direction: Direction):
    if direction is Direction.DOWN:
        return (i + 1) % n, j
    if direction is Direction.UP:
        return (i - 1) % n, j
    if direction is Direction.RIGHT:
        if j < n - 1:
            return i, j + 1
        if boundary is BoundaryCondition.KLEIN:
            return n - 1 - i, 0
        return i, 0
    # LEFT
    if j > 0:
        return i, j - 1
    if boundary is BoundaryCondition.KLEIN:
        return n - 1 - i, n - 1
    return i, n - 1


def neighbor(lattice: Lattice, site: SiteId, direction: Direction) -> SiteId:
    """
    按边界条件返回最近邻站点

    Args:
        lattice: 晶格
        site: 站点编号
        direction: 方向

    Returns:
        邻居站点编号

    Raises:
        LatticeError: 站点编号越界
    """
    if not 0 <= site < lattice.num_sites:
        raise LatticeError(f"site {site} out of range for {lattice.n}x{lattice.n} lattice")
    n = lattice.n
    i, j = site_coords(site, n)
    ni, nj = _step(n, lattice.boundary, i, j, Direction(direction))
    return site_index(ni, nj, n)


def build_lattice(n: int, boundary: BoundaryCondition | str) -> Lattice:
    """
    构造晶格

    每个站点贡献一条向右的边和一条向下的边, 共 2n² 条; 结果按 (a, b) 排序。

    Args:
        n: 边长, 至少为3
        boundary: 边界条件

    Returns:
        满足全部不变量的Lattice

    Raises:
        LatticeError: n < 3 或边界条件未知
    """
    if n < 3:
        raise LatticeError(
            f"n must be at least 3 (got {n}): smaller lattices duplicate wrapped edges"
        )
    try:
        boundary = BoundaryCondition(boundary)
    except ValueError as e:
        raise LatticeError(f"unknown boundary condition: {boundary}") from e

    edges = []
    for i in range(n):
        for j in range(n):
            a = site_index(i, j, n)
            for direction, orientation, wrap in (
                (Direction.RIGHT, Orientation.HORIZONTAL, j == n - 1),
                (Direction.DOWN, Orientation.VERTICAL, i == n - 1),
            ):
                ni, nj = _step(n, boundary, i, j, direction)
                b = site_index(ni, nj, n)
                lo, hi = min(a, b), max(a, b)
                edges.append(Edge(a=lo, b=hi, orientation=orientation, wrap=wrap))

    edges.sort(key=lambda e: e.pair)
    lattice = Lattice(n=n, boundary=boundary, edges=tuple(edges))
    logger.debug(f"Built {n}x{n} {boundary.value} lattice with {lattice.num_edges} edges")
    return lattice


@lru_cache(maxsize=32)
def get_lattice(n: int, boundary: BoundaryCondition) -> Lattice:
    """构造结果缓存 (Lattice不可变)"""
    return build_lattice(n, BoundaryCondition(boundary))


def lattice_from_json(data: dict) -> Lattice:
    """
    从 {"n", "boundary", "edges"} 重建晶格并校验边集合

    Raises:
        LatticeError: 边集合与该 (n, boundary) 的几何不一致
    """
    lattice = build_lattice(int(data["n"]), data["boundary"])
    edges = [list(pair) for pair in data["edges"]]
    if edges != lattice.to_json_dict()["edges"]:
        raise LatticeError("edge list does not match the lattice geometry")
    return lattice


def edge_between(lattice: Lattice, site: SiteId, direction: Direction) -> int:
    """站点沿某方向的边编号"""
    return lattice.edge_index(site, neighbor(lattice, site, direction))


def horizontal_edge_grid(lattice: Lattice) -> list[list[int]]:
    """h[i][j]: 站点 (i, j) 向右的边编号"""
    n = lattice.n
    return [
        [edge_between(lattice, site_index(i, j, n), Direction.RIGHT) for j in range(n)]
        for i in range(n)
    ]


def vertical_edge_grid(lattice: Lattice) -> list[list[int]]:
    """v[i][j]: 站点 (i, j) 向下的边编号"""
    n = lattice.n
    return [
        [edge_between(lattice, site_index(i, j, n), Direction.DOWN) for j in range(n)]
        for i in range(n)
    ]
