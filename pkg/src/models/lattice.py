"""
Lattice模型定义

n×n 方格晶格的几何数据: 边界条件、方向、边与整张晶格。
站点编号采用行优先 i·n + j。
"""

from enum import Enum
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, model_validator

SiteId = int


class BoundaryCondition(str, Enum):
    """边界条件: 环面 (aba⁻¹b⁻¹) 或克莱因瓶 (aba⁻¹b)"""

    TORUS = "torus"
    KLEIN = "klein"


class Direction(str, Enum):
    """最近邻方向; DOWN 使行号增加, RIGHT 使列号增加"""

    UP = "up"
    DOWN = "down"
    LEFT = "left"
    RIGHT = "right"

    @property
    def opposite(self) -> "Direction":
        return _OPPOSITE[self]


_OPPOSITE = {
    Direction.UP: Direction.DOWN,
    Direction.DOWN: Direction.UP,
    Direction.LEFT: Direction.RIGHT,
    Direction.RIGHT: Direction.LEFT,
}


class Orientation(str, Enum):
    HORIZONTAL = "horizontal"
    VERTICAL = "vertical"


class Edge(BaseModel):
    """
    最近邻边

    Attributes:
        a: 较小的站点编号
        b: 较大的站点编号
        orientation: 水平或竖直
        wrap: 是否跨越边界粘合

    Examples:
        >>> Edge(a=0, b=1, orientation=Orientation.HORIZONTAL, wrap=False).pair
        (0, 1)
    """

    model_config = ConfigDict(frozen=True)

    a: SiteId = Field(ge=0, description="较小的站点编号")
    b: SiteId = Field(ge=0, description="较大的站点编号")
    orientation: Orientation
    wrap: bool = False

    @model_validator(mode="after")
    def validate_order(self) -> "Edge":
        """边端点必须满足 a < b"""
        if self.a >= self.b:
            raise ValueError(f"edge endpoints must satisfy a < b, got ({self.a}, {self.b})")
        return self

    @property
    def pair(self) -> tuple[SiteId, SiteId]:
        return (self.a, self.b)


class Lattice(BaseModel):
    """
    n×n 晶格

    构造后不可变，可在并发worker之间只读共享。边按 (a, b) 字典序排列，
    边在列表中的位置即为边编号 (覆盖与强度均按此编号引用边)。

    Attributes:
        n: 边长, 站点数 N = n²
        boundary: 边界条件
        edges: 2n² 条边
    """

    model_config = ConfigDict(
        frozen=True,
        json_schema_extra={
            "example": {"n": 3, "boundary": "torus", "edges": [[0, 1], [0, 2], [0, 3]]}
        },
    )

    n: int = Field(ge=3, description="边长")
    boundary: BoundaryCondition
    edges: tuple[Edge, ...]

    _index: dict[tuple[int, int], int] = PrivateAttr(default_factory=dict)

    @model_validator(mode="after")
    def validate_edges(self) -> "Lattice":
        """
        验证边集合

        Raises:
            ValueError: 边数不等于2n²、存在重复边、未排序或站点度数不为4
        """
        num_sites = self.n * self.n
        if len(self.edges) != 2 * num_sites:
            raise ValueError(f"expected {2 * num_sites} edges, got {len(self.edges)}")

        pairs = [edge.pair for edge in self.edges]
        if len(set(pairs)) != len(pairs):
            raise ValueError("edge list contains duplicate pairs")
        if pairs != sorted(pairs):
            raise ValueError("edge list must be sorted lexicographically")

        degree = [0] * num_sites
        for a, b in pairs:
            if b >= num_sites:
                raise ValueError(f"site {b} out of range for n={self.n}")
            degree[a] += 1
            degree[b] += 1
        if any(d != 4 for d in degree):
            raise ValueError("every site must have exactly 4 incident edges")
        return self

    def model_post_init(self, __context: Any) -> None:
        self._index = {edge.pair: k for k, edge in enumerate(self.edges)}

    @property
    def num_sites(self) -> int:
        return self.n * self.n

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def edge_index(self, a: SiteId, b: SiteId) -> int:
        """
        查找无序站点对对应的边编号

        Raises:
            KeyError: 两站点不相邻
        """
        key = (a, b) if a < b else (b, a)
        return self._index[key]

    def has_edge(self, a: SiteId, b: SiteId) -> bool:
        key = (a, b) if a < b else (b, a)
        return key in self._index

    def to_json_dict(self) -> dict[str, Any]:
        """序列化为 {"n", "boundary", "edges": [[a, b], ...]}"""
        return {
            "n": self.n,
            "boundary": self.boundary.value,
            "edges": [[edge.a, edge.b] for edge in self.edges],
        }
