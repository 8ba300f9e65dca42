"""
Dimer覆盖模型定义

最大二聚体覆盖、对称操作、覆盖类 (群轨道) 及其文件格式。
"""

import hashlib
import json
from enum import Enum
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .lattice import BoundaryCondition


class SymmetryOp(str, Enum):
    """边界条件对称群的生成元"""

    RIGHT_SHIFT = "right_shift"
    UP_SHIFT = "up_shift"
    VERTICAL_MIRROR = "vertical_mirror"
    HORIZONTAL_MIRROR = "horizontal_mirror"
    ROTATION_90 = "rotation_90"
    KB_RIGHT_SHIFT = "kb_right_shift"
    KB_VERTICAL_MIRROR = "kb_vertical_mirror"


TORUS_GENERATORS: tuple[SymmetryOp, ...] = (
    SymmetryOp.RIGHT_SHIFT,
    SymmetryOp.UP_SHIFT,
    SymmetryOp.VERTICAL_MIRROR,
    SymmetryOp.HORIZONTAL_MIRROR,
    SymmetryOp.ROTATION_90,
)

KLEIN_GENERATORS: tuple[SymmetryOp, ...] = (
    SymmetryOp.KB_RIGHT_SHIFT,
    SymmetryOp.KB_VERTICAL_MIRROR,
)


def generators_for(boundary: BoundaryCondition) -> tuple[SymmetryOp, ...]:
    """返回边界条件对应的生成元集合"""
    if boundary is BoundaryCondition.TORUS:
        return TORUS_GENERATORS
    return KLEIN_GENERATORS


class DimerCovering(BaseModel):
    """
    最大二聚体覆盖

    Attributes:
        n: 晶格边长
        boundary: 边界条件
        dimer_edges: 升序排列的边编号

    Examples:
        >>> cov = DimerCovering(n=3, boundary="torus", dimer_edges=(0, 7, 12, 15))
        >>> cov.lattice_ref
        (3, <BoundaryCondition.TORUS: 'torus'>)
    """

    model_config = ConfigDict(frozen=True)

    n: int = Field(ge=3)
    boundary: BoundaryCondition
    dimer_edges: tuple[int, ...]

    @field_validator("dimer_edges")
    @classmethod
    def validate_sorted(cls, v: tuple[int, ...]) -> tuple[int, ...]:
        """边编号必须严格升序且非负"""
        if any(e < 0 for e in v):
            raise ValueError("edge indices must be non-negative")
        if any(v[k] >= v[k + 1] for k in range(len(v) - 1)):
            raise ValueError("dimer_edges must be strictly increasing")
        return v

    @model_validator(mode="after")
    def validate_cardinality(self) -> "DimerCovering":
        """最大覆盖恰有 ⌊n²/2⌋ 个二聚体"""
        expected = (self.n * self.n) // 2
        if len(self.dimer_edges) != expected:
            raise ValueError(
                f"maximum covering of {self.n}x{self.n} needs {expected} dimers, "
                f"got {len(self.dimer_edges)}"
            )
        return self

    @property
    def lattice_ref(self) -> tuple[int, BoundaryCondition]:
        return (self.n, self.boundary)

    @property
    def covering_id(self) -> str:
        """排序后边编号列表的SHA-256"""
        payload = json.dumps(list(self.dimer_edges), separators=(",", ":"))
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


class CoveringClass(BaseModel):
    """
    覆盖类 (对称群的一个轨道)

    Attributes:
        class_id: 按发现顺序编号
        representative: 代表元 (成员中编号最小者)
        representative_index: 代表元在覆盖列表中的下标
        members: 成员在覆盖列表中的下标 (升序)
        size: 成员数
    """

    class_id: int = Field(ge=0)
    representative: DimerCovering
    representative_index: int = Field(ge=0)
    members: list[int] = Field(min_length=1)
    size: int = Field(ge=1)

    @model_validator(mode="after")
    def validate_members(self) -> "CoveringClass":
        if self.size != len(self.members):
            raise ValueError(f"size {self.size} != number of members {len(self.members)}")
        if self.representative_index not in self.members:
            raise ValueError("representative must be a member of its class")
        return self


class OrbitEdge(BaseModel):
    """DFS过程中发现的轨道图有向边: source --op--> target"""

    model_config = ConfigDict(frozen=True)

    source: int
    op: SymmetryOp
    target: int


class ClassStatistics(BaseModel):
    """
    分类统计

    Attributes:
        num_classes: 类数
        min_size / max_size: 最小、最大类大小
        total_coverings: 覆盖总数
        size_histogram: 类大小 -> 该大小的类数
        fixed_point_classes: 大小为1的类 (整个群的不动点)
    """

    n: int
    boundary: BoundaryCondition
    num_classes: int
    min_size: int
    max_size: int
    total_coverings: int
    size_histogram: dict[int, int]
    fixed_point_classes: list[int] = Field(default_factory=list)

    model_config = {
        "json_schema_extra": {
            "example": {
                "n": 3,
                "boundary": "torus",
                "num_classes": 3,
                "min_size": 18,
                "max_size": 36,
                "total_coverings": 72,
                "size_histogram": {"18": 2, "36": 1},
                "fixed_point_classes": [],
            }
        }
    }


class CoveringFile(BaseModel):
    """覆盖文件: {"n", "boundary", "coverings": [[edge_idx, ...], ...]}"""

    n: int = Field(ge=3)
    boundary: BoundaryCondition
    coverings: list[list[int]]

    @classmethod
    def from_coverings(
        cls, n: int, boundary: BoundaryCondition, coverings: list[DimerCovering]
    ) -> "CoveringFile":
        return cls(n=n, boundary=boundary, coverings=[list(c.dimer_edges) for c in coverings])

    def to_coverings(self) -> list[DimerCovering]:
        return [
            DimerCovering(n=self.n, boundary=self.boundary, dimer_edges=tuple(edges))
            for edges in self.coverings
        ]

    def to_json_dict(self) -> dict[str, Any]:
        return self.model_dump(mode="json")


class ClassEntry(BaseModel):
    id: int
    representative: int
    members: list[int]


class ClassFile(BaseModel):
    """类文件: {"classes": [{"id", "representative", "members"}, ...]}"""

    classes: list[ClassEntry]

    @classmethod
    def from_classes(cls, classes: list[CoveringClass]) -> "ClassFile":
        return cls(
            classes=[
                ClassEntry(id=c.class_id, representative=c.representative_index, members=c.members)
                for c in classes
            ]
        )

    def to_classes(self, coverings: list[DimerCovering]) -> list[CoveringClass]:
        """
        结合覆盖列表重建CoveringClass

        Raises:
            ValueError: 成员或代表元下标越界
        """
        result = []
        for entry in self.classes:
            indices = [*entry.members, entry.representative]
            if any(m < 0 or m >= len(coverings) for m in indices):
                raise ValueError(f"class {entry.id} references a covering outside the list")
            result.append(
                CoveringClass(
                    class_id=entry.id,
                    representative=coverings[entry.representative],
                    representative_index=entry.representative,
                    members=entry.members,
                    size=len(entry.members),
                )
            )
        return result
