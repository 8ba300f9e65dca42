"""覆盖与覆盖类仓库"""
import logging

from pydantic import ValidationError

from ..models.dimer import ClassFile, CoveringClass, CoveringFile, DimerCovering
from ..models.lattice import BoundaryCondition
from .json_store import LocalJSONStore, content_hash

logger = logging.getLogger(__name__)


def lattice_key(n: int, boundary: BoundaryCondition) -> str:
    return f"{n}x{n}_{BoundaryCondition(boundary).value}"


class CoveringRepository:
    """
    覆盖仓库类

    负责覆盖文件与类文件的持久化和检索, 并给出它们的内容哈希
    (结果文件据此引用输入)。
    """

    def __init__(self, store: LocalJSONStore):
        """
        初始化覆盖仓库

        Args:
            store: JSON存储实例
        """
        self.store = store

    def _coverings_key(self, n: int, boundary: BoundaryCondition) -> str:
        return f"{LocalJSONStore.COVERINGS_PREFIX}{lattice_key(n, boundary)}.json"

    def _classes_key(self, n: int, boundary: BoundaryCondition) -> str:
        return f"{LocalJSONStore.CLASSES_PREFIX}{lattice_key(n, boundary)}.json"

    def save_coverings(
        self, n: int, boundary: BoundaryCondition, coverings: list[DimerCovering]
    ) -> str:
        """
        保存覆盖文件

        Returns:
            内容哈希
        """
        data = CoveringFile.from_coverings(n, boundary, coverings).to_json_dict()
        return self.store.put_json(self._coverings_key(n, boundary), data)

    def load_coverings(self, n: int, boundary: BoundaryCondition) -> list[DimerCovering] | None:
        """
        读取覆盖文件

        Returns:
            覆盖列表或None

        Raises:
            ValueError: 文件内容不合法
        """
        data = self.store.get_json(self._coverings_key(n, boundary))
        if data is None:
            return None
        try:
            covering_file = CoveringFile(**data)
        except ValidationError as e:
            raise ValueError(f"failed to parse covering file: {e}") from e
        if (covering_file.n, covering_file.boundary) != (n, BoundaryCondition(boundary)):
            raise ValueError("covering file belongs to a different lattice")
        return covering_file.to_coverings()

    def coverings_hash(self, n: int, boundary: BoundaryCondition) -> str | None:
        data = self.store.get_json(self._coverings_key(n, boundary))
        return content_hash(data) if data is not None else None

    def save_classes(
        self, n: int, boundary: BoundaryCondition, classes: list[CoveringClass]
    ) -> str:
        """保存类文件, 返回内容哈希"""
        data = ClassFile.from_classes(classes).model_dump(mode="json")
        return self.store.put_json(self._classes_key(n, boundary), data)

    def load_classes(
        self, n: int, boundary: BoundaryCondition, coverings: list[DimerCovering]
    ) -> list[CoveringClass] | None:
        """
        读取类文件并与覆盖列表对应

        Raises:
            ValueError: 文件内容不合法或与覆盖列表不一致
        """
        data = self.store.get_json(self._classes_key(n, boundary))
        if data is None:
            return None
        try:
            return ClassFile(**data).to_classes(coverings)
        except ValidationError as e:
            raise ValueError(f"failed to parse class file: {e}") from e

    def classes_hash(self, n: int, boundary: BoundaryCondition) -> str | None:
        data = self.store.get_json(self._classes_key(n, boundary))
        return content_hash(data) if data is not None else None
