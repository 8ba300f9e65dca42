"""
Pytest配置和共享fixtures

晶格与覆盖枚举结果在session内共享 (构造后不可变)。
"""
import logging
import os

import pytest

from src.config import get_settings
from src.models.lattice import BoundaryCondition
from src.services.dimer_service import classify, enumerate_maximal
from src.services.lattice_service import build_lattice
from src.storage.json_store import LocalJSONStore


@pytest.fixture(scope="session")
def torus3():
    """3×3 环面"""
    return build_lattice(3, BoundaryCondition.TORUS)


@pytest.fixture(scope="session")
def klein3():
    """3×3 克莱因瓶"""
    return build_lattice(3, BoundaryCondition.KLEIN)


@pytest.fixture(scope="session")
def torus4():
    """4×4 环面"""
    return build_lattice(4, BoundaryCondition.TORUS)


@pytest.fixture(scope="session")
def klein4():
    """4×4 克莱因瓶"""
    return build_lattice(4, BoundaryCondition.KLEIN)


@pytest.fixture(scope="session")
def torus3_coverings(torus3):
    return enumerate_maximal(torus3)


@pytest.fixture(scope="session")
def klein3_coverings(klein3):
    return enumerate_maximal(klein3)


@pytest.fixture(scope="session")
def torus4_coverings(torus4):
    return enumerate_maximal(torus4)


@pytest.fixture(scope="session")
def klein4_coverings(klein4):
    return enumerate_maximal(klein4)


@pytest.fixture(scope="session")
def torus3_classes(torus3_coverings):
    return classify(torus3_coverings, BoundaryCondition.TORUS)


@pytest.fixture(scope="session")
def klein3_classes(klein3_coverings):
    return classify(klein3_coverings, BoundaryCondition.KLEIN)


@pytest.fixture
def store(tmp_path):
    """临时目录上的JSON存储"""
    return LocalJSONStore(tmp_path / "cache")


@pytest.fixture(autouse=True)
def clean_settings(monkeypatch):
    """每个测试使用干净的配置 (不读取宿主环境中的 DIMER_BELL_*)"""
    for key in list(os.environ):
        if key.startswith("DIMER_BELL_"):
            monkeypatch.delenv(key, raising=False)
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def restore_root_logger():
    """configure_logging 会替换root handler, 测试后复原"""
    root = logging.getLogger()
    handlers, level = root.handlers[:], root.level
    yield root
    for handler in root.handlers[:]:
        root.removeHandler(handler)
    for handler in handlers:
        root.addHandler(handler)
    root.setLevel(level)
