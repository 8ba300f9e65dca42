"""存储层模块"""
from src.storage.covering_repository import CoveringRepository
from src.storage.json_store import LocalJSONStore
from src.storage.result_repository import BoundCache, ResultRepository

__all__ = [
    'LocalJSONStore',
    'CoveringRepository',
    'ResultRepository',
    'BoundCache',
]
