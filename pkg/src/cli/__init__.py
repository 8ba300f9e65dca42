"""CLI工具包"""
from src.cli.main import main

__all__ = ["main"]
