"""
应用配置

使用Pydantic Settings管理环境变量配置 (前缀 DIMER_BELL_)
"""
from functools import lru_cache

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """应用配置类

    从环境变量读取配置，支持.env文件。CLI参数在此基础上覆盖。
    """

    # Logging
    log_level: str = "INFO"
    log_format: str = Field(default="standard", description="standard 或 json")

    # Storage
    cache_dir: str = ".dimer_bell_cache"

    # Enumeration
    max_coverings: int = Field(default=200_000, gt=0)

    # Classical bounds
    bruteforce_max_sites: int = 10
    transfer_max_n: int = 6

    # Quantum solvers
    dense_max_sites: int = 12
    lanczos_max_sites: int = 26
    lanczos_tol: float = 1e-8
    krylov_dim: int = 200
    max_restarts: int = 20
    seed: int = 0

    # Critical coupling search
    root_tol: float = 1e-3
    ratio_tol: float = 1e-3
    eps_min: float = 0.0
    eps_max: float = 2.0
    bracket_low: tuple[float, float] = (0.05, 1.0)
    bracket_high: tuple[float, float] = (1.0, 1.95)
    bracket_growth: float = 1.5
    max_root_iterations: int = 100

    # Orchestration
    jobs: int = Field(default=1, ge=1)

    model_config = SettingsConfigDict(
        env_prefix="DIMER_BELL_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )


@lru_cache()
def get_settings() -> Settings:
    """获取配置单例

    使用lru_cache确保配置只加载一次

    Returns:
        Settings实例
    """
    return Settings()
