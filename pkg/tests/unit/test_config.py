"""
配置与日志单元测试
"""
import json
import logging

import pytest

from src.config import Settings, get_settings
from src.logging_config import JSONFormatter, configure_logging


@pytest.mark.unit
class TestSettings:
    """环境变量配置"""

    def test_defaults(self):
        settings = Settings()
        assert settings.log_level == "INFO"
        assert settings.dense_max_sites == 12
        assert settings.eps_max == 2.0

    def test_env_prefix(self, monkeypatch):
        monkeypatch.setenv("DIMER_BELL_LANCZOS_TOL", "1e-6")
        monkeypatch.setenv("DIMER_BELL_BRACKET_LOW", "[0.1, 0.9]")
        settings = get_settings()
        assert settings.lanczos_tol == 1e-6
        assert settings.bracket_low == (0.1, 0.9)

    def test_cached(self):
        assert get_settings() is get_settings()


@pytest.mark.unit
class TestLogging:
    """日志配置"""

    def test_json_format(self, restore_root_logger):
        configure_logging("DEBUG", "json")
        assert restore_root_logger.level == logging.DEBUG
        assert isinstance(restore_root_logger.handlers[0].formatter, JSONFormatter)

    def test_standard_format(self, restore_root_logger):
        configure_logging("warning", "standard")
        assert restore_root_logger.level == logging.WARNING
        assert len(restore_root_logger.handlers) == 1

    def test_unknown_level(self):
        with pytest.raises(ValueError, match="Unknown log level"):
            configure_logging("LOUD", "standard")

    def test_unknown_format(self):
        with pytest.raises(ValueError, match="Unknown log format"):
            configure_logging("INFO", "xml")

    def test_json_formatter_merges_extra(self):
        record = logging.LogRecord(
            "src.services.critical_service", logging.INFO, __file__, 10, "class %d done", (3,), None
        )
        record.class_id = 3
        data = json.loads(JSONFormatter().format(record))
        assert data["message"] == "class 3 done"
        assert data["level"] == "INFO"
        assert data["class_id"] == 3
        assert data["logger"] == "src.services.critical_service"
