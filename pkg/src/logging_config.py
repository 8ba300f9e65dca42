"""
日志配置

提供两种输出格式:
- 结构化JSON日志 (批量计算、日志采集)
- 标准文本日志 (本地开发)

日志统一写到stderr, stdout留给CLI表格与JSON输出。
"""
import json
import logging
import sys

# LogRecord 自带属性, 其余均视为 extra= 传入的上下文
_RESERVED_ATTRS = frozenset(
    vars(logging.LogRecord("", logging.INFO, "", 0, "", None, None)).keys()
) | {"message", "asctime"}


class JSONFormatter(logging.Formatter):
    """JSON格式日志formatter

    每条日志记录输出为一行JSON, extra上下文字段合并进顶层。
    """

    def format(self, record: logging.LogRecord) -> str:
        """格式化日志记录为JSON字符串

        Args:
            record: 日志记录对象

        Returns:
            JSON格式的日志字符串
        """
        log_data = {
            "timestamp": self.formatTime(record, self.datefmt),
            "level": record.levelname,
            "message": record.getMessage(),
            "logger": record.name,
            "module": record.module,
            "function": record.funcName,
            "line": record.lineno,
        }

        # 添加额外的上下文信息
        for key, value in record.__dict__.items():
            if key not in _RESERVED_ATTRS and not key.startswith("_"):
                log_data[key] = value

        if record.exc_info:
            log_data["exception"] = self.formatException(record.exc_info)

        return json.dumps(log_data, ensure_ascii=False, default=str)


def _reset_root(level: str) -> logging.Logger:
    root_logger = logging.getLogger()
    for handler in root_logger.handlers[:]:
        root_logger.removeHandler(handler)
    root_logger.setLevel(getattr(logging, level.upper()))
    return root_logger


def configure_json_logging(log_level: str = "INFO") -> None:
    """配置JSON格式日志

    Args:
        log_level: 日志级别 (DEBUG, INFO, WARNING, ERROR, CRITICAL)
    """
    root_logger = _reset_root(log_level)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(JSONFormatter())
    root_logger.addHandler(handler)


def configure_standard_logging(log_level: str = "INFO") -> None:
    """配置标准格式日志 (开发环境)

    Args:
        log_level: 日志级别 (DEBUG, INFO, WARNING, ERROR, CRITICAL)
    """
    root_logger = _reset_root(log_level)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(
        logging.Formatter("%(asctime)s - %(name)s - %(levelname)s - %(message)s")
    )
    root_logger.addHandler(handler)


def configure_logging(log_level: str = "INFO", log_format: str = "standard") -> None:
    """按格式名选择日志配置

    Args:
        log_level: 日志级别
        log_format: "json" 或 "standard"

    Raises:
        ValueError: 未知的日志格式或级别
    """
    if not isinstance(getattr(logging, log_level.upper(), None), int):
        raise ValueError(f"Unknown log level: {log_level}")

    if log_format == "json":
        configure_json_logging(log_level)
    elif log_format == "standard":
        configure_standard_logging(log_level)
    else:
        raise ValueError(f"Unknown log format: {log_format}")
