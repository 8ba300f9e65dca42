"""
CLI错误处理

把异常映射为退出码并输出统一格式的错误信息:
- 0 成功
- 1 用法错误 (参数、校验、资源上限)
- 2 数值失败 (不收敛、对称闭包失败、退化的经典界等)
- 130 用户中断
"""
import json
import logging
import sys
from typing import Any

from pydantic import ValidationError

from ..exceptions import NumericalError, UsageError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_INTERRUPTED = 130


class CLIUsageError(UsageError):
    """命令行参数错误"""
    pass


class PartialFailureError(NumericalError):
    """批处理中部分类数值失败"""

    def __init__(self, failed_classes: list[int]):
        self.failed_classes = failed_classes
        super().__init__(f"{len(failed_classes)} classes failed: {failed_classes}")


def serialize_validation_error(exc: ValidationError) -> list[dict[str, Any]]:
    """把Pydantic验证错误序列化为可JSON化的列表"""
    errors = []
    for error in exc.errors():
        errors.append(
            {
                "type": error.get("type"),
                "loc": [str(part) for part in error.get("loc", [])],
                "msg": str(error.get("msg", "")),
            }
        )
    return errors


def exit_code_for(exc: BaseException) -> int:
    """异常 -> 退出码"""
    if isinstance(exc, KeyboardInterrupt):
        return EXIT_INTERRUPTED
    if isinstance(exc, NumericalError):
        return EXIT_NUMERICAL
    if isinstance(exc, UsageError | ValidationError | ValueError | FileNotFoundError):
        return EXIT_USAGE
    return EXIT_NUMERICAL


def error_payload(exc: BaseException) -> dict[str, Any]:
    """统一格式: {"error", "message", "details"}"""
    if isinstance(exc, ValidationError):
        return {
            "error": "validation_error",
            "message": "invalid configuration",
            "details": serialize_validation_error(exc),
        }
    details: dict[str, Any] = {}
    result = getattr(exc, "result", None)
    if result is not None and hasattr(result, "model_dump"):
        details["best_result"] = result.model_dump(mode="json")
    kind = "numerical_error" if exit_code_for(exc) == EXIT_NUMERICAL else "usage_error"
    return {"error": kind, "message": str(exc), "details": details}


def handle_error(exc: BaseException) -> int:
    """
    记录并输出错误, 返回退出码

    Args:
        exc: 捕获的异常

    Returns:
        退出码
    """
    code = exit_code_for(exc)
    if code == EXIT_INTERRUPTED:
        print("\n\n操作已取消", file=sys.stderr)
        return code

    if isinstance(exc, UsageError | ValidationError | NumericalError | ValueError):
        logger.debug("Command failed", exc_info=exc)
    else:
        logger.exception("Unhandled exception occurred", exc_info=exc)

    print(f"✗ {type(exc).__name__}", file=sys.stderr)
    print(json.dumps(error_payload(exc), ensure_ascii=False, indent=2), file=sys.stderr)
    return code
