"""
异常层级

各service模块在此基础上定义各自的具体异常; CLI据此映射退出码。
"""


class DimerBellError(Exception):
    """所有领域异常的基类"""
    pass


class UsageError(DimerBellError, ValueError):
    """输入或资源限制错误 (退出码 1)"""
    pass


class NumericalError(DimerBellError, RuntimeError):
    """数值算法失败 (退出码 2)"""
    pass
