"""dimer-bell: 二聚体覆盖上的CHSH贝尔不等式分析"""

__version__ = "1.0.0"
