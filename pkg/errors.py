#!/usr/bin/env python3
"""
错误类型
所有库函数抛出 StabilityError 的子类, 命令行层统一捕获并以退出码 2 结束
"""

from typing import Any, Optional, Tuple


class StabilityError(ValueError):
    """实验室内所有可预期错误的基类"""


class ElementMismatch(StabilityError):
    """元素与群的类型或维数不符"""


class Overflow(StabilityError, OverflowError):
    """格点坐标超出 64 位范围, 或 ExpChar 指数超出双精度范围"""


class _IndexedError(StabilityError):
    def __init__(self, message: str, indices: Optional[Tuple[Any, ...]] = None):
        super().__init__(message)
        self.indices = indices


class NotAssociative(_IndexedError):
    """乘法表违反结合律, indices 为出错的三元组 (a, b, c)"""


class NoIdentity(_IndexedError):
    """乘法表没有单位元"""


class NonInvertible(_IndexedError):
    """乘法表某行或某列不是置换, indices 为 ("row"|"col", 序号)"""


class BadSchedule(StabilityError):
    """半径序列不严格递增或长度不足"""


class InconclusiveDependence(StabilityError):
    """残差有界性判定为 Inconclusive, 不做强行归类"""

    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = trace or []


class InvalidParams(StabilityError):
    """参数违反所选情形的约束"""


class NotLattice(StabilityError):
    """操作只对格点群 ℤ^d 有定义"""


class UnboundedCauchyDefect(StabilityError):
    """Cauchy 差不有界, Hyers 投影无从谈起"""


class ZeroCharacter(StabilityError):
    """乘性函数恒为零, 不能求逆"""


class DegenerateGram(StabilityError):
    """f 与 h 在窗口上线性相关, Gram 行列式过小"""


class NotFinite(StabilityError):
    """操作只对有限群有定义"""


class TooLarge(StabilityError):
    """群的阶超出穷举上限"""


class MalformedInput(StabilityError):
    """命令行输入(JSON 夹具或参数)格式错误"""
