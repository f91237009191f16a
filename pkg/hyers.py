#!/usr/bin/env python3
"""
Hyers 投影模块
ℤ^d 上的二进加性投影 a(x) = lim f(2ⁿx)/2ⁿ、乘性扭转 f·m⁻¹, 以及 2f·m⁻¹ − a² 的加性/有界分解
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import mpmath
import numpy as np

from deviation import cauchy_defect
from errors import InvalidParams, NotLattice, Overflow, UnboundedCauchyDefect
from funcspace import (
    DEFAULT_SCHEDULE,
    DEFAULT_TAU,
    FIT_MAGNITUDE_LIMIT,
    Additive,
    BoundVerdict,
    FnDescriptor,
    GFunction,
    Zero,
    boundedness,
    complex_to_json,
    inverse_character,
    is_multiplicative,
    is_zero_descriptor,
    sup_norm,
)
from logger_config import get_logger

logger = get_logger(__name__)

DEFAULT_DEPTH = 40
DEFAULT_TOL = 1e-9
MAX_DEPTH = 40
CHECK_RADIUS = 32
GUARD_DIGITS = 30


@dataclass
class HyersResult:
    """加性部分 a(x) = Σ cⱼxⱼ 及其 Hyers 证书"""
    coeffs: Tuple[complex, ...]
    delta: float
    residual_bound: float
    iterations: int
    truncated: bool = False

    @property
    def additive(self) -> FnDescriptor:
        if not self.coeffs:
            return Zero()
        return Additive(self.coeffs)

    def function(self, group) -> GFunction:
        return GFunction(group, self.additive)

    def to_json(self) -> dict:
        return {
            "coeffs": [complex_to_json(c) for c in self.coeffs],
            "delta": self.delta,
            "residual_bound": self.residual_bound,
            "iterations": self.iterations,
            "truncated": self.truncated,
        }


def _dyadic_values(f: GFunction, n: int) -> List:
    """f(2ⁿeⱼ)/2ⁿ, 按 2ⁿ 处的量级给足十进制位数"""
    step = 2 ** n
    dim = f.group.dim
    points = np.zeros((dim, dim), dtype=np.int64)
    np.fill_diagonal(points, step)
    digits = int(math.ceil(math.log10(max(1.0, f.magnitude(step)))))
    with mpmath.workdps(max(GUARD_DIGITS + digits, mpmath.mp.dps)):
        return [v / step for v in f.values(points, extended=True)]


def additive_part(f: GFunction, depth: int = DEFAULT_DEPTH, tol: float = DEFAULT_TOL,
                  schedule: Sequence[int] = DEFAULT_SCHEDULE, tau: float = DEFAULT_TAU,
                  slack: float = 0.0) -> HyersResult:
    """
    二进 Hyers 投影

    对每个生成元 eⱼ 迭代 qₙ = f(2ⁿeⱼ)/2ⁿ, 相邻两次在所有生成元上相差 < tol 即停;
    到达 depth 仍未收敛时取相差最小的一对。

    Args:
        f: Cauchy 差有界的函数
        depth: 最大二进深度, 上限 40
        tol: 收敛阈值
        schedule: Cauchy 差有界性判定的半径序列
        tau: 增长阈值
        slack: Cauchy 差判定的爬升容差

    Returns:
        HyersResult: 系数、δ 证书、窗口 32 上的残差、迭代次数
    """
    if not f.group.is_lattice:
        raise NotLattice("dyadic projection is defined on lattices")
    if depth < 1:
        raise InvalidParams(f"depth must be at least 1, got {depth}")
    if depth > MAX_DEPTH:
        raise Overflow(f"depth {depth} exceeds the cap {MAX_DEPTH} on 2^n·x")

    report = cauchy_defect(f, schedule)
    verdict = report.verdict(tau, slack)
    if not verdict.is_bounded:
        raise UnboundedCauchyDefect(f"Cauchy defect is {verdict.kind} "
                                    f"(trace {[round(s, 6) for _, s in verdict.trace]})")
    delta = report.sup

    truncated = False
    prev = _dyadic_values(f, 0)
    best_gap, best, iterations = math.inf, prev, 0
    for n in range(1, depth + 1):
        if f.grows() and f.magnitude(2 ** n) > FIT_MAGNITUDE_LIMIT:
            truncated = True
            logger.warning(f"二进探针在 2^{n} 处超过量级上限, 截断")
            break
        cur = _dyadic_values(f, n)
        gap = float(max(abs(c - p) for c, p in zip(cur, prev)))
        if gap < best_gap:
            best_gap, best, iterations = gap, cur, n
        if gap < tol:
            break
        prev = cur
    else:
        logger.info(f"二进迭代未在 {depth} 步内收敛, 取最接近的一对 (差 {best_gap:.3g})")

    coeffs = tuple(complex(c) for c in best)
    result = HyersResult(coeffs, delta, 0.0, iterations, truncated)
    result.residual_bound, _ = sup_norm(f - result.function(f.group), CHECK_RADIUS)
    logger.info(f"加性部分 {[f'{c:.10g}' for c in coeffs]}, δ={delta:.4g}, "
                f"残差 {result.residual_bound:.4g}, 迭代 {iterations}")
    return result


def twist_by_character(f: GFunction, m: Union[GFunction, FnDescriptor]) -> GFunction:
    """x ↦ f(x)·m(x)⁻¹"""
    desc = m.desc if isinstance(m, GFunction) else m
    return f * GFunction(f.group, inverse_character(desc))


@dataclass
class QuadraticSplit:
    """2f·m⁻¹ − a² = a₁ + b₀ 的分解结果"""
    a1: FnDescriptor
    b_bound: float
    hyers: HyersResult
    remainder: Optional[GFunction] = field(default=None, repr=False)
    verdict: Optional[BoundVerdict] = None

    def to_json(self) -> dict:
        out = {"a1": self.a1.to_json(), "b_bound": self.b_bound, "hyers": self.hyers.to_json()}
        if self.verdict is not None:
            out["verdict"] = self.verdict.to_json()
        return out


def quadratic_split(f: GFunction, m: Union[GFunction, FnDescriptor], a: Union[GFunction, FnDescriptor],
                    depth: int = DEFAULT_DEPTH, tol: float = DEFAULT_TOL,
                    schedule: Sequence[int] = DEFAULT_SCHEDULE, tau: float = DEFAULT_TAU,
                    slack: float = 0.0) -> QuadraticSplit:
    """
    f = ½a²m + ½a₁m + b 中 a₁ 与 b 的恢复

    r = 2·f·m⁻¹ − a² 送入 additive_part 得 a₁; b₀ = r − a₁ 的窗口 32 上界为 b_bound,
    并对 b₀ 做有界性判定
    """
    if not f.group.is_lattice:
        raise NotLattice("quadratic split is defined on lattices")
    m_desc = m.desc if isinstance(m, GFunction) else m
    if not is_multiplicative(m_desc):
        raise InvalidParams(f"{m_desc.op} descriptor is not multiplicative")
    if is_zero_descriptor(m_desc):
        raise InvalidParams("m must be nonzero")
    if not boundedness(GFunction(f.group, m_desc), schedule, tau).is_bounded:
        raise InvalidParams("m must be bounded")
    a_fn = a if isinstance(a, GFunction) else GFunction(f.group, a)

    r = twist_by_character(f, m_desc) * 2 - a_fn * a_fn
    hyers = additive_part(r, depth, tol, schedule, tau, slack)
    remainder = r - hyers.function(f.group)
    b_bound, _ = sup_norm(remainder, CHECK_RADIUS)
    verdict = boundedness(remainder, schedule, tau, slack)
    logger.info(f"二次分解: a₁={[f'{c:.6g}' for c in hyers.coeffs]}, b 上界 {b_bound:.4g} ({verdict.kind})")
    return QuadraticSplit(hyers.additive, b_bound, hyers, remainder, verdict)
