#!/usr/bin/env python3
"""
偏差核模块
ψ(x,y) = f(xy) − f(x)g(y) − g(x)f(y) − h(x)h(y) 及正弦/余弦/Cauchy/中心偏差的窗口点对扫描
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

from funcspace import (
    DEFAULT_SCHEDULE,
    DEFAULT_TAU,
    ZERO_SUP,
    BoundVerdict,
    GFunction,
    abs_float,
    check_schedule,
    inverse_character,
    precision_scope,
    verdict_from_trace,
)
from group_core import GroupSpec, as_element, element_to_json, mul, window_array, window_size
from logger_config import get_logger, log_scan

logger = get_logger(__name__)

PAIR_CAP = 10 ** 7
BLOCK_PAIRS = 2 ** 20

COSINE_SINE = "cosine_sine"
SINE = "sine"
COSINE = "cosine"
CAUCHY = "cauchy"
CENTRAL = "central"
MULTIPLICATIVE = "multiplicative"
M_SINE = "m_sine"
SIDE_CONDITION = "side_condition"


@dataclass
class DeviationReport:
    """点对扫描结果: 最大半径上的 sup、argmax 点对与逐半径轨迹"""
    sup: float
    argmax: Tuple[object, object]
    radius: int
    trace: List[Tuple[int, float]]
    kernel: str
    group: GroupSpec = field(repr=False, default=None)
    scale: float = 0.0
    subsampled: bool = False
    stride: int = 1

    def verdict(self, tau: float = DEFAULT_TAU, slack: float = 0.0) -> BoundVerdict:
        return verdict_from_trace(self.trace, tau, ZERO_SUP * max(1.0, self.scale), slack)

    def to_json(self) -> dict:
        x, y = self.argmax
        out = {
            "sup": self.sup,
            "argmax": [element_to_json(self.group, x), element_to_json(self.group, y)],
            "radius": self.radius,
            "trace": [[r, s] for r, s in self.trace],
            "kernel": self.kernel,
        }
        if self.subsampled:
            out["subsampled"] = True
            out["stride"] = self.stride
        return out


class PairBlock:
    """
    一块点对 (xs × ys) 上的函数取值缓存

    x(F) 形状 (B,1), y(F) 形状 (1,n), xy(F)/yx(F) 形状 (B,n);
    核函数只通过这四个方法取值, 因而在 complex128 与 mpc 数组上写法相同。
    """

    def __init__(self, group: GroupSpec, xs: np.ndarray, ys: np.ndarray, extended: bool):
        self.group = group
        self.xs = xs
        self.ys = ys
        self.extended = extended
        self._cache: Dict[Tuple[str, int], np.ndarray] = {}

    def _cached(self, key: str, F: GFunction, compute: Callable[[], np.ndarray]) -> np.ndarray:
        slot = (key, id(F))
        if slot not in self._cache:
            self._cache[slot] = compute()
        return self._cache[slot]

    def x(self, F: GFunction) -> np.ndarray:
        return self._cached("x", F, lambda: F.values(self.xs, self.extended)[:, None])

    def y(self, F: GFunction) -> np.ndarray:
        return self._cached("y", F, lambda: F.values(self.ys, self.extended)[None, :])

    def xy(self, F: GFunction) -> np.ndarray:
        return self._cached("xy", F, lambda: self._products(F, swap=False))

    def yx(self, F: GFunction) -> np.ndarray:
        if self.group.is_abelian():
            return self.xy(F)
        return self._cached("yx", F, lambda: self._products(F, swap=True))

    def _products(self, F: GFunction, swap: bool) -> np.ndarray:
        B, n = len(self.xs), len(self.ys)
        if self.group.is_finite:
            table = self.group.table_array
            if swap:
                idx = table[self.ys[None, :], self.xs[:, None]]
            else:
                idx = table[self.xs[:, None], self.ys[None, :]]
            every = F.values(np.arange(self.group.order, dtype=np.int64), self.extended)
            return every[idx]
        sums = (self.xs[:, None, :] + self.ys[None, :, :]).reshape(-1, self.group.dim)
        uniq, inv = np.unique(sums, axis=0, return_inverse=True)
        vals = F.values(uniq, self.extended)
        return vals[inv.reshape(-1)].reshape(B, n)


Kernel = Callable[[PairBlock], np.ndarray]


def pair_points(group: GroupSpec, radius: int) -> Tuple[np.ndarray, int]:
    """点对扫描用的窗口; 点对数超过 PAIR_CAP 时按确定步长抽稀"""
    n = window_size(group, radius)
    if n * n <= PAIR_CAP:
        return window_array(group, radius), 1
    if group.is_finite:
        stride = math.ceil(n / math.isqrt(PAIR_CAP))
        return window_array(group, radius)[::stride], stride
    per_axis = max(2, int(math.isqrt(PAIR_CAP) ** (1.0 / group.dim)))
    stride = max(1, math.ceil(2 * radius / (per_axis - 1)))
    return window_array(group, radius, stride), stride


def _scan_window(kernel: Kernel, group: GroupSpec, points: np.ndarray, extended: bool) -> Tuple[float, tuple]:
    n = len(points)
    rows = max(1, BLOCK_PAIRS // max(1, n))
    best, best_pair = -1.0, None
    for start in range(0, n, rows):
        xs = points[start:start + rows]
        block = PairBlock(group, xs, points, extended)
        mags = abs_float(np.broadcast_to(kernel(block), (len(xs), n)))
        flat = int(np.argmax(mags))
        i, j = divmod(flat, n)
        if mags[i, j] > best:
            best = float(mags[i, j])
            best_pair = (as_element(group, xs[i]), as_element(group, points[j]))
    return best, best_pair


def scan_pairs(kernel: Kernel, functions: Sequence[GFunction], schedule: Sequence[int] = DEFAULT_SCHEDULE,
               name: str = "custom", scale: float = 0.0) -> DeviationReport:
    """
    在逐级窗口上扫描 |kernel(x, y)| 的最大值

    Args:
        kernel: 以 PairBlock 为参数的核
        functions: 核中出现的全部函数(用于选择精度)
        schedule: 半径序列
        name: 核名
        scale: 核中各项的量级上界, 用于判定时的零阈值

    Returns:
        DeviationReport: 轨迹取累计最大值, 因而随半径不减
    """
    schedule = check_schedule(schedule)
    group = functions[0].group
    radius = schedule[-1]
    best, best_pair = -1.0, None
    trace: List[Tuple[int, float]] = []
    subsampled, stride_used = False, 1
    with precision_scope(functions, radius) as extended:
        finite_result = None
        for r in schedule:
            if group.is_finite and finite_result is not None:
                trace.append((r, best))
                continue
            points, stride = pair_points(group, r)
            if stride > 1:
                subsampled, stride_used = True, stride
                logger.warning(f"{name} 扫描半径 {r} 超过点对上限, 抽稀步长 {stride}")
            sup, pair = _scan_window(kernel, group, points, extended)
            if sup > best:
                best, best_pair = sup, pair
            trace.append((r, best))
            log_scan(name, r, len(points) ** 2, best)
            if group.is_finite:
                finite_result = best
    return DeviationReport(sup=best, argmax=best_pair, radius=radius, trace=trace, kernel=name,
                           group=group, scale=scale, subsampled=subsampled, stride=stride_used)


# ==================== 具体的核 ====================

def psi_point(f: GFunction, g: GFunction, h: GFunction, x, y) -> complex:
    """ψ(x,y) 的逐点求值"""
    xy = mul(f.group, x, y)
    return f.eval(xy) - f.eval(x) * g.eval(y) - g.eval(x) * f.eval(y) - h.eval(x) * h.eval(y)


def psi_kernel(f: GFunction, g: GFunction, h: GFunction) -> Kernel:
    return lambda b: b.xy(f) - b.x(f) * b.y(g) - b.x(g) * b.y(f) - b.x(h) * b.y(h)


def _scale(radius: int, *terms: Tuple[GFunction, ...]) -> float:
    """各乘积项量级上界之和, 第一项按 xy 的半径 2r 计"""
    total = 0.0
    for k, term in enumerate(terms):
        r = 2 * radius if k == 0 else radius
        total += math.prod(F.magnitude(r) for F in term)
    return total


def sup_deviation(f: GFunction, g: GFunction, h: GFunction,
                  schedule: Sequence[int] = DEFAULT_SCHEDULE) -> DeviationReport:
    radius = check_schedule(schedule)[-1]
    scale = _scale(radius, (f,), (f, g), (g, f), (h, h))
    return scan_pairs(psi_kernel(f, g, h), [f, g, h], schedule, COSINE_SINE, scale)


def sine_deviation(f0: GFunction, g0: GFunction, schedule: Sequence[int] = DEFAULT_SCHEDULE) -> DeviationReport:
    """f₀(xy) − f₀(x)g₀(y) − g₀(x)f₀(y)"""
    radius = check_schedule(schedule)[-1]
    kernel = lambda b: b.xy(f0) - b.x(f0) * b.y(g0) - b.x(g0) * b.y(f0)
    return scan_pairs(kernel, [f0, g0], schedule, SINE, _scale(radius, (f0,), (f0, g0), (g0, f0)))


def cosine_deviation(f0: GFunction, g0: GFunction, schedule: Sequence[int] = DEFAULT_SCHEDULE) -> DeviationReport:
    """f₀(xy) − f₀(x)f₀(y) + g₀(x)g₀(y)"""
    radius = check_schedule(schedule)[-1]
    kernel = lambda b: b.xy(f0) - b.x(f0) * b.y(f0) + b.x(g0) * b.y(g0)
    return scan_pairs(kernel, [f0, g0], schedule, COSINE, _scale(radius, (f0,), (f0, f0), (g0, g0)))


def m_sine_deviation(H: GFunction, m: GFunction, schedule: Sequence[int] = DEFAULT_SCHEDULE) -> DeviationReport:
    """H(xy) − H(x)m(y) − m(x)H(y), 即以 m 为 g₀ 的正弦核"""
    report = sine_deviation(H, m, schedule)
    report.kernel = M_SINE
    return report


def cauchy_defect(f: GFunction, schedule: Sequence[int] = DEFAULT_SCHEDULE) -> DeviationReport:
    """f(xy) − f(x) − f(y)"""
    radius = check_schedule(schedule)[-1]
    kernel = lambda b: b.xy(f) - b.x(f) - b.y(f)
    return scan_pairs(kernel, [f], schedule, CAUCHY, _scale(radius, (f,), (f,), (f,)))


def central_defect(f: GFunction, schedule: Sequence[int] = DEFAULT_SCHEDULE) -> DeviationReport:
    """f(xy) − f(yx); 交换群上恒为 0"""
    schedule = check_schedule(schedule)
    group = f.group
    if group.is_abelian():
        e = group.identity()
        return DeviationReport(sup=0.0, argmax=(e, e), radius=schedule[-1],
                               trace=[(r, 0.0) for r in schedule], kernel=CENTRAL, group=group)
    kernel = lambda b: b.xy(f) - b.yx(f)
    return scan_pairs(kernel, [f], schedule, CENTRAL, _scale(schedule[-1], (f,), (f,)))


def multiplicative_kernel(m: GFunction) -> Kernel:
    return lambda b: b.xy(m) - b.x(m) * b.y(m)


def side_condition_deviation(f: GFunction, m: GFunction, a: GFunction, b: GFunction,
                             schedule: Sequence[int] = DEFAULT_SCHEDULE) -> DeviationReport:
    """
    记 F = f·m⁻¹ − ½a², 扫描
    F(xy) − F(x) − F(y) − a(x)b(y)m⁻¹(y) − a(y)b(x)m⁻¹(x)
    """
    radius = check_schedule(schedule)[-1]
    m_inv = GFunction(m.group, inverse_character(m.desc))
    F = f * m_inv - a * a * 0.5
    bm = b * m_inv
    kernel = lambda blk: blk.xy(F) - blk.x(F) - blk.y(F) - blk.x(a) * blk.y(bm) - blk.y(a) * blk.x(bm)
    scale = _scale(radius, (F,), (F,), (F,), (a, bm), (a, bm))
    return scan_pairs(kernel, [F, a, bm], schedule, SIDE_CONDITION, scale)


def psi_sampler(f: GFunction, g: GFunction, h: GFunction) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
    """返回 (xs, ys) ↦ ψ 矩阵 的二元采样器"""
    kernel = psi_kernel(f, g, h)

    def sample(xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        block = PairBlock(f.group, xs, ys, extended=False)
        return np.broadcast_to(kernel(block), (len(xs), len(ys)))

    return sample
