#!/usr/bin/env python3
"""
函数空间模块
群上的复值函数(描述子树)、窗口上的 sup 范数, 以及"有界"与"模有界函数线性相关"的数值判定

求值有两种精度:
- 默认 complex128 的 numpy 向量化求值
- 含指数增长 ExpChar 且量级超过 FLOAT_SCALE_LIMIT 时, 改用 mpmath.mpc 的 object 数组,
  同一套 numpy 表达式在两种 dtype 上都能运行
"""

import cmath
import math
from contextlib import contextmanager
from dataclasses import dataclass, field
from functools import reduce
from typing import ClassVar, List, Optional, Sequence, Tuple

import mpmath
import numpy as np

from errors import (
    BadSchedule,
    ElementMismatch,
    InconclusiveDependence,
    InvalidParams,
    MalformedInput,
    NotLattice,
    Overflow,
    ZeroCharacter,
)
from group_core import GroupSpec, as_element, check_element, element_to_json, window_array, window_size
from logger_config import get_logger

logger = get_logger(__name__)

DEFAULT_SCHEDULE = (16, 32, 64, 128)
DEFAULT_TAU = 0.05
DEFAULT_DILATION = 2 ** 16
ZERO_SUP = 1e-12
FLOAT_SCALE_LIMIT = 1e10
FIT_MAGNITUDE_LIMIT = 1e15
EXTENDED_FIT_LIMIT = 1e280
FIT_BASE_CAP = 4096
WINDOW_CAP = 2_000_000
MAGNITUDE_CAP = 1e300
EXP_GUARD = 700.0
MULT_TOL = 1e-9
MASK64 = 2 ** 64 - 1

BOUNDED = "bounded"
UNBOUNDED = "unbounded"
INCONCLUSIVE = "inconclusive"
DEPENDENT = "dependent"
INDEPENDENT = "independent"

SCALAR_TYPES = (int, float, complex, np.number, mpmath.mpf, mpmath.mpc)


# ==================== 复数与 JSON ====================

def complex_to_json(c) -> List[float]:
    c = complex(c)
    return [c.real, c.imag]


def complex_from_json(v) -> complex:
    if isinstance(v, bool):
        raise MalformedInput(f"expected a complex number, got {v!r}")
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2 and all(
            isinstance(p, (int, float)) and not isinstance(p, bool) for p in v):
        return complex(v[0], v[1])
    raise MalformedInput(f"expected a complex number as [re, im], got {v!r}")


def _cap(v: float) -> float:
    return min(float(v), MAGNITUDE_CAP)


def _obj(values) -> np.ndarray:
    arr = np.empty(len(values), dtype=object)
    arr[:] = list(values)
    return arr


def lift(values: np.ndarray, extended: bool) -> np.ndarray:
    """float 数组提升为 mpc object 数组(extended 为 False 时转 complex128)"""
    if not extended:
        return np.asarray(values, dtype=np.complex128)
    if values.dtype == object:
        return values
    return _obj([mpmath.mpc(complex(v)) for v in values])


def abs_float(values: np.ndarray) -> np.ndarray:
    mags = np.abs(values)
    if mags.dtype == object:
        mags = mags.astype(np.float64)
    return mags


def _scalar(c, extended: bool):
    return mpmath.mpc(c) if extended else complex(c)


# ==================== SplitMix64 ====================

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def splitmix64(z) -> np.ndarray:
    """SplitMix64 混合函数, 按 uint64 回绕"""
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = z + _GOLDEN
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def noise_values(seed: int, amp: float, points: np.ndarray) -> np.ndarray:
    """
    确定性噪声: state = SplitMix64(seed XOR fold(coords)),
    value = amp·(2·(state >> 11)·2⁻⁵³ − 1)
    """
    coords = np.asarray(points, dtype=np.int64).reshape(len(points), -1).copy().view(np.uint64)
    acc = np.zeros(len(coords), dtype=np.uint64)
    for j in range(coords.shape[1]):
        acc = splitmix64(acc ^ coords[:, j])
    state = splitmix64(np.uint64(int(seed) & MASK64) ^ acc)
    unit = (state >> np.uint64(11)).astype(np.float64) * 2.0 ** -53
    return amp * (2.0 * unit - 1.0)


class SplitMixStream:
    """SplitMix64 顺序随机流, 用于可复现的参数抽样"""

    def __init__(self, seed: int):
        self.state = int(seed) & MASK64

    def next_u64(self) -> int:
        out = int(splitmix64(np.array([self.state], dtype=np.uint64))[0])
        self.state = (self.state + int(_GOLDEN)) & MASK64
        return out

    def uniform(self, lo: float = 0.0, hi: float = 1.0) -> float:
        return lo + (hi - lo) * ((self.next_u64() >> 11) * 2.0 ** -53)

    def angle(self) -> float:
        return self.uniform(0.0, 2.0 * math.pi)

    def polar(self, rmin: float, rmax: float) -> complex:
        return cmath.rect(self.uniform(rmin, rmax), self.angle())

    def sign(self) -> int:
        return 1 if self.next_u64() & 1 else -1

    def seed64(self) -> int:
        return self.next_u64()


# ==================== 描述子 ====================

class FnDescriptor:
    """函数描述子基类: 叶子或组合子"""

    op: ClassVar[str] = ""

    def evaluate(self, group: GroupSpec, points: np.ndarray, extended: bool) -> np.ndarray:
        raise NotImplementedError

    def magnitude(self, group: GroupSpec, radius: int) -> float:
        """窗口 radius 上 |值| 的三角不等式上界"""
        raise NotImplementedError

    def children(self) -> Tuple["FnDescriptor", ...]:
        return ()

    def grows(self) -> bool:
        return any(c.grows() for c in self.children())

    def validate(self, group: GroupSpec):
        for c in self.children():
            c.validate(group)

    def to_json(self) -> dict:
        raise NotImplementedError


def _require_lattice(desc: FnDescriptor, group: GroupSpec, length: int):
    if not group.is_lattice:
        raise ElementMismatch(f"{desc.op} descriptor requires a lattice group")
    if length != group.dim:
        raise ElementMismatch(f"{desc.op} descriptor has length {length}, group dim is {group.dim}")


def _require_finite(desc: FnDescriptor, group: GroupSpec, length: int):
    if not group.is_finite:
        raise ElementMismatch(f"{desc.op} descriptor requires a finite group")
    if length != group.order:
        raise ElementMismatch(f"{desc.op} descriptor has {length} values, group order is {group.order}")


def _linear_phase(points: np.ndarray, coeffs, extended: bool):
    """Σ cⱼxⱼ, extended 时逐点 mpmath 精确累加"""
    if extended:
        cs = [mpmath.mpc(c) for c in coeffs]
        return [mpmath.fsum(c * int(x) for c, x in zip(cs, row)) for row in points]
    return points.astype(np.float64) @ np.asarray([complex(c) for c in coeffs], dtype=np.complex128)


@dataclass(frozen=True)
class Zero(FnDescriptor):
    op: ClassVar[str] = "zero"

    def evaluate(self, group, points, extended):
        return lift(np.zeros(len(points), dtype=np.complex128), extended)

    def magnitude(self, group, radius):
        return 0.0

    def to_json(self):
        return {"op": self.op}


@dataclass(frozen=True)
class Const(FnDescriptor):
    c: complex = 1.0
    op: ClassVar[str] = "const"

    def evaluate(self, group, points, extended):
        if extended:
            return _obj([mpmath.mpc(self.c)] * len(points))
        return np.full(len(points), complex(self.c), dtype=np.complex128)

    def magnitude(self, group, radius):
        return _cap(abs(self.c))

    def to_json(self):
        return {"op": self.op, "c": complex_to_json(self.c)}


@dataclass(frozen=True)
class Additive(FnDescriptor):
    """a(x) = Σ cⱼxⱼ"""
    coeffs: Tuple[complex, ...] = ()
    op: ClassVar[str] = "additive"

    def validate(self, group):
        _require_lattice(self, group, len(self.coeffs))

    def evaluate(self, group, points, extended):
        phase = _linear_phase(points, self.coeffs, extended)
        return _obj(phase) if extended else phase

    def magnitude(self, group, radius):
        return _cap(sum(abs(c) for c in self.coeffs) * radius)

    def to_json(self):
        return {"op": self.op, "coeffs": [complex_to_json(c) for c in self.coeffs]}


@dataclass(frozen=True)
class Character(FnDescriptor):
    """m(x) = exp(i Σ θⱼxⱼ), 有界乘性"""
    angles: Tuple[float, ...] = ()
    op: ClassVar[str] = "character"

    def validate(self, group):
        _require_lattice(self, group, len(self.angles))

    def evaluate(self, group, points, extended):
        if extended:
            thetas = [mpmath.mpf(t) for t in self.angles]
            return _obj([mpmath.expj(mpmath.fsum(t * int(x) for t, x in zip(thetas, row))) for row in points])
        phase = points.astype(np.float64) @ np.asarray(self.angles, dtype=np.float64)
        return np.exp(1j * phase)

    def magnitude(self, group, radius):
        return 1.0

    def to_json(self):
        return {"op": self.op, "angles": [float(t) for t in self.angles]}


@dataclass(frozen=True)
class ExpChar(FnDescriptor):
    """M(x) = exp(Σ μⱼxⱼ), 某个 Re μⱼ ≠ 0 时无界"""
    mu: Tuple[complex, ...] = ()
    op: ClassVar[str] = "expchar"

    def validate(self, group):
        _require_lattice(self, group, len(self.mu))

    def grows(self):
        return any(complex(m).real != 0 for m in self.mu)

    def evaluate(self, group, points, extended):
        if extended:
            exponents = _linear_phase(points, self.mu, True)
            for s in exponents:
                if s.real > EXP_GUARD:
                    raise Overflow(f"ExpChar exponent {float(s.real):.1f} exceeds {EXP_GUARD}")
            return _obj([mpmath.exp(s) for s in exponents])
        exponents = _linear_phase(points, self.mu, False)
        if len(exponents) and np.max(exponents.real) > EXP_GUARD:
            raise Overflow(f"ExpChar exponent {np.max(exponents.real):.1f} exceeds {EXP_GUARD}")
        return np.exp(exponents)

    def magnitude(self, group, radius):
        exponent = sum(abs(complex(m).real) for m in self.mu) * radius
        return _cap(math.exp(min(exponent, 690.0)))

    def to_json(self):
        return {"op": self.op, "mu": [complex_to_json(m) for m in self.mu]}


@dataclass(frozen=True)
class FiniteChar(FnDescriptor):
    """有限群上以取值表给出的乘性函数, 构造时逐对检查乘性律"""
    values: Tuple[complex, ...] = ()
    op: ClassVar[str] = "finite_char"

    def validate(self, group):
        _require_finite(self, group, len(self.values))
        v = np.asarray(self.values, dtype=np.complex128)
        defect = np.abs(v[group.table_array] - v[:, None] * v[None, :])
        if defect.max() > MULT_TOL:
            i, j = np.unravel_index(int(np.argmax(defect)), defect.shape)
            raise InvalidParams(f"finite_char values are not multiplicative at ({i}, {j})")

    def evaluate(self, group, points, extended):
        return lift(np.asarray(self.values, dtype=np.complex128)[points], extended)

    def magnitude(self, group, radius):
        return _cap(max(abs(v) for v in self.values))

    def to_json(self):
        return {"op": self.op, "values": [complex_to_json(v) for v in self.values]}


@dataclass(frozen=True)
class Noise(FnDescriptor):
    seed: int = 0
    amp: float = 0.0
    op: ClassVar[str] = "noise"

    def validate(self, group):
        if self.amp < 0:
            raise InvalidParams(f"noise amplitude must be nonnegative, got {self.amp}")

    def evaluate(self, group, points, extended):
        return lift(noise_values(self.seed, self.amp, points).astype(np.complex128), extended)

    def magnitude(self, group, radius):
        return float(self.amp)

    def to_json(self):
        return {"op": self.op, "seed": int(self.seed), "amp": float(self.amp)}


@dataclass(frozen=True)
class Table(FnDescriptor):
    values: Tuple[complex, ...] = ()
    op: ClassVar[str] = "table"

    def validate(self, group):
        _require_finite(self, group, len(self.values))

    def evaluate(self, group, points, extended):
        return lift(np.asarray(self.values, dtype=np.complex128)[points], extended)

    def magnitude(self, group, radius):
        return _cap(max(abs(v) for v in self.values))

    def to_json(self):
        return {"op": self.op, "values": [complex_to_json(v) for v in self.values]}


@dataclass(frozen=True)
class Sum(FnDescriptor):
    terms: Tuple[FnDescriptor, ...] = ()
    op: ClassVar[str] = "sum"

    def children(self):
        return self.terms

    def evaluate(self, group, points, extended):
        if not self.terms:
            return Zero().evaluate(group, points, extended)
        return reduce(lambda a, b: a + b, (t.evaluate(group, points, extended) for t in self.terms))

    def magnitude(self, group, radius):
        return _cap(sum(t.magnitude(group, radius) for t in self.terms))

    def to_json(self):
        return {"op": self.op, "args": [t.to_json() for t in self.terms]}


@dataclass(frozen=True)
class Prod(FnDescriptor):
    factors: Tuple[FnDescriptor, ...] = ()
    op: ClassVar[str] = "prod"

    def children(self):
        return self.factors

    def evaluate(self, group, points, extended):
        if not self.factors:
            return Const(1.0).evaluate(group, points, extended)
        return reduce(lambda a, b: a * b, (f.evaluate(group, points, extended) for f in self.factors))

    def magnitude(self, group, radius):
        return _cap(math.prod(f.magnitude(group, radius) for f in self.factors))

    def to_json(self):
        return {"op": self.op, "args": [f.to_json() for f in self.factors]}


@dataclass(frozen=True)
class Scale(FnDescriptor):
    c: complex = 1.0
    inner: FnDescriptor = field(default_factory=Zero)
    op: ClassVar[str] = "scale"

    def children(self):
        return (self.inner,)

    def evaluate(self, group, points, extended):
        return self.inner.evaluate(group, points, extended) * _scalar(self.c, extended)

    def magnitude(self, group, radius):
        return _cap(abs(self.c) * self.inner.magnitude(group, radius))

    def to_json(self):
        return {"op": self.op, "c": complex_to_json(self.c), "arg": self.inner.to_json()}


@dataclass(frozen=True)
class Pow(FnDescriptor):
    inner: FnDescriptor = field(default_factory=Zero)
    k: int = 1
    op: ClassVar[str] = "pow"

    def children(self):
        return (self.inner,)

    def validate(self, group):
        if not isinstance(self.k, int) or self.k < 1 or self.k > 8:
            raise InvalidParams(f"pow exponent must be an integer in 1..8, got {self.k!r}")
        self.inner.validate(group)

    def evaluate(self, group, points, extended):
        return self.inner.evaluate(group, points, extended) ** self.k

    def magnitude(self, group, radius):
        inner = self.inner.magnitude(group, radius)
        return _cap(inner ** self.k) if inner < 1e100 else MAGNITUDE_CAP

    def to_json(self):
        return {"op": self.op, "arg": self.inner.to_json(), "k": self.k}


_LEAF_PARSERS = {
    "zero": lambda d: Zero(),
    "const": lambda d: Const(complex_from_json(d["c"])),
    "additive": lambda d: Additive(tuple(complex_from_json(c) for c in d["coeffs"])),
    "character": lambda d: Character(tuple(float(t) for t in d["angles"])),
    "expchar": lambda d: ExpChar(tuple(complex_from_json(m) for m in d["mu"])),
    "finite_char": lambda d: FiniteChar(tuple(complex_from_json(v) for v in d["values"])),
    "noise": lambda d: Noise(int(d["seed"]), float(d["amp"])),
    "table": lambda d: Table(tuple(complex_from_json(v) for v in d["values"])),
}


def descriptor_from_json(data) -> FnDescriptor:
    """解析描述子 JSON AST"""
    if not isinstance(data, dict) or "op" not in data:
        raise MalformedInput(f"descriptor must be an object with 'op', got {data!r}")
    op = data["op"]
    try:
        if op in _LEAF_PARSERS:
            return _LEAF_PARSERS[op](data)
        if op == "sum":
            return Sum(tuple(descriptor_from_json(a) for a in data["args"]))
        if op == "prod":
            return Prod(tuple(descriptor_from_json(a) for a in data["args"]))
        if op == "scale":
            return Scale(complex_from_json(data["c"]), descriptor_from_json(data["arg"]))
        if op == "pow":
            return Pow(descriptor_from_json(data["arg"]), int(data["k"]))
    except (KeyError, TypeError, ValueError) as e:
        if isinstance(e, MalformedInput):
            raise
        raise MalformedInput(f"malformed {op!r} descriptor: {e}") from e
    raise MalformedInput(f"unknown descriptor op {op!r}")


# ==================== 乘性描述子 ====================

def is_multiplicative(desc: FnDescriptor) -> bool:
    """结构上满足 m(xy) = m(x)m(y) 的描述子"""
    if isinstance(desc, (Character, ExpChar, FiniteChar, Zero)):
        return True
    if isinstance(desc, Const):
        return desc.c == 0 or desc.c == 1
    if isinstance(desc, Prod):
        return all(is_multiplicative(f) for f in desc.factors)
    if isinstance(desc, Pow):
        return is_multiplicative(desc.inner)
    return False


def is_zero_descriptor(desc: FnDescriptor) -> bool:
    if isinstance(desc, Zero):
        return True
    if isinstance(desc, Const):
        return desc.c == 0
    if isinstance(desc, FiniteChar):
        return all(v == 0 for v in desc.values)
    if isinstance(desc, (Prod,)):
        return any(is_zero_descriptor(f) for f in desc.factors)
    if isinstance(desc, Pow):
        return is_zero_descriptor(desc.inner)
    return False


def inverse_character(desc: FnDescriptor) -> FnDescriptor:
    """非零乘性函数的逐点倒数"""
    if is_zero_descriptor(desc):
        raise ZeroCharacter("multiplicative function is identically zero")
    if isinstance(desc, Character):
        return Character(tuple(-t for t in desc.angles))
    if isinstance(desc, ExpChar):
        return ExpChar(tuple(-m for m in desc.mu))
    if isinstance(desc, FiniteChar):
        return FiniteChar(tuple(1 / v for v in desc.values))
    if isinstance(desc, Const):
        return Const(1.0)
    if isinstance(desc, Prod):
        return Prod(tuple(inverse_character(f) for f in desc.factors))
    if isinstance(desc, Pow):
        return Pow(inverse_character(desc.inner), desc.k)
    raise InvalidParams(f"{desc.op} descriptor is not structurally multiplicative")


def growth_exponent(desc: FnDescriptor, points: np.ndarray) -> np.ndarray:
    """逐点取描述子内各 ExpChar 叶子指数实部的最大值, 没有 ExpChar 时为 −inf"""
    if isinstance(desc, ExpChar):
        return points.astype(np.float64) @ np.asarray([complex(m).real for m in desc.mu])
    out = np.full(len(points), -np.inf)
    for child in desc.children():
        out = np.maximum(out, growth_exponent(child, points))
    return out


# ==================== GFunction ====================

@dataclass(frozen=True)
class GFunction:
    """群上的函数 = 群 + 描述子"""
    group: GroupSpec
    desc: FnDescriptor

    def __post_init__(self):
        self.desc.validate(self.group)

    def values(self, points: np.ndarray, extended: bool = False) -> np.ndarray:
        return self.desc.evaluate(self.group, points, extended)

    def eval(self, x) -> complex:
        x = check_element(self.group, x)
        point = np.array([x], dtype=np.int64)
        return complex(self.values(point)[0])

    def magnitude(self, radius: int) -> float:
        return self.desc.magnitude(self.group, radius)

    def grows(self) -> bool:
        return self.desc.grows()

    def to_json(self) -> dict:
        return self.desc.to_json()

    # 代数运算只拼接描述子, 不做符号化简
    def _coerce(self, other) -> "GFunction":
        if isinstance(other, GFunction):
            if other.group != self.group:
                raise ElementMismatch("functions live on different groups")
            return other
        if isinstance(other, FnDescriptor):
            return GFunction(self.group, other)
        if isinstance(other, SCALAR_TYPES):
            return GFunction(self.group, Const(other))
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        terms = []
        for d in (self.desc, other.desc):
            if isinstance(d, Sum):
                terms.extend(d.terms)
            elif not isinstance(d, Zero):
                terms.append(d)
        if not terms:
            return GFunction(self.group, Zero())
        if len(terms) == 1:
            return GFunction(self.group, terms[0])
        return GFunction(self.group, Sum(tuple(terms)))

    __radd__ = __add__

    def __neg__(self):
        return self * -1

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, SCALAR_TYPES) and not isinstance(other, bool):
            if isinstance(self.desc, Zero) or other == 0:
                return GFunction(self.group, Zero())
            if other == 1:
                return self
            if isinstance(self.desc, Scale):
                return GFunction(self.group, Scale(self.desc.c * other, self.desc.inner))
            return GFunction(self.group, Scale(other, self.desc))
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if isinstance(self.desc, Zero) or isinstance(other.desc, Zero):
            return GFunction(self.group, Zero())
        return GFunction(self.group, Prod((self.desc, other.desc)))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self * (1 / other)


def zero_function(group: GroupSpec) -> GFunction:
    return GFunction(group, Zero())


# ==================== 精度 ====================

def precision_for(functions: Sequence[GFunction], radius: int) -> Optional[int]:
    """需要扩展精度时返回十进制位数, 否则 None"""
    functions = [F for F in functions if F is not None]
    if not functions or not any(F.grows() for F in functions):
        return None
    mag = max(F.magnitude(2 * radius) for F in functions)
    scale = _cap(mag * mag) if mag < 1e150 else MAGNITUDE_CAP
    if scale <= FLOAT_SCALE_LIMIT:
        return None
    return int(math.ceil(math.log10(scale))) + 30


@contextmanager
def precision_scope(functions: Sequence[GFunction], radius: int):
    """进入合适的工作精度, yield 是否使用扩展精度"""
    dps = precision_for(functions, radius)
    if dps is None:
        yield False
    else:
        with mpmath.workdps(max(dps, mpmath.mp.dps)):
            yield True


# ==================== sup 范数与有界性 ====================

@dataclass
class BoundVerdict:
    kind: str
    bound: float = 0.0
    growth_ratio: float = 0.0
    trace: List[Tuple[int, float]] = field(default_factory=list)

    @property
    def is_bounded(self) -> bool:
        return self.kind == BOUNDED

    @property
    def is_unbounded(self) -> bool:
        return self.kind == UNBOUNDED

    def to_json(self) -> dict:
        out = {"verdict": self.kind, "trace": [[r, s] for r, s in self.trace]}
        if self.kind == BOUNDED:
            out["bound"] = self.bound
        else:
            out["growth_ratio"] = self.growth_ratio
        return out


def check_schedule(schedule: Sequence[int]) -> Tuple[int, ...]:
    schedule = tuple(schedule)
    if len(schedule) < 3:
        raise BadSchedule(f"schedule needs at least 3 radii, got {list(schedule)}")
    if any(not isinstance(r, (int, np.integer)) or r < 0 for r in schedule):
        raise BadSchedule(f"schedule radii must be nonnegative integers, got {list(schedule)}")
    if any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise BadSchedule(f"schedule must be strictly increasing, got {list(schedule)}")
    return tuple(int(r) for r in schedule)


def _ratio(prev: float, cur: float) -> float:
    if prev <= 0:
        return math.inf if cur > 0 else 1.0
    return cur / prev


def _creeps(sups: Sequence[float], tau: float, slack: float) -> bool:
    """窗口扩大时有界噪声的 sup 缓慢爬升"""
    first, last = sups[0], sups[-1]
    if last - first <= slack * max(1.0, first):
        return True
    return first > 0 and last <= first * (1 + 2 * tau * (len(sups) - 1))


def verdict_from_trace(trace: Sequence[Tuple[int, float]], tau: float = DEFAULT_TAU,
                       floor: float = ZERO_SUP, slack: float = 0.0) -> BoundVerdict:
    """
    由逐半径 sup 序列给出三值判定

    slack > 0 时按容差读轨迹: 整条轨迹都不超过 slack 的视为有界;
    原本 Inconclusive 的轨迹若总增量 ≤ slack·max(1, 首个 sup), 或总增幅不超过
    1 + 2τ·(段数) 倍, 也视为有界

    Args:
        trace: [(radius, sup), ...], 半径递增
        tau: 增长阈值
        floor: 视为零的 sup 上限
        slack: 有界噪声在窗口扩大时的 sup 爬升容差, 0 为严格判定

    Returns:
        BoundVerdict: Bounded / Unbounded / Inconclusive
    """
    trace = [(int(r), float(s)) for r, s in trace]
    sups = [s for _, s in trace]
    if all(s <= floor for s in sups):
        return BoundVerdict(BOUNDED, bound=max(sups), trace=trace)
    ratios = [_ratio(a, b) for a, b in zip(sups, sups[1:])]
    if ratios[-1] <= 1 + tau:
        return BoundVerdict(BOUNDED, bound=max(sups), trace=trace)
    if slack > 0 and max(sups) <= slack:
        return BoundVerdict(BOUNDED, bound=max(sups), trace=trace)
    if all(r >= 1 + 3 * tau for r in ratios):
        return BoundVerdict(UNBOUNDED, growth_ratio=ratios[-1], trace=trace)
    if slack > 0 and _creeps(sups, tau, slack):
        return BoundVerdict(BOUNDED, bound=max(sups), trace=trace)
    return BoundVerdict(INCONCLUSIVE, growth_ratio=ratios[-1], trace=trace)


def scan_points(group: GroupSpec, radius: int) -> Tuple[np.ndarray, int]:
    """窗口点集, 超过 WINDOW_CAP 时按坐标轴等步长取网格(含角点)"""
    n = window_size(group, radius)
    if group.is_finite or n <= WINDOW_CAP:
        return window_array(group, radius), 1
    per_axis = max(2, int(WINDOW_CAP ** (1.0 / group.dim)) - 1)
    stride = max(1, math.ceil(2 * radius / (per_axis - 1)))
    logger.warning(f"窗口 {n} 点超过上限, 按步长 {stride} 取网格")
    return window_array(group, radius, stride), stride


def sup_norm(F: GFunction, radius: int) -> Tuple[float, object]:
    """
    窗口上的 sup |F|

    Returns:
        (sup, argmax 元素), 并列时取字典序最小的点
    """
    with precision_scope([F], radius) as extended:
        points, _ = scan_points(F.group, radius)
        mags = abs_float(F.values(points, extended))
    i = int(np.argmax(mags))
    return float(mags[i]), as_element(F.group, points[i])


def boundedness(F: GFunction, schedule: Sequence[int] = DEFAULT_SCHEDULE,
                tau: float = DEFAULT_TAU, slack: float = 0.0) -> BoundVerdict:
    """ℬ(G) 成员判定: 逐半径 sup 增长率, slack 见 verdict_from_trace"""
    schedule = check_schedule(schedule)
    if tau <= 0:
        raise BadSchedule(f"tau must be positive, got {tau}")
    if F.group.is_finite:
        sup, _ = sup_norm(F, 0)
        return BoundVerdict(BOUNDED, bound=sup, trace=[(r, sup) for r in schedule])

    radius = schedule[-1]
    with precision_scope([F], radius) as extended:
        points, _ = scan_points(F.group, radius)
        mags = abs_float(F.values(points, extended))
    norms = np.abs(points).max(axis=1)
    trace = []
    for r in schedule:
        inside = mags[norms <= r]
        trace.append((r, float(inside.max()) if len(inside) else 0.0))
    floor = ZERO_SUP * max(1.0, F.magnitude(radius))
    verdict = verdict_from_trace(trace, tau, floor, slack)
    logger.debug(f"有界性判定 {verdict.kind}: {[round(s, 6) for _, s in trace]}")
    return verdict


# ==================== 拟合工具 ====================

def fit_points(functions: Sequence[GFunction], radius: int, dilation: int = DEFAULT_DILATION,
               extended: bool = False) -> np.ndarray:
    """
    最小二乘采样点: 最大窗口按 K = 1, 2, 4, …, dilation 逐级放大后的并集

    每一级只保留所有函数取值都不超过 FIT_MAGNITUDE_LIMIT 的点(扩展精度下为
    EXTENDED_FIT_LIMIT), 因此指数增长方向与线性增长方向各自在能到达的最远处被采样
    """
    group = functions[0].group
    base, _ = scan_points(group, radius)
    if group.is_finite or dilation <= 1:
        return base
    if len(base) > FIT_BASE_CAP:
        per_axis = max(2, int(FIT_BASE_CAP ** (1.0 / group.dim)) - 1)
        base = window_array(group, radius, max(1, math.ceil(2 * radius / (per_axis - 1))))
    limit = EXTENDED_FIT_LIMIT if extended else FIT_MAGNITUDE_LIMIT
    chosen = [base]
    K = 2
    while K <= dilation and K * radius <= 2 ** 40:
        points = base * K
        safe = np.logical_and.reduce([growth_exponent(F.desc, points) <= EXP_GUARD for F in functions])
        points = points[safe]
        if not len(points):
            break
        with np.errstate(all="ignore"):
            mags = [abs_float(F.values(points, extended)) for F in functions]
        keep = np.logical_and.reduce([m <= limit for m in mags])
        if not keep.any():
            break
        chosen.append(points[keep])
        K *= 2
    return np.concatenate(chosen)


def least_squares(columns: Sequence[np.ndarray], target: np.ndarray) -> List:
    """
    复最小二乘, 返回各列系数

    float 路径先把列归一化再调用 numpy.linalg.lstsq; object(mpc) 路径解正规方程
    """
    extended = target.dtype == object or any(c.dtype == object for c in columns)
    if not extended:
        A = np.stack([np.asarray(c, dtype=np.complex128) for c in columns], axis=1)
        norms = np.linalg.norm(A, axis=0)
        norms[norms == 0] = 1.0
        sol, *_ = np.linalg.lstsq(A / norms, np.asarray(target, dtype=np.complex128), rcond=None)
        return [complex(s) for s in sol / norms]

    cols = [lift(c, True) for c in columns]
    target = lift(target, True)
    live = [i for i, c in enumerate(cols) if sum(abs(v) ** 2 for v in c) > 0]
    coeffs = [mpmath.mpc(0)] * len(cols)
    if not live:
        return coeffs
    gram = mpmath.matrix(len(live), len(live))
    rhs = mpmath.matrix(len(live), 1)
    for a, i in enumerate(live):
        conj_i = np.conj(cols[i])
        rhs[a] = np.sum(conj_i * target)
        for b, j in enumerate(live):
            gram[a, b] = np.sum(conj_i * cols[j])
    sol = mpmath.lu_solve(gram, rhs)
    for a, i in enumerate(live):
        coeffs[i] = sol[a]
    return coeffs


def _top_decile(mags: np.ndarray) -> np.ndarray:
    k = max(1, int(math.ceil(len(mags) / 10)))
    order = np.argsort(-mags, kind="stable")
    return order[:k]


# ==================== 模有界线性相关 ====================

@dataclass
class DependenceFit:
    """h = λf + φ (或 g = αf + βh + φ) 的拟合结果"""
    kind: str
    lam: object = 0.0
    alpha: object = 0.0
    beta: object = 0.0
    residual: Optional[GFunction] = field(default=None, repr=False)
    residual_bound: float = 0.0
    residual_growth: float = 0.0
    trace: List[Tuple[int, float]] = field(default_factory=list)
    triple: bool = False

    @property
    def is_dependent(self) -> bool:
        return self.kind == DEPENDENT

    def to_json(self) -> dict:
        out = {"verdict": self.kind, "trace": [[r, s] for r, s in self.trace]}
        if self.triple:
            out["alpha"] = complex_to_json(self.alpha)
            out["beta"] = complex_to_json(self.beta)
        else:
            out["lambda"] = complex_to_json(self.lam)
        if self.is_dependent:
            out["residual_bound"] = self.residual_bound
        else:
            out["residual_growth"] = self.residual_growth
        return out


def _fit_from_verdict(verdict: BoundVerdict, residual: GFunction, what: str, **coeffs) -> DependenceFit:
    if verdict.is_bounded:
        return DependenceFit(DEPENDENT, residual=residual, residual_bound=verdict.bound,
                             trace=verdict.trace, **coeffs)
    if verdict.is_unbounded:
        return DependenceFit(INDEPENDENT, residual=residual, residual_growth=verdict.growth_ratio,
                             trace=verdict.trace, **coeffs)
    raise InconclusiveDependence(f"{what} residual growth is inconclusive "
                                 f"(ratio {verdict.growth_ratio:.3f})", verdict.trace)


def projection_coefficient(f: GFunction, h: GFunction, radius: int, dilation: int = DEFAULT_DILATION):
    """
    h 在 f 方向上的最小二乘系数, 只用 |f| 最大的十分之一拟合点

    f 的增长压过 h − λf 时, 远点上的比值几乎不受有界部分影响
    """
    with precision_scope([f, h], radius) as extended:
        points = fit_points([f, h], radius, dilation, extended)
        fv = f.values(points, extended)
        hv = h.values(points, extended)
        top = _top_decile(abs_float(fv))
        ft, ht = fv[top], hv[top]
        lam = np.sum(np.conj(ft) * ht) / np.sum(np.conj(ft) * ft)
    return lam if extended else complex(lam)


def dependence_mod_bounded(f: GFunction, h: GFunction, schedule: Sequence[int] = DEFAULT_SCHEDULE,
                           tau: float = DEFAULT_TAU, dilation: int = DEFAULT_DILATION,
                           slack: float = 0.0) -> DependenceFit:
    """
    判定 h 与 f 是否模有界函数线性相关: h = λf + φ, φ 有界

    Args:
        f, h: 同一群上的函数
        schedule: 半径序列
        tau: 增长阈值
        dilation: 拟合窗口放大倍数上限
        slack: 残差有界性判定的爬升容差

    Returns:
        DependenceFit: Dependent(λ, 残差界) 或 Independent(残差增长率)
    """
    schedule = check_schedule(schedule)
    if f.group != h.group:
        raise ElementMismatch("functions live on different groups")
    radius = schedule[-1]

    f_sup, _ = sup_norm(f, radius)
    if f_sup <= ZERO_SUP:
        verdict = boundedness(h, schedule, tau, slack)
        return _fit_from_verdict(verdict, h, "h", lam=0.0)

    with precision_scope([f, h], radius) as extended:
        lam = projection_coefficient(f, h, radius, dilation)
        residual = h - f * lam
        verdict = boundedness(residual, schedule, tau, slack)
    logger.debug(f"h ≈ λf 拟合 λ={complex(lam):.10g}, 残差判定 {verdict.kind}")
    return _fit_from_verdict(verdict, residual, "h - λf", lam=lam)


def triple_dependence(g: GFunction, f: GFunction, h: GFunction, schedule: Sequence[int] = DEFAULT_SCHEDULE,
                      tau: float = DEFAULT_TAU, dilation: int = DEFAULT_DILATION,
                      slack: float = 0.0) -> DependenceFit:
    """判定 g = αf + βh + φ, φ 有界 (前提: f, h 模有界线性无关)"""
    schedule = check_schedule(schedule)
    radius = schedule[-1]
    with precision_scope([f, g, h], radius) as extended:
        points = fit_points([f, g, h], radius, dilation, extended)
        fv = f.values(points, extended)
        hv = h.values(points, extended)
        gv = g.values(points, extended)
        alpha, beta = least_squares([fv, hv], gv)
        residual = g - f * alpha - h * beta
        verdict = boundedness(residual, schedule, tau, slack)
    logger.debug(f"g ≈ αf + βh 拟合 α={complex(alpha):.10g} β={complex(beta):.10g}, 残差判定 {verdict.kind}")
    fit = _fit_from_verdict(verdict, residual, "g - αf - βh", alpha=alpha, beta=beta)
    fit.triple = True
    return fit


# ==================== 乘性部分的恢复 ====================

def _wrap(angle: float) -> float:
    return (angle + math.pi) % (2 * math.pi) - math.pi


def _unit(group: GroupSpec, j: int, scale: int = 1) -> np.ndarray:
    p = np.zeros((1, group.dim), dtype=np.int64)
    p[0, j] = scale
    return p


def far_radius(F: GFunction, radius: int, limit: float = FIT_MAGNITUDE_LIMIT) -> int:
    """F 的描述子上界不超过 limit 的最远半径(至少 radius)"""
    t = radius
    while 2 * t <= 2 ** 40 and F.magnitude(2 * t + 1) <= limit:
        t *= 2
    lo, hi = t, 2 * t
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if F.magnitude(mid + 1) <= limit:
            lo = mid
        else:
            hi = mid
    return lo


def fit_character(F: GFunction, radius: int, companion: Optional[GFunction] = None,
                  depth: int = 40) -> FnDescriptor:
    """
    把近似有界乘性的 F 拟合为 Character

    先由窗口上的平移相关 Σ F(x+eⱼ)conj(F(x)) 得到粗角度, 再用二进点 2ᵏeⱼ 展开相位细化。
    companion 形如 a·m + 有界 时, 比值 U(2p)/U(p) ≈ 2m(p) 提供更远的相位。

    Returns:
        Character 描述子; F 在窗口上近似为零时返回 Zero
    """
    group = F.group
    if not group.is_lattice:
        raise NotLattice("character fitting is defined on lattices")
    functions = [F] if companion is None else [F, companion]
    with precision_scope(functions, radius) as extended:
        points, _ = scan_points(group, radius)
        vals = F.values(points, extended)
        energy = float(np.sum(abs_float(vals) ** 2))
        if energy <= ZERO_SUP:
            return Zero()

        angles = []
        for j in range(group.dim):
            shifted = F.values(points + _unit(group, j), extended)
            theta = cmath.phase(complex(np.sum(shifted * np.conj(vals))))

            for k in range(1, depth + 1):
                step = 2 ** k
                if F.magnitude(step) > FIT_MAGNITUDE_LIMIT:
                    break
                z = complex(F.values(_unit(group, j, step), extended)[0])
                if abs(abs(z) - 1.0) > MULT_TOL:
                    break
                theta += _wrap(cmath.phase(z) - theta * step) / step

            if companion is not None:
                limit = 2 * radius if extended else None
                for k in range(1, depth):
                    step = 2 ** k
                    far = 2 * step
                    if (limit is not None and far > limit) or (
                            limit is None and companion.magnitude(far) > FIT_MAGNITUDE_LIMIT):
                        break
                    u1 = complex(companion.values(_unit(group, j, step), extended)[0])
                    u2 = complex(companion.values(_unit(group, j, far), extended)[0])
                    if u1 == 0:
                        continue
                    q = u2 / u1
                    if abs(abs(q) / 2.0 - 1.0) > 1e-6:
                        continue
                    correction = _wrap(cmath.phase(q) - theta * step)
                    if abs(correction) > 1e-3:
                        break
                    theta += correction / step
            angles.append(float(_wrap(theta)))
    return Character(tuple(angles))


def fit_exponential(F: GFunction, radius: int, limit: float = FIT_MAGNITUDE_LIMIT) -> FnDescriptor:
    """
    把 F ≈ c·M + 有界 中的无界乘性 M 拟合为 ExpChar

    在 ±t·eₖ 中取 |F| 最大的远点 p, μⱼ = log(F(p+eⱼ)/F(p));
    扩展精度下 t = 2·radius 且 μ 保留为 mpc。
    """
    group = F.group
    if not group.is_lattice:
        raise NotLattice("exponential fitting is defined on lattices")
    with precision_scope([F], radius) as extended:
        t = 2 * radius if extended else far_radius(F, radius, limit)
        candidates = np.concatenate([_unit(group, j, s * t) for j in range(group.dim) for s in (1, -1)])
        mags = abs_float(F.values(candidates, extended))
        p = candidates[int(np.argmax(mags))][None, :]
        base = F.values(p, extended)[0]
        if base == 0:
            raise InvalidParams("exponential fit found no growth")
        mu = []
        for j in range(group.dim):
            nxt = F.values(p + _unit(group, j), extended)[0]
            if extended:
                mu.append(mpmath.log(nxt / base))
            else:
                mu.append(cmath.log(complex(nxt) / complex(base)))
    return ExpChar(tuple(mu))


def element_list_json(group: GroupSpec, elements) -> list:
    return [element_to_json(group, x) for x in elements]
