#!/usr/bin/env python3
"""
群运算核心模块
有限群(Cayley 乘法表)与整数格 ℤ^d 的乘法、逆元、窗口
"""

import itertools
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import List, Sequence, Tuple, Union

import numpy as np

from errors import (
    ElementMismatch,
    MalformedInput,
    NoIdentity,
    NonInvertible,
    NotAssociative,
    Overflow,
)
from logger_config import get_logger

logger = get_logger(__name__)

Element = Union[int, Tuple[int, ...]]

INT64_MIN = -(2 ** 63)
INT64_MAX = 2 ** 63 - 1
MAX_DIM = 4

LATTICE = "lattice"
FINITE = "finite"


@dataclass(frozen=True)
class GroupSpec:
    """
    一个具体的群

    kind 为 "lattice" 时只用 dim; 为 "finite" 时 table 是 order×order 的乘法表。
    构造后不可变, 可以在多个进程间共享。
    """
    kind: str
    dim: int = 0
    table: Tuple[Tuple[int, ...], ...] = ()
    name: str = ""
    identity_index: int = 0
    inverses: Tuple[int, ...] = field(default=(), repr=False)

    @property
    def is_lattice(self) -> bool:
        return self.kind == LATTICE

    @property
    def is_finite(self) -> bool:
        return self.kind == FINITE

    @property
    def order(self) -> int:
        return len(self.table)

    @cached_property
    def table_array(self) -> np.ndarray:
        return np.asarray(self.table, dtype=np.int64)

    @property
    def label(self) -> str:
        if self.is_lattice:
            return "Z" if self.dim == 1 else f"Z^{self.dim}"
        return self.name or f"G{self.order}"

    def identity(self) -> Element:
        if self.is_lattice:
            return (0,) * self.dim
        return self.identity_index

    def generators(self) -> List[Element]:
        """ℤ^d 的单位向量; 有限群返回一个贪心求得的生成元组"""
        if self.is_lattice:
            return [tuple(1 if i == j else 0 for i in range(self.dim)) for j in range(self.dim)]
        gens: List[int] = []
        reached = {self.identity_index}
        for x in range(self.order):
            if x in reached:
                continue
            gens.append(x)
            reached = _closure(self, gens)
            if len(reached) == self.order:
                break
        return gens

    def is_abelian(self) -> bool:
        if self.is_lattice:
            return True
        t = self.table_array
        return bool(np.array_equal(t, t.T))

    def to_json(self) -> dict:
        if self.is_lattice:
            return {"kind": LATTICE, "dim": self.dim}
        return {"kind": FINITE, "name": self.name, "table": [list(row) for row in self.table]}


def _closure(g: GroupSpec, gens: Sequence[int]) -> set:
    reached = {g.identity_index}
    frontier = [g.identity_index]
    while frontier:
        x = frontier.pop()
        for s in gens:
            y = g.table[x][s]
            if y not in reached:
                reached.add(y)
                frontier.append(y)
    return reached


# ==================== 构造 ====================

def lattice(dim: int = 1) -> GroupSpec:
    """整数格 ℤ^dim, 1 ≤ dim ≤ 4"""
    if not isinstance(dim, int) or dim < 1 or dim > MAX_DIM:
        raise MalformedInput(f"lattice dim must be an integer in 1..{MAX_DIM}, got {dim!r}")
    return GroupSpec(kind=LATTICE, dim=dim)


def cyclic_table(n: int) -> List[List[int]]:
    return [[(i + j) % n for j in range(n)] for i in range(n)]


def dihedral_table(n: int) -> List[List[int]]:
    """
    二面体群 D_n (阶 2n) 的乘法表

    0..n-1 为旋转 r^i, n..2n-1 为反射 s·r^i
    """
    def compose(a: int, b: int) -> int:
        ra, fa = a % n, a >= n
        rb, fb = b % n, b >= n
        if not fa and not fb:
            return (ra + rb) % n
        if not fa and fb:
            return n + (rb - ra) % n
        if fa and not fb:
            return n + (ra + rb) % n
        return (rb - ra) % n

    return [[compose(a, b) for b in range(2 * n)] for a in range(2 * n)]


def symmetric3_table() -> List[List[int]]:
    perms = list(itertools.permutations(range(3)))
    index = {p: i for i, p in enumerate(perms)}
    # (p∘q)(k) = p(q(k))
    return [[index[tuple(p[q[k]] for k in range(3))] for q in perms] for p in perms]


def _validate_table(table: Sequence[Sequence[int]]) -> Tuple[np.ndarray, int, Tuple[int, ...]]:
    try:
        t = np.asarray(table, dtype=np.int64)
    except (TypeError, ValueError) as e:
        raise MalformedInput(f"Cayley table is not an integer matrix: {e}") from e
    if t.ndim != 2 or t.shape[0] != t.shape[1] or t.shape[0] == 0:
        raise MalformedInput(f"Cayley table must be square and non-empty, got shape {t.shape}")
    n = t.shape[0]
    if t.min() < 0 or t.max() >= n:
        raise MalformedInput(f"Cayley table entries must lie in 0..{n - 1}")

    ar = np.arange(n)
    identities = [e for e in range(n) if np.array_equal(t[e], ar) and np.array_equal(t[:, e], ar)]
    if not identities:
        raise NoIdentity("Cayley table has no two-sided identity")
    e = identities[0]

    for i in range(n):
        if len(np.unique(t[i])) != n:
            raise NonInvertible(f"row {i} of the Cayley table is not a permutation", ("row", i))
        if len(np.unique(t[:, i])) != n:
            raise NonInvertible(f"column {i} of the Cayley table is not a permutation", ("col", i))

    # (ab)c 与 a(bc) 一次性比较
    left = t[t[:, :, None], ar[None, None, :]]
    right = t[ar[:, None, None], t[None, :, :]]
    bad = np.argwhere(left != right)
    if len(bad):
        a, b, c = (int(v) for v in bad[0])
        raise NotAssociative(f"associativity fails at ({a}, {b}, {c})", (a, b, c))

    inverses = tuple(int(np.flatnonzero(t[x] == e)[0]) for x in range(n))
    return t, e, inverses


def build_finite(kind: str, n: int = None, table: Sequence[Sequence[int]] = None, name: str = None) -> GroupSpec:
    """
    构造并校验有限群

    Args:
        kind: cyclic / dihedral / symmetric3 / custom
        n: cyclic(n) 的阶, 或 dihedral(n) 的多边形边数
        table: custom 时的乘法表
        name: 群名, 缺省按 kind 生成

    Returns:
        GroupSpec: 校验通过的有限群
    """
    if kind == "cyclic":
        if not n or n < 1:
            raise MalformedInput(f"cyclic group needs n >= 1, got {n!r}")
        table, name = cyclic_table(n), name or f"Z{n}"
    elif kind == "dihedral":
        if not n or n < 1:
            raise MalformedInput(f"dihedral group needs n >= 1, got {n!r}")
        table, name = dihedral_table(n), name or f"D{n}"
    elif kind == "symmetric3":
        table, name = symmetric3_table(), name or "S3"
    elif kind == "custom":
        if table is None:
            raise MalformedInput("custom group needs a table")
        name = name or f"G{len(table)}"
    else:
        raise MalformedInput(f"unknown finite group kind {kind!r}")

    t, e, inverses = _validate_table(table)
    group = GroupSpec(
        kind=FINITE,
        table=tuple(tuple(int(v) for v in row) for row in t),
        name=name,
        identity_index=e,
        inverses=inverses,
    )
    logger.debug(f"构造有限群 {name}, 阶 {group.order}")
    return group


_BUILTIN = re.compile(r"^(Z|C|D)(\d+)$")


def group_by_name(name: str) -> GroupSpec:
    """按名字构造内置群: Z<n>/C<n> 循环群, D<n> 二面体群(阶 2n), S3, 以及 Z/Z^d 格点"""
    if name == "S3":
        return build_finite("symmetric3")
    if name == "Z":
        return lattice(1)
    if name.startswith("Z^"):
        return lattice(int(name[2:]))
    match = _BUILTIN.match(name)
    if not match:
        raise MalformedInput(f"unknown group name {name!r}")
    letter, n = match.group(1), int(match.group(2))
    if letter == "D":
        return build_finite("dihedral", n)
    return build_finite("cyclic", n, name=name)


def group_from_json(data: dict) -> GroupSpec:
    if not isinstance(data, dict) or "kind" not in data:
        raise MalformedInput(f"group descriptor must be an object with 'kind', got {data!r}")
    if data["kind"] == LATTICE:
        return lattice(int(data.get("dim", 1)))
    if data["kind"] == FINITE:
        if "table" in data:
            return build_finite("custom", table=data["table"], name=data.get("name"))
        if "name" in data:
            return group_by_name(data["name"])
    raise MalformedInput(f"unrecognized group descriptor {data!r}")


# ==================== 元素运算 ====================

def check_element(g: GroupSpec, x) -> Element:
    """校验并规范化元素: 格点为整数元组, 有限群为下标"""
    if g.is_lattice:
        if isinstance(x, (int, np.integer)) and not isinstance(x, bool) and g.dim == 1:
            x = (int(x),)
        if not isinstance(x, (tuple, list, np.ndarray)) or len(x) != g.dim:
            raise ElementMismatch(f"expected a lattice point of dim {g.dim}, got {x!r}")
        coords = []
        for c in x:
            if isinstance(c, bool) or not isinstance(c, (int, np.integer)):
                raise ElementMismatch(f"lattice coordinates must be integers, got {x!r}")
            c = int(c)
            if c < INT64_MIN or c > INT64_MAX:
                raise Overflow(f"coordinate {c} outside the 64-bit range")
            coords.append(c)
        return tuple(coords)
    if isinstance(x, bool) or not isinstance(x, (int, np.integer)):
        raise ElementMismatch(f"expected a finite-group index, got {x!r}")
    x = int(x)
    if x < 0 or x >= g.order:
        raise ElementMismatch(f"index {x} outside 0..{g.order - 1}")
    return x


def mul(g: GroupSpec, x: Element, y: Element) -> Element:
    x, y = check_element(g, x), check_element(g, y)
    if g.is_lattice:
        out = tuple(a + b for a, b in zip(x, y))
        for c in out:
            if c < INT64_MIN or c > INT64_MAX:
                raise Overflow(f"lattice product {x}+{y} leaves the 64-bit range")
        return out
    return g.table[x][y]


def inverse(g: GroupSpec, x: Element) -> Element:
    x = check_element(g, x)
    if g.is_lattice:
        if any(c == INT64_MIN for c in x):
            raise Overflow(f"inverse of {x} leaves the 64-bit range")
        return tuple(-c for c in x)
    return g.inverses[x]


def window(g: GroupSpec, radius: int) -> List[Element]:
    """
    扫描窗口

    格点: max 范数 ≤ radius 的全部点, 字典序; 有限群: 全部元素
    """
    if g.is_finite:
        return list(range(g.order))
    r = range(-radius, radius + 1)
    return list(itertools.product(r, repeat=g.dim))


def window_array(g: GroupSpec, radius: int, stride: int = 1) -> np.ndarray:
    """
    window 的 numpy 版本

    格点返回 (n, dim) int64 数组; stride > 1 时每个坐标轴按步长取网格并保留两端角点。
    有限群返回 (order,) 下标数组。
    """
    if g.is_finite:
        return np.arange(g.order, dtype=np.int64)
    axis = np.arange(-radius, radius + 1, max(1, stride), dtype=np.int64)
    if axis[-1] != radius:
        axis = np.append(axis, np.int64(radius))
    grids = np.meshgrid(*([axis] * g.dim), indexing="ij")
    return np.stack([m.reshape(-1) for m in grids], axis=1)


def window_size(g: GroupSpec, radius: int) -> int:
    if g.is_finite:
        return g.order
    return (2 * radius + 1) ** g.dim


def as_element(g: GroupSpec, point) -> Element:
    """把 window_array 的一行转回元素"""
    if g.is_lattice:
        return tuple(int(c) for c in point)
    return int(point)


def element_to_json(g: GroupSpec, x: Element):
    if g.is_lattice:
        return list(x)
    return int(x)
