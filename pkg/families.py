#!/usr/bin/env python3
"""
解族构造模块
余弦-正弦方程 f(xy)=f(x)g(y)+g(x)f(y)+h(x)h(y) 稳定性定理的十种情形,
两条正规形引理, 以及正弦/余弦方程的构造性解
"""

from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

from deviation import DeviationReport, cosine_deviation, sine_deviation
from errors import InvalidParams, MalformedInput
from funcspace import (
    Additive,
    Const,
    FnDescriptor,
    GFunction,
    Zero,
    boundedness,
    complex_from_json,
    complex_to_json,
    descriptor_from_json,
    is_multiplicative,
    is_zero_descriptor,
)
from group_core import GroupSpec, group_from_json, lattice
from logger_config import get_logger

logger = get_logger(__name__)

SINE = "sine"
COSINE = "cosine"
CASE_IDS = tuple(range(1, 11))
PAIR_CHECK_SCHEDULE = (16, 32, 64)


@dataclass
class SineCosinePair:
    """正弦方程或余弦方程的一组解 (f₀, g₀)"""
    f0: GFunction
    g0: GFunction
    kind: str

    def deviation(self, schedule=PAIR_CHECK_SCHEDULE) -> DeviationReport:
        if self.kind == SINE:
            return sine_deviation(self.f0, self.g0, schedule)
        return cosine_deviation(self.f0, self.g0, schedule)

    def to_json(self) -> dict:
        return {"kind": self.kind, "f0": self.f0.to_json(), "g0": self.g0.to_json()}


@dataclass
class FamilyParams:
    """
    各情形的参数记录

    m 为有界乘性函数(情形 3/7/8/9); M 为一般乘性函数(情形 4 的 m 与情形 7 的 M);
    b, phi, c 为有界槽; g_free 是情形 1 中任意的 g; exact_of 指明情形 10 借用的情形
    """
    case_id: int
    group: GroupSpec = field(default_factory=lattice)
    lam: complex = 0.0
    alpha: complex = 0.0
    beta: complex = 0.0
    rho: complex = 0.0
    a: FnDescriptor = field(default_factory=Zero)
    a1: FnDescriptor = field(default_factory=Zero)
    m: FnDescriptor = field(default_factory=lambda: Const(1.0))
    M: FnDescriptor = field(default_factory=Zero)
    b: FnDescriptor = field(default_factory=Zero)
    phi: FnDescriptor = field(default_factory=Zero)
    c: FnDescriptor = field(default_factory=Zero)
    g_free: FnDescriptor = field(default_factory=Zero)
    f0g0: Optional[SineCosinePair] = None
    free_f: Optional[GFunction] = None
    exact_of: int = 0

    def fn(self, desc: FnDescriptor) -> GFunction:
        return GFunction(self.group, desc)

    def to_json(self) -> dict:
        out = {
            "case_id": self.case_id,
            "group": self.group.to_json(),
            "lambda": complex_to_json(self.lam),
            "alpha": complex_to_json(self.alpha),
            "beta": complex_to_json(self.beta),
            "rho": complex_to_json(self.rho),
        }
        for name in ("a", "a1", "m", "M", "b", "phi", "c", "g_free"):
            out[name] = getattr(self, name).to_json()
        if self.f0g0 is not None:
            out["f0g0"] = self.f0g0.to_json()
        if self.free_f is not None:
            out["free_f"] = self.free_f.to_json()
        if self.exact_of:
            out["exact_of"] = self.exact_of
        return out

    @classmethod
    def from_json(cls, data: dict, group: GroupSpec = None) -> "FamilyParams":
        if not isinstance(data, dict) or "case_id" not in data:
            raise MalformedInput("params must be an object with 'case_id'")
        if "group" in data:
            group = group_from_json(data["group"])
        group = group or lattice(1)
        kwargs = {"case_id": int(data["case_id"]), "group": group}
        for key, attr in (("lambda", "lam"), ("alpha", "alpha"), ("beta", "beta"), ("rho", "rho")):
            if key in data:
                kwargs[attr] = complex_from_json(data[key])
        for name in ("a", "a1", "m", "M", "b", "phi", "c", "g_free"):
            if name in data:
                kwargs[name] = descriptor_from_json(data[name])
        if "f0g0" in data:
            pair = data["f0g0"]
            if not isinstance(pair, dict) or pair.get("kind") not in (SINE, COSINE):
                raise MalformedInput("f0g0 must carry kind 'sine' or 'cosine'")
            kwargs["f0g0"] = SineCosinePair(GFunction(group, descriptor_from_json(pair["f0"])),
                                            GFunction(group, descriptor_from_json(pair["g0"])), pair["kind"])
        if "free_f" in data:
            kwargs["free_f"] = GFunction(group, descriptor_from_json(data["free_f"]))
        if "exact_of" in data:
            kwargs["exact_of"] = int(data["exact_of"])
        return cls(**kwargs)


@dataclass
class Construction:
    """构造结果: 三元组、对有界槽的 Lipschitz 常数、有界槽全为零时的 sup ψ"""
    f: GFunction
    g: GFunction
    h: GFunction
    lipschitz: Optional[float]
    baseline: Optional[float]
    epsilon: float
    params: FamilyParams

    @property
    def triple(self) -> Tuple[GFunction, GFunction, GFunction]:
        return self.f, self.g, self.h

    def to_fixture(self) -> dict:
        return {
            "group": self.params.group.to_json(),
            "functions": {"f": self.f.to_json(), "g": self.g.to_json(), "h": self.h.to_json()},
            "meta": {
                "case_id": self.params.case_id,
                "params": self.params.to_json(),
                "lipschitz": self.lipschitz,
                "baseline": self.baseline,
                "epsilon": self.epsilon,
            },
        }


# ==================== 正弦/余弦方程 ====================

def _check_additive(desc: FnDescriptor, name: str):
    if not isinstance(desc, (Additive, Zero)):
        raise InvalidParams(f"{name} must be an additive descriptor, got {desc.op}")


def sine_solution(a: GFunction, m: GFunction) -> SineCosinePair:
    """f₀ = a·m, g₀ = m 解正弦方程"""
    if not is_multiplicative(m.desc):
        raise InvalidParams("sine_solution needs a multiplicative m")
    _check_additive(a.desc, "a")
    return SineCosinePair(a * m, m, SINE)


def cosine_solution(m1: GFunction, m2: GFunction) -> SineCosinePair:
    """f₀ = (m₁+m₂)/2, g₀ = (m₁−m₂)/(2i) 解余弦方程"""
    if not (is_multiplicative(m1.desc) and is_multiplicative(m2.desc)):
        raise InvalidParams("cosine_solution needs multiplicative m1 and m2")
    if m1.group != m2.group:
        raise InvalidParams("m1 and m2 live on different groups")
    if m1.desc == m2.desc:
        return SineCosinePair(m1, GFunction(m1.group, Zero()), COSINE)
    return SineCosinePair((m1 + m2) * 0.5, (m1 - m2) * -0.5j, COSINE)


# ==================== 参数校验 ====================

def _require_bounded(p: FamilyParams, name: str):
    verdict = boundedness(p.fn(getattr(p, name)))
    if not verdict.is_bounded:
        raise InvalidParams(f"case {p.case_id}: bounded slot {name} is {verdict.kind}")


def _require_bounded_multiplicative(p: FamilyParams, nonzero: bool = False):
    if not is_multiplicative(p.m):
        raise InvalidParams(f"case {p.case_id}: m must be multiplicative")
    if nonzero and is_zero_descriptor(p.m):
        raise InvalidParams(f"case {p.case_id}: m must be nonzero")
    if not boundedness(p.fn(p.m)).is_bounded:
        raise InvalidParams(f"case {p.case_id}: m must be bounded")


def _require_pair(p: FamilyParams, kind: str) -> SineCosinePair:
    pair = p.f0g0
    if pair is None and kind == SINE:
        pair = sine_solution(p.fn(p.a), p.fn(p.m))
    if pair is None and kind == COSINE:
        pair = cosine_solution(p.fn(p.m), p.fn(p.M))
    if pair.kind != kind:
        raise InvalidParams(f"case {p.case_id}: f0g0 must be a {kind} pair")
    return pair


def validate_params(p: FamilyParams):
    """按情形检查参数约束, 违反时抛出 InvalidParams 并指明条款"""
    if p.case_id not in CASE_IDS:
        raise InvalidParams(f"case_id must be in 1..10, got {p.case_id}")
    _check_additive(p.a, "a")
    _check_additive(p.a1, "a1")
    k = p.case_id
    if k == 1:
        _require_bounded(p, "b")
    elif k == 2:
        for name in ("b", "phi", "c"):
            _require_bounded(p, name)
    elif k == 3:
        _require_bounded_multiplicative(p)
        _require_bounded(p, "b")
        _require_bounded(p, "phi")
    elif k == 4:
        if not is_multiplicative(p.M):
            raise InvalidParams("case 4: M must be multiplicative")
        _require_bounded(p, "b")
        _require_bounded(p, "phi")
    elif k == 5:
        _require_bounded(p, "b")
    elif k in (6, 7):
        if p.lam == 0:
            raise InvalidParams(f"case {k}: lambda must be nonzero")
        _require_bounded(p, "b")
        if k == 7:
            _require_bounded_multiplicative(p)
            if not is_multiplicative(p.M):
                raise InvalidParams("case 7: M must be multiplicative")
    elif k == 8:
        _require_bounded_multiplicative(p, nonzero=True)
        if is_zero_descriptor(p.a) or all(c == 0 for c in getattr(p.a, "coeffs", ())):
            raise InvalidParams("case 8: a must be nonzero")
        _require_bounded(p, "b")
    elif k == 9:
        if p.free_f is None:
            raise InvalidParams("case 9: free_f is required")
        _require_bounded_multiplicative(p, nonzero=True)
        _require_bounded(p, "b")
    elif k == 10:
        if p.exact_of not in (0, 3, 4, 5, 6, 7, 8):
            raise InvalidParams(f"case 10: exact_of must be 0 or one of 3..8, got {p.exact_of}")
        if p.exact_of == 0 and p.f0g0 is None:
            raise InvalidParams("case 10: exact_of=0 needs a sine or cosine pair")


# ==================== 构造 ====================

def _slot_bound(p: FamilyParams, *names: str) -> float:
    return max((p.fn(getattr(p, n)).magnitude(0) for n in names), default=0.0)


def _assemble(p: FamilyParams) -> Tuple[GFunction, GFunction, GFunction]:
    fn = p.fn
    lam, alpha, beta, rho = complex(p.lam), complex(p.alpha), complex(p.beta), complex(p.rho)
    a, a1, m, M = fn(p.a), fn(p.a1), fn(p.m), fn(p.M)
    b, phi = fn(p.b), fn(p.phi)
    k = p.case_id

    if k == 1:
        return fn(Zero()), fn(p.g_free), b
    if k == 2:
        return b, phi, fn(p.c)
    if k == 3:
        am = a * m
        f = am + phi
        g = m - am * (lam ** 2 / 2) - b * lam - phi * (lam ** 2 / 2)
        h = am * lam + b + phi * lam
        return f, g, h
    if k == 4:
        f = M * alpha - b * alpha
        g = M * ((1 - alpha * lam ** 2) / 2) + b * ((1 + alpha * lam ** 2) / 2) - phi * lam
        h = M * (alpha * lam) - b * (alpha * lam) + phi
        return f, g, h
    if k == 5:
        pair = _require_pair(p, SINE)
        f0, g0 = pair.f0, pair.g0
        return f0, g0 - f0 * (lam ** 2 / 2) - b * lam, f0 * lam + b
    if k == 6:
        pair = _require_pair(p, COSINE)
        f0, g0 = pair.f0, pair.g0
        f = f0 * -(lam ** 2) + b * lam ** 2
        g = f0 * ((1 + rho ** 2) / 2) + g0 * rho + b * ((1 - rho ** 2) / 2)
        h = f0 * (lam * rho) + g0 * lam - b * (lam * rho)
        return f, g, h
    if k == 7:
        am = a * m
        f = M * lam ** 2 + am + b
        g = (M * (beta * lam * (1 - beta * lam / 2)) + m * (1 - beta * lam)
             - am * (beta ** 2 / 2) - b * (beta ** 2 / 2))
        h = M * (lam * (1 - beta * lam)) - m * lam - am * beta - b * beta
        return f, g, h
    if k == 8:
        a2m = a * a * m
        a1m = a1 * m
        am = a * m
        f = a2m * 0.5 + a1m * 0.5 + b
        g = a2m * (-beta ** 2 / 4) + am * beta - a1m * (beta ** 2 / 4) + m - b * (beta ** 2 / 2)
        h = a2m * (-beta / 2) + am - a1m * (beta / 2) - b * beta
        return f, g, h
    if k == 9:
        f = p.free_f
        g = f * (-beta ** 2 / 2) + m + a * m * beta + b * beta
        h = f * -beta + a * m + b
        return f, g, h
    raise InvalidParams(f"case {k} has no direct assembly")


def _exact_source(p: FamilyParams) -> FamilyParams:
    zero = Zero()
    source = replace(p, case_id=p.exact_of, b=zero, phi=zero, c=zero)
    if p.exact_of == 7:
        source = replace(source, m=zero)
    return source


def construct_case(params: FamilyParams) -> Construction:
    """
    按定理的公式装配 (f, g, h)

    Args:
        params: 情形参数

    Returns:
        Construction: 三元组 + Lipschitz 常数 + 零槽基线
    """
    validate_params(params)
    k = params.case_id

    if k == 10:
        if params.exact_of:
            inner = construct_case(_exact_source(params))
            f, g, h = inner.triple
        else:
            pair = params.f0g0
            if pair.kind == SINE:
                f, g, h = pair.f0, pair.g0, params.fn(Zero())
            else:
                f, g, h = pair.f0 * -1, pair.f0 * 0.5, pair.g0
        logger.info(f"构造情形 10 (精确解, 来源 {params.exact_of or params.f0g0.kind})")
        return Construction(f, g, h, 0.0, 0.0, 0.0, params)

    f, g, h = _assemble(params)
    mu = params.fn(params.m).magnitude(0)
    lam, alpha = abs(complex(params.lam)), abs(complex(params.alpha))
    baseline = 0.0
    if k == 1:
        eps = _slot_bound(params, "b")
        lipschitz = eps
    elif k == 2:
        eps = _slot_bound(params, "b", "phi", "c")
        lipschitz = 1 + 3 * eps
    elif k == 3:
        eps = _slot_bound(params, "b", "phi")
        lipschitz = 1 + 2 * mu + eps
    elif k == 4:
        eps = _slot_bound(params, "b", "phi")
        lipschitz = alpha * (1 + eps) + eps
    elif k == 5:
        eps = _slot_bound(params, "b")
        lipschitz = eps
    elif k == 6:
        eps = _slot_bound(params, "b")
        lipschitz = lam ** 2 * (1 + eps)
    elif k == 7:
        eps = _slot_bound(params, "b")
        lipschitz = 1 + 2 * mu
        baseline = lam ** 2 * mu ** 2
    elif k == 8:
        eps = _slot_bound(params, "b")
        lipschitz = 1 + 2 * mu
    else:
        eps = _slot_bound(params, "b")
        lipschitz, baseline = None, None
    logger.info(f"构造情形 {k}: lipschitz={lipschitz}, 基线={baseline}, 有界槽上界={eps:.4g}")
    return Construction(f, g, h, lipschitz, baseline, eps, params)


# ==================== 正规形 ====================

def dependent_form(branch: int, params: FamilyParams) -> Tuple[GFunction, GFunction, GFunction]:
    """
    f, h 模有界线性相关时的五种正规形

    branch 3 的 f 取 params.free_f, 缺省为 a·m; branch 5 的有界槽是 phi
    """
    fn = params.fn
    lam = complex(params.lam)
    phi = fn(params.phi)
    if branch == 1:
        if not boundedness(phi).is_bounded:
            raise InvalidParams("branch 1: h = phi must be bounded")
        return fn(Zero()), fn(params.g_free), phi
    if branch == 2:
        for name in ("b", "phi", "c"):
            _require_bounded(params, name)
        return fn(params.b), phi, fn(params.c)
    if branch == 3:
        if not is_multiplicative(params.m):
            raise InvalidParams("branch 3: m must be multiplicative")
        f = params.free_f if params.free_f is not None else fn(params.a) * fn(params.m)
        g = fn(params.m) - phi * lam - f * (lam ** 2 / 2)
        return f, g, f * lam + phi
    if branch == 4:
        return _assemble(replace(params, case_id=4))
    if branch == 5:
        pair = _require_pair(params, SINE)
        f0, g0 = pair.f0, pair.g0
        return f0, g0 - f0 * (lam ** 2 / 2) - phi * lam, f0 * lam + phi
    raise InvalidParams(f"normal form branch must be in 1..5, got {branch}")


def independent_form(branch: int, params: FamilyParams) -> Tuple[GFunction, GFunction, GFunction]:
    """
    f, h 模有界线性无关时的四种正规形

    1: 余弦形 (有界槽 phi); 2: βf + h = λM − λm; 3: βf + h = a·m + b, f 任意; 4: 精确解
    """
    if branch == 1:
        return construct_case(replace(params, case_id=6, b=params.phi)).triple
    if branch == 2:
        return construct_case(replace(params, case_id=7)).triple
    if branch == 3:
        return construct_case(replace(params, case_id=9)).triple
    if branch == 4:
        return construct_case(replace(params, case_id=10)).triple
    raise InvalidParams(f"normal form branch must be in 1..4, got {branch}")


lemma33_form = dependent_form
lemma34_form = independent_form
