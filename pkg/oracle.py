#!/usr/bin/env python3
"""
独立校验模块
- 有限群上 ψ 的双重循环穷举, 与扫描引擎对拍
- 小有限群上全部乘性函数的穷举
- 构造 → 加噪 → 分类 的往返测试
"""

import cmath
import itertools
from collections import Counter
from dataclasses import dataclass, field, replace
from multiprocessing import Pool
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from classifier import CaseReport, Tolerances, classify
from deviation import sup_deviation
from errors import InvalidParams, NotFinite, TooLarge
from families import FamilyParams, construct_case, cosine_solution, sine_solution
from funcspace import (
    DEFAULT_SCHEDULE,
    Additive,
    Character,
    Const,
    ExpChar,
    FnDescriptor,
    GFunction,
    Noise,
    SplitMixStream,
    Table,
)
from group_core import GroupSpec, lattice
from logger_config import get_logger

logger = get_logger(__name__)

ROUNDTRIP_CASES = (1, 2, 3, 4, 5, 6, 7, 8, 10)
EXACT_SOURCES = (3, 4, 5, 6, 8)
PASS_RATE = 0.9
PARAM_TOL = 1e-2
ENUMERATION_CAP = 12
ROOT_TOL = 1e-9

# 参数抽样网格
SCALAR_BOX = (0.5, 2.0)
SMALL_BOX = (0.0, 1.0)
ADDITIVE_BOX = (0.5, 1.5)
RATE_BOX = (0.02, 0.035)


# ==================== 穷举 ψ ====================

def _table_values(F: GFunction, name: str) -> np.ndarray:
    if not isinstance(F.desc, Table):
        raise InvalidParams(f"{name} must be a table descriptor, got {F.desc.op}")
    return np.asarray(F.desc.values, dtype=np.complex128)


def exhaustive_deviation(group: GroupSpec, f: GFunction, g: GFunction, h: GFunction) -> float:
    """
    有限群上对全部 order² 个点对逐一计算 |ψ(x, y)| 的最大值

    Args:
        group: 有限群
        f, g, h: Table 描述子给出的函数

    Returns:
        float: sup |ψ|
    """
    if not group.is_finite:
        raise NotFinite(f"exhaustive deviation needs a finite group, got {group.label}")
    fv, gv, hv = _table_values(f, "f"), _table_values(g, "g"), _table_values(h, "h")
    table = group.table
    sup = 0.0
    for x in range(group.order):
        for y in range(group.order):
            xy = table[x][y]
            value = abs(fv[xy] - fv[x] * gv[y] - gv[x] * fv[y] - hv[x] * hv[y])
            sup = max(sup, float(value))
    return sup


def enumerate_multiplicative(group: GroupSpec) -> List[Table]:
    """
    穷举有限群上的全部乘性函数

    给生成元逐一赋 order 次单位根, 沿乘法表扩张到全群后检查乘性律; 最后附上零函数

    Returns:
        List[Table]: 非零乘性函数在前, 零函数在末尾
    """
    if not group.is_finite:
        raise NotFinite(f"enumeration needs a finite group, got {group.label}")
    n = group.order
    if n > ENUMERATION_CAP:
        raise TooLarge(f"group order {n} exceeds the enumeration cap {ENUMERATION_CAP}")

    table = group.table_array
    gens = group.generators()
    roots = [cmath.exp(2j * cmath.pi * k / n) for k in range(n)]
    found: Dict[tuple, Table] = {}
    for assignment in itertools.product(roots, repeat=len(gens)):
        values = np.zeros(n, dtype=np.complex128)
        reached = np.zeros(n, dtype=bool)
        values[group.identity_index] = 1.0
        reached[group.identity_index] = True
        frontier = [group.identity_index]
        while frontier:
            nxt = []
            for x in frontier:
                for gen, v in zip(gens, assignment):
                    y = int(table[x, gen])
                    if not reached[y]:
                        values[y] = values[x] * v
                        reached[y] = True
                        nxt.append(y)
            frontier = nxt
        defect = np.abs(values[table] - values[:, None] * values[None, :])
        if defect.max() > ROOT_TOL:
            continue
        key = tuple(np.round(values, 9))
        found.setdefault(key, Table(tuple(complex(v) for v in values)))

    maps = list(found.values()) + [Table((0j,) * n)]
    logger.info(f"{group.label} 上共有 {len(maps)} 个乘性函数(含零函数)")
    return maps


# ==================== 有限群对拍 ====================

@dataclass
class FiniteTrialReport:
    """有限群上穷举与扫描的对拍结果"""
    group: str
    trials: int
    seed: int
    max_difference: float
    verdicts: Dict[str, int] = field(default_factory=dict)

    @property
    def degenerate(self) -> bool:
        """有限群上只应出现情形 1, 2, 10"""
        return all(k in ("1", "2", "10") for k in self.verdicts)

    @property
    def passed(self) -> bool:
        return self.max_difference <= 1e-12 and self.degenerate

    def to_json(self) -> dict:
        return {
            "group": self.group,
            "trials": self.trials,
            "seed": self.seed,
            "max_difference": self.max_difference,
            "verdicts": dict(sorted(self.verdicts.items())),
            "degenerate": self.degenerate,
            "passed": self.passed,
        }


def random_table(group: GroupSpec, stream: SplitMixStream) -> GFunction:
    return GFunction(group, Table(tuple(stream.polar(0.0, 1.0) for _ in range(group.order))))


def finite_trials(group: GroupSpec, trials: int = 100, seed: int = 0,
                  schedule: Sequence[int] = DEFAULT_SCHEDULE) -> FiniteTrialReport:
    """
    随机三元组上比较 exhaustive_deviation 与 sup_deviation, 并统计分类结果

    Args:
        group: 有限群
        trials: 三元组个数
        seed: SplitMix64 种子
        schedule: 扫描半径序列

    Returns:
        FiniteTrialReport
    """
    if not group.is_finite:
        raise NotFinite(f"finite trials need a finite group, got {group.label}")
    stream = SplitMixStream(seed)
    worst = 0.0
    verdicts: Counter = Counter()
    for _ in range(trials):
        f, g, h = (random_table(group, stream) for _ in range(3))
        brute = exhaustive_deviation(group, f, g, h)
        scanned = sup_deviation(f, g, h, schedule).sup
        worst = max(worst, abs(brute - scanned))
        report = classify(f, g, h, schedule)
        verdicts[str(report.case_id) if report.classified else "unclassified"] += 1
    result = FiniteTrialReport(group.label, trials, seed, worst, dict(verdicts))
    logger.info(f"{group.label} 对拍 {trials} 组: 最大差 {worst:.3g}, 分类 {dict(verdicts)}")
    return result


# ==================== 参数抽样 ====================

def _rate(stream: SplitMixStream) -> float:
    return stream.sign() * stream.uniform(*RATE_BOX)


def _expchar(stream: SplitMixStream, sign: int = 0) -> ExpChar:
    rate = abs(_rate(stream)) * sign if sign else _rate(stream)
    return ExpChar((complex(rate, stream.uniform(-1.0, 1.0)),))


def draw_params(case_id: int, seed: int, noise_amp: float = 0.01) -> FamilyParams:
    """
    按固定网格由种子确定性地抽取情形参数, 有界槽为 Noise(noise_amp)

    |λ|, |α| ∈ [0.5, 2] 且相位均匀; |β|, |ρ| ≤ 1; 加性系数模长 ∈ [0.5, 1.5];
    a₁ 模长 ≤ 1; 特征角 ∈ [0, 2π); 指数速率 Re μ ∈ ±[0.02, 0.035]
    """
    if case_id not in ROUNDTRIP_CASES:
        raise InvalidParams(f"round trips cover cases {list(ROUNDTRIP_CASES)}, got {case_id}")
    stream = SplitMixStream((int(seed) << 8) | case_id)
    group = lattice(1)

    def noise() -> FnDescriptor:
        return Noise(stream.seed64() >> 1, noise_amp)

    lam = stream.polar(*SCALAR_BOX)
    alpha = stream.polar(*SCALAR_BOX)
    beta = stream.polar(*SMALL_BOX)
    rho = stream.polar(*SMALL_BOX)
    a = Additive((stream.polar(*ADDITIVE_BOX),))
    a1 = Additive((stream.polar(*SMALL_BOX),))
    m = Character((stream.angle(),))

    if case_id == 1:
        return FamilyParams(1, group, g_free=Additive((stream.polar(*ADDITIVE_BOX),)), b=noise())
    if case_id == 2:
        return FamilyParams(2, group, b=noise(), phi=noise(), c=noise())
    if case_id == 3:
        return FamilyParams(3, group, lam=lam, a=a, m=m, b=noise(), phi=noise())
    if case_id == 4:
        return FamilyParams(4, group, lam=lam, alpha=alpha, M=_expchar(stream), b=noise(), phi=noise())
    if case_id == 5:
        pair = sine_solution(GFunction(group, a), GFunction(group, m))
        return FamilyParams(5, group, lam=lam, a=a, m=m, f0g0=pair, b=noise())
    if case_id == 6:
        m1, m2 = GFunction(group, _expchar(stream, 1)), GFunction(group, _expchar(stream, -1))
        return FamilyParams(6, group, lam=lam, rho=rho, f0g0=cosine_solution(m1, m2), b=noise())
    if case_id == 7:
        return FamilyParams(7, group, lam=lam, beta=beta, a=a, m=m, M=_expchar(stream), b=noise())
    if case_id == 8:
        return FamilyParams(8, group, beta=beta, a=a, a1=a1, m=m, b=noise())

    source = EXACT_SOURCES[stream.next_u64() % len(EXACT_SOURCES)]
    return replace(draw_params(source, seed, 0.0), case_id=10, exact_of=source)


# ==================== 参数误差 ====================

def _coeff(desc: FnDescriptor) -> complex:
    if isinstance(desc, Additive):
        return complex(desc.coeffs[0])
    return 0j


def _unit(desc: FnDescriptor) -> complex:
    if isinstance(desc, Character):
        return cmath.exp(1j * desc.angles[0])
    if isinstance(desc, Const):
        return complex(desc.c)
    return 0j


def _rate_of(desc: FnDescriptor) -> complex:
    if isinstance(desc, ExpChar):
        return complex(desc.mu[0])
    return 0j


def _scalars(case_id: int, p: FamilyParams) -> Dict[str, complex]:
    """参与比较的标量参数; 特征以单位复数 e^{iθ} 比较"""
    lam = complex(p.lam)
    if case_id == 3:
        return {"lambda": lam, "a": _coeff(p.a), "m": _unit(p.m)}
    if case_id == 4:
        return {"lambda": lam, "alpha": complex(p.alpha), "mu": _rate_of(p.M)}
    if case_id == 5:
        return {"lambda": lam}
    if case_id == 6:
        return {"lambda": lam, "rho": complex(p.rho)}
    if case_id == 7:
        return {"lambda": lam, "a": _coeff(p.a), "mu": _rate_of(p.M)}
    if case_id == 8:
        return {"beta": complex(p.beta), "a": _coeff(p.a), "a1": _coeff(p.a1), "m": _unit(p.m)}
    return {}


def _relative(fit: complex, drawn: complex) -> float:
    return abs(fit - drawn) / max(1.0, abs(drawn))


def param_error(case_id: int, drawn: FamilyParams, fitted: FamilyParams) -> float:
    """
    最大相对误差 |fit − drawn| / max(1, |drawn|)

    情形 6 允许 (λ, ρ) → (−λ, −ρ), 情形 7 允许 λ 变号
    """
    want, got = _scalars(case_id, drawn), _scalars(case_id, fitted)
    if not want:
        return 0.0
    signed = {6: ("lambda", "rho"), 7: ("lambda",)}.get(case_id, ())
    errors = []
    for sign in ((1, -1) if signed else (1,)):
        errors.append(max(_relative(got[k] * (sign if k in signed else 1), v) for k, v in want.items()))
    return min(errors)


# ==================== 往返测试 ====================

@dataclass
class RoundTripOutcome:
    """一次 构造 → 分类 往返的结果"""
    case_in: int
    seed: int
    case_out: Optional[int]
    cases: List[int]
    exact: bool
    param_error: float
    passed: bool
    noise_amp: float = 0.0
    reason: str = ""

    @property
    def wrong_case(self) -> bool:
        """分类给出了结论却不含输入情形"""
        if not self.cases:
            return False
        if self.case_in == 10:
            return not self.exact
        return self.case_in not in self.cases

    def to_json(self) -> dict:
        out = {
            "case_in": self.case_in,
            "seed": self.seed,
            "case_out": self.case_out if self.case_out is not None else "unclassified",
            "cases": list(self.cases),
            "exact": self.exact,
            "param_error": self.param_error,
            "noise_amp": self.noise_amp,
            "passed": self.passed,
        }
        if self.reason:
            out["reason"] = self.reason
        return out


def _outcome(case_id: int, seed: int, noise_amp: float, drawn: FamilyParams, report: CaseReport) -> RoundTripOutcome:
    if case_id == 10:
        matched, error = report.exact, 0.0
    else:
        matched = case_id in report.cases
        error = param_error(case_id, drawn, report.fitted[case_id]) if matched else float("inf")
    passed = matched and error <= PARAM_TOL
    return RoundTripOutcome(case_id, seed, report.case_id, list(report.cases), report.exact, error, passed,
                            noise_amp, report.reason)


def roundtrip(case_id: int, seed: int, noise_amp: float = 0.01, schedule: Sequence[int] = DEFAULT_SCHEDULE,
              tolerances: Tolerances = None) -> RoundTripOutcome:
    """
    抽参 → 构造 → 分类 → 比较

    Args:
        case_id: 1..8 或 10 (情形 9 只能验证)
        seed: 抽样种子
        noise_amp: 有界槽噪声幅度
        schedule: 分类使用的半径序列
        tolerances: 分类阈值

    Returns:
        RoundTripOutcome
    """
    if case_id == 9:
        raise InvalidParams("case 9 has a free f and is verify-only")
    drawn = draw_params(case_id, seed, noise_amp)
    construction = construct_case(drawn)
    report = classify(*construction.triple, schedule=schedule, tolerances=tolerances)
    outcome = _outcome(case_id, seed, noise_amp, drawn, report)
    log = logger.info if outcome.passed else logger.warning
    log(f"往返 case={case_id} seed={seed}: 输出 {report.cases or report.reason}, "
        f"参数误差 {outcome.param_error:.3g}, {'通过' if outcome.passed else '失败'}")
    return outcome


def _roundtrip_job(args) -> RoundTripOutcome:
    case_id, seed, noise_amp, schedule, tolerances = args
    return roundtrip(case_id, seed, noise_amp, schedule, tolerances)


def roundtrip_many(case_id: int, seeds: Iterable[int], noise_amp: float = 0.01,
                   schedule: Sequence[int] = DEFAULT_SCHEDULE, tolerances: Tolerances = None,
                   jobs: int = 1) -> List[RoundTripOutcome]:
    """按种子批量往返; jobs > 1 时用进程池, 结果顺序与 seeds 一致"""
    tasks = [(case_id, int(s), noise_amp, tuple(schedule), tolerances) for s in seeds]
    if jobs <= 1:
        return [_roundtrip_job(t) for t in tasks]
    with Pool(processes=jobs) as pool:
        return pool.map(_roundtrip_job, tasks)


def summarize(outcomes: Sequence[RoundTripOutcome]) -> dict:
    """通过率与错判数"""
    total = len(outcomes)
    passed = sum(o.passed for o in outcomes)
    wrong = [o.seed for o in outcomes if o.wrong_case]
    rate = passed / total if total else 0.0
    return {
        "total": total,
        "passed": passed,
        "pass_rate": rate,
        "wrong_case_seeds": wrong,
        "ok": rate >= PASS_RATE and not wrong,
    }
