#!/usr/bin/env python3
"""
分类器模块
把 ψ 有界的三元组 (f, g, h) 沿判定树归入十种情形, 并逐条验证各情形的恒等式

判定树:
1. ψ 有界, 否则不分类; sup ψ 足够小时标记 exact
2. f ≈ 0 → 情形 1
3. f, h 模有界线性相关 → f 有界为情形 2, 否则经 φ̂ = g + λ²f/2 + λφ 进入情形 3/4/5
4. f, h 模有界线性无关 → g = αf + βh + φ, 按 2α − β² 分为情形 6 与情形 7/8/9
"""

import cmath
import dataclasses
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import mpmath
import numpy as np

from deviation import (
    MULTIPLICATIVE,
    DeviationReport,
    central_defect,
    cosine_deviation,
    multiplicative_kernel,
    pair_points,
    scan_pairs,
    side_condition_deviation,
    sine_deviation,
    sup_deviation,
)
from errors import (
    DegenerateGram,
    InconclusiveDependence,
    InvalidParams,
    StabilityError,
    UnboundedCauchyDefect,
)
from families import COSINE, SINE, FamilyParams, SineCosinePair, sine_solution
from funcspace import (
    DEFAULT_SCHEDULE,
    DEFAULT_TAU,
    INCONCLUSIVE,
    BoundVerdict,
    FnDescriptor,
    GFunction,
    Zero,
    boundedness,
    check_schedule,
    complex_to_json,
    dependence_mod_bounded,
    fit_character,
    fit_exponential,
    is_multiplicative,
    is_zero_descriptor,
    precision_for,
    projection_coefficient,
    sup_norm,
    triple_dependence,
)
from group_core import GroupSpec, as_element, element_to_json
from hyers import additive_part, quadratic_split, twist_by_character
from logger_config import get_logger, log_verdict

logger = get_logger(__name__)

PASS = "pass"
FAIL = "fail"
GRAM_FLOOR = 1e-8
ROUNDING_FACTOR = 16


@dataclass(frozen=True)
class Tolerances:
    """分类与验证的全部数值阈值"""
    tol_exact: float = 1e-9
    tol_disc: float = 1e-6
    tau: float = DEFAULT_TAU
    tol_fit: float = 1e-2
    tol_growth: float = 1e-2
    tol_mult: float = 1e-9
    zero_sup: float = 1e-12
    hyers_depth: int = 40
    hyers_tol: float = 1e-9
    fit_dilation: int = 2 ** 16

    def replace(self, **overrides) -> "Tolerances":
        known = {f.name for f in dataclasses.fields(self)}
        unknown = sorted(set(overrides) - known)
        if unknown:
            raise InvalidParams(f"unknown tolerance fields: {unknown}")
        return dataclasses.replace(self, **{k: v for k, v in overrides.items() if v is not None})


def _jsonable(value):
    if isinstance(value, (complex, mpmath.mpc)) or (isinstance(value, np.complexfloating)):
        return complex_to_json(value)
    if isinstance(value, (mpmath.mpf, np.floating)):
        return float(value)
    if isinstance(value, FnDescriptor):
        return value.to_json()
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


@dataclass
class Residual:
    """一条恒等式或有界性检查"""
    name: str
    value: float
    tolerance: Optional[float]
    passed: bool
    kind: str = "sup"

    def to_json(self) -> dict:
        out = {"name": self.name, "kind": self.kind, "value": self.value, "pass": self.passed}
        if self.tolerance is not None:
            out["tolerance"] = self.tolerance
        return out


@dataclass
class CaseReport:
    """
    分类或验证结果

    cases 第一个元素为主情形, 其余为同时验证通过的情形; 为空时 reason 给出未分类原因
    """
    cases: List[int] = field(default_factory=list)
    reason: str = ""
    exact: bool = False
    sup_psi: float = 0.0
    fitted: Dict[int, FamilyParams] = field(default_factory=dict)
    residuals: Dict[int, List[Residual]] = field(default_factory=dict)
    windows: Tuple[int, ...] = ()
    branch_trace: List[dict] = field(default_factory=list)

    @property
    def case_id(self) -> Optional[int]:
        return self.cases[0] if self.cases else None

    @property
    def classified(self) -> bool:
        return bool(self.cases)

    def to_json(self) -> dict:
        if self.cases:
            verdict = {"case": self.cases[0], "also": self.cases[1:]}
        else:
            verdict = {"unclassified": self.reason}
        return {
            "verdict": verdict,
            "cases": list(self.cases),
            "exact": self.exact,
            "sup_psi": self.sup_psi,
            "fitted": {str(k): p.to_json() for k, p in self.fitted.items()},
            "residuals": {str(k): [r.to_json() for r in rs] for k, rs in self.residuals.items()},
            "windows": list(self.windows),
            "branch_trace": list(self.branch_trace),
        }


# ==================== 验证 ====================

class _Checks:
    def __init__(self, schedule: Tuple[int, ...], tau: float, tol: float, slack: float = 0.0):
        self.schedule = schedule
        self.radius = schedule[-1]
        self.tau = tau
        self.tol = tol
        self.slack = slack
        self.items: List[Residual] = []

    def sup(self, name: str, F: GFunction, tol: float = None):
        tol = self.tol if tol is None else tol
        value, _ = sup_norm(F, self.radius)
        self.items.append(Residual(name, value, tol, value <= tol))

    def value(self, name: str, value: float, tol: float = None):
        tol = self.tol if tol is None else tol
        self.items.append(Residual(name, float(value), tol, value <= tol))

    def verdict(self, name: str, verdict: BoundVerdict):
        value = verdict.bound if verdict.is_bounded else verdict.growth_ratio
        self.items.append(Residual(name, value, None, verdict.is_bounded, "bounded"))

    def bounded(self, name: str, F: GFunction):
        self.verdict(name, boundedness(F, self.schedule, self.tau, self.slack))

    @property
    def failures(self) -> List[str]:
        return [r.name for r in self.items if not r.passed]


def _exact_allowance(functions: Sequence[GFunction], radius: int, scale: float) -> float:
    """float 计算的舍入余量; 扩展精度下为 0"""
    if precision_for(functions, radius) is not None:
        return 0.0
    return ROUNDING_FACTOR * np.finfo(float).eps * scale


def _require_nonzero(value, name: str, case_id: int):
    if value == 0:
        raise InvalidParams(f"case {case_id}: {name} must be nonzero")


def verify_case(case_id: int, params: FamilyParams, f: GFunction, g: GFunction, h: GFunction,
                schedule: Sequence[int] = DEFAULT_SCHEDULE, tol: float = 1e-2,
                tau: float = DEFAULT_TAU, tol_exact: float = 1e-9, slack: float = 0.0) -> CaseReport:
    """
    逐条检查情形 case_id 的恒等式

    有界槽由 (f, g, h) 与参数反解后做有界性判定, 其余恒等式的残差 sup 须 ≤ tol;
    情形 3, 7, 8, 9 的 m 须为非零有界乘性函数, 情形 8 的 a 须非零

    Args:
        case_id: 1..10
        params: 情形参数(拟合得到或构造时使用)
        f, g, h: 被检查的三元组
        schedule: 半径序列
        tol: 恒等式残差阈值
        tau: 有界性判定的增长阈值
        tol_exact: 情形 10 的 sup ψ 阈值
        slack: 有界性判定的爬升容差, 0 为严格判定

    Returns:
        CaseReport: 通过时 cases == [case_id]
    """
    if case_id not in range(1, 11):
        raise InvalidParams(f"case_id must be in 1..10, got {case_id}")
    if not (f.group == g.group == h.group == params.group):
        raise InvalidParams("params and functions live on different groups")
    schedule = check_schedule(schedule)
    checks = _Checks(schedule, tau, tol, slack)
    group = f.group
    fn = params.fn
    lam, alpha, beta, rho = params.lam, params.alpha, params.beta, params.rho
    k = case_id

    if k in (3, 7, 8, 9):
        if not is_multiplicative(params.m):
            raise InvalidParams(f"case {k}: m must be multiplicative")
        if is_zero_descriptor(params.m):
            raise InvalidParams(f"case {k}: m must be nonzero")
        checks.bounded("m", fn(params.m))
    if k in (4, 7) and not is_multiplicative(params.M):
        raise InvalidParams(f"case {k}: M must be multiplicative")
    if k == 8 and is_zero_descriptor(params.a):
        raise InvalidParams("case 8: a must be nonzero")

    if k == 1:
        checks.sup("f", f)
        checks.bounded("h", h)
    elif k == 2:
        for name, F in (("f", f), ("g", g), ("h", h)):
            checks.bounded(name, F)
    elif k == 3:
        m, am = fn(params.m), fn(params.a) * fn(params.m)
        phi = f - am
        b = h - f * lam
        checks.bounded("phi", phi)
        checks.bounded("b", b)
        checks.sup("g", g - m + am * (lam ** 2 / 2) + b * lam + phi * (lam ** 2 / 2))
    elif k == 4:
        _require_nonzero(alpha, "alpha", k)
        M = fn(params.M)
        b = M - f * (1 / alpha)
        phi = h - f * lam
        checks.bounded("b", b)
        checks.bounded("phi", phi)
        checks.sup("g", g - M * ((1 - alpha * lam ** 2) / 2) - b * ((1 + alpha * lam ** 2) / 2) + phi * lam)
    elif k == 5:
        pair = params.f0g0 or sine_solution(fn(params.a), fn(params.m))
        if pair.kind != SINE:
            raise InvalidParams("case 5 needs a sine pair")
        f0, g0 = pair.f0, pair.g0
        b = h - f0 * lam
        checks.sup("f", f - f0)
        checks.bounded("b", b)
        checks.sup("g", g - g0 + f0 * (lam ** 2 / 2) + b * lam)
        checks.value("sine", sine_deviation(f0, g0, schedule).sup)
    elif k == 6:
        _require_nonzero(lam, "lambda", k)
        if params.f0g0 is None or params.f0g0.kind != COSINE:
            raise InvalidParams("case 6 needs a cosine pair")
        f0, g0 = params.f0g0.f0, params.f0g0.g0
        b = f * (1 / lam ** 2) + f0
        checks.bounded("b", b)
        checks.sup("g", g - f0 * ((1 + rho ** 2) / 2) - g0 * rho - b * ((1 - rho ** 2) / 2))
        checks.sup("h", h - f0 * (lam * rho) - g0 * lam + b * (lam * rho))
        checks.value("cosine", cosine_deviation(f0, g0, schedule).sup)
    elif k == 7:
        _require_nonzero(lam, "lambda", k)
        M, m = fn(params.M), fn(params.m)
        am = fn(params.a) * m
        b = f - M * lam ** 2 - am
        checks.bounded("b", b)
        checks.sup("g", g - M * (beta * lam * (1 - beta * lam / 2)) - m * (1 - beta * lam)
                   + am * (beta ** 2 / 2) + b * (beta ** 2 / 2))
        checks.sup("h", h - M * (lam * (1 - beta * lam)) + m * lam + am * beta + b * beta)
    elif k == 8:
        m, a, a1 = fn(params.m), fn(params.a), fn(params.a1)
        a2m, a1m, am = a * a * m, a1 * m, a * m
        b = f - a2m * 0.5 - a1m * 0.5
        checks.bounded("b", b)
        checks.sup("g", g + a2m * (beta ** 2 / 4) - am * beta + a1m * (beta ** 2 / 4) - m + b * (beta ** 2 / 2))
        checks.sup("h", h + a2m * (beta / 2) - am + a1m * (beta / 2) + b * beta)
    elif k == 9:
        m, a = fn(params.m), fn(params.a)
        b = h + f * beta - a * m
        checks.bounded("b", b)
        checks.sup("g", g + f * (beta ** 2 / 2) - m - a * m * beta - b * beta)
        side = side_condition_deviation(f, m, a, b, schedule)
        checks.verdict("side_condition", side.verdict(tau, slack))
    else:
        psi = sup_deviation(f, g, h, schedule)
        allowance = _exact_allowance([f, g, h], schedule[-1], psi.scale)
        checks.value("psi", psi.sup, tol_exact + allowance)

    failures = checks.failures
    report = CaseReport(
        cases=[] if failures else [k],
        reason=f"case {k} failed: {', '.join(failures)}" if failures else "",
        fitted={k: params},
        residuals={k: checks.items},
        windows=schedule,
    )
    logger.debug(f"验证情形 {k}: {'通过' if not failures else '失败 ' + ', '.join(failures)}")
    return report


# ==================== 其他判定工具 ====================

def multiplicativity_defect(g: GFunction, schedule: Sequence[int] = DEFAULT_SCHEDULE) -> DeviationReport:
    """sup |g(xy) − g(x)g(y)|"""
    radius = check_schedule(schedule)[-1]
    scale = g.magnitude(2 * radius) + g.magnitude(radius) ** 2
    return scan_pairs(multiplicative_kernel(g), [g], schedule, MULTIPLICATIVE, scale)


@dataclass
class PsiFactorization:
    """ψ(x, ·) ≈ φ₁(x)f + φ₂(x)h 的逐行拟合"""
    points: List[object]
    phi1: np.ndarray
    phi2: np.ndarray
    residual: float

    def to_json(self, group: GroupSpec) -> dict:
        return {
            "points": [element_to_json(group, x) for x in self.points],
            "phi1": [complex_to_json(v) for v in self.phi1],
            "phi2": [complex_to_json(v) for v in self.phi2],
            "residual": self.residual,
        }


def fit_psi_factorization(psi: Callable[[np.ndarray, np.ndarray], np.ndarray], f: GFunction, h: GFunction,
                          radius: int) -> PsiFactorization:
    """
    对窗口中每个 x 用 (f, h) 最小二乘拟合 ψ(x, ·)

    Args:
        psi: 二元采样器 (xs, ys) ↦ 矩阵
        f, h: 需在窗口上线性无关
        radius: 窗口半径

    Returns:
        PsiFactorization: 采样的 φ₁, φ₂ 与最大残差
    """
    points, _ = pair_points(f.group, radius)
    fv = np.asarray(f.values(points), dtype=np.complex128)
    hv = np.asarray(h.values(points), dtype=np.complex128)
    nf, nh = np.vdot(fv, fv).real, np.vdot(hv, hv).real
    if nf == 0 or nh == 0:
        raise DegenerateGram("f or h vanishes on the window")
    det = 1.0 - abs(np.vdot(fv, hv)) ** 2 / (nf * nh)
    if det <= GRAM_FLOOR:
        raise DegenerateGram(f"normalized Gram determinant {det:.3g} is below {GRAM_FLOOR}")

    values = np.asarray(psi(points, points), dtype=np.complex128)
    A = np.stack([fv, hv], axis=1)
    coeffs, *_ = np.linalg.lstsq(A, values.T, rcond=None)
    fitted = (A @ coeffs).T
    residual = float(np.max(np.abs(values - fitted))) if values.size else 0.0
    logger.debug(f"ψ 分解残差 {residual:.3g}")
    return PsiFactorization([as_element(f.group, p) for p in points], coeffs[0], coeffs[1], residual)


def _sqrt(z):
    if isinstance(z, (mpmath.mpc, mpmath.mpf)):
        return mpmath.sqrt(z)
    return cmath.sqrt(z)


# ==================== 判定树 ====================

class _Classifier:
    """一次 classify 调用的状态: 分支轨迹、已验证情形、拟合参数"""

    def __init__(self, f: GFunction, g: GFunction, h: GFunction, schedule: Sequence[int], tol: Tolerances):
        if not (f.group == g.group == h.group):
            raise InvalidParams("f, g, h live on different groups")
        self.f, self.g, self.h = f, g, h
        self.group = f.group
        self.schedule = check_schedule(schedule)
        self.radius = self.schedule[-1]
        self.tol = tol
        self.trace: List[dict] = []
        self.cases: List[int] = []
        self.fitted: Dict[int, FamilyParams] = {}
        self.residuals: Dict[int, List[Residual]] = {}
        self.reason = ""

    def fn(self, desc: FnDescriptor) -> GFunction:
        return GFunction(self.group, desc)

    def note(self, step: str, verdict: str, **values):
        self.trace.append({"step": step, "verdict": verdict,
                           "values": {k: _jsonable(v) for k, v in values.items()}})
        log_verdict(step, verdict, **{k: _short(v) for k, v in values.items()})

    def fail(self, reason: str):
        if not self.reason:
            self.reason = reason
        self.note("stop", FAIL, reason=reason)

    def boundedness(self, F: GFunction) -> BoundVerdict:
        return boundedness(F, self.schedule, self.tol.tau, self.tol.tol_growth)

    def accept(self, case_id: int, params: FamilyParams) -> bool:
        report = verify_case(case_id, params, self.f, self.g, self.h, self.schedule,
                             self.tol.tol_fit, self.tol.tau, self.tol.tol_exact, self.tol.tol_growth)
        ok = bool(report.cases)
        self.note(f"verify case {case_id}", PASS if ok else FAIL,
                  failed=[r.name for r in report.residuals[case_id] if not r.passed])
        if ok and case_id not in self.cases:
            self.cases.append(case_id)
            self.fitted[case_id] = params
            self.residuals[case_id] = report.residuals[case_id]
        elif not ok and not self.reason:
            self.reason = report.reason
        return ok

    def attempt(self, label: str, step: Callable[[], bool]) -> bool:
        try:
            return step()
        except StabilityError as e:
            self.note(label, FAIL, error=type(e).__name__, message=str(e))
            return False

    # ---------- 入口 ----------

    def run(self) -> CaseReport:
        f, g, h = self.f, self.g, self.h
        psi = sup_deviation(f, g, h, self.schedule)
        verdict = psi.verdict(self.tol.tau, self.tol.tol_growth)
        allowance = _exact_allowance([f, g, h], self.radius, psi.scale)
        exact = psi.sup <= self.tol.tol_exact + allowance
        self.note("psi", verdict.kind, sup=psi.sup, exact=exact, trace=[list(t) for t in verdict.trace])
        if verdict.is_unbounded:
            return self.report(psi.sup, False, "unbounded psi")
        if not verdict.is_bounded:
            return self.report(psi.sup, False, f"inconclusive psi (growth {verdict.growth_ratio:.3f})")

        try:
            self.structural()
        except InconclusiveDependence as e:
            self.note("dependence", INCONCLUSIVE, message=str(e), trace=[list(t) for t in e.trace])
            self.reason = self.reason or str(e)
        except StabilityError as e:
            self.note("structure", FAIL, error=type(e).__name__, message=str(e))
            self.reason = self.reason or str(e)

        if exact:
            primary = next((c for c in self.cases if c in (3, 4, 5, 6, 7, 8)), 0)
            self.cases.append(10)
            self.fitted[10] = FamilyParams(10, self.group, exact_of=primary)
            self.residuals[10] = [Residual("psi", psi.sup, self.tol.tol_exact + allowance, True)]
        return self.report(psi.sup, exact, self.reason or "no case verified")

    def report(self, sup_psi: float, exact: bool, reason: str) -> CaseReport:
        report = CaseReport(
            cases=list(self.cases),
            reason="" if self.cases else reason,
            exact=exact,
            sup_psi=sup_psi,
            fitted=dict(self.fitted),
            residuals=dict(self.residuals),
            windows=self.schedule,
            branch_trace=self.trace,
        )
        if report.cases:
            logger.info(f"分类结果: 情形 {report.cases[0]}"
                        + (f" (另有 {report.cases[1:]})" if len(report.cases) > 1 else ""))
        else:
            logger.info(f"未分类: {report.reason}")
        return report

    def structural(self):
        f, h = self.f, self.h
        f_sup, _ = sup_norm(f, self.radius)
        if f_sup <= self.tol.tol_exact:
            self.note("f = 0", PASS, sup=f_sup)
            if not self.accept(1, FamilyParams(1, self.group, g_free=self.g.desc, b=h.desc)):
                self.fail("f vanishes but h is not bounded")
                return
            if self.boundedness(self.g).is_bounded:
                self.accept(2, FamilyParams(2, self.group, b=f.desc, phi=self.g.desc, c=h.desc))
            return

        dep = dependence_mod_bounded(f, h, self.schedule, self.tol.tau, self.tol.fit_dilation,
                                     self.tol.tol_growth)
        self.note("dependence(f, h)", dep.kind, lam=dep.lam)
        if dep.is_dependent:
            self.dependent(dep.lam, dep.residual)
        else:
            self.independent()

    # ---------- f, h 模有界线性相关 ----------

    def dependent(self, lam, phi: GFunction):
        f, g, h = self.f, self.g, self.h
        fv = self.boundedness(f)
        self.note("boundedness(f)", fv.kind)
        if fv.is_bounded:
            if self.boundedness(g).is_bounded and self.boundedness(h).is_bounded:
                if self.accept(2, FamilyParams(2, self.group, b=f.desc, phi=g.desc, c=h.desc)):
                    return
            self.fail("f is bounded but g or h is not")
            return

        phihat = g + f * (lam ** 2 / 2) + phi * lam
        sine = sine_deviation(f, phihat, self.schedule)
        sv = sine.verdict(self.tol.tau, self.tol.tol_growth)
        self.note("sine reduction", sv.kind, sup=sine.sup)
        if not sv.is_bounded:
            self.fail("f(xy) - f(x)phi(y) - phi(x)f(y) is not bounded")
            return

        pv = self.boundedness(phihat)
        self.note("boundedness(phi_hat)", pv.kind)
        steps = {
            3: lambda: self.case3(lam, phi, phihat),
            4: lambda: self.case4(lam, phi, phihat),
            5: lambda: self.case5(lam, phi, phihat),
        }
        if pv.is_bounded:
            order = (3, 5)
        elif pv.is_unbounded:
            order = (4, 5)
        else:
            self.note("phi_hat ambiguous", INCONCLUSIVE, candidates=[3, 4])
            order = (3, 4, 5)
        for case_id in order:
            if self.attempt(f"case {case_id}", steps[case_id]):
                return
        self.fail("no dependent-branch case verified")

    def fit_bounded_character(self, F: GFunction, label: str, companion: GFunction = None) -> Optional[FnDescriptor]:
        m = fit_character(F, self.radius, companion=companion)
        if is_zero_descriptor(m):
            self.note(label, FAIL, reason="vanishes")
            return None
        closeness, _ = sup_norm(F - self.fn(m), self.radius)
        ok = closeness <= self.tol.tol_fit
        self.note(label, PASS if ok else FAIL, angles=list(m.angles), closeness=closeness)
        return m if ok else None

    def case3(self, lam, phi: GFunction, phihat: GFunction) -> bool:
        f = self.f
        m = self.fit_bounded_character(phihat, "fit m from phi_hat", companion=f)
        if m is None:
            return False
        mfn = self.fn(m)
        hy = additive_part(twist_by_character(f, m), self.tol.hyers_depth, self.tol.hyers_tol,
                           self.schedule, self.tol.tau, self.tol.tol_growth)
        self.note("additive part of f/m", PASS, coeffs=list(hy.coeffs), iterations=hy.iterations)
        phi3 = f - hy.function(self.group) * mfn
        params = FamilyParams(3, self.group, lam=lam, a=hy.additive, m=m, b=phi.desc, phi=phi3.desc)
        if not self.accept(3, params):
            return False
        # (f, m) 本身近似正弦对时同时属于情形 5
        sine = sine_deviation(f, mfn, self.schedule)
        self.note("sine pair (f, m)", PASS if sine.sup <= self.tol.tol_fit else FAIL, sup=sine.sup)
        if sine.sup <= self.tol.tol_fit:
            self.accept(5, FamilyParams(5, self.group, lam=lam, f0g0=SineCosinePair(f, mfn, SINE), b=phi.desc))
        return True

    def case4(self, lam, phi: GFunction, phihat: GFunction) -> bool:
        f = self.f
        dep = dependence_mod_bounded(f, phihat, self.schedule, self.tol.tau, self.tol.fit_dilation,
                                     self.tol.tol_growth)
        self.note("dependence(f, phi_hat)", dep.kind, kappa=dep.lam)
        if not dep.is_dependent or dep.lam == 0:
            return False
        kappa = dep.lam
        alpha = 1 / (2 * kappa)
        M = fit_exponential(phihat + f * kappa, self.radius)
        self.note("fit M", PASS, mu=list(M.mu))
        Mfn = self.fn(M)
        b = Mfn - f * (2 * kappa)
        params = FamilyParams(4, self.group, lam=lam, alpha=alpha, M=M, b=b.desc, phi=phi.desc)
        if not self.accept(4, params):
            return False
        self.attempt("case 7 from case 4", lambda: self.case7_from_case4(lam, phi, alpha, M, b))
        return True

    def case7_from_case4(self, lam, phi: GFunction, alpha, M: FnDescriptor, b: GFunction) -> bool:
        """αM − αb 改写为 λ₇²M + b₇, 其中 λ₇² = α, m₇ = b − φ/λ₇ 须为有界乘性函数"""
        root = _sqrt(alpha)
        for lam7 in (root, -root):
            m_src = b - phi * (1 / lam7)
            m7 = self.fit_bounded_character(m_src, "fit m for case 7")
            if m7 is None:
                continue
            b7 = self.f - self.fn(M) * lam7 ** 2
            params = FamilyParams(7, self.group, lam=lam7, beta=1 / lam7 - lam, a=Zero(), m=m7, M=M, b=b7.desc)
            if self.accept(7, params):
                self.cases.remove(7)
                self.cases.insert(0, 7)
                return True
        return False

    def case5(self, lam, phi: GFunction, phihat: GFunction) -> bool:
        sine = sine_deviation(self.f, phihat, self.schedule)
        if sine.sup > self.tol.tol_fit:
            self.note("sine pair (f, phi_hat)", FAIL, sup=sine.sup)
            return False
        pair = SineCosinePair(self.f, phihat, SINE)
        return self.accept(5, FamilyParams(5, self.group, lam=lam, f0g0=pair, b=phi.desc))

    # ---------- f, h 模有界线性无关 ----------

    def independent(self):
        f, g, h = self.f, self.g, self.h
        central = central_defect(f, self.schedule)
        cv = central.verdict(self.tol.tau, self.tol.tol_growth)
        self.note("central defect", cv.kind, sup=central.sup)
        if not cv.is_bounded:
            self.fail("central defect")
            return

        tri = triple_dependence(g, f, h, self.schedule, self.tol.tau, self.tol.fit_dilation,
                                self.tol.tol_growth)
        self.note("dependence(g; f, h)", tri.kind, alpha=tri.alpha, beta=tri.beta)
        if not tri.is_dependent:
            self.fail("g is independent of f and h")
            return

        alpha, beta, phi = tri.alpha, tri.beta, tri.residual
        disc = 2 * alpha - beta ** 2
        split = abs(disc) > self.tol.tol_disc
        self.note("2alpha - beta^2", "nonzero" if split else "zero", disc=disc)
        if split:
            if not self.attempt("case 6", lambda: self.case6(beta, phi, disc)):
                self.fail("cosine reduction failed")
            return
        if not self.attempt("cases 7-9", lambda: self.case789(beta, phi)):
            self.fail("no independent-branch case verified")

    def case6(self, beta, phi: GFunction, disc) -> bool:
        f, h = self.f, self.h
        delta = _sqrt(-disc)
        lam = 1 / delta
        rho = beta * lam
        f0 = f * disc + phi
        g0 = (f * beta + h) * delta
        cosine = cosine_deviation(f0, g0, self.schedule)
        ok = cosine.sup <= self.tol.tol_fit
        self.note("cosine pair", PASS if ok else FAIL, sup=cosine.sup)
        if not ok:
            return False
        pair = SineCosinePair(f0, g0, COSINE)
        return self.accept(6, FamilyParams(6, self.group, lam=lam, rho=rho, f0g0=pair, b=phi.desc))

    def case789(self, beta, phi: GFunction) -> bool:
        f, h = self.f, self.h
        m = self.fit_bounded_character(phi, "fit m from g - alpha f - beta h")
        if m is None:
            return False
        H = f * beta + h
        m_refined = self.fit_bounded_character(phi, "refine m with H", companion=H) or m
        try:
            hy = additive_part(twist_by_character(H, m_refined), self.tol.hyers_depth, self.tol.hyers_tol,
                               self.schedule, self.tol.tau, self.tol.tol_growth)
        except UnboundedCauchyDefect as e:
            self.note("H = a m + b", FAIL, reason=str(e))
            return self.case7(beta, m, H)

        mfn = self.fn(m_refined)
        afn = hy.function(self.group)
        bH = H - afn * mfn
        bv = self.boundedness(bH)
        self.note("H = a m + b", bv.kind, coeffs=list(hy.coeffs))
        if not bv.is_bounded:
            return self.case7(beta, m, H)

        try:
            split = quadratic_split(f, m_refined, hy.additive, self.tol.hyers_depth, self.tol.hyers_tol,
                                    self.schedule, self.tol.tau, self.tol.tol_growth)
            self.note("quadratic split", split.verdict.kind, b_bound=split.b_bound, a1=list(split.hyers.coeffs))
            if split.verdict.is_bounded:
                a1fn = split.hyers.function(self.group)
                b8 = f - afn * afn * mfn * 0.5 - a1fn * mfn * 0.5
                params = FamilyParams(8, self.group, beta=beta, a=hy.additive, a1=split.a1, m=m_refined, b=b8.desc)
                if self.accept(8, params):
                    return True
        except UnboundedCauchyDefect as e:
            self.note("quadratic split", FAIL, reason=str(e))

        params = FamilyParams(9, self.group, beta=beta, a=hy.additive, m=m_refined, b=bH.desc, free_f=f)
        return self.accept(9, params)

    def case7(self, beta, m: FnDescriptor, H: GFunction) -> bool:
        f = self.f
        M = fit_exponential(H, self.radius)
        self.note("fit M from H", PASS, mu=list(M.mu))
        Mfn, mfn = self.fn(M), self.fn(m)
        dep = dependence_mod_bounded(Mfn, H, self.schedule, self.tol.tau, self.tol.fit_dilation,
                                     self.tol.tol_growth)
        self.note("H = lambda M + bounded", dep.kind, lam=dep.lam)
        if not dep.is_dependent or dep.lam == 0:
            return False

        # f 与 h 中 M 的系数分别为 λ² 与 λ(1 − βλ), 在 M 占优的远点上读出;
        # H 中的 λ 只用来定号, 它带有 β 的拟合误差
        lam_sq = projection_coefficient(Mfn, f, self.radius, self.tol.fit_dilation)
        lam = _sqrt(lam_sq)
        if abs(-lam - dep.lam) < abs(lam - dep.lam):
            lam = -lam
        coeff_h = projection_coefficient(Mfn, self.h, self.radius, self.tol.fit_dilation)
        beta = (lam - coeff_h) / lam ** 2
        self.note("M coefficients of f, h", PASS, lam=lam, beta=beta)

        # βf + h = λM − λm
        m_src = Mfn - (f * beta + self.h) * (1 / lam)
        m = self.fit_bounded_character(m_src, "refit m from M - (beta f + h)/lambda") or m
        mfn = self.fn(m)

        rest = f - Mfn * lam_sq
        hy = additive_part(twist_by_character(rest, m), self.tol.hyers_depth, self.tol.hyers_tol,
                           self.schedule, self.tol.tau, self.tol.tol_growth)
        self.note("additive part of (f - lambda^2 M)/m", PASS, coeffs=list(hy.coeffs), truncated=hy.truncated)
        b = rest - hy.function(self.group) * mfn
        params = FamilyParams(7, self.group, lam=lam, beta=beta, a=hy.additive, m=m, M=M, b=b.desc)
        return self.accept(7, params)


def _short(value):
    if isinstance(value, (complex, mpmath.mpc, mpmath.mpf)):
        return f"{complex(value):.6g}"
    if isinstance(value, float):
        return f"{value:.6g}"
    if isinstance(value, (list, tuple)) and len(value) > 4:
        return f"[{len(value)} items]"
    return value


def classify(f: GFunction, g: GFunction, h: GFunction, schedule: Sequence[int] = DEFAULT_SCHEDULE,
             tolerances: Tolerances = None) -> CaseReport:
    """
    把 (f, g, h) 归入某一情形

    Args:
        f, g, h: 同一群上的函数
        schedule: 半径序列
        tolerances: 数值阈值, 缺省为 Tolerances()

    Returns:
        CaseReport: 已验证的情形(主情形在前)、exact 标记、拟合参数与分支轨迹
    """
    return _Classifier(f, g, h, schedule, tolerances or Tolerances()).run()
