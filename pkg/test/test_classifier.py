#!/usr/bin/env python3
"""
测试分类判定树、逐情形验证与辅助判定工具
"""

import math

import numpy as np
import pytest

from classifier import (
    CaseReport,
    Tolerances,
    classify,
    fit_psi_factorization,
    multiplicativity_defect,
    verify_case,
)
from errors import DegenerateGram, InvalidParams
from families import FamilyParams, construct_case, cosine_solution
from funcspace import Additive, Character, Const, ExpChar, GFunction, Noise, Pow, Scale, Table, Zero
from group_core import group_by_name, lattice

Z = lattice(1)
SCHEDULE = (16, 32, 64)


def fn(desc, group=Z):
    return GFunction(group, desc)


def test_two_to_the_x_is_case7():
    """(2^x, 1, 2^x − 1): ψ ≡ −1, 主情形 7, 同时满足情形 4"""
    M = fn(ExpChar((math.log(2),)))
    report = classify(M, fn(Const(1.0)), M - 1.0)
    assert report.case_id == 7
    assert 4 in report.cases
    assert not report.exact
    assert abs(report.sup_psi - 1.0) <= 1e-9
    assert abs(complex(report.fitted[7].M.mu[0]) - math.log(2)) < 1e-6


def test_quadratic_triple_is_case8_exact():
    """(x²/2, 1, x) 是情形 8 的精确解"""
    f = fn(Scale(0.5, Pow(Additive((1.0,)), 2)))
    report = classify(f, fn(Const(1.0)), fn(Additive((1.0,))), SCHEDULE)
    assert report.case_id == 8
    assert report.exact
    assert report.cases[-1] == 10
    assert report.fitted[10].exact_of == 8
    assert abs(report.fitted[8].a.coeffs[0]) == pytest.approx(1.0, abs=1e-6)


def test_case3_triple():
    params = FamilyParams(3, Z, lam=0.7, a=Additive((1.2,)), m=Character((0.5,)))
    report = classify(*construct_case(params).triple, SCHEDULE)
    assert report.case_id == 3
    assert report.exact
    fitted = report.fitted[3]
    assert abs(complex(fitted.lam) - 0.7) < 1e-6
    assert abs(fitted.a.coeffs[0] - 1.2) < 1e-6


def test_zero_triple():
    zero = fn(Zero())
    report = classify(zero, zero, zero, SCHEDULE)
    assert report.cases == [1, 2, 10]
    assert report.fitted[10].exact_of == 0


def test_finite_group_is_case2():
    z6 = group_by_name("Z6")
    f = fn(Table((1, 2, 0, -1, 3, 0.5)), z6)
    g = fn(Table((0, 1, 1, 0, 2, -1)), z6)
    h = fn(Table((2, 0, 1, 1, 0, 1)), z6)
    report = classify(f, g, h)
    assert report.case_id == 2
    assert report.windows == (16, 32, 64, 128)


def test_unbounded_psi_is_unclassified():
    x = fn(Additive((1.0,)))
    report = classify(x, x, fn(Zero()), SCHEDULE)
    assert not report.classified
    assert report.case_id is None
    assert report.reason == "unbounded psi"
    out = report.to_json()
    assert "unclassified" in out["verdict"]
    assert out["branch_trace"][0]["step"] == "psi"


def test_report_json_shape():
    f = fn(Scale(0.5, Pow(Additive((1.0,)), 2)))
    out = classify(f, fn(Const(1.0)), fn(Additive((1.0,))), SCHEDULE).to_json()
    assert out["verdict"]["case"] == 8
    assert 10 in out["verdict"]["also"]
    assert set(out) == {"verdict", "cases", "exact", "sup_psi", "fitted", "residuals", "windows", "branch_trace"}
    assert "8" in out["fitted"]


def test_verify_case_accepts_and_rejects():
    pair = cosine_solution(fn(ExpChar((0.025 + 0.1j,))), fn(ExpChar((-0.03 + 0.4j,))))
    params = FamilyParams(6, Z, lam=1.5, rho=0.4j, f0g0=pair, b=Noise(3, 0.05))
    f, g, h = construct_case(params).triple
    report = verify_case(6, params, f, g, h, SCHEDULE)
    assert report.cases == [6]
    assert all(r.passed for r in report.residuals[6])

    wrong = FamilyParams(8, Z, beta=0.5, a=Additive((1.0,)), m=Character((0.2,)))
    rejected = verify_case(8, wrong, f, g, h, SCHEDULE)
    assert rejected.cases == []
    assert rejected.reason.startswith("case 8 failed")


def test_inconclusive_psi_is_reported():
    """h = 1 + 0.001x 时 sup|h(x)h(y)| 的增长率落在两条阈值之间"""
    h = fn(Const(1.0)) + fn(Additive((0.001,)))
    strict = Tolerances().replace(tol_growth=0.0)
    report = classify(fn(Zero()), fn(Zero()), h, tolerances=strict)
    assert not report.classified
    assert report.reason.startswith("inconclusive psi")
    step = report.branch_trace[0]
    assert step["step"] == "psi" and step["verdict"] == "inconclusive"
    assert len(step["values"]["trace"]) == 4


def test_verify_case_requires_bounded_m():
    good = FamilyParams(3, Z, lam=0.7, a=Additive((1.2,)), m=Character((0.5,)))
    f, g, h = construct_case(good).triple
    assert verify_case(3, good, f, g, h, SCHEDULE).cases == [3]

    growing = FamilyParams(3, Z, lam=0.7, a=Additive((1.2,)), m=ExpChar((0.05,)))
    report = verify_case(3, growing, f, g, h, SCHEDULE)
    assert report.cases == []
    assert "m" in [r.name for r in report.residuals[3] if not r.passed]


def test_verify_case_requires_nonzero_slots():
    zero = fn(Zero())
    with pytest.raises(InvalidParams):
        verify_case(8, FamilyParams(8, Z, beta=0.5, a=Zero(), m=Character((0.2,))), zero, zero, zero, SCHEDULE)
    with pytest.raises(InvalidParams):
        verify_case(7, FamilyParams(7, Z, lam=1.0, a=Zero(), m=Zero(), M=ExpChar((0.03,))),
                    zero, zero, zero, SCHEDULE)
    with pytest.raises(InvalidParams):
        verify_case(9, FamilyParams(9, Z, a=Additive((1.0,)), m=Zero()), zero, zero, zero, SCHEDULE)


def test_verify_case_input_errors():
    zero = fn(Zero())
    with pytest.raises(InvalidParams):
        verify_case(11, FamilyParams(1, Z), zero, zero, zero)
    with pytest.raises(InvalidParams):
        verify_case(3, FamilyParams(3, Z, m=Additive((1.0,))), zero, zero, zero)
    with pytest.raises(InvalidParams):
        verify_case(1, FamilyParams(1, lattice(2)), zero, zero, zero)


def test_verify_case10():
    f = fn(Scale(0.5, Pow(Additive((1.0,)), 2)))
    report = verify_case(10, FamilyParams(10, Z, exact_of=8), f, fn(Const(1.0)), fn(Additive((1.0,))), SCHEDULE)
    assert report.cases == [10]


def test_multiplicativity_defect():
    assert multiplicativity_defect(fn(Character((0.9,))), SCHEDULE).sup <= 1e-9
    assert multiplicativity_defect(fn(ExpChar((0.02 + 0.3j,))), SCHEDULE).sup <= 1e-9
    assert multiplicativity_defect(fn(Additive((1.0,))), SCHEDULE).sup > 1.0


def test_fit_psi_factorization():
    f = fn(Additive((1.0,)))
    h = fn(Pow(Additive((1.0,)), 2))

    def psi(xs, ys):
        x = xs[:, 0].astype(float)
        return np.outer(x + 1.0, f.values(ys)) + np.outer(np.full_like(x, 0.5), h.values(ys))

    fac = fit_psi_factorization(psi, f, h, 8)
    assert fac.residual <= 1e-9
    assert len(fac.points) == 17
    assert np.allclose(fac.phi2, 0.5)
    with pytest.raises(DegenerateGram):
        fit_psi_factorization(psi, f, f * 2.0, 8)


def test_tolerances_replace():
    tol = Tolerances().replace(tau=0.1, tol_fit=None)
    assert tol.tau == 0.1
    assert tol.tol_fit == Tolerances().tol_fit
    with pytest.raises(InvalidParams):
        Tolerances().replace(tolerance=1.0)


def test_empty_report():
    report = CaseReport(reason="nothing")
    assert report.to_json()["verdict"] == {"unclassified": "nothing"}
