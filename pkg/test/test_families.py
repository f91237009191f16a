#!/usr/bin/env python3
"""
测试各情形的构造公式、Lipschitz 上界与参数校验
"""

import math

import pytest

from deviation import sup_deviation
from errors import InvalidParams
from families import (
    COSINE,
    SINE,
    FamilyParams,
    SineCosinePair,
    construct_case,
    cosine_solution,
    dependent_form,
    independent_form,
    lemma33_form,
    lemma34_form,
    sine_solution,
    validate_params,
)
from funcspace import Additive, Character, Const, ExpChar, GFunction, Noise, Zero
from group_core import lattice
from oracle import draw_params

Z = lattice(1)
SCHEDULE = (16, 32, 64)


def fn(desc):
    return GFunction(Z, desc)


def exact_params(case_id):
    """有界槽全为零的代表参数"""
    a = Additive((1.2,))
    m = Character((0.5,))
    if case_id == 3:
        return FamilyParams(3, Z, lam=0.7, a=a, m=m)
    if case_id == 4:
        return FamilyParams(4, Z, lam=1.2 - 0.3j, alpha=0.8, M=ExpChar((0.03 + 0.2j,)))
    if case_id == 5:
        return FamilyParams(5, Z, lam=0.9, f0g0=sine_solution(fn(a), fn(m)))
    if case_id == 6:
        pair = cosine_solution(fn(ExpChar((0.025 + 0.1j,))), fn(ExpChar((-0.03 + 0.4j,))))
        return FamilyParams(6, Z, lam=1.5, rho=0.4j, f0g0=pair)
    if case_id == 8:
        return FamilyParams(8, Z, beta=0.6, a=Additive((0.4,)), a1=Additive((0.2,)), m=m)
    raise ValueError(case_id)


@pytest.mark.parametrize("case_id", [3, 4, 5, 6, 8])
def test_exact_families(case_id):
    """有界槽为零时 ψ 在窗口 64 上不超过 1e-9"""
    c = construct_case(exact_params(case_id))
    assert sup_deviation(*c.triple, SCHEDULE).sup <= 1e-9
    assert c.baseline == 0.0


def test_two_to_the_x_case7():
    """β=0, λ=1, m=1, M=2^x: ψ ≡ −1, 基线 |λ|²·sup|m|² = 1"""
    params = FamilyParams(7, Z, lam=1.0, beta=0.0, a=Zero(), m=Const(1.0), M=ExpChar((math.log(2),)))
    c = construct_case(params)
    assert abs(sup_deviation(*c.triple).sup - 1.0) <= 1e-12
    assert c.baseline == pytest.approx(1.0)


def test_quadratic_case8_is_exact():
    params = FamilyParams(8, Z, beta=0.0, a=Additive((1.0,)), m=Const(1.0))
    c = construct_case(params)
    assert sup_deviation(*c.triple, SCHEDULE).sup == 0.0
    assert c.f.eval(4) == pytest.approx(8.0)
    assert c.g.eval(4) == pytest.approx(1.0)
    assert c.h.eval(4) == pytest.approx(4.0)


@pytest.mark.parametrize("case_id", [1, 2, 3, 4, 5, 6, 7, 8])
@pytest.mark.parametrize("amp", [0.01, 0.1])
def test_lipschitz_bound(case_id, amp):
    """有界槽幅度 ε 时 sup ψ ≤ 基线 + L·ε"""
    for seed in (1, 2, 3):
        c = construct_case(draw_params(case_id, seed, amp))
        assert c.epsilon == pytest.approx(amp)
        sup = sup_deviation(*c.triple, SCHEDULE).sup
        assert sup <= c.baseline + c.lipschitz * c.epsilon + 1e-9


@pytest.mark.slow
@pytest.mark.parametrize("case_id", [1, 2, 3, 4, 5, 6, 7, 8, 10])
@pytest.mark.parametrize("amp", [0.01, 0.1])
def test_lipschitz_bound_fifty_seeds(case_id, amp):
    for seed in range(1, 51):
        c = construct_case(draw_params(case_id, seed, amp))
        if case_id != 10:
            assert c.epsilon == pytest.approx(amp)
        sup = sup_deviation(*c.triple, SCHEDULE).sup
        assert sup <= c.baseline + c.lipschitz * c.epsilon + 1e-9, f"seed {seed}"


def test_case9_has_no_lipschitz():
    free = fn(Additive((1.0,))) * fn(Additive((1.0,))) * fn(Additive((1.0,)))
    params = FamilyParams(9, Z, beta=0.5, a=Additive((1.0,)), m=Character((0.2,)), free_f=free)
    c = construct_case(params)
    assert c.lipschitz is None and c.baseline is None
    assert c.f is free


def test_case10_pairs():
    m = fn(Character((0.3,)))
    sine = FamilyParams(10, Z, f0g0=sine_solution(fn(Additive((2.0,))), m))
    assert sup_deviation(*construct_case(sine).triple, SCHEDULE).sup <= 1e-9
    cosine = FamilyParams(10, Z, f0g0=cosine_solution(fn(Character((0.8,))), m))
    assert sup_deviation(*construct_case(cosine).triple, SCHEDULE).sup <= 1e-9


def test_case10_delegates():
    source = exact_params(4)
    params = FamilyParams(10, Z, lam=source.lam, alpha=source.alpha, M=source.M, b=Noise(1, 0.5), exact_of=4)
    c = construct_case(params)
    assert c.lipschitz == 0.0
    assert sup_deviation(*c.triple, SCHEDULE).sup <= 1e-9


def test_cosine_solution_equal_characters():
    m = fn(Character((0.3,)))
    pair = cosine_solution(m, m)
    assert pair.kind == COSINE
    assert pair.g0.desc == Zero()


def test_validate_params_rejects():
    with pytest.raises(InvalidParams):
        validate_params(FamilyParams(6, Z, lam=0.0, f0g0=cosine_solution(fn(Character((0.1,))),
                                                                           fn(Character((0.2,))))))
    with pytest.raises(InvalidParams):
        validate_params(FamilyParams(3, Z, m=Additive((1.0,))))
    with pytest.raises(InvalidParams):
        validate_params(FamilyParams(9, Z, m=Character((0.1,))))
    with pytest.raises(InvalidParams):
        validate_params(FamilyParams(2, Z, b=Additive((1.0,))))
    with pytest.raises(InvalidParams):
        validate_params(FamilyParams(11, Z))
    with pytest.raises(InvalidParams):
        sine_solution(fn(Additive((1.0,))), fn(Additive((1.0,))))


def test_params_json():
    params = FamilyParams(8, Z, beta=0.6 - 0.1j, a=Additive((1.2,)), a1=Additive((0.3,)), m=Character((0.5,)),
                          b=Noise(4, 0.01))
    assert FamilyParams.from_json(params.to_json()) == params
    fixture = construct_case(params).to_fixture()
    assert set(fixture) == {"group", "functions", "meta"}
    assert set(fixture["functions"]) == {"f", "g", "h"}
    assert fixture["meta"]["case_id"] == 8


def test_normal_forms():
    params = exact_params(3)
    assert sup_deviation(*dependent_form(3, params), SCHEDULE).sup <= 1e-9
    pair = sine_solution(fn(Additive((1.0,))), fn(Character((0.2,))))
    branch5 = FamilyParams(5, Z, lam=0.5, f0g0=pair, phi=Noise(2, 0.01))
    assert sup_deviation(*dependent_form(5, branch5), SCHEDULE).verdict().is_bounded
    cos = exact_params(6)
    assert sup_deviation(*independent_form(1, cos), SCHEDULE).sup <= 1e-9
    with pytest.raises(InvalidParams):
        dependent_form(6, params)
    with pytest.raises(InvalidParams):
        independent_form(0, params)


def test_normal_form_aliases():
    assert lemma33_form is dependent_form
    assert lemma34_form is independent_form
    assert sup_deviation(*lemma33_form(3, exact_params(3)), SCHEDULE).sup <= 1e-9


def test_pair_deviation_helper():
    pair = SineCosinePair(fn(Additive((1.0,))), fn(Const(1.0)), SINE)
    assert pair.deviation().sup == 0.0
