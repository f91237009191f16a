#!/usr/bin/env python3
"""
测试描述子求值、有界性判定、模有界线性相关与乘性部分的恢复
"""

import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from errors import BadSchedule, InconclusiveDependence, MalformedInput, Overflow
from funcspace import (
    BOUNDED,
    INCONCLUSIVE,
    UNBOUNDED,
    Additive,
    Character,
    Const,
    ExpChar,
    GFunction,
    Noise,
    Pow,
    SplitMixStream,
    Zero,
    _fit_from_verdict,
    boundedness,
    check_schedule,
    dependence_mod_bounded,
    descriptor_from_json,
    fit_character,
    fit_exponential,
    inverse_character,
    is_multiplicative,
    precision_for,
    sup_norm,
    triple_dependence,
    verdict_from_trace,
)
from group_core import group_by_name, lattice

Z = lattice(1)


def fn(desc, group=Z):
    return GFunction(group, desc)


def x_fn():
    return fn(Additive((1.0,)))


def test_descriptor_json():
    """描述子 JSON 可以原样解析回来"""
    for desc in (Zero(), Const(2 - 1j), Additive((1.5, -2.0)), Character((0.25,)), ExpChar((0.03 + 0.5j,)),
                 Noise(7, 0.1)):
        assert descriptor_from_json(desc.to_json()) == desc
    with pytest.raises(MalformedInput):
        descriptor_from_json({"op": "spline"})
    with pytest.raises(MalformedInput):
        descriptor_from_json({"op": "const"})


def test_arithmetic():
    f = x_fn()
    m = fn(Character((math.pi / 2,)))
    F = f * m + f * 2 - 3
    assert F.eval(1) == pytest.approx(1j + 2 - 3)
    assert (f * 0).desc == Zero()
    assert (f - f).eval(5) == 0


def test_multiplicative_helpers():
    assert is_multiplicative(Character((0.1,)))
    assert is_multiplicative(ExpChar((0.2,)))
    assert not is_multiplicative(Additive((1.0,)))
    m = fn(ExpChar((0.2 + 0.1j,)))
    inv = fn(inverse_character(m.desc))
    assert (m * inv).eval(7) == pytest.approx(1.0)


def test_expchar_overflow_is_one_sided():
    """指数实部超过 700 报 Overflow, 很负的指数下溢为 0"""
    M = fn(ExpChar((1.0,)))
    with pytest.raises(Overflow):
        M.eval(800)
    assert M.eval(-800) == 0


def test_check_schedule():
    assert check_schedule([16, 32, 64]) == (16, 32, 64)
    for bad in ([16, 32], [16, 16, 32], [-1, 2, 3], [32, 16, 64]):
        with pytest.raises(BadSchedule):
            check_schedule(bad)


def test_verdict_from_trace():
    assert verdict_from_trace([(16, 1.0), (32, 1.0), (64, 1.01), (128, 1.01)]).kind == BOUNDED
    assert verdict_from_trace([(16, 1.0), (32, 2.0), (64, 4.0), (128, 8.0)]).kind == UNBOUNDED
    assert verdict_from_trace([(16, 1.0), (32, 2.0), (64, 2.2), (128, 2.42)]).kind == INCONCLUSIVE
    assert verdict_from_trace([(16, 0.0), (32, 0.0), (64, 0.0)]).kind == BOUNDED


def test_verdict_with_slack():
    """噪声 sup 随窗口缓慢爬升, 或整条轨迹在容差以下"""
    creeping = [(16, 0.0243), (32, 0.0265), (64, 0.0265), (128, 0.0289)]
    assert verdict_from_trace(creeping).kind == INCONCLUSIVE
    settled = verdict_from_trace(creeping, slack=1e-2)
    assert settled.kind == BOUNDED
    assert settled.bound == pytest.approx(0.0289)

    tiny = [(16, 1.6e-8), (32, 6.4e-8), (64, 2.6e-7), (128, 1e-6)]
    assert verdict_from_trace(tiny).kind == UNBOUNDED
    assert verdict_from_trace(tiny, slack=1e-2).kind == BOUNDED

    relative = [(16, 1.0), (32, 1.1), (64, 1.12), (128, 1.25)]
    assert verdict_from_trace(relative).kind == INCONCLUSIVE
    assert verdict_from_trace(relative, slack=1e-2).kind == BOUNDED

    linear = [(16, 16.0), (32, 32.0), (64, 64.0), (128, 128.0)]
    assert verdict_from_trace(linear, slack=1e-2).kind == UNBOUNDED
    assert verdict_from_trace([(16, 1.0), (32, 2.0), (64, 2.2), (128, 2.42)], slack=1e-2).kind == INCONCLUSIVE


def test_boundedness_slack_keeps_growth():
    assert boundedness(x_fn(), slack=1e-2).is_unbounded
    assert boundedness(fn(Noise(3, 0.01)), slack=1e-2).is_bounded


def test_boundedness():
    assert boundedness(fn(Character((0.3,)))).is_bounded
    assert boundedness(x_fn()).is_unbounded
    assert boundedness(fn(Pow(Additive((1.0,)), 2))).is_unbounded
    assert boundedness(fn(ExpChar((0.05,)))).is_unbounded
    assert boundedness(fn(Noise(3, 0.01))).is_bounded


def test_finite_groups_are_bounded():
    z6 = group_by_name("Z6")
    verdict = boundedness(fn(Noise(1, 5.0), z6))
    assert verdict.is_bounded


def test_sup_norm_argmax():
    sup, arg = sup_norm(x_fn(), 10)
    assert sup == 10
    assert arg in ((-10,), (10,))


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=2 ** 63), st.floats(min_value=0.0, max_value=10.0))
def test_noise_reproducible(seed, amp):
    """同一 (seed, amp) 给出相同取值, 且不超过幅度"""
    points = np.arange(-50, 51, dtype=np.int64)[:, None]
    a = fn(Noise(seed, amp)).values(points)
    b = fn(Noise(seed, amp)).values(points)
    assert np.array_equal(a, b)
    assert np.all(np.abs(a) <= amp)


def test_splitmix_stream_deterministic():
    s1, s2 = SplitMixStream(42), SplitMixStream(42)
    assert [s1.next_u64() for _ in range(5)] == [s2.next_u64() for _ in range(5)]
    u = SplitMixStream(1).uniform(0.5, 2.0)
    assert 0.5 <= u < 2.0


def test_dependence_recovers_lambda():
    """h = 2x + 0.3 噪声: λ 精确到 1e-6"""
    f = x_fn()
    h = f * 2.0 + fn(Noise(11, 0.3))
    fit = dependence_mod_bounded(f, h)
    assert fit.is_dependent
    assert abs(fit.lam - 2.0) < 1e-6
    assert fit.residual_bound <= 0.3 + 1e-6


def test_dependence_detects_independence():
    f = x_fn()
    h = fn(Pow(Additive((1.0,)), 2))
    assert not dependence_mod_bounded(f, h).is_dependent


def test_dependence_on_vanishing_f():
    fit = dependence_mod_bounded(fn(Zero()), fn(Noise(2, 0.1)))
    assert fit.is_dependent
    assert fit.lam == 0


def test_triple_dependence():
    f = x_fn()
    h = fn(Pow(Additive((1.0,)), 2))
    g = f * 2.0 - h * 3.0 + fn(Noise(5, 0.01))
    fit = triple_dependence(g, f, h)
    assert fit.is_dependent
    assert abs(fit.alpha - 2.0) < 1e-6
    assert abs(fit.beta + 3.0) < 1e-6


def test_inconclusive_raises():
    """残差增长介于两者之间时不强行归类"""
    with pytest.raises(InconclusiveDependence):
        verdict = verdict_from_trace([(16, 1.0), (32, 2.0), (64, 2.2), (128, 2.42)])
        _fit_from_verdict(verdict, x_fn(), "test", lam=0.0)


def test_fit_character():
    m = fit_character(fn(Character((0.7,))), 32)
    assert isinstance(m, Character)
    assert abs(m.angles[0] - 0.7) < 1e-9
    assert fit_character(fn(Zero()), 32) == Zero()


def test_fit_character_with_companion():
    """a·m 伴随函数把相位推到更远处"""
    theta = 2.1
    m = fn(Character((theta,)))
    noisy = m + fn(Noise(9, 1e-4))
    companion = x_fn() * m * 1.3
    fitted = fit_character(noisy, 32, companion=companion)
    assert abs(cmath.exp(1j * fitted.angles[0]) - cmath.exp(1j * theta)) < 1e-6


def test_fit_exponential():
    mu = 0.03 + 0.5j
    F = fn(ExpChar((mu,))) * 2.0 + fn(Noise(4, 0.01))
    M = fit_exponential(F, 32)
    assert abs(complex(M.mu[0]) - mu) < 1e-9


def test_extended_precision_for_two_to_the_x():
    M = fn(ExpChar((math.log(2),)))
    assert precision_for([M], 128) is not None
    assert precision_for([x_fn()], 128) is None
    sup, arg = sup_norm(M, 128)
    assert arg == (128,)
    assert sup == pytest.approx(2.0 ** 128, rel=1e-12)
