#!/usr/bin/env python3
"""
测试有限群穷举、乘性函数枚举与往返测试
"""

import numpy as np
import pytest

from errors import InvalidParams, NotFinite, TooLarge
from families import FamilyParams, cosine_solution
from funcspace import Additive, Character, ExpChar, GFunction, Table
from group_core import build_finite, group_by_name, lattice
from oracle import (
    RoundTripOutcome,
    draw_params,
    enumerate_multiplicative,
    exhaustive_deviation,
    finite_trials,
    param_error,
    roundtrip,
    roundtrip_many,
    summarize,
)

Z = lattice(1)


@pytest.mark.parametrize("name,count", [("Z1", 2), ("Z6", 7), ("S3", 3), ("D4", 5)])
def test_enumerate_multiplicative_counts(name, count):
    """非零乘性函数即一维表示, 末尾再加零函数"""
    group = group_by_name(name)
    maps = enumerate_multiplicative(group)
    assert len(maps) == count
    assert all(v == 0 for v in maps[-1].values)
    table = np.asarray(group.table)
    for m in maps:
        values = np.asarray(m.values)
        assert np.allclose(values[table], values[:, None] * values[None, :])


def test_enumeration_limits():
    z13 = build_finite("cyclic", 13)
    with pytest.raises(TooLarge):
        enumerate_multiplicative(z13)
    with pytest.raises(NotFinite):
        enumerate_multiplicative(Z)


def test_exhaustive_deviation_of_character():
    """乘性 m 给出余弦形精确解 (−m, m/2, 0)"""
    z6 = group_by_name("Z6")
    m = enumerate_multiplicative(z6)[1]
    f = GFunction(z6, Table(tuple(-v for v in m.values)))
    g = GFunction(z6, Table(tuple(v / 2 for v in m.values)))
    h = GFunction(z6, Table((0j,) * 6))
    assert exhaustive_deviation(z6, f, g, h) <= 1e-12


def test_exhaustive_deviation_rejects():
    with pytest.raises(NotFinite):
        exhaustive_deviation(Z, *(GFunction(Z, Additive((1.0,))),) * 3)
    z6 = group_by_name("Z6")
    table = GFunction(z6, Table((1,) * 6))
    with pytest.raises(InvalidParams):
        exhaustive_deviation(z6, GFunction(z6, Character((0.1,))), table, table)


@pytest.mark.parametrize("name", ["Z6", "S3"])
def test_finite_trials(name):
    report = finite_trials(group_by_name(name), trials=5, seed=7)
    assert report.max_difference <= 1e-12
    assert report.degenerate
    assert report.passed
    assert sum(report.verdicts.values()) == 5


@pytest.mark.slow
@pytest.mark.parametrize("name", ["Z6", "D4", "S3"])
def test_finite_trials_hundred(name):
    report = finite_trials(group_by_name(name), trials=100, seed=1)
    assert report.max_difference <= 1e-12
    assert report.degenerate
    assert sum(report.verdicts.values()) == 100


def test_draw_params_deterministic():
    assert draw_params(7, 3).to_json() == draw_params(7, 3).to_json()
    assert draw_params(7, 3).to_json() != draw_params(7, 4).to_json()
    p10 = draw_params(10, 5)
    assert p10.case_id == 10 and p10.exact_of in (3, 4, 5, 6, 8)
    with pytest.raises(InvalidParams):
        draw_params(9, 1)


def test_param_error_sign_ambiguity():
    pair = cosine_solution(GFunction(Z, ExpChar((0.03,))), GFunction(Z, ExpChar((-0.03,))))
    drawn = FamilyParams(6, Z, lam=1.5 + 0.5j, rho=0.3, f0g0=pair)
    flipped = FamilyParams(6, Z, lam=-1.5 - 0.5j, rho=-0.3, f0g0=pair)
    assert param_error(6, drawn, flipped) == 0.0
    off = FamilyParams(6, Z, lam=1.6 + 0.5j, rho=0.3, f0g0=pair)
    assert param_error(6, drawn, off) == pytest.approx(0.1 / abs(1.5 + 0.5j))
    assert param_error(1, FamilyParams(1, Z), FamilyParams(1, Z)) == 0.0


def test_roundtrip_case1():
    outcome = roundtrip(1, seed=1)
    assert outcome.passed
    assert 1 in outcome.cases
    assert not outcome.wrong_case
    assert outcome.to_json()["case_in"] == 1


def test_roundtrip_case2():
    outcome = roundtrip(2, seed=1)
    assert outcome.passed
    assert outcome.case_out == 2


def test_roundtrip_case3_without_noise():
    outcome = roundtrip(3, seed=2, noise_amp=0.0, schedule=(16, 32, 64))
    assert 3 in outcome.cases
    assert outcome.exact
    assert outcome.param_error <= 1e-2


def test_roundtrip_rejects_case9():
    with pytest.raises(InvalidParams):
        roundtrip(9, seed=1)


def test_roundtrip_many_keeps_seed_order():
    outcomes = roundtrip_many(1, [3, 1, 2])
    assert [o.seed for o in outcomes] == [3, 1, 2]
    summary = summarize(outcomes)
    assert summary["total"] == 3
    assert summary["ok"]


def test_summarize_flags_wrong_case():
    good = RoundTripOutcome(4, 1, 4, [4], False, 0.0, True)
    wrong = RoundTripOutcome(4, 2, 6, [6], False, float("inf"), False)
    unclassified = RoundTripOutcome(4, 3, None, [], False, float("inf"), False, reason="unbounded psi")
    summary = summarize([good, wrong, unclassified])
    assert summary["wrong_case_seeds"] == [2]
    assert summary["pass_rate"] == pytest.approx(1 / 3)
    assert not summary["ok"]
    assert unclassified.to_json()["case_out"] == "unclassified"
    assert RoundTripOutcome(10, 1, 3, [3, 10], True, 0.0, True).wrong_case is False


@pytest.mark.slow
@pytest.mark.parametrize("case_id", [1, 2, 3, 4, 5, 6, 7, 8, 10])
def test_roundtrip_fifty_seeds(case_id):
    """噪声 0.01 下 50 个种子: 通过率 ≥ 90%, 无错判"""
    summary = summarize(roundtrip_many(case_id, range(1, 51), 0.01))
    assert summary["pass_rate"] >= 0.9
    assert summary["wrong_case_seeds"] == []
