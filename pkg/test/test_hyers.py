#!/usr/bin/env python3
"""
测试二进加性投影与二次分解
"""

import math

import pytest

from errors import InvalidParams, NotLattice, Overflow, UnboundedCauchyDefect
from funcspace import Additive, Character, ExpChar, GFunction, Noise, Pow, Table, Zero
from group_core import group_by_name, lattice
from hyers import HyersResult, additive_part, quadratic_split, twist_by_character

Z = lattice(1)


def fn(desc, group=Z):
    return GFunction(group, desc)


def perturbed_line():
    """πx + 0.3·sin(7x)"""
    sin7 = (fn(Character((7.0,))) - fn(Character((-7.0,)))) * (-0.5j)
    return fn(Additive((1.0,))) * math.pi + sin7 * 0.3


def test_additive_part_recovers_slope():
    result = additive_part(perturbed_line())
    assert len(result.coeffs) == 1
    assert abs(result.coeffs[0] - math.pi) < 1e-6
    assert result.delta <= 0.9 + 1e-9
    assert result.residual_bound <= result.delta + 1e-6
    assert not result.truncated


def test_additive_part_on_lattice2():
    f = fn(Additive((1.5, -2.0)), lattice(2)) + fn(Noise(3, 0.1), lattice(2))
    result = additive_part(f)
    assert abs(result.coeffs[0] - 1.5) < 1e-6
    assert abs(result.coeffs[1] + 2.0) < 1e-6
    assert result.residual_bound <= 0.1 + 1e-5


def test_depth_limits():
    f = perturbed_line()
    with pytest.raises(InvalidParams):
        additive_part(f, depth=0)
    with pytest.raises(Overflow):
        additive_part(f, depth=41)
    with pytest.raises(Overflow):
        additive_part(f, depth=63)
    assert additive_part(f, depth=40).iterations <= 40


def test_unbounded_cauchy_defect():
    """x² 的 Cauchy 差 2xy 无界"""
    with pytest.raises(UnboundedCauchyDefect):
        additive_part(fn(Pow(Additive((1.0,)), 2)))


def test_finite_group_is_rejected():
    z6 = group_by_name("Z6")
    with pytest.raises(NotLattice):
        additive_part(fn(Table((1, -2, 0.5, 0, 3, 1)), z6))


def test_bounded_function_has_zero_additive_part():
    result = additive_part(fn(Noise(5, 1.0)))
    assert abs(result.coeffs[0]) < 1e-6
    assert result.residual_bound <= 1.0 + 1e-6
    assert HyersResult((), 0.0, 0.0, 0).additive == Zero()


def test_twist_by_character():
    m = fn(Character((0.6,)))
    f = fn(Additive((2.0,))) * m
    twisted = twist_by_character(f, m)
    for x in (-5, 0, 9):
        assert twisted.eval(x) == pytest.approx(2.0 * x)


def test_quadratic_split():
    """f = ½x²m + ½(0.3x)m + b: 恢复 a₁ = 0.3x, b₀ = 2b·m⁻¹"""
    a = fn(Additive((1.0,)))
    m = fn(Character((0.5,)))
    a1 = fn(Additive((0.3,)))
    f = a * a * m * 0.5 + a1 * m * 0.5 + fn(Noise(8, 0.01))
    split = quadratic_split(f, m, a)
    assert abs(split.a1.coeffs[0] - 0.3) < 1e-6
    assert split.b_bound <= 0.02 + 1e-6
    assert split.verdict.is_bounded
    assert set(split.to_json()) >= {"a1", "b_bound", "hyers"}


def test_quadratic_split_rejects():
    z6 = group_by_name("Z6")
    with pytest.raises(NotLattice):
        quadratic_split(fn(Zero(), z6), Zero(), Zero())
    with pytest.raises(InvalidParams):
        quadratic_split(fn(Additive((1.0,))), Additive((1.0,)), Zero())
    with pytest.raises(InvalidParams):
        quadratic_split(fn(Additive((1.0,))), ExpChar((0.05,)), Additive((1.0,)))
    with pytest.raises(InvalidParams):
        quadratic_split(fn(Additive((1.0,))), Zero(), Additive((1.0,)))
