#!/usr/bin/env python3
"""
Hermite layer: index order, quadrature exactness, transforms, serialization.
"""
import math

import numpy as np
import pytest

from lib.errors import MisuseError, ResourceLimitError
from lib.hermite import (
    MultiIndex,
    SpectralFunction,
    basis_matrix,
    box_rule,
    gaussian_box_mass,
    hermite_eval,
    hermite_normalized,
    inner_product_mu,
    multi_indices,
    project,
    project_on_box,
    quadrature_rule,
    synthesize,
)


def test_multi_indices_graded_lex():
    assert multi_indices(2, 2) == ((0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2))
    assert len(multi_indices(3, 8)) == math.comb(11, 3)


def test_multi_index_rejects_negative():
    assert MultiIndex((2, 1)).order() == 3
    with pytest.raises(MisuseError):
        MultiIndex((1, -1))


def test_hermite_recurrence_values():
    assert hermite_eval(3, 2.0) == pytest.approx(2.0**3 - 3 * 2.0)
    assert hermite_normalized(2, 1.5) == pytest.approx((1.5**2 - 1) / math.sqrt(2))


def test_hermite_eval_fifth_degree():
    # x⁵ - 10x³ + 15x at x = 1/2
    assert hermite_eval(5, 0.5) == pytest.approx(6.28125, abs=1e-14)


def test_two_point_rule_nodes_and_weights():
    rule = quadrature_rule(1, 2)
    np.testing.assert_allclose(np.sort(rule.nodes[:, 0]), [-1.0, 1.0], atol=1e-14)
    np.testing.assert_allclose(rule.weights, [0.5, 0.5], atol=1e-14)


def test_gauss_hermite_exact_for_moments():
    rule = quadrature_rule(1, 10)
    x = rule.nodes[:, 0]
    assert rule.integrate(np.ones_like(x)) == pytest.approx(1.0, abs=1e-14)
    assert rule.integrate(x**2) == pytest.approx(1.0, abs=1e-13)
    assert rule.integrate(x**4) == pytest.approx(3.0, abs=1e-12)
    assert rule.integrate(x**18) == pytest.approx(float(math.prod(range(17, 0, -2))), rel=1e-10)


def test_basis_orthonormal_under_quadrature():
    rule = quadrature_rule(2, 12)
    B = basis_matrix(2, 5, rule.nodes)
    gram = (B * rule.weights) @ B.T
    np.testing.assert_allclose(gram, np.eye(B.shape[0]), atol=1e-11)


def test_project_synthesize_polynomial():
    f = lambda pts: pts[:, 0] ** 3 - 2 * pts[:, 0] * pts[:, 1] + 1.0
    s = project(f, 2, 3, quadrature_rule(2, 6))
    pts = np.array([[0.3, -1.2], [2.0, 0.5]])
    np.testing.assert_allclose(synthesize(s, pts), f(pts), atol=1e-12)
    assert s.mean == pytest.approx(1.0, abs=1e-13)


def test_project_rejects_small_rule():
    with pytest.raises(MisuseError):
        project(lambda p: p[:, 0], 1, 10, quadrature_rule(1, 5))


def test_grid_cap():
    with pytest.raises(ResourceLimitError):
        quadrature_rule(5, 3)
    with pytest.raises(ResourceLimitError):
        quadrature_rule(4, 100)


def test_derivative_and_coordinate_multiplication():
    s = SpectralFunction.basis((3,))
    d = s.derivative(0)
    assert d.coefficient((2,)) == pytest.approx(math.sqrt(3))
    x_times = SpectralFunction.basis((1,)).multiply_coordinate(0)
    assert x_times.max_degree == 2
    assert x_times.coefficient((2,)) == pytest.approx(math.sqrt(2))
    assert x_times.coefficient((0,)) == pytest.approx(1.0)


def test_norm_and_inner_product():
    a = SpectralFunction.from_mapping(2, 2, {(1, 0): 3.0, (0, 2): 4.0})
    assert a.norm() == pytest.approx(5.0)
    b = SpectralFunction.basis((0, 2), 3)
    assert inner_product_mu(a, b) == pytest.approx(4.0)


def test_json_round_trip_is_stable():
    s = SpectralFunction.from_mapping(2, 3, {(1, 2): 0.25, (0, 0): -1.0})
    text = s.to_json()
    assert SpectralFunction.from_json(text).to_json() == text


def test_box_mass_matches_quadrature():
    K = [(-1.0, 1.0)]
    assert gaussian_box_mass(K) == pytest.approx(0.6826894921, abs=1e-9)
    s = project_on_box(lambda p: np.ones(len(p)), K, 10)
    assert s.mean == pytest.approx(gaussian_box_mass(K), abs=1e-12)


def test_box_rule_rejects_degenerate_side():
    with pytest.raises(MisuseError):
        box_rule([(1.0, 1.0)], 10)
