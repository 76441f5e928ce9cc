#!/usr/bin/env python3
"""
Mehler kernel, subordination quadrature and the spectral oracle.
"""
import math

import numpy as np
import pytest

from lib.errors import MisuseError, SingularityError
from lib.hermite import SpectralFunction, quadrature_rule, synthesize
from lib.kernels import (
    apply_biou_by_kernel,
    biou_kernel_spectral,
    biou_kernel_subordination,
    chapman_kolmogorov_residual,
    complex_kernel,
    kernel_matrix,
    kernel_moment,
    kernel_scan,
    lebesgue_rule_from_hermite,
    mehler_kernel,
    sign_change_scan,
    subordination_identity,
)
from lib.trials import polynomial_suite


@pytest.mark.parametrize("t", [0.25, 0.5, 1.0, 2.0, 4.0])
def test_subordination_identity(t):
    for n in range(6):
        assert abs(subordination_identity(n, t) - math.exp(-n * n * t)) < 1e-8


@pytest.mark.parametrize("n, t", [(1, 2.0), (2, 1.0), (3, 0.5), (5, 0.08), (4, 2.0)])
def test_subordination_identity_at_resonant_products(n, t):
    # n²t = 2 sits on a resonance of the infinite-range Fourier rule
    assert abs(subordination_identity(n, t) - math.exp(-n * n * t)) < 1e-8


def test_mehler_is_probability_kernel():
    assert kernel_moment(0.7, 0.4, lambda y: np.ones_like(y)) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("t", [0.3, 1.0, 2.5])
def test_first_moment_flows_for_both_variances(t):
    for variance in (1.0, 2.0):
        assert kernel_moment(t, 0.8, lambda y: y, variance) == pytest.approx(math.exp(-t) * 0.8, abs=1e-10)


@pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
def test_second_mode_separates_variances(t):
    he2 = lambda y: y**2 - 1
    target = math.exp(-2 * t) * (0.8**2 - 1)
    assert abs(kernel_moment(t, 0.8, he2, 1.0) - target) < 1e-8
    assert abs(kernel_moment(t, 0.8, he2, 2.0) - target) > 1e-3


def test_mehler_vector_form():
    values = mehler_kernel(1.0, [0.0], np.array([[0.0], [1.0]]))
    assert values.shape == (2,)
    assert mehler_kernel(1.0, [0.0], [1.0]) == pytest.approx(float(values[1]))


def test_complex_kernel_guards():
    with pytest.raises(MisuseError):
        complex_kernel(complex(-0.1, 1.0), [0.0], [0.0])
    with pytest.raises(SingularityError):
        complex_kernel(complex(0.0, math.pi), [0.0], [0.0])


@pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
def test_kernel_cross_validation(t):
    for x in (-1.0, 0.0, 1.0):
        for y in (-1.0, 0.0, 1.0):
            sub = biou_kernel_subordination(t, x, y)
            spec = biou_kernel_spectral(t, x, y)
            diff = abs(sub.value - spec.value)
            assert diff <= sub.error_estimate + spec.error_estimate
            assert diff <= 1e-3


def test_subordination_rejects_short_cutoff():
    with pytest.raises(MisuseError):
        biou_kernel_subordination(4.0, 0.0, 0.0, s_max=1.0)


def test_kernel_path_invariance():
    rule = quadrature_rule(1, 80)
    quadrature = lebesgue_rule_from_hermite(rule)
    for f in polynomial_suite(1, 4, 5, seed=3):
        values = apply_biou_by_kernel(lambda y, f=f: synthesize(f, y), 1.0, rule.nodes, quadrature)
        assert abs(rule.integrate(values) - f.mean) < 1e-6


def test_kernel_applies_semigroup_to_modes():
    rule = quadrature_rule(1, 60)
    quadrature = lebesgue_rule_from_hermite(rule)
    mode = SpectralFunction.basis((2,))
    value = apply_biou_by_kernel(lambda y: synthesize(mode, y), 0.5, 0.7, quadrature)
    assert value == pytest.approx(math.exp(-4 * 0.5) * (0.7**2 - 1) / math.sqrt(2), abs=1e-10)


def test_chapman_kolmogorov():
    assert chapman_kolmogorov_residual(0.3, 0.4, 0.5, -0.2) < 1e-10


def test_kernel_matrix_dimension_mismatch():
    with pytest.raises(MisuseError):
        kernel_matrix(1.0, np.zeros((2, 1)), np.zeros((2, 2)), 4)


def test_scan_rows_carry_agreement():
    rows = kernel_scan([1.0], [0.0], [0.0, 1.0])
    assert len(rows) == 2
    assert all(r["agreement"] for r in rows)
    spectral_only = kernel_scan([1.0], [0.0], [0.0], methods=("spectral",))
    assert "agreement" not in spectral_only[0]
    with pytest.raises(MisuseError):
        kernel_scan([1.0], [0.0], [0.0], methods=("mehler",))


def test_sign_change_at_short_times():
    witness = sign_change_scan([0.01], np.linspace(-1, 1, 5), np.linspace(-3, 3, 61))
    assert witness is not None and witness["value"] < 0
