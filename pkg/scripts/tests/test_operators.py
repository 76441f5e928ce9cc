#!/usr/bin/env python3
"""
L and A: spectral action, the explicit eight-term formula, form identities.
"""
import numpy as np
import pytest

from lib.cli import explicit_formula_error
from lib.errors import MissingDerivativeError
from lib.hermite import SpectralFunction, quadrature_rule, synthesize
from lib.measures import gaussian, power
from lib.operators import (
    A_TERM_NAMES,
    CallableTrial,
    FiniteDifferenceTrial,
    PolynomialTrial,
    a_positivity_residual,
    a_terms,
    apply_A_pointwise,
    apply_A_spectral,
    apply_L_pointwise,
    apply_spectral,
    bi_ou_pointwise,
    commutator_check,
    dissipativity_residual,
    symmetry_residual,
)
from lib.trials import polynomial_suite


def test_spectral_action():
    s = SpectralFunction.from_mapping(1, 3, {(2,): 1.0, (3,): 2.0})
    a = apply_A_spectral(s)
    assert a.coefficient((2,)) == pytest.approx(4.0)
    assert a.coefficient((3,)) == pytest.approx(18.0)
    assert apply_spectral(s, "L").result.coefficient((3,)) == pytest.approx(-6.0)


@pytest.mark.parametrize("dimension", [1, 2, 3])
def test_explicit_formula_on_hermite_modes(dimension):
    assert explicit_formula_error(gaussian(dimension), seed=11) < 1e-8


def test_eight_terms_sum_to_bi_ou():
    m = gaussian(2)
    f = PolynomialTrial(polynomial_suite(2, 5, 1, seed=3)[0])
    x = np.array([0.7, -1.1])
    terms = a_terms(m, f, x)
    assert tuple(terms) == A_TERM_NAMES
    assert sum(terms.values()) == pytest.approx(bi_ou_pointwise(f, x), rel=1e-10, abs=1e-10)


def test_finite_difference_trial_matches_polynomial():
    m = power(1, 4.0)
    f = lambda p: np.atleast_2d(p)[:, 0] ** 3 - np.atleast_2d(p)[:, 0]
    exact = CallableTrial(
        dimension=1,
        value_fn=lambda x: x[0] ** 3 - x[0],
        gradient_fn=lambda x: np.array([3 * x[0] ** 2 - 1]),
        hessian_fn=lambda x: np.array([[6 * x[0]]]),
        third_fn=lambda x: np.array([[[6.0]]]),
        bilaplacian_fn=lambda x: 0.0,
    )
    fd = FiniteDifferenceTrial(lambda x: float(f(x)[0]), 1)
    x = np.array([0.8])
    assert apply_L_pointwise(m, fd, x) == pytest.approx(apply_L_pointwise(m, exact, x), rel=1e-6)


def test_commutator_identity():
    m = gaussian(2)
    f = PolynomialTrial(polynomial_suite(2, 4, 1, seed=5)[0])
    assert commutator_check(m, f, np.array([0.4, -0.3]), 0) < 1e-6


def test_form_identities_gaussian():
    m = gaussian(1)
    rule = quadrature_rule(1, 20)
    f, g = (PolynomialTrial(s) for s in polynomial_suite(1, 5, 2, seed=9))
    assert symmetry_residual(m, f, g, rule) < 1e-9
    assert dissipativity_residual(m, f, rule) < 1e-9
    assert a_positivity_residual(m, f, rule) < 1e-8


def test_pointwise_A_matches_spectral():
    s = polynomial_suite(1, 6, 1, seed=2)[0]
    m = gaussian(1)
    x = np.array([1.3])
    expected = float(synthesize(apply_A_spectral(s), x.reshape(1, -1))[0])
    assert apply_A_pointwise(m, PolynomialTrial(s), x) == pytest.approx(expected, rel=1e-9, abs=1e-9)


def test_finite_difference_trial_cannot_feed_A():
    fd = FiniteDifferenceTrial(lambda x: float(x[0] ** 2), 1)
    with pytest.raises(MissingDerivativeError):
        apply_A_pointwise(gaussian(1), fd, np.array([0.5]))
