#!/usr/bin/env python3
"""
Radial quadrature and trial calculus.
"""
import math

import numpy as np
import pytest

from lib.measures import gaussian
from lib.radial import (
    gaussian_polynomial_trial,
    integrable_near_zero,
    power_trial,
    radial_fields,
    radial_rule,
    radial_suite,
    sphere_area,
)


def test_sphere_area():
    assert sphere_area(1) == pytest.approx(2.0)
    assert sphere_area(2) == pytest.approx(2 * math.pi)
    assert sphere_area(3) == pytest.approx(4 * math.pi)


def test_gaussian_moments():
    m = gaussian(5)
    rule = radial_rule(5)
    r = rule.nodes
    density = m.density_radial(r)
    # |x|² ~ χ²_5
    assert rule.integrate(r**2, density) == pytest.approx(5.0, rel=1e-10)
    assert rule.integrate(r**-2, density) == pytest.approx(1 / 3, rel=1e-8)
    assert rule.integrate(r**-4, density) == pytest.approx(1 / 3, rel=1e-6)


def test_trial_derivatives_exact():
    u = gaussian_polynomial_trial(0.5, 1)
    r = np.array([0.3, 1.0, 2.2])
    expected = (2 * r - r**3) * np.exp(-0.5 * r**2)
    np.testing.assert_allclose(u.evaluate(r, 1), expected, rtol=1e-12)


def test_laplacian_of_gaussian_trial():
    m = gaussian(3)
    u = gaussian_polynomial_trial(0.5, 0)
    r = np.array([0.5, 1.5])
    fields = radial_fields(m, u, r)
    # u = e^{-r²/2}: Δu = (r² - 3)u, b·∇u = r²u
    np.testing.assert_allclose(fields.lu, (2 * r**2 - 3) * np.exp(-0.5 * r**2), rtol=1e-12)


def test_integrability_rule():
    assert integrable_near_zero(0.0, 4, 5)
    assert not integrable_near_zero(0.0, 6, 5)
    assert power_trial(-1.0).order_at_zero == -1.0


def test_suite_is_deterministic():
    names = [u.name for u in radial_suite(10)]
    assert names == [u.name for u in radial_suite(10)]
    assert len(names) == 10 and names[0] == "const(1)"
