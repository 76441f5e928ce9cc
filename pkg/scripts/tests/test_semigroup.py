#!/usr/bin/env python3
"""
Spectral propagators: mean conservation, gap decay, resolvent limit.
"""
import math

import numpy as np
import pytest

from lib.errors import MisuseError
from lib.hermite import SpectralFunction
from lib.semigroup import (
    asymptotic_projection,
    decay_bound_holds,
    distance_to_mean,
    ergodic_average,
    evolve_A,
    evolve_L,
    evolve_L_result,
    resolvent_A,
)
from lib.trials import polynomial_suite


@pytest.fixture
def suite():
    return polynomial_suite(2, 4, 5, seed=7)


def test_mean_conserved(suite):
    for f in suite:
        for t in (0.0, 1.0, 5.0, 10.0):
            assert evolve_A(f, t).conserved_mean == pytest.approx(f.mean, abs=1e-12)
            assert evolve_L_result(f, t).conserved_mean == pytest.approx(f.mean, abs=1e-12)


def test_gap_decay(suite):
    for f in suite:
        for t in (1.0, 5.0, 10.0):
            assert decay_bound_holds(f, t)


def test_pure_mode_saturates_gap():
    mode = SpectralFunction.basis((0, 1), 3)
    for t in (1.0, 5.0, 10.0):
        assert distance_to_mean(evolve_A(mode, t).state) == pytest.approx(math.exp(-t), abs=1e-10)


def test_second_shell_decays_like_e_minus_4t():
    mode = SpectralFunction.basis((2,), 2)
    assert evolve_A(mode, 0.5).state.coefficient((2,)) == pytest.approx(math.exp(-2.0))
    assert evolve_L(mode, 0.5).coefficient((2,)) == pytest.approx(math.exp(-1.0))


def test_resolvent_limit(suite):
    for f in suite:
        distances = [distance_to_mean(resolvent_A(f, lam).scaled(lam)) for lam in (1.0, 0.1, 0.01)]
        assert distances[0] > distances[1] > distances[2]
        assert distances[2] < 0.02 * f.norm()


def test_ergodic_average_tends_to_mean(suite):
    f = suite[0]
    late = ergodic_average(f, 1e4)
    np.testing.assert_allclose(late.coefficients, asymptotic_projection(f).coefficients, atol=1e-3)
    assert late.mean == pytest.approx(f.mean)


def test_negative_time_rejected(suite):
    with pytest.raises(MisuseError):
        evolve_A(suite[0], -1.0)
    with pytest.raises(MisuseError):
        resolvent_A(suite[0], 0.0)
