#!/usr/bin/env python3
"""
Hardy/Rellich reports, empirical constants and the sharpness probe.
"""
import math

import pytest

from lib.errors import IntegrabilityError, MisuseError, ParameterDomainError
from lib.inequalities import (
    calderon_zygmund_constant,
    drift_bound_constant,
    drift_bound_report,
    hardy_C1,
    hardy_constant,
    hardy_report,
    higher_rellich_reports,
    interpolation_reports,
    lambda1_sweep,
    minimal_C1,
    rayleigh_lambda1,
    rellich_constant,
    rellich_eps_report,
    rellich_feasible,
    rellich_report,
    splice_coefficients,
    splice_mismatch,
    trial_norms,
)
from lib.measures import gaussian, power, rational
from lib.radial import power_trial, radial_suite
from lib.trials import polynomial_suite, seeded_radial_suite


def test_constant_wiring():
    assert rellich_constant(5) == 1.5625
    assert rellich_constant(7) == 27.5625
    assert hardy_constant(5) == 2.25
    assert rellich_feasible(0.9 * 1.5625, 5)
    assert not rellich_feasible(1.05 * 1.5625, 5)


def test_hardy_C1_is_potential_sup():
    assert hardy_C1(gaussian(5)) == pytest.approx(2.5, abs=1e-9)


@pytest.mark.parametrize("dimension", [5, 7])
def test_rellich_on_radial_suite(dimension):
    m = gaussian(dimension)
    for u in radial_suite(10):
        report = rellich_report(m, u)
        assert report.passed, report.to_dict()
        assert math.isfinite(report.constants["C1"])
        assert len(report.details["eps_forms"]) == 3


def test_hardy_on_seeded_suite():
    m = gaussian(3)
    trials = seeded_radial_suite(14, seed=1)
    assert all(hardy_report(m, u).passed for u in trials)
    assert 0.0 <= minimal_C1(m, trials) <= hardy_C1(m) + 1e-9


def test_hardy_needs_three_dimensions():
    with pytest.raises(MisuseError):
        hardy_report(gaussian(2), radial_suite(1)[0])
    with pytest.raises(MisuseError):
        rellich_report(gaussian(4), radial_suite(1)[0])


def test_singular_trial_is_not_integrable():
    with pytest.raises(IntegrabilityError):
        hardy_report(gaussian(5), power_trial(-1.5))


def test_eps_form_with_generous_constant():
    report = rellich_eps_report(gaussian(5), radial_suite(3)[2], C1=2.5, eps=0.1)
    assert report.passed


def test_interpolation_holds_at_minimal_constant():
    m = power(3, 4.0)
    reports = interpolation_reports(m, radial_suite(10), (1.0, 0.1))
    assert len(reports) == 20
    assert all(r.passed for r in reports)


def test_empirical_constants_finite():
    m = rational(5, 2.0, 8.0)
    trials = radial_suite(10)
    assert math.isfinite(calderon_zygmund_constant(m, trials))
    assert math.isfinite(drift_bound_constant(m, trials))
    assert drift_bound_report(m, trials[1]).passed


def test_polynomial_trials_gaussian_only():
    s = polynomial_suite(2, 3, 1, seed=4)[0]
    norms = trial_norms(gaussian(2), s)
    assert norms.lu2 >= norms.grad2 - 1e-12
    with pytest.raises(MisuseError):
        trial_norms(power(2, 4.0), s)
    with pytest.raises(MisuseError):
        norms.weighted("u_r2")


def test_higher_estimates_dimension_guards():
    trials = radial_suite(10)
    reports = higher_rellich_reports(gaussian(5), trials)
    assert {r.name for r in reports} == {"rellich_h2", "gradient_r4"}
    assert all(r.details["finite"] for r in reports)
    with pytest.raises(MisuseError):
        higher_rellich_reports(gaussian(5), trials, ["hessian_r4"])
    seven = higher_rellich_reports(gaussian(7), trials)
    assert len(seven) == 5 and all(r.details["finite"] for r in seven)


@pytest.mark.parametrize("n", [10, 100, 1000, 10000])
def test_splice_is_c1(n):
    value, slope = splice_mismatch(-0.5, -0.25, n)
    assert value <= 1e-9 * (1 + n**0.5)
    assert slope <= 1e-9 * (1 + 0.5 * n**1.5)
    alpha, beta = splice_coefficients(-0.5, -0.25, n)
    assert beta == pytest.approx(2 * n**0.25)


def test_sharpness_parameter_guards():
    with pytest.raises(ParameterDomainError):
        rayleigh_lambda1(1.0, 5, -1.6, -0.25, 10)
    with pytest.raises(ParameterDomainError):
        rayleigh_lambda1(1.0, 5, -0.5, 0.1, 10)
    with pytest.raises(ParameterDomainError):
        rayleigh_lambda1(-1.0, 5, -0.5, -0.25, 10)


def test_sweep_above_threshold_decreases():
    probes = lambda1_sweep(1.05 * 1.5625, 5, -0.5, -0.25)
    values = [p.lambda1_estimate for p in probes]
    assert all(b < a for a, b in zip(values, values[1:]))


def test_sweep_below_threshold_stays_in_band():
    probes = lambda1_sweep(0.9 * 1.5625, 5, -0.5, -0.25)
    values = [p.lambda1_estimate for p in probes]
    assert max(values) - min(values) < 5
