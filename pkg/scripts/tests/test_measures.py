#!/usr/bin/env python3
"""
Measure families, config parsing and hypothesis audits.
"""
import numpy as np
import pytest

from lib.errors import ConfigError, ParameterDomainError, SingularityError
from lib.measures import (
    audit,
    check_H2,
    compute_U,
    default_measures,
    finite_difference_consistency,
    gaussian,
    measure_from_config,
    potential_sup,
    power,
    rational,
    registry,
    squared_power,
    synthetic_hardy_violator,
)
from lib.radial import radial_rule


@pytest.mark.parametrize("m", default_measures(3), ids=lambda m: m.family)
def test_measures_are_probability(m):
    rule = radial_rule(m.dimension)
    mass = rule.integrate(np.ones_like(rule.nodes), m.density_radial(rule.nodes))
    assert mass == pytest.approx(1.0, rel=1e-8)


def test_gaussian_drift_and_potential():
    m = gaussian(3)
    x = np.array([0.5, -1.0, 2.0])
    np.testing.assert_allclose(m.drift(x), -x)
    np.testing.assert_allclose(m.drift_jacobian(x), -np.eye(3))
    assert compute_U(m, x) == pytest.approx(-0.25 * x @ x + 1.5)
    assert potential_sup(gaussian(5)) == pytest.approx(2.5, abs=1e-9)


@pytest.mark.parametrize("m", default_measures(2), ids=lambda m: m.family)
def test_drift_derivatives_match_differences(m):
    points = np.array([[0.6, 0.3], [1.2, -0.8], [-2.0, 0.5]])
    errors = finite_difference_consistency(m, points)
    assert max(errors.values()) < 1e-5


def test_parameter_guards():
    with pytest.raises(ParameterDomainError):
        rational(5, 2.0, 4.0)
    with pytest.raises(ParameterDomainError):
        squared_power(3, 1.0, 1.0, 0.5)
    with pytest.raises(ParameterDomainError):
        power(2, 0.0)


def test_singular_drift_rejects_origin():
    m = power(2, 3.0)
    assert m.singular_at_origin
    with pytest.raises(SingularityError):
        m.radial_drift_terms(np.array([0.0, 1.0]))


def test_config_strict_parsing():
    m = measure_from_config({"family": "rational", "dimension": 5, "params": {"alpha": 2, "beta": 8}})
    assert m.params == {"alpha": 2.0, "beta": 8.0}
    with pytest.raises(ConfigError):
        measure_from_config({"family": "gaussian", "dimension": 2, "colour": "red"})
    with pytest.raises(ConfigError):
        measure_from_config({"family": "power", "dimension": 2, "params": {"alpha": 1}})
    with pytest.raises(ConfigError):
        measure_from_config({"family": "lognormal", "dimension": 1})
    assert set(registry()) == {"gaussian", "power", "squared_power", "rational"}


@pytest.mark.parametrize(
    "m",
    [gaussian(5), power(5, 4.0), squared_power(5, 1.0, 1.0, 1.5), rational(5, 2.0, 8.0)],
    ids=lambda m: m.family,
)
def test_registered_measures_pass_audit(m):
    report = audit(m)
    assert report.passed, report.table()
    assert report.r0 is not None


def test_gaussian_r0_search():
    assert audit(gaussian(5)).r0 == pytest.approx(0.1)


def test_synthetic_violator_fails_h2():
    entries = {e.name: e for e in check_H2(synthetic_hardy_violator(5, 1.0), 0.1)}
    assert not entries["H2(ii)"].passed
    assert entries["H2(ii)"].witness_point is not None


def test_report_serializes():
    data = audit(gaussian(3)).to_dict()
    assert {e["name"] for e in data["entries"]} >= {"H1(i)", "H1(ii)", "H2(i)", "H2(ii)", "H2(iii)", "H3(i)", "H3(ii)"}
