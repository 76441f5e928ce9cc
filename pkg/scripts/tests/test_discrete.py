#!/usr/bin/env python3
"""
Finite-difference operators for general radial measures.
"""
import numpy as np
import pytest

from lib.discrete import (
    DiscreteOperator,
    build_discrete_L,
    build_radial_L,
    discrete_ibp_residual,
    eigenvalue_convergence,
    evolve_discrete_A,
    general_positivity_scan,
    spectral_gap,
    spectrum,
    symmetry_residual,
    validate_operator,
)
from lib.errors import InputRejected, MisuseError
from lib.measures import gaussian, power, rational, squared_power
from lib.positivity import indicator


@pytest.fixture(scope="module")
def line():
    return build_discrete_L(gaussian(1), 8.0, 0.01)


def test_gaussian_line_spectrum(line):
    values, vectors = spectrum(line, 4)
    assert np.allclose(values, [0, 1, 2, 3], atol=1e-3)
    # constant eigenvector, unit norm
    assert line.norm(vectors[:, 0] - line.mean(vectors[:, 0])) < 1e-6
    assert line.norm(vectors[:, 1]) == pytest.approx(1.0)


def test_gaussian_radial_spectrum():
    op = build_radial_L(gaussian(3), 8.0, 0.01)
    values, _ = spectrum(op, 3)
    assert np.allclose(values, [0, 2, 4], atol=1e-3)


@pytest.mark.parametrize("measure", [gaussian(1), power(1, 4.0), squared_power(1)])
def test_decaying_measures_have_gap(measure):
    assert spectral_gap(build_discrete_L(measure, 8.0, 0.01)) > 0.1


def test_rational_measure_gap_positive():
    op = build_radial_L(rational(5, 2.0, 8.0), 100.0, 0.1, tail_tolerance=1e-4)
    assert spectral_gap(op) > 0


def test_constants_annihilated(line):
    assert np.max(np.abs(line.apply(np.ones_like(line.grid)))) < 1e-8


def test_symmetry_and_ibp(line):
    rng = np.random.default_rng(3)
    u = np.exp(-line.grid**2 / 4) * rng.standard_normal(line.grid.size)
    v = np.cos(line.grid)
    scale = line.norm(line.apply(u)) * line.norm(v)
    assert symmetry_residual(line, u, v) <= 1e-10 * scale
    assert discrete_ibp_residual(line, u) <= 1e-10 * line.norm(line.apply(u)) * line.norm(u)


def test_flow_conserves_mean_and_contracts(line):
    f = np.where(np.abs(line.grid) <= 1, 1.0, 0.0)
    mean = line.mean(f)
    evolved = evolve_discrete_A(line, f, 1.0)
    assert line.mean(evolved) == pytest.approx(mean, abs=1e-10)
    gap = spectral_gap(line)
    assert line.norm(evolved - mean) <= np.exp(-(gap**2)) * line.norm(f - mean) + 1e-10


def test_resolution_guards():
    with pytest.raises(MisuseError):
        build_discrete_L(gaussian(1), 8.0, 0.5)
    with pytest.raises(MisuseError):
        build_discrete_L(gaussian(1), 3.0, 0.01)
    with pytest.raises(MisuseError):
        build_discrete_L(gaussian(2), 8.0, 0.01)
    with pytest.raises(MisuseError):
        spectrum(build_discrete_L(gaussian(1), 8.0, 0.01), 1)


def test_convergence_rows():
    rows = eigenvalue_convergence(gaussian(1), (0.04, 0.02), 8.0, index=2)
    assert [row["h"] for row in rows] == [0.04, 0.02]
    assert rows[1]["error"] < rows[0]["error"]
    assert rows[1]["ratio"] > 2
    with pytest.raises(MisuseError):
        eigenvalue_convergence(power(1, 4.0), (0.04,), 8.0)


def test_general_positivity_scan():
    scan = general_positivity_scan(power(1, 4.0), indicator([(-1.0, 1.0)]), (-1.0, 1.0), (1.0, 5.0, 20.0), 8.0, 0.01)
    assert scan.path == "discrete"
    assert scan.minima[-1] > 0 and scan.t0 is not None
    with pytest.raises(InputRejected):
        general_positivity_scan(
            gaussian(1), lambda y: -np.ones(len(y)), (-1.0, 1.0), (1.0,), 8.0, 0.01
        )
    with pytest.raises(MisuseError):
        general_positivity_scan(power(1, 1.5), indicator([(-1.0, 1.0)]), (-1.0, 1.0), (1.0,), 8.0, 0.01)


def test_underflowing_tails_are_cut():
    # e^{-8⁴} is below the smallest double
    op = build_discrete_L(power(1, 4.0), 8.0, 0.01)
    assert op.grid.max() < 8.0 and op.grid.min() > -8.0
    assert np.all(op.weights > 0) and np.all(op.face_weights > 0)
    assert np.all(np.isfinite(op.diagonal)) and np.all(np.isfinite(op.symmetric_off_diagonal))


@pytest.mark.parametrize("measure", [power(1, 4.0), squared_power(1)])
def test_tiny_tail_weights_keep_operator_finite(measure):
    # squared_power keeps μ(8) ≈ e^{-524}, whose neighbour products underflow
    op = build_discrete_L(measure, 8.0, 0.01)
    assert np.all(np.isfinite(op.symmetric_off_diagonal))
    values, _ = spectrum(op, 3)
    assert np.all(np.isfinite(values)) and values[1] > 0.1


def test_radial_tail_cut_keeps_operator_finite():
    op = build_radial_L(power(3, 4.0), 8.0, 0.01)
    assert op.grid.max() < 8.0
    assert np.all(np.isfinite(op.diagonal))
    assert spectral_gap(op) > 0.1


def test_validate_operator_rejects_vanishing_weight():
    grid = np.linspace(-1.0, 1.0, 5)
    weights = np.array([1.0, 1.0, 0.0, 1.0, 1.0])
    op = DiscreteOperator("line", gaussian(1).describe(), grid, 0.5, weights, np.ones(4))
    with pytest.raises(MisuseError):
        validate_operator(op)
    op = DiscreteOperator("line", gaussian(1).describe(), grid, 0.5, np.ones(5), np.array([1.0, np.inf, 1.0, 1.0]))
    with pytest.raises(MisuseError):
        validate_operator(op)
