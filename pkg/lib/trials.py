"""
Seeded trial suites.

The seed fully determines every random suite, so reruns of a command give
the same trials and byte-identical artifacts.
"""

import numpy as np

from lib.hermite import SpectralFunction, multi_indices
from lib.positivity import bump
from lib.radial import RadialTrial, radial_suite

DEFAULT_SEED = 20240601


def random_polynomial(dimension: int, max_degree: int, rng: np.random.Generator) -> SpectralFunction:
    """Hermite expansion with standard normal coefficients on every |α| <= max_degree."""
    count = len(multi_indices(dimension, max_degree))
    return SpectralFunction(dimension, max_degree, rng.standard_normal(count))


def polynomial_suite(dimension: int, max_degree: int, size: int, seed: int = DEFAULT_SEED) -> list[SpectralFunction]:
    rng = np.random.default_rng(seed)
    return [random_polynomial(dimension, max_degree, rng) for _ in range(size)]


def hermite_basis_suite(dimension: int, max_degree: int) -> list[SpectralFunction]:
    """Every normalized Ĥ_α with |α| <= max_degree."""
    return [SpectralFunction.basis(alpha, max_degree) for alpha in multi_indices(dimension, max_degree)]


def seeded_radial_suite(size: int, seed: int = DEFAULT_SEED) -> list[RadialTrial]:
    """The deterministic radial suite padded with random Gaussian-polynomial mixtures."""
    base = radial_suite(min(size, 10))
    rng = np.random.default_rng(seed)
    extra = []
    for i in range(size - len(base)):
        a = float(rng.uniform(0.125, 1.0))
        terms = tuple((2.0 * k, float(rng.standard_normal())) for k in range(3))
        extra.append(RadialTrial(f"mix{i}(a={a:.3f})", terms, a))
    return base + extra


def bump_family(K, count: int = 5):
    """`count` Gaussian bumps centred across the first side of K."""
    lo, hi = K[0]
    centres = np.linspace(lo, hi, count + 2)[1:-1]
    width = (hi - lo) / (2 * count)
    return [bump(float(c), width) for c in centres]
