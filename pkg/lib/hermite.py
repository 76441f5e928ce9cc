"""
Hermite spectral layer.

Probabilists' Hermite polynomials He_n, their orthonormal versions
Ĥ_α = He_α / sqrt(α!) under the standard Gaussian measure, Gauss–Hermite
rules for that weight, and transforms between point values and coefficients.

Coefficient vectors are stored in graded-lexicographic order so serialized
spectral functions are bit-stable.
"""

import json
import logging
import math
import os
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.linalg import eigh_tridiagonal
from scipy.special import ndtr

from lib.errors import MisuseError, ResourceLimitError

logger = logging.getLogger(__name__)

MAX_DIMENSION = 4
MAX_GRID = int(os.environ.get("BIKO_MAX_GRID", 10**7))


# --- Multi-indices ---


@dataclass(frozen=True)
class MultiIndex:
    entries: tuple[int, ...]

    def __post_init__(self):
        entries = tuple(int(a) for a in self.entries)
        if not entries:
            raise MisuseError("MultiIndex needs at least one entry")
        if any(a < 0 for a in entries):
            raise MisuseError(f"MultiIndex entries must be >= 0, got {entries}")
        object.__setattr__(self, "entries", entries)

    @property
    def dimension(self) -> int:
        return len(self.entries)

    def order(self) -> int:
        """|α|, the sum of the entries."""
        return sum(self.entries)


def _compositions(total: int, parts: int):
    # descending lexicographic: (2,0), (1,1), (0,2)
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first, *rest)


@lru_cache(maxsize=64)
def multi_indices(dimension: int, max_degree: int) -> tuple[tuple[int, ...], ...]:
    """All α with |α| <= max_degree, graded by order, lexicographic within a degree."""
    if dimension < 1 or max_degree < 0:
        raise MisuseError(f"Bad index set: dimension={dimension}, max_degree={max_degree}")
    return tuple(
        alpha for degree in range(max_degree + 1) for alpha in _compositions(degree, dimension)
    )


@lru_cache(maxsize=64)
def _index_map(dimension: int, max_degree: int) -> dict[tuple[int, ...], int]:
    return {alpha: i for i, alpha in enumerate(multi_indices(dimension, max_degree))}


@lru_cache(maxsize=64)
def _index_array(dimension: int, max_degree: int) -> np.ndarray:
    arr = np.array(multi_indices(dimension, max_degree), dtype=int).reshape(-1, dimension)
    arr.flags.writeable = False
    return arr


# --- Spectral functions ---


@dataclass(frozen=True, eq=False)
class SpectralFunction:
    """
    Element of L²(dμ) truncated to |α| <= max_degree.

    `coefficients[i]` multiplies Ĥ_α for α = multi_indices(dimension, max_degree)[i].
    """

    dimension: int
    max_degree: int
    coefficients: np.ndarray

    def __post_init__(self):
        if self.dimension < 1 or self.max_degree < 0:
            raise MisuseError(
                f"Bad spectral function shape: dimension={self.dimension}, "
                f"max_degree={self.max_degree}"
            )
        coeffs = np.array(self.coefficients, dtype=float).reshape(-1)
        expected = len(multi_indices(self.dimension, self.max_degree))
        if coeffs.size != expected:
            raise MisuseError(f"Expected {expected} coefficients, got {coeffs.size}")
        coeffs.flags.writeable = False
        object.__setattr__(self, "coefficients", coeffs)

    # construction

    @classmethod
    def from_mapping(cls, dimension: int, max_degree: int, mapping: dict) -> "SpectralFunction":
        index = _index_map(dimension, max_degree)
        coeffs = np.zeros(len(index))
        for alpha, value in mapping.items():
            key = alpha.entries if isinstance(alpha, MultiIndex) else tuple(alpha)
            if len(key) != dimension:
                raise MisuseError(f"Index {key} does not match dimension {dimension}")
            if sum(key) > max_degree:
                raise MisuseError(f"Index {key} exceeds max_degree {max_degree}")
            coeffs[index[key]] = float(value)
        return cls(dimension, max_degree, coeffs)

    @classmethod
    def constant(cls, dimension: int, value: float = 1.0, max_degree: int = 0) -> "SpectralFunction":
        return cls.from_mapping(dimension, max_degree, {(0,) * dimension: value})

    @classmethod
    def basis(cls, alpha, max_degree: int | None = None) -> "SpectralFunction":
        """The orthonormal basis element Ĥ_α."""
        key = alpha.entries if isinstance(alpha, MultiIndex) else tuple(alpha)
        degree = sum(key) if max_degree is None else max_degree
        return cls.from_mapping(len(key), degree, {key: 1.0})

    # views

    @property
    def indices(self) -> tuple[tuple[int, ...], ...]:
        return multi_indices(self.dimension, self.max_degree)

    @property
    def orders(self) -> np.ndarray:
        return _index_array(self.dimension, self.max_degree).sum(axis=1)

    def coefficient(self, alpha) -> float:
        key = alpha.entries if isinstance(alpha, MultiIndex) else tuple(alpha)
        i = _index_map(self.dimension, self.max_degree).get(key)
        return 0.0 if i is None else float(self.coefficients[i])

    def as_dict(self) -> dict[tuple[int, ...], float]:
        return {a: float(c) for a, c in zip(self.indices, self.coefficients) if c != 0.0}

    @property
    def mean(self) -> float:
        """∫ f dμ, the Ĥ_0 coefficient."""
        return float(self.coefficients[0])

    def norm(self) -> float:
        """L²(dμ) norm (Parseval)."""
        return float(np.sqrt(np.dot(self.coefficients, self.coefficients)))

    # algebra

    def with_max_degree(self, max_degree: int) -> "SpectralFunction":
        """Pad with zeros or truncate to a new max_degree."""
        if max_degree == self.max_degree:
            return self
        if max_degree > self.max_degree:
            coeffs = np.zeros(len(multi_indices(self.dimension, max_degree)))
            coeffs[: self.coefficients.size] = self.coefficients
        else:
            coeffs = self.coefficients[: len(multi_indices(self.dimension, max_degree))]
        return SpectralFunction(self.dimension, max_degree, coeffs)

    def map_orders(self, factor) -> "SpectralFunction":
        """Multiply each c_α by factor(|α|) (vectorized over orders)."""
        return SpectralFunction(
            self.dimension, self.max_degree, self.coefficients * factor(self.orders)
        )

    def scaled(self, value: float) -> "SpectralFunction":
        return SpectralFunction(self.dimension, self.max_degree, value * self.coefficients)

    def _aligned(self, other: "SpectralFunction"):
        if other.dimension != self.dimension:
            raise MisuseError(f"Dimension mismatch: {self.dimension} vs {other.dimension}")
        degree = max(self.max_degree, other.max_degree)
        return self.with_max_degree(degree), other.with_max_degree(degree), degree

    def __add__(self, other: "SpectralFunction") -> "SpectralFunction":
        a, b, degree = self._aligned(other)
        return SpectralFunction(self.dimension, degree, a.coefficients + b.coefficients)

    def __sub__(self, other: "SpectralFunction") -> "SpectralFunction":
        a, b, degree = self._aligned(other)
        return SpectralFunction(self.dimension, degree, a.coefficients - b.coefficients)

    def derivative(self, k: int) -> "SpectralFunction":
        """∂_k, using ∂Ĥ_n = sqrt(n) Ĥ_{n-1}."""
        self._check_axis(k)
        index = _index_map(self.dimension, self.max_degree)
        out = np.zeros_like(self.coefficients)
        for i, alpha in enumerate(self.indices):
            if alpha[k] == 0 or self.coefficients[i] == 0.0:
                continue
            lowered = alpha[:k] + (alpha[k] - 1,) + alpha[k + 1 :]
            out[index[lowered]] += math.sqrt(alpha[k]) * self.coefficients[i]
        return SpectralFunction(self.dimension, self.max_degree, out)

    def multiply_coordinate(self, k: int) -> "SpectralFunction":
        """x_k·f, using x Ĥ_n = sqrt(n+1) Ĥ_{n+1} + sqrt(n) Ĥ_{n-1}. Raises max_degree by one."""
        self._check_axis(k)
        degree = self.max_degree + 1
        index = _index_map(self.dimension, degree)
        out = np.zeros(len(index))
        for i, alpha in enumerate(self.indices):
            c = self.coefficients[i]
            if c == 0.0:
                continue
            n = alpha[k]
            raised = alpha[:k] + (n + 1,) + alpha[k + 1 :]
            out[index[raised]] += math.sqrt(n + 1) * c
            if n > 0:
                lowered = alpha[:k] + (n - 1,) + alpha[k + 1 :]
                out[index[lowered]] += math.sqrt(n) * c
        return SpectralFunction(self.dimension, degree, out)

    def _check_axis(self, k: int) -> None:
        if not 0 <= k < self.dimension:
            raise MisuseError(f"Axis {k} out of range for dimension {self.dimension}")

    # serialization

    def to_json(self) -> str:
        entries = [[list(a), float(c)] for a, c in zip(self.indices, self.coefficients)]
        return json.dumps(
            {"dimension": self.dimension, "max_degree": self.max_degree, "entries": entries}
        )

    @classmethod
    def from_json(cls, text: str) -> "SpectralFunction":
        data = json.loads(text)
        mapping = {tuple(alpha): value for alpha, value in data["entries"]}
        return cls.from_mapping(int(data["dimension"]), int(data["max_degree"]), mapping)


# --- Polynomials ---


def hermite_eval(n: int, x):
    """He_n(x) by the three-term recurrence; works elementwise on arrays."""
    if n < 0:
        raise MisuseError(f"Hermite degree must be >= 0, got {n}")
    x = np.asarray(x, dtype=float)
    prev, cur = np.ones_like(x), x.copy()
    if n == 0:
        return prev if prev.ndim else float(prev)
    for k in range(1, n):
        prev, cur = cur, x * cur - k * prev
    return cur if cur.ndim else float(cur)


def hermite_table(max_degree: int, x) -> np.ndarray:
    """Rows Ĥ_0(x) … Ĥ_max_degree(x), shape (max_degree + 1, *x.shape)."""
    x = np.asarray(x, dtype=float)
    table = np.empty((max_degree + 1, *x.shape))
    table[0] = 1.0
    if max_degree >= 1:
        table[1] = x
    for n in range(1, max_degree):
        table[n + 1] = (x * table[n] - math.sqrt(n) * table[n - 1]) / math.sqrt(n + 1)
    return table


def hermite_normalized(n: int, x):
    """Ĥ_n(x) = He_n(x) / sqrt(n!)."""
    value = hermite_table(n, x)[n]
    return value if value.ndim else float(value)


def basis_matrix(dimension: int, max_degree: int, points) -> np.ndarray:
    """Matrix B[i, p] = Ĥ_{α_i}(x_p), α_i in graded-lex order."""
    points = _as_points(points, dimension)
    alphas = _index_array(dimension, max_degree)
    basis = np.ones((alphas.shape[0], points.shape[0]))
    for k in range(dimension):
        table = hermite_table(max_degree, points[:, k])
        basis *= table[alphas[:, k]]
    return basis


def _as_points(points, dimension: int) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1 and dimension == 1:
        pts = pts.reshape(-1, 1)
    elif pts.ndim == 1:
        pts = pts.reshape(1, -1)
    if pts.shape[-1] != dimension:
        raise MisuseError(f"Points have dimension {pts.shape[-1]}, expected {dimension}")
    return pts


# --- Quadrature ---


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    dimension: int
    nodes_per_axis: int
    axis_nodes: np.ndarray
    axis_weights: np.ndarray

    @property
    def nodes(self) -> np.ndarray:
        grids = np.meshgrid(*([self.axis_nodes] * self.dimension), indexing="ij")
        return np.stack([g.reshape(-1) for g in grids], axis=1)

    @property
    def weights(self) -> np.ndarray:
        w = self.axis_weights
        for _ in range(self.dimension - 1):
            w = np.multiply.outer(w, self.axis_weights)
        return np.asarray(w).reshape(-1)

    def integrate(self, values) -> float:
        """∫ f dμ given f sampled on `nodes`."""
        return float(np.dot(self.weights, np.asarray(values, dtype=float)))


def _check_grid(dimension: int, per_axis: int) -> None:
    if dimension > MAX_DIMENSION:
        raise ResourceLimitError(f"Tensor rules support dimension <= {MAX_DIMENSION}, got {dimension}")
    if per_axis**dimension > MAX_GRID:
        raise ResourceLimitError(
            f"Tensor grid {per_axis}^{dimension} exceeds cap {MAX_GRID}"
        )


@lru_cache(maxsize=32)
def _gauss_hermite_axis(m: int) -> tuple[np.ndarray, np.ndarray]:
    if m == 1:
        return np.array([0.0]), np.array([1.0])
    # Golub–Welsch on the Jacobi matrix of the orthonormal recurrence
    off_diagonal = np.sqrt(np.arange(1, m, dtype=float))
    nodes, vectors = eigh_tridiagonal(np.zeros(m), off_diagonal)
    weights = vectors[0, :] ** 2
    nodes = 0.5 * (nodes - nodes[::-1])
    weights = 0.5 * (weights + weights[::-1])
    weights = weights / weights.sum()
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return nodes, weights


def quadrature_rule(dimension: int, m: int) -> QuadratureRule:
    """Tensor Gauss–Hermite rule for the standard Gaussian, exact to degree 2m-1 per axis."""
    if m < 1 or dimension < 1:
        raise MisuseError(f"quadrature_rule needs m >= 1 and dimension >= 1, got m={m}")
    _check_grid(dimension, m)
    nodes, weights = _gauss_hermite_axis(m)
    return QuadratureRule(dimension, m, nodes, weights)


# --- Transforms ---


def project(f, dimension: int, max_degree: int, rule: QuadratureRule) -> SpectralFunction:
    """
    Coefficients c_α = ⟨f, Ĥ_α⟩ by quadrature.

    `f` takes an array of points of shape (P, N) and returns P values.
    """
    if rule.dimension != dimension:
        raise MisuseError(f"Rule dimension {rule.dimension} != {dimension}")
    if rule.nodes_per_axis < max_degree + 1:
        raise MisuseError(
            f"Rule with {rule.nodes_per_axis} nodes/axis is not exact for degree {max_degree}"
        )
    nodes = rule.nodes
    values = np.asarray(f(nodes), dtype=float).reshape(-1)
    coeffs = basis_matrix(dimension, max_degree, nodes) @ (rule.weights * values)
    return SpectralFunction(dimension, max_degree, coeffs)


def synthesize(s: SpectralFunction, points) -> np.ndarray:
    """Pointwise Σ c_α Ĥ_α(x) at each point."""
    pts = _as_points(points, s.dimension)
    return s.coefficients @ basis_matrix(s.dimension, s.max_degree, pts)


def inner_product_mu(s1: SpectralFunction, s2: SpectralFunction) -> float:
    """⟨s1, s2⟩ in L²(dμ)."""
    if s1.dimension != s2.dimension:
        raise MisuseError(f"Dimension mismatch: {s1.dimension} vs {s2.dimension}")
    degree = min(s1.max_degree, s2.max_degree)
    n = len(multi_indices(s1.dimension, degree))
    return float(np.dot(s1.coefficients[:n], s2.coefficients[:n]))


def box_rule(box, nodes_per_axis: int = 200) -> tuple[np.ndarray, np.ndarray]:
    """Gauss–Legendre tensor rule on a box [(lo, hi), ...] against Lebesgue measure."""
    dimension = len(box)
    _check_grid(dimension, nodes_per_axis)
    ref_nodes, ref_weights = leggauss(nodes_per_axis)
    axes, weights = [], []
    for lo, hi in box:
        if not hi > lo:
            raise MisuseError(f"Degenerate box side [{lo}, {hi}]")
        half = 0.5 * (hi - lo)
        axes.append(half * ref_nodes + 0.5 * (hi + lo))
        weights.append(half * ref_weights)
    grids = np.meshgrid(*axes, indexing="ij")
    points = np.stack([g.reshape(-1) for g in grids], axis=1)
    w = weights[0]
    for extra in weights[1:]:
        w = np.multiply.outer(w, extra)
    return points, np.asarray(w).reshape(-1)


def gaussian_density(points) -> np.ndarray:
    """Standard Gaussian density (2π)^{-N/2} e^{-|x|²/2} at each point (shape (P, N))."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    dimension = pts.shape[1]
    return (2 * np.pi) ** (-dimension / 2) * np.exp(-0.5 * np.sum(pts**2, axis=1))


def project_on_box(f, box, max_degree: int, nodes_per_axis: int = 200) -> SpectralFunction:
    """Coefficients of χ_K·f for a box K, by Gauss–Legendre quadrature on K."""
    dimension = len(box)
    points, weights = box_rule(box, nodes_per_axis)
    values = np.asarray(f(points), dtype=float).reshape(-1)
    density = gaussian_density(points)
    coeffs = basis_matrix(dimension, max_degree, points) @ (weights * density * values)
    return SpectralFunction(dimension, max_degree, coeffs)


def gaussian_box_mass(box) -> float:
    """∫ χ_K dμ for a box K under the standard Gaussian."""
    return float(np.prod([ndtr(hi) - ndtr(lo) for lo, hi in box]))
