"""
Radial quadrature and calculus.

Integrals of radial integrands over ℝᴺ reduce to ω_N ∫ F(r) r^{N-1} dr.
Panels are geometric toward 0 (singular weights r^{-2}, r^{-4}, r^{-6}),
unit-width in the bulk, and the tail [r_cut, ∞) is mapped to t ∈ (0, 1]
through r = r_cut / t so polynomially decaying measures are covered.

Radial trial functions are finite sums Σ c_j r^{e_j} e^{-a r²}; every
derivative stays in that class, so derivatives to order four are exact.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import gamma

logger = logging.getLogger(__name__)

POINTS_PER_PANEL = 24


def sphere_area(dimension: int) -> float:
    """ω_N = 2π^{N/2} / Γ(N/2); equals 2 for N = 1."""
    return 2 * math.pi ** (dimension / 2) / gamma(dimension / 2)


# --- Quadrature ---


@dataclass(frozen=True, eq=False)
class RadialRule:
    """Nodes r > 0 and weights already containing ω_N r^{N-1} dr."""

    dimension: int
    nodes: np.ndarray
    weights: np.ndarray

    def integrate(self, values, density=None) -> float:
        """ω_N ∫ values·density r^{N-1} dr; nodes where the density underflows contribute 0."""
        values = np.asarray(values, dtype=float)
        if density is None:
            return float(np.sum(self.weights * values))
        density = np.asarray(density, dtype=float)
        with np.errstate(invalid="ignore", over="ignore"):
            terms = np.where(density > 0, density * values, 0.0)
        return float(np.sum(self.weights * terms))


@lru_cache(maxsize=8)
def _reference(points: int):
    return leggauss(points)


def _panel_edges(lo: float, hi: float) -> list[float]:
    if hi <= 1.0 or lo <= 0.0:
        pieces = max(1, math.ceil(math.log2(hi / lo))) if lo > 0 else 1
        return list(np.geomspace(lo, hi, pieces + 1)) if lo > 0 else [lo, hi]
    if lo >= 1.0:
        pieces = max(1, math.ceil(hi - lo))
        return list(np.linspace(lo, hi, pieces + 1))
    return _panel_edges(lo, 1.0)[:-1] + _panel_edges(1.0, hi)


def _gauss_panels(edges, points: int) -> tuple[np.ndarray, np.ndarray]:
    ref_x, ref_w = _reference(points)
    nodes, weights = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        half = 0.5 * (b - a)
        nodes.append(half * ref_x + 0.5 * (a + b))
        weights.append(half * ref_w)
    return np.concatenate(nodes), np.concatenate(weights)


def radial_rule(
    dimension: int,
    breakpoints=(1.0,),
    upper: float | None = None,
    r_cut: float = 16.0,
    decades_below: int = 12,
    points: int = POINTS_PER_PANEL,
) -> RadialRule:
    """
    Composite Gauss–Legendre rule on [0, upper] (or [0, ∞) when upper is None).

    `breakpoints` are forced panel boundaries, e.g. 1/n and 1 for the splice
    of the sharpness probe.
    """
    stops = sorted({float(b) for b in breakpoints if b > 0})
    end = float(upper) if upper is not None else float(r_cut)
    stops = [b for b in stops if b < end] + [end]
    first = stops[0]
    smallest = first * 10.0 ** (-decades_below)

    edges = [0.0, smallest]
    edges += list(np.geomspace(smallest, first, decades_below + 1))[1:]
    for a, b in zip(stops[:-1], stops[1:]):
        edges += _panel_edges(a, b)[1:]
    nodes, weights = _gauss_panels(edges, points)

    if upper is None:
        # r = r_cut / t, dr = r_cut / t² dt
        t_edges = [0.0] + list(np.geomspace(1e-10, 1.0, 11))
        t_nodes, t_weights = _gauss_panels(t_edges, points)
        tail_nodes = r_cut / t_nodes
        tail_weights = t_weights * r_cut / t_nodes**2
        nodes = np.concatenate([nodes, tail_nodes[::-1]])
        weights = np.concatenate([weights, tail_weights[::-1]])

    weights = weights * sphere_area(dimension) * nodes ** (dimension - 1)
    return RadialRule(dimension, nodes, weights)


# --- Trial functions ---


@dataclass(frozen=True)
class RadialTrial:
    """
    u(r) = Σ c_j r^{e_j} e^{-a r²}.

    `terms` is a tuple of (exponent, coefficient) pairs; exponents may be real.
    """

    name: str
    terms: tuple[tuple[float, float], ...]
    a: float = 0.0

    def derivative_terms(self, k: int) -> tuple[tuple[float, float], ...]:
        terms = self.terms
        for _ in range(k):
            out: dict[float, float] = {}
            for e, c in terms:
                if e != 0:
                    out[e - 1] = out.get(e - 1, 0.0) + c * e
                if self.a != 0:
                    out[e + 1] = out.get(e + 1, 0.0) - 2 * self.a * c
            terms = tuple((e, c) for e, c in sorted(out.items()) if c != 0.0)
        return terms

    def evaluate(self, r, k: int = 0) -> np.ndarray:
        """u^{(k)}(r)."""
        r = np.asarray(r, dtype=float)
        total = np.zeros_like(r)
        for e, c in self.derivative_terms(k):
            total = total + c * r**e
        return total * np.exp(-self.a * r**2)

    @property
    def order_at_zero(self) -> float:
        """Leading exponent near r = 0 (u ~ r^p)."""
        return min(e for e, c in self.terms if c != 0.0)


def gaussian_polynomial_trial(a: float, k: int = 0) -> RadialTrial:
    """u = |x|^{2k} e^{-a|x|²}."""
    return RadialTrial(f"r^{2 * k}*exp(-{a:g}r^2)", ((2.0 * k, 1.0),), a)


def constant_trial(value: float = 1.0) -> RadialTrial:
    return RadialTrial(f"const({value:g})", ((0.0, value),), 0.0)


def power_trial(p: float, a: float = 0.25) -> RadialTrial:
    """u = |x|^p e^{-a|x|²}; singular at 0 when p < 0."""
    return RadialTrial(f"r^{p:g}*exp(-{a:g}r^2)", ((float(p), 1.0),), a)


def radial_suite(size: int = 10) -> list[RadialTrial]:
    """Deterministic suite: the constant, then r^{2k} e^{-a r²} over a, k."""
    suite = [constant_trial()]
    for a in (0.25, 0.5, 1.0, 0.125, 2.0):
        for k in (0, 1, 2):
            suite.append(gaussian_polynomial_trial(a, k))
    return suite[:size]


# --- Calculus ---


@dataclass(frozen=True, eq=False)
class RadialFields:
    """Pointwise radial quantities of a trial u under a radial measure."""

    u: np.ndarray
    du: np.ndarray
    lu: np.ndarray
    dlu: np.ndarray
    au: np.ndarray
    grad2: np.ndarray
    hess2: np.ndarray
    third2: np.ndarray
    l_grad2: np.ndarray
    drift2: np.ndarray


def radial_fields(measure, trial: RadialTrial, r) -> RadialFields:
    """
    Everything the inequality reports integrate, for radial u and b = g(r) x.

    With c(r) = (N-1)/r + g r:  Lu = u'' + c u',  (Lu)' = u''' + c u'' + c' u',
    Au = (Lu)'' + c (Lu)'.
    """
    n = measure.dimension
    r = np.asarray(r, dtype=float)
    d = [trial.evaluate(r, k) for k in range(5)]
    g, q, w = measure.radial_drift_terms(r)
    gp = q * r
    gpp = w * r**2 + q

    c = (n - 1) / r + g * r
    c1 = -(n - 1) / r**2 + g + gp * r
    c2 = 2 * (n - 1) / r**3 + 2 * gp + gpp * r

    lu = d[2] + c * d[1]
    dlu = d[3] + c * d[2] + c1 * d[1]
    ddlu = d[4] + c * d[3] + 2 * c1 * d[2] + c2 * d[1]
    au = ddlu + c * dlu

    # D²u = a n⊗n + b I with a = u'' - u'/r, b = u'/r
    a = d[2] - d[1] / r
    b = d[1] / r
    hess2 = d[2] ** 2 + (n - 1) * b**2
    da = d[3] - d[2] / r + d[1] / r**2
    db = d[2] / r - d[1] / r**2
    p_coef = da - 2 * a / r
    q_coef = a / r
    third2 = (
        p_coef**2
        + (2 * n + 2) * q_coef**2
        + n * db**2
        + 4 * p_coef * q_coef
        + 2 * p_coef * db
        + 4 * q_coef * db
    )

    # Σ_k |L D_k u|² = ((Lu)' - (g + g' r) u')²
    l_grad2 = (dlu - (g + gp * r) * d[1]) ** 2
    drift2 = (g * r * d[0]) ** 2

    return RadialFields(
        u=d[0], du=d[1], lu=lu, dlu=dlu, au=au,
        grad2=d[1] ** 2, hess2=hess2, third2=third2, l_grad2=l_grad2, drift2=drift2,
    )


def integrable_near_zero(order: float, singular_power: float, dimension: int) -> bool:
    """Whether r^{2·order - singular_power} r^{N-1} is integrable at 0."""
    return 2 * order - singular_power + dimension > 0
