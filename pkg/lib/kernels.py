"""
Kernels of the Ornstein–Uhlenbeck semigroup and of e^{-tA}.

- mehler_kernel: kernel of e^{tL} against Lebesgue dy.
- complex_kernel: its continuation p(z, x, y) to Re z >= 0.
- biou_kernel_subordination: k(t,x,y) = (4πt)^{-1/2} ∫_0^∞ e^{-s²/4t} (p(is) + p(-is)) ds.
- biou_kernel_spectral: Σ e^{-t|α|²} Ĥ_α(x) Ĥ_α(y) μ(y), the oracle.

The subordination integrand is evaluated at ε + is. With ε > 0 the result is
exactly the spectral sum damped by e^{-ε|α|}, so Richardson extrapolation
from ε and ε/2 removes the first-order bias. Panels are graded toward the
near-singular points s = kπ where 1 - e^{-2(ε+is)} is smallest.
"""

import cmath
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.special import comb, erfc

from lib.errors import ConvergenceError, MisuseError, SingularityError
from lib.hermite import basis_matrix, box_rule, gaussian_density, multi_indices, quadrature_rule

logger = logging.getLogger(__name__)

DEFAULT_EPS = 1e-3
CRAMER = 1.0865
PANEL_LIMIT = 200
GAUSS_CUTOFF = 60.0


@dataclass
class KernelValue:
    value: float | complex
    method: str
    error_estimate: float
    parameters: dict = field(default_factory=dict)


def _vec(x) -> np.ndarray:
    return np.atleast_1d(np.asarray(x, dtype=float))


# --- Mehler ---


def mehler_kernel(t: float, x, y, stationary_variance: float = 1.0):
    """
    (2πσ²(1-e^{-2t}))^{-N/2} exp(-|y - e^{-t}x|² / (2σ²(1-e^{-2t}))).

    σ² = 1 is the kernel of e^{tL} for the standard Gaussian; σ² = 2 gives
    the (4π, /4) constants, kept only to document that they break the
    eigenflow.
    """
    if not t > 0:
        raise MisuseError(f"Mehler kernel needs t > 0, got {t}")
    x = _vec(x)
    y = np.asarray(y, dtype=float)
    single = y.ndim <= 1
    y = y.reshape(-1, x.size)
    spread = stationary_variance * -math.expm1(-2 * t)
    sq = np.sum((y - math.exp(-t) * x) ** 2, axis=1)
    out = (2 * math.pi * spread) ** (-x.size / 2) * np.exp(-sq / (2 * spread))
    return float(out[0]) if single else out


def _p(z: complex, x: tuple, y: tuple) -> complex:
    denom = 1 - cmath.exp(-2 * z)
    shrink = cmath.exp(-z)
    sq = sum((yi - shrink * xi) ** 2 for xi, yi in zip(x, y))
    return (2 * math.pi * denom) ** (-len(x) / 2) * cmath.exp(-sq / (2 * denom))


def complex_kernel(z: complex, x, y) -> complex:
    """p(z, x, y) on the principal branch; equals mehler_kernel on the real axis."""
    z = complex(z)
    if z.real < 0:
        raise MisuseError(f"complex_kernel needs Re z >= 0, got {z}")
    if abs(1 - cmath.exp(-2 * z)) < 1e-14:
        raise SingularityError(f"p(z, x, y) is singular at z = {z}")
    return _p(z, tuple(_vec(x)), tuple(_vec(y)))


# --- Subordination ---


def subordination_identity(n: float, t: float) -> float:
    """(4πt)^{-1/2} ∫_ℝ e^{-s²/4t} cos(ns) ds by quadrature on [0, S]; equals e^{-n²t}."""
    if not t > 0:
        raise MisuseError(f"t must be > 0, got {t}")
    # e^{-s²/4t} < e^{-GAUSS_CUTOFF} past S
    s_max = math.sqrt(4 * t * GAUSS_CUTOFF)
    gauss = lambda s: math.exp(-s * s / (4 * t))
    if n == 0:
        half, _ = quad(gauss, 0, s_max, epsabs=1e-14, epsrel=1e-12, limit=PANEL_LIMIT)
    else:
        half, _ = quad(gauss, 0, s_max, weight="cos", wvar=abs(n), epsabs=1e-14, epsrel=1e-12, limit=PANEL_LIMIT)
    return 2 * half / math.sqrt(4 * math.pi * t)


def _panel_edges(s_max: float, eps: float) -> np.ndarray:
    edges = {0.0, s_max}
    for k in range(int(s_max // math.pi) + 1):
        center = k * math.pi
        offset = eps
        while offset < math.pi / 2:
            for edge in (center - offset, center + offset):
                if 0 < edge < s_max:
                    edges.add(edge)
            offset *= 2
        if 0 < center < s_max:
            edges.add(center)
    return np.array(sorted(edges))


def _regularized(t: float, x: tuple, y: tuple, eps: float, s_max: float) -> tuple[float, float]:
    scale = 1 / math.sqrt(4 * math.pi * t)

    def integrand(s):
        return math.exp(-s * s / (4 * t)) * 2 * _p(complex(eps, s), x, y).real

    total, error = 0.0, 0.0
    edges = _panel_edges(s_max, eps)
    for a, b in zip(edges[:-1], edges[1:]):
        value, err = quad(integrand, a, b, limit=PANEL_LIMIT, epsabs=1e-13, epsrel=1e-10)
        total += value
        error += err
    return scale * total, scale * error


def _tail_bound(t: float, x: tuple, y: tuple, eps: float, s_max: float) -> float:
    # |p| sampled over one period past s_max, including the points kπ
    first = math.ceil(s_max / math.pi)
    samples = np.concatenate(
        [np.linspace(s_max, s_max + 2 * math.pi, 257), math.pi * np.arange(first, first + 3)]
    )
    peak = max(abs(_p(complex(eps / 2, s), x, y)) for s in samples)
    return peak * float(erfc(s_max / (2 * math.sqrt(t))))


def biou_kernel_subordination(
    t: float,
    x,
    y,
    eps: float = DEFAULT_EPS,
    s_max: float | None = None,
    tolerance: float = 0.05,
) -> KernelValue:
    """k(t, x, y) by regularized subordination quadrature with Richardson extrapolation in ε."""
    if not t > 0:
        raise MisuseError(f"Subordination needs t > 0, got {t}")
    if not eps > 0:
        raise MisuseError(f"Regularization ε must be > 0, got {eps}")
    s_max = max(8 * math.sqrt(t), 4 * math.pi) if s_max is None else float(s_max)
    if s_max < 8 * math.sqrt(t):
        raise MisuseError(f"s_max={s_max} is below 8·sqrt(t)={8 * math.sqrt(t):.4g}")
    xv, yv = tuple(_vec(x)), tuple(_vec(y))
    if len(xv) != len(yv):
        raise MisuseError(f"x and y dimensions differ: {len(xv)} vs {len(yv)}")

    coarse, err_coarse = _regularized(t, xv, yv, eps, s_max)
    fine, err_fine = _regularized(t, xv, yv, eps / 2, s_max)
    refinement = abs(fine - coarse)
    if refinement > tolerance:
        raise ConvergenceError(
            f"ε-refinement disagreement {refinement:.3e} exceeds tolerance {tolerance:g} at t={t}"
        )
    value = 2 * fine - coarse
    error = refinement + _tail_bound(t, xv, yv, eps, s_max) + 2 * err_fine + err_coarse
    logger.debug("subordination t=%g x=%s y=%s value=%.10g err=%.2e", t, xv, yv, value, error)
    return KernelValue(
        value=value,
        method="subordination",
        error_estimate=error,
        parameters={"t": t, "x": list(xv), "y": list(yv), "eps": eps, "s_max": s_max},
    )


# --- Spectral oracle ---


def default_kernel_degree(t: float, cap: int = 200) -> int:
    """Smallest d with e^{-t(d+1)²} below 1e-16, capped."""
    return int(min(cap, max(4, math.ceil(math.sqrt(37.0 / t)))))


def _eigen_weights(dimension: int, max_degree: int, t: float) -> np.ndarray:
    orders = np.array([sum(a) for a in multi_indices(dimension, max_degree)], dtype=float)
    return np.exp(-t * orders**2)


def spectral_tail(t: float, x, y, max_degree: int) -> float:
    """Bound on the omitted shells |α| > d using |Ĥ_n(x)| <= 1.0865 e^{x²/4}."""
    x, y = _vec(x), _vec(y)
    n = x.size
    d = max_degree + 1
    first = math.exp(-t * d * d) * comb(d + n - 1, n - 1)
    ratio = math.exp(-t * (2 * d + 1)) * (d + n) / (d + 1)
    if ratio >= 1:
        return math.inf
    envelope = CRAMER ** (2 * n) * math.exp((x @ x + y @ y) / 4) * float(gaussian_density(y)[0])
    return first / (1 - ratio) * envelope


def kernel_matrix(t: float, xs, ys, max_degree: int) -> np.ndarray:
    """K[i, j] = Σ_{|α| <= d} e^{-t|α|²} Ĥ_α(x_i) Ĥ_α(y_j) μ(y_j)."""
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    ys = np.atleast_2d(np.asarray(ys, dtype=float))
    if xs.shape[1] != ys.shape[1]:
        raise MisuseError(f"Point dimensions differ: {xs.shape[1]} vs {ys.shape[1]}")
    dimension = xs.shape[1]
    weights = _eigen_weights(dimension, max_degree, t)
    bx = basis_matrix(dimension, max_degree, xs)
    by = basis_matrix(dimension, max_degree, ys)
    return (bx.T * weights) @ by * gaussian_density(ys)[None, :]


def biou_kernel_spectral(t: float, x, y, max_degree: int | None = None) -> KernelValue:
    """Truncated eigen-expansion of k(t, x, y), with a tail bound from the first omitted shell."""
    if not t > 0:
        raise MisuseError(f"Spectral kernel needs t > 0, got {t}")
    x, y = _vec(x), _vec(y)
    degree = default_kernel_degree(t) if max_degree is None else max_degree
    value = float(kernel_matrix(t, x.reshape(1, -1), y.reshape(1, -1), degree)[0, 0])
    return KernelValue(
        value=value,
        method="spectral_sum",
        error_estimate=spectral_tail(t, x, y, degree),
        parameters={"t": t, "x": x.tolist(), "y": y.tolist(), "max_degree": degree, "shell": degree + 1},
    )


def lebesgue_rule_from_hermite(rule) -> tuple[np.ndarray, np.ndarray]:
    """Turn a Gauss–Hermite rule for dμ into one for Lebesgue dy."""
    nodes = rule.nodes
    return nodes, rule.weights / gaussian_density(nodes)


def apply_biou_by_kernel(f, t: float, x, quadrature, max_degree: int | None = None):
    """
    e^{-tA}f(x) = ∫ k(t, x, y) f(y) dy by Lebesgue quadrature.

    `quadrature` is (points (P, N), weights (P,)) against dy; `f` maps points
    to values. `x` may be one point or an array of points.
    """
    if not t > 0:
        raise MisuseError(f"Kernel application needs t > 0, got {t}")
    points, weights = quadrature
    weights = np.asarray(weights, dtype=float).reshape(-1)
    points = np.asarray(points, dtype=float).reshape(weights.size, -1)
    dimension = points.shape[1]
    xs = np.asarray(x, dtype=float)
    single = xs.ndim == 0 or (xs.ndim == 1 and xs.size == dimension)
    xs = xs.reshape(-1, dimension)
    degree = default_kernel_degree(t) if max_degree is None else max_degree
    values = np.asarray(f(points), dtype=float).reshape(-1)
    out = kernel_matrix(t, xs, points, degree) @ (weights * values)
    return float(out[0]) if single else out


def chapman_kolmogorov_residual(t1: float, t2: float, x, y, max_degree: int = 40, nodes: int = 80) -> float:
    """|∫ k(t1,x,z) k(t2,z,y) dz - k(t1+t2,x,y)| via Gauss–Hermite in z."""
    x, y = _vec(x), _vec(y)
    rule = quadrature_rule(x.size, nodes)
    points, weights = lebesgue_rule_from_hermite(rule)
    left = kernel_matrix(t1, x.reshape(1, -1), points, max_degree)[0]
    right = kernel_matrix(t2, points, y.reshape(1, -1), max_degree)[:, 0]
    combined = float(np.sum(weights * left * right))
    direct = float(kernel_matrix(t1 + t2, x.reshape(1, -1), y.reshape(1, -1), max_degree)[0, 0])
    return abs(combined - direct)


def kernel_moment(t: float, x: float, h, stationary_variance: float = 1.0, half_width: float = 14.0) -> float:
    """∫ mehler_kernel(t, x, y) h(y) dy in N = 1 by Gauss–Legendre on a wide interval."""
    points, weights = box_rule([(x * math.exp(-t) - half_width, x * math.exp(-t) + half_width)], 600)
    kernel = mehler_kernel(t, [x], points, stationary_variance)
    return float(np.sum(weights * kernel * np.asarray(h(points[:, 0]), dtype=float)))


# --- Scans ---


def kernel_scan(ts, xs, ys, methods=("subordination", "spectral")) -> list[dict]:
    """Evaluate k(t, x, y) on a grid with each method; rows carry an agreement flag."""
    allowed = {"subordination", "spectral"}
    if not set(methods) <= allowed:
        raise MisuseError(f"Unknown kernel methods: {sorted(set(methods) - allowed)}")
    rows = []
    for t in ts:
        for x in xs:
            for y in ys:
                row = {"t": float(t), "x": float(x), "y": float(y)}
                results = {}
                if "subordination" in methods:
                    results["subordination"] = biou_kernel_subordination(t, x, y)
                if "spectral" in methods:
                    results["spectral"] = biou_kernel_spectral(t, x, y)
                for name, kv in results.items():
                    row[f"{name}_value"] = kv.value
                    row[f"{name}_error"] = kv.error_estimate
                if len(results) == 2:
                    diff = abs(results["subordination"].value - results["spectral"].value)
                    budget = results["subordination"].error_estimate + results["spectral"].error_estimate
                    row["difference"] = diff
                    row["agreement"] = bool(diff <= budget)
                rows.append(row)
    return rows


def sign_change_scan(ts, xs, ys, max_degree: int | None = None) -> dict | None:
    """Most negative spectral k(t, x, y) on the grid, or None if all values are >= 0."""
    worst = None
    xs_arr = np.asarray(xs, dtype=float).reshape(-1, 1)
    ys_arr = np.asarray(ys, dtype=float).reshape(-1, 1)
    for t in ts:
        degree = default_kernel_degree(t) if max_degree is None else max_degree
        values = kernel_matrix(t, xs_arr, ys_arr, degree)
        i, j = np.unravel_index(np.argmin(values), values.shape)
        if values[i, j] < 0 and (worst is None or values[i, j] < worst["value"]):
            worst = {"t": float(t), "x": float(xs_arr[i, 0]), "y": float(ys_arr[j, 0]), "value": float(values[i, j])}
    if worst is not None:
        logger.info("Kernel sign change at t=%g x=%g y=%g: %.3e", worst["t"], worst["x"], worst["y"], worst["value"])
    return worst
