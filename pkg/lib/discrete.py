"""
Finite-difference Kolmogorov operators for general radial measures.

Flux form on a uniform grid:

    (L_h u)_i = [w_{i+1/2}(u_{i+1} - u_i) - w_{i-1/2}(u_i - u_{i-1})] / (w_i h²)

with zero flux at both ends. On the line w = μ; in the radial coordinate
w = μ r^{N-1} on cell centres r_i = (i + 1/2) h, which gives the radial part
of L acting on radial functions. L_h is symmetric in ⟨u, v⟩_h = Σ u_i v_i w_i h
and kills constants exactly. The discrete A is L_h², so e^{-tA_h} damps
eigenmodes by e^{-λ_j² t}.
"""

import logging
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.linalg import LinAlgError, eigh_tridiagonal
from scipy.sparse import diags

from lib.artifacts import ordered_map
from lib.errors import ConvergenceError, InputRejected, MisuseError
from lib.measures import Measure
from lib.positivity import PositivityScan, first_positive_time, monotone_tail_findings

logger = logging.getLogger(__name__)

TAIL_TOLERANCE = 1e-12
# nodes with μ/max μ below this are cut so that w h² and 1/√w stay in double range
UNDERFLOW_FLOOR = 1e-250
# families decaying like e^{-c|x|^α}, α > 1
DECAYING_FAMILIES = ("gaussian", "power", "squared_power")


@dataclass(eq=False)
class DiscreteOperator:
    kind: str
    measure: dict
    grid: np.ndarray
    h: float
    weights: np.ndarray
    face_weights: np.ndarray

    @cached_property
    def diagonal(self) -> np.ndarray:
        left = np.concatenate([[0.0], self.face_weights])
        right = np.concatenate([self.face_weights, [0.0]])
        return -(left + right) / (self.weights * self.h**2)

    @cached_property
    def matrix(self):
        """L_h as a sparse tridiagonal matrix."""
        upper = self.face_weights / (self.weights[:-1] * self.h**2)
        lower = self.face_weights / (self.weights[1:] * self.h**2)
        return diags([lower, self.diagonal, upper], [-1, 0, 1], format="csr")

    @cached_property
    def symmetric_off_diagonal(self) -> np.ndarray:
        """Off-diagonal of W^{1/2} L_h W^{-1/2}."""
        root = np.sqrt(self.weights)
        return self.face_weights / (self.h**2 * root[:-1] * root[1:])

    @cached_property
    def eigensystem(self) -> tuple[np.ndarray, np.ndarray]:
        """All eigenpairs of -L_h, eigenvectors orthonormal in ⟨·,·⟩_h."""
        return _eigenpairs(self, None)

    def apply(self, u) -> np.ndarray:
        return self.matrix @ np.asarray(u, dtype=float)

    def inner(self, u, v) -> float:
        return float(np.sum(np.asarray(u) * np.asarray(v) * self.weights) * self.h)

    def norm(self, u) -> float:
        return float(np.sqrt(self.inner(u, u)))

    def mass(self, u) -> float:
        """Σ u_i w_i h."""
        return self.inner(u, np.ones_like(self.grid))

    def mean(self, u) -> float:
        return self.mass(u) / self.mass(np.ones_like(self.grid))


def _eigenpairs(op: DiscreteOperator, k: int | None):
    select = {"select": "a"} if k is None else {"select": "i", "select_range": (0, k - 1)}
    try:
        values, vectors = eigh_tridiagonal(-op.diagonal, -op.symmetric_off_diagonal, **select)
    except LinAlgError as e:
        raise ConvergenceError(f"Tridiagonal eigensolver failed: {e}") from e
    vectors = vectors / np.sqrt(op.weights * op.h)[:, None]
    # constant mode positive
    if vectors[:, 0].sum() < 0:
        vectors[:, 0] = -vectors[:, 0]
    return values, vectors


def _check_resolution(m: Measure, R: float, h: float, density_at, tail_tolerance: float) -> None:
    if not (R > 0 and h > 0):
        raise MisuseError(f"R and h must be positive, got R={R}, h={h}")
    if h > R / 100:
        raise MisuseError(f"h={h} is too coarse for R={R}; need h <= R/100")
    peak = float(np.max(density_at))
    edge = float(m.density_radial(R))
    if edge >= tail_tolerance * peak:
        raise MisuseError(
            f"μ(R)={edge:.3e} is not below {tail_tolerance:g}·max μ at R={R}; enlarge R"
        )


def _resolved(m: Measure, radii) -> np.ndarray:
    """Mask of nodes whose density stays above UNDERFLOW_FLOOR relative to the peak."""
    log_density = np.asarray(m.log_density_radial(radii), dtype=float)
    return log_density - np.max(log_density) >= math.log(UNDERFLOW_FLOOR)


def validate_operator(op: DiscreteOperator) -> DiscreteOperator:
    """Reject operators with vanishing weights or non-finite coefficients."""
    family = op.measure["family"]
    if op.grid.size < 3 or not (np.all(op.weights > 0) and np.all(op.face_weights > 0)):
        raise MisuseError(f"{op.kind} operator for {family} has vanishing weights")
    if not (np.all(np.isfinite(op.diagonal)) and np.all(np.isfinite(op.symmetric_off_diagonal))):
        raise MisuseError(f"{op.kind} operator for {family} has non-finite coefficients")
    return op


def build_discrete_L(m: Measure, R: float, h: float, tail_tolerance: float = TAIL_TOLERANCE) -> DiscreteOperator:
    """
    Flux-form L_h on x_i = -R + i h for a one-dimensional measure.

    Nodes where μ underflows relative to its peak are cut; the zero-flux
    condition then holds at the last resolved node.
    """
    if m.dimension != 1:
        raise MisuseError(f"Line operator needs N = 1; use build_radial_L for N={m.dimension}")
    count = int(round(2 * R / h))
    grid = -R + h * np.arange(count + 1)
    _check_resolution(m, R, h, m.density_radial(np.abs(grid)), tail_tolerance)
    kept = np.flatnonzero(_resolved(m, np.abs(grid)))
    grid = grid[kept[0] : kept[-1] + 1]
    if grid.size < count + 1:
        logger.debug("Cut %d underflowing nodes; line grid ends at |x| = %g", count + 1 - grid.size, grid[-1])
    weights = m.density_radial(np.abs(grid))
    faces = m.density_radial(np.abs(grid[:-1] + h / 2))
    op = DiscreteOperator("line", m.describe(), grid, float(h), weights, faces)
    logger.debug("Built line operator for %s: %d nodes, h=%g", m.family, grid.size, h)
    return validate_operator(op)


def build_radial_L(m: Measure, R: float, h: float, tail_tolerance: float = TAIL_TOLERANCE) -> DiscreteOperator:
    """Flux-form radial part of L on cell centres r_i = (i + 1/2) h with weight μ r^{N-1}."""
    count = int(round(R / h))
    grid = h * (np.arange(count) + 0.5)
    _check_resolution(m, R, h, m.density_radial(grid), tail_tolerance)
    grid = grid[: np.flatnonzero(_resolved(m, grid))[-1] + 1]
    if grid.size < count:
        logger.debug("Cut %d underflowing cells; radial grid ends at r = %g", count - grid.size, grid[-1])
    jacobian = lambda r: r ** (m.dimension - 1)
    weights = m.density_radial(grid) * jacobian(grid)
    face_r = h * np.arange(1, grid.size)
    faces = m.density_radial(face_r) * jacobian(face_r)
    op = DiscreteOperator("radial", m.describe(), grid, float(h), weights, faces)
    logger.debug("Built radial operator for %s N=%d: %d cells, h=%g", m.family, m.dimension, grid.size, h)
    return validate_operator(op)


def spectrum(op: DiscreteOperator, k: int) -> tuple[np.ndarray, np.ndarray]:
    """k smallest eigenvalues of -L_h (ascending) with μ-orthonormal eigenvectors as columns."""
    if k < 2:
        raise MisuseError(f"spectrum needs k >= 2, got {k}")
    if k > op.grid.size:
        raise MisuseError(f"k={k} exceeds the {op.grid.size} grid nodes")
    return _eigenpairs(op, k)


def spectral_gap(op: DiscreteOperator) -> float:
    values, _ = spectrum(op, 2)
    return float(values[1] - values[0])


def evolve_discrete_A(op: DiscreteOperator, f, t: float) -> np.ndarray:
    """e^{-t L_h²} f through the eigenbasis of L_h."""
    if not t >= 0:
        raise MisuseError(f"Time must be >= 0, got {t}")
    values, vectors = op.eigensystem
    f = np.asarray(f, dtype=float)
    coefficients = vectors.T @ (f * op.weights * op.h)
    return vectors @ (np.exp(-(values**2) * t) * coefficients)


def discrete_ibp_residual(op: DiscreteOperator, u) -> float:
    """|⟨-L_h u, u⟩_h - Σ w_{i+1/2} ((u_{i+1} - u_i)/h)² h|."""
    u = np.asarray(u, dtype=float)
    form = float(np.sum(op.face_weights * (np.diff(u) / op.h) ** 2) * op.h)
    return abs(-op.inner(op.apply(u), u) - form)


def symmetry_residual(op: DiscreteOperator, u, v) -> float:
    return abs(op.inner(op.apply(u), v) - op.inner(u, op.apply(v)))


def eigenvalue_convergence(m: Measure, hs, R: float, index: int = 2, reference: float | None = None) -> list[dict]:
    """Eigenvalue `index` of -L_h against a reference as h shrinks; the Gaussian reference is j on the line and 2j radially."""
    if reference is None:
        if m.family != "gaussian":
            raise MisuseError("A reference eigenvalue is required for non-Gaussian measures")
        reference = float(index) if m.dimension == 1 else 2.0 * index
    build = build_discrete_L if m.dimension == 1 else build_radial_L
    rows = []
    for h in hs:
        values, _ = spectrum(build(m, R, h), index + 1)
        rows.append({"h": float(h), "eigenvalue": float(values[index]), "error": abs(float(values[index]) - reference)})
    for prev, cur in zip(rows, rows[1:]):
        cur["ratio"] = prev["error"] / cur["error"] if cur["error"] > 0 else float("inf")
    return rows


def general_positivity_scan(
    m: Measure,
    f,
    K: tuple[float, float],
    time_grid,
    R: float,
    h: float,
    label: str = "f",
) -> PositivityScan:
    """Discrete analogue of the positivity scan for a one-dimensional decaying measure."""
    if m.family not in DECAYING_FAMILIES or (m.family == "power" and m.params["m"] < 2):
        raise MisuseError(f"Discrete positivity needs e^{{-c|x|^α}} decay with α > 1, got {m.family} {m.params}")
    lo, hi = float(K[0]), float(K[1])
    op = build_discrete_L(m, R, h)
    inside = (op.grid >= lo - 1e-12) & (op.grid <= hi + 1e-12)
    values = np.asarray(f(op.grid.reshape(-1, 1)), dtype=float).reshape(-1)
    if np.any(values[inside] < 0) or not np.any(values[inside] > 0):
        raise InputRejected("Datum must be >= 0 on K with positive mass")
    datum = np.where(inside, values, 0.0)
    floor = op.mass(datum)
    times = [float(t) for t in time_grid]
    _ = op.eigensystem  # decompose once before the pool

    def scan_time(t):
        evolved = evolve_discrete_A(op, datum, t)[inside]
        i = int(np.argmin(evolved))
        return float(evolved[i]), [float(op.grid[inside][i])]

    results = ordered_map(scan_time, times)
    minima = [v for v, _ in results]
    argmins = [x for _, x in results]
    worst = int(np.argmin(minima))
    witness = {"t": times[worst], "x": argmins[worst], "value": minima[worst]} if minima[worst] < 0 else None
    scan = PositivityScan(
        K=[(lo, hi)],
        f=label,
        path="discrete",
        time_grid=times,
        minima=minima,
        argmins=argmins,
        t0=first_positive_time(times, minima),
        floor=floor,
        negative_witness=witness,
    )
    scan.findings = monotone_tail_findings(scan)
    logger.info("Discrete positivity (%s): t0=%s floor=%.7f", m.family, scan.t0, floor)
    return scan
