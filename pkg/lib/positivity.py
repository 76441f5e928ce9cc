"""
Local eventual positivity scans for e^{-tA} in the Gaussian case.

The datum χ_K·f is evolved either spectrally (projected onto Hermite modes
up to max_degree) or through the spectral kernel with Gauss–Legendre
quadrature over K. The kernel path does not see Gibbs oscillation from the
indicator. Minima are taken over a uniform sample grid of K.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from lib.artifacts import ordered_map
from lib.errors import InputRejected, MisuseError
from lib.hermite import (
    box_rule,
    gaussian_density,
    project,
    project_on_box,
    quadrature_rule,
    synthesize,
)
from lib.kernels import apply_biou_by_kernel
from lib.semigroup import evolve_A

logger = logging.getLogger(__name__)

DEFAULT_DEGREE = 40
SAMPLES_PER_AXIS = 201
PATHS = ("spectral", "kernel")


@dataclass
class PositivityScan:
    K: list
    f: str
    path: str
    time_grid: list[float]
    minima: list[float]
    argmins: list[list[float]]
    t0: float | None
    floor: float
    negative_witness: dict | None = None
    findings: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "K": [list(side) for side in self.K],
            "f": self.f,
            "path": self.path,
            "time_grid": self.time_grid,
            "minima": self.minima,
            "t0": self.t0,
            "floor": self.floor,
            "negative_witness": self.negative_witness,
            "findings": self.findings,
        }

    def rows(self) -> list[list]:
        return [[t, m, *x] for t, m, x in zip(self.time_grid, self.minima, self.argmins)]


def sample_grid(K, samples: int = SAMPLES_PER_AXIS) -> np.ndarray:
    axes = [np.linspace(lo, hi, samples) for lo, hi in K]
    grids = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.reshape(-1) for g in grids], axis=1)


def _check_box(K) -> list[tuple[float, float]]:
    K = [(float(lo), float(hi)) for lo, hi in K]
    if not K or any(not hi > lo for lo, hi in K):
        raise MisuseError(f"K must be a non-degenerate box, got {K}")
    return K


def asymptotic_floor(f: Callable, K, nodes_per_axis: int = 200) -> float:
    """∫ χ_K f dμ, the limit of e^{-tA}(χ_K f) as t → ∞."""
    points, weights = box_rule(_check_box(K), nodes_per_axis)
    values = np.asarray(f(points), dtype=float).reshape(-1)
    return float(np.sum(weights * gaussian_density(points) * values))


def validate_datum(f: Callable, K, samples: int = SAMPLES_PER_AXIS) -> float:
    """Reject f unless f >= 0 on K with positive mass; returns the mass."""
    K = _check_box(K)
    points = np.concatenate([sample_grid(K, samples), box_rule(K, 64)[0]])
    values = np.asarray(f(points), dtype=float).reshape(-1)
    if np.any(~np.isfinite(values)) or np.any(values < 0):
        worst = int(np.argmin(np.nan_to_num(values, nan=-np.inf)))
        raise InputRejected(f"Datum is negative or undefined on K at x={points[worst].tolist()}")
    mass = asymptotic_floor(f, K)
    if not mass > 0:
        raise InputRejected(f"Datum has no mass on K (∫χ_K f dμ = {mass:g})")
    return mass


def first_positive_time(time_grid, minima) -> float | None:
    """First grid time after which every sampled minimum is positive."""
    t0 = None
    for t, value in zip(reversed(list(time_grid)), reversed(list(minima))):
        if value > 0:
            t0 = t
        else:
            break
    return t0


def monotone_tail_findings(scan: PositivityScan) -> list[dict]:
    """Drops below floor/4 after minima have exceeded floor/2."""
    findings, armed = [], False
    for t, value in zip(scan.time_grid, scan.minima):
        if value > scan.floor / 2:
            armed = True
        elif armed and value < scan.floor / 4:
            findings.append({"t": t, "minimum": value, "floor": scan.floor})
    for item in findings:
        logger.warning("Monotone tail broken at t=%g: min=%.4g floor=%.4g", item["t"], item["minimum"], item["floor"])
    return findings


def positivity_scan(
    f: Callable,
    K,
    time_grid,
    samples: int = SAMPLES_PER_AXIS,
    path: str = "spectral",
    max_degree: int = DEFAULT_DEGREE,
    label: str = "f",
) -> PositivityScan:
    """Evolve χ_K·f and record the minimum over sampled K at each time."""
    if path not in PATHS:
        raise MisuseError(f"Unknown path {path!r}; expected one of {PATHS}")
    K = _check_box(K)
    times = [float(t) for t in time_grid]
    if not times or any(t <= 0 for t in times) or any(b <= a for a, b in zip(times, times[1:])):
        raise MisuseError("time_grid must be increasing and positive")
    floor = validate_datum(f, K, samples)
    points = sample_grid(K, samples)

    if path == "spectral":
        datum = project_on_box(f, K, max_degree)
        evaluate = lambda t: synthesize(evolve_A(datum, t).state, points)
    else:
        quadrature = box_rule(K, 200)
        values_on = lambda y: np.asarray(f(y), dtype=float).reshape(-1)
        evaluate = lambda t: apply_biou_by_kernel(values_on, t, points, quadrature)

    def scan_time(t):
        values = np.asarray(evaluate(t), dtype=float)
        i = int(np.argmin(values))
        return float(values[i]), points[i].tolist()

    results = ordered_map(scan_time, times)
    minima = [m for m, _ in results]
    argmins = [x for _, x in results]
    witness = None
    worst = int(np.argmin(minima))
    if minima[worst] < 0:
        witness = {"t": times[worst], "x": argmins[worst], "value": minima[worst]}

    scan = PositivityScan(
        K=K,
        f=label,
        path=path,
        time_grid=times,
        minima=minima,
        argmins=argmins,
        t0=first_positive_time(times, minima),
        floor=floor,
        negative_witness=witness,
    )
    scan.findings = monotone_tail_findings(scan)
    logger.info("Positivity scan (%s, %s): t0=%s floor=%.7f", path, label, scan.t0, floor)
    return scan


def negativity_search(
    f: Callable,
    t_grid,
    x_grid,
    support=None,
    max_degree: int = DEFAULT_DEGREE,
) -> dict | None:
    """
    Most negative e^{-tA}f(x) over the grids, or None.

    With a support box the kernel path integrates f over it; without one f is
    taken as global and projected by Gauss–Hermite quadrature.
    """
    t_grid = [float(t) for t in t_grid]
    x_points = np.asarray(x_grid, dtype=float)
    if support is not None:
        K = _check_box(support)
        x_points = x_points.reshape(-1, len(K))
        validate_datum(f, K)
        quadrature = box_rule(K, 200)
        evaluate = lambda t: apply_biou_by_kernel(f, t, x_points, quadrature)
    else:
        x_points = x_points.reshape(len(x_points), -1)
        dimension = x_points.shape[1]
        datum = project(f, dimension, max_degree, quadrature_rule(dimension, max_degree + 20))
        evaluate = lambda t: synthesize(evolve_A(datum, t).state, x_points)

    worst = None
    for t, values in zip(t_grid, ordered_map(lambda t: np.asarray(evaluate(t), dtype=float), t_grid)):
        i = int(np.argmin(values))
        # values within rounding of zero are not a sign change
        if values[i] < -1e-12 and (worst is None or values[i] < worst["value"]):
            worst = {"t": float(t), "x": x_points[i].tolist(), "value": float(values[i])}
    if worst is not None:
        logger.warning("Negative value at t=%g x=%s: %.3e", worst["t"], worst["x"], worst["value"])
    else:
        logger.info("No negative values found on %d times", len(t_grid))
    return worst


@dataclass
class UniformScan:
    common_t0: float | None
    scans: list[PositivityScan]

    def to_dict(self) -> dict:
        return {"common_t0": self.common_t0, "scans": [s.to_dict() for s in self.scans]}


def uniform_positivity_scan(K, family, time_grid, **kwargs) -> UniformScan:
    """
    Scan each datum normalized to ‖f‖_{L¹_μ(K)} = 1; the common t0 is the
    largest individual t0, or None if any datum never settles.
    """
    scans = []
    for i, f in enumerate(family):
        mass = validate_datum(f, K)
        normalized = lambda y, f=f, mass=mass: np.asarray(f(y), dtype=float) / mass
        scans.append(positivity_scan(normalized, K, time_grid, label=f"family[{i}]", **kwargs))
    if not scans or any(s.t0 is None for s in scans):
        return UniformScan(None, scans)
    return UniformScan(max(s.t0 for s in scans), scans)


def indicator(K) -> Callable:
    """f ≡ 1, so that χ_K f = χ_K."""
    K = _check_box(K)
    return lambda y: np.ones(np.atleast_2d(y).shape[0])


def bump(center: float, width: float) -> Callable:
    """exp(-(x - center)²/(2 width²)) on the first axis."""
    if not width > 0:
        raise MisuseError(f"Bump width must be > 0, got {width}")
    return lambda y: np.exp(-((np.atleast_2d(y)[:, 0] - center) ** 2) / (2 * width**2))
