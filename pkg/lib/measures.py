"""
Measure descriptors and hypothesis auditors.

Every registered measure is radial: μ(x) = κ e^{ψ(|x|)} with drift
b = ∇μ/μ = g(r) x. Writing q = g'/r and w = q'/r, all derivatives the
operators need follow in closed form:

    D_j b_i   = g δ_ij + q x_i x_j
    D_jk b_i  = q (x_i δ_jk + x_j δ_ik + x_k δ_ij) + w x_i x_j x_k
    Δμ/μ      = N g + q r² + g² r²

Families: gaussian, power (κ e^{-r^m}), squared_power (K e^{-(c1 + c2 r²)^m})
and rational (C (1 + r^α)/(1 + r^β)).
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import quad

from lib.errors import ConfigError, MisuseError, ParameterDomainError, SingularityError
from lib.radial import radial_rule, sphere_area

logger = logging.getLogger(__name__)

AUDIT_DECADES = (-6, 3)
AUDIT_PER_DECADE = 200
R0_CANDIDATES = (0.5, 0.25, 0.1, 0.05, 0.01)
EPS_LIST = (1.0, 0.1, 0.01)


def _mono(coef: float, r, exponent: float) -> np.ndarray:
    """coef·r^exponent with 0·r^{negative} read as 0."""
    r = np.asarray(r, dtype=float)
    if coef == 0:
        return np.zeros_like(r)
    with np.errstate(divide="ignore", invalid="ignore"):
        return coef * r**exponent


def _is_even_integer(value: float) -> bool:
    return float(value).is_integer() and int(value) % 2 == 0


# --- Measure ---


@dataclass(frozen=True, eq=False)
class Measure:
    family: str
    dimension: int
    params: dict
    log_profile: Callable
    drift_profile: Callable
    normalization: float
    singular_at_origin: bool
    radial_profile: bool = True

    def describe(self) -> dict:
        return {"family": self.family, "dimension": self.dimension, "params": dict(self.params)}

    # radial views

    def radial_drift_terms(self, r):
        """(g, q, w) at radii r."""
        r = np.asarray(r, dtype=float)
        if self.singular_at_origin and np.any(r == 0):
            raise SingularityError(f"{self.family} measure is singular at the origin")
        g, q, w = self.drift_profile(r)
        return (
            np.broadcast_to(g, r.shape).astype(float),
            np.broadcast_to(q, r.shape).astype(float),
            np.broadcast_to(w, r.shape).astype(float),
        )

    def density_radial(self, r) -> np.ndarray:
        with np.errstate(over="ignore", under="ignore"):
            return self.normalization * np.exp(self.log_profile(np.asarray(r, dtype=float)))

    def log_density_radial(self, r) -> np.ndarray:
        return math.log(self.normalization) + self.log_profile(np.asarray(r, dtype=float))

    def laplacian_ratio_radial(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        g, q, _ = self.radial_drift_terms(r)
        return self.dimension * g + q * r**2 + g**2 * r**2

    def potential_radial(self, r) -> np.ndarray:
        """U = ¼|b|² - ½Δμ/μ = -¼g²r² - ½Ng - ½qr²."""
        r = np.asarray(r, dtype=float)
        g, q, _ = self.radial_drift_terms(r)
        return -0.25 * g**2 * r**2 - 0.5 * self.dimension * g - 0.5 * q * r**2

    # pointwise views (x of shape (N,) or (P, N))

    def _points(self, x):
        pts = np.asarray(x, dtype=float)
        single = pts.ndim == 1
        pts = np.atleast_2d(pts)
        if pts.shape[1] != self.dimension:
            raise MisuseError(f"Point dimension {pts.shape[1]} != {self.dimension}")
        return pts, np.linalg.norm(pts, axis=1), single

    def density(self, x):
        _, r, single = self._points(x)
        out = self.density_radial(r)
        return float(out[0]) if single else out

    def drift(self, x):
        pts, r, single = self._points(x)
        g, _, _ = self.radial_drift_terms(r)
        out = g[:, None] * pts
        return out[0] if single else out

    def laplacian_ratio(self, x):
        _, r, single = self._points(x)
        out = self.laplacian_ratio_radial(r)
        return float(out[0]) if single else out

    def potential(self, x):
        _, r, single = self._points(x)
        out = self.potential_radial(r)
        return float(out[0]) if single else out

    def drift_jacobian(self, x):
        """J[i, j] = D_i(D_jμ/μ)."""
        pts, r, single = self._points(x)
        g, q, _ = self.radial_drift_terms(r)
        eye = np.eye(self.dimension)
        out = g[:, None, None] * eye + q[:, None, None] * pts[:, :, None] * pts[:, None, :]
        return out[0] if single else out

    def drift_hessian(self, x):
        """H[i, j, k] = D_ij(D_kμ/μ), symmetric in all indices."""
        pts, r, single = self._points(x)
        _, q, w = self.radial_drift_terms(r)
        eye = np.eye(self.dimension)
        sym = (
            np.einsum("pi,jk->pijk", pts, eye)
            + np.einsum("pj,ik->pijk", pts, eye)
            + np.einsum("pk,ij->pijk", pts, eye)
        )
        cube = np.einsum("pi,pj,pk->pijk", pts, pts, pts)
        out = q[:, None, None, None] * sym + w[:, None, None, None] * cube
        return out[0] if single else out


def compute_U(m: Measure, x):
    """U(x) = ¼|∇μ/μ|² - ½Δμ/μ."""
    return m.potential(x)


def _normalize(log_profile: Callable, dimension: int) -> float:
    integrand = lambda r: r ** (dimension - 1) * math.exp(log_profile(np.float64(r)))
    inner, _ = quad(integrand, 0.0, 1.0, limit=200, epsabs=0.0, epsrel=1e-13)
    outer, _ = quad(integrand, 1.0, np.inf, limit=400, epsabs=0.0, epsrel=1e-13)
    return 1.0 / (sphere_area(dimension) * (inner + outer))


def _check_dimension(dimension: int) -> None:
    if int(dimension) != dimension or dimension < 1:
        raise ParameterDomainError(f"Dimension must be a positive integer, got {dimension}")


# --- Families ---


def gaussian(dimension: int) -> Measure:
    """Standard Gaussian (2π)^{-N/2} e^{-|x|²/2}: b = -x."""
    _check_dimension(dimension)
    return Measure(
        family="gaussian",
        dimension=dimension,
        params={},
        log_profile=lambda r: -0.5 * r**2,
        drift_profile=lambda r: (-1.0, 0.0, 0.0),
        normalization=(2 * math.pi) ** (-dimension / 2),
        singular_at_origin=False,
    )


def power(dimension: int, m: float) -> Measure:
    """κ e^{-|x|^m}: b = -m |x|^{m-2} x."""
    _check_dimension(dimension)
    if not m > 0:
        raise ParameterDomainError(f"power family needs m > 0, got m={m}")
    m = float(m)

    def drift_profile(r):
        return (
            _mono(-m, r, m - 2),
            _mono(-m * (m - 2), r, m - 4),
            _mono(-m * (m - 2) * (m - 4), r, m - 6),
        )

    log_profile = lambda r: -(r**m)
    return Measure(
        family="power",
        dimension=dimension,
        params={"m": m},
        log_profile=log_profile,
        drift_profile=drift_profile,
        normalization=_normalize(log_profile, dimension),
        singular_at_origin=not _is_even_integer(m),
    )


def squared_power(dimension: int, c1: float = 1.0, c2: float = 1.0, m: float = 1.5) -> Measure:
    """K exp(-(c1 + c2|x|²)^m), m > 1/2."""
    _check_dimension(dimension)
    if not m > 0.5:
        raise ParameterDomainError(f"squared_power family needs m > 1/2, got m={m}")
    if not (c1 > 0 and c2 > 0):
        raise ParameterDomainError(f"squared_power family needs c1, c2 > 0, got c1={c1}, c2={c2}")
    c1, c2, m = float(c1), float(c2), float(m)

    def drift_profile(r):
        s = c1 + c2 * r**2
        return (
            -2 * m * c2 * s ** (m - 1),
            -4 * m * (m - 1) * c2**2 * s ** (m - 2),
            -8 * m * (m - 1) * (m - 2) * c2**3 * s ** (m - 3),
        )

    log_profile = lambda r: -((c1 + c2 * r**2) ** m)
    return Measure(
        family="squared_power",
        dimension=dimension,
        params={"c1": c1, "c2": c2, "m": m},
        log_profile=log_profile,
        drift_profile=drift_profile,
        normalization=_normalize(log_profile, dimension),
        singular_at_origin=False,
    )


def _rational_terms(p: float, r):
    # T = p r^{p-2}/D, Q = T'/r, W = Q'/r with D = 1 + r^p
    d = 1.0 + r**p
    t = _mono(p, r, p - 2) / d
    q = (_mono(p * (p - 2), r, p - 4) - _mono(2 * p, r, 2 * p - 4)) / d**2
    w = (
        _mono(p * (p - 4) * (p - 2), r, p - 6)
        - _mono(p * (p + 8) * (p - 2), r, 2 * p - 6)
        + _mono(8 * p, r, 3 * p - 6)
    ) / d**3
    return t, q, w


def rational(dimension: int, alpha: float, beta: float) -> Measure:
    """C (1 + |x|^α)/(1 + |x|^β), β > α + N."""
    _check_dimension(dimension)
    if not alpha > 0:
        raise ParameterDomainError(f"rational family needs alpha > 0, got alpha={alpha}")
    if not beta > alpha + dimension:
        raise ParameterDomainError(
            f"rational family needs beta > alpha + N: {beta} <= {alpha} + {dimension}"
        )
    alpha, beta = float(alpha), float(beta)

    def drift_profile(r):
        ta, qa, wa = _rational_terms(alpha, r)
        tb, qb, wb = _rational_terms(beta, r)
        return ta - tb, qa - qb, wa - wb

    log_profile = lambda r: np.log1p(r**alpha) - np.log1p(r**beta)
    return Measure(
        family="rational",
        dimension=dimension,
        params={"alpha": alpha, "beta": beta},
        log_profile=log_profile,
        drift_profile=drift_profile,
        normalization=_normalize(log_profile, dimension),
        singular_at_origin=not (_is_even_integer(alpha) and _is_even_integer(beta)),
    )


def synthetic_hardy_violator(dimension: int, a: float = 1.0) -> Measure:
    """
    Test double μ ∝ |x|^{-a} e^{-|x|²/2}.

    Near 0, U ≈ (N a/2 - a - a²/4)/|x|², so |x|²U stays bounded away from 0
    and the logarithmic envelope of (H2)(ii) fails.
    """
    _check_dimension(dimension)
    if not 0 < a < dimension:
        raise ParameterDomainError(f"synthetic measure needs 0 < a < N, got a={a}")

    def drift_profile(r):
        return _mono(-a, r, -2) - 1.0, _mono(2 * a, r, -4), _mono(-8 * a, r, -6)

    log_profile = lambda r: -a * np.log(r) - 0.5 * r**2
    return Measure(
        family="synthetic",
        dimension=dimension,
        params={"a": float(a)},
        log_profile=log_profile,
        drift_profile=drift_profile,
        normalization=_normalize(log_profile, dimension),
        singular_at_origin=True,
    )


_FAMILIES = {
    "gaussian": (gaussian, ()),
    "power": (power, ("m",)),
    "squared_power": (squared_power, ("c1", "c2", "m")),
    "rational": (rational, ("alpha", "beta")),
}


def registry() -> dict[str, Callable]:
    """Named constructors of the registered families."""
    return {name: ctor for name, (ctor, _) in _FAMILIES.items()}


def default_measures(dimension: int) -> list[Measure]:
    """The registered families at their default parameters."""
    return [
        gaussian(dimension),
        power(dimension, 4.0),
        squared_power(dimension, 1.0, 1.0, 1.5),
        rational(dimension, 2.0, dimension + 3.0),
    ]


def measure_from_config(config: dict) -> Measure:
    """Build a Measure from {"family", "dimension", "params"}; unknown keys are rejected."""
    unknown = set(config) - {"family", "dimension", "params"}
    if unknown:
        raise ConfigError(f"Unknown measure config keys: {sorted(unknown)}")
    family = config.get("family")
    if family not in _FAMILIES:
        raise ConfigError(f"Unknown measure family: {family!r}")
    if "dimension" not in config:
        raise ConfigError("Measure config needs a dimension")
    ctor, allowed = _FAMILIES[family]
    params = config.get("params") or {}
    extra = set(params) - set(allowed)
    if extra:
        raise ConfigError(f"Unknown parameters for {family}: {sorted(extra)}")
    try:
        dimension = int(config["dimension"])
        values = {k: float(v) for k, v in params.items()}
    except (TypeError, ValueError) as e:
        raise ConfigError(f"Bad measure config value: {e}") from e
    return ctor(dimension, **values)


# --- Hypothesis audits ---


@dataclass
class HypothesisEntry:
    name: str
    passed: bool
    measured_bound: float
    witness_point: tuple | None
    grid_spec: str
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "measured_bound": self.measured_bound,
            "witness_point": list(self.witness_point) if self.witness_point is not None else None,
            "grid_spec": self.grid_spec,
            "details": self.details,
        }


@dataclass
class HypothesisReport:
    measure: dict
    entries: list[HypothesisEntry]
    r0: float | None = None

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def entry(self, name: str) -> HypothesisEntry:
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "measure": self.measure,
            "r0": self.r0,
            "passed": self.passed,
            "entries": [e.to_dict() for e in self.entries],
        }

    def table(self) -> str:
        lines = [f"{'hypothesis':<10} {'passed':<7} {'measured_bound':>16}  witness"]
        for e in self.entries:
            witness = "-" if e.witness_point is None else f"|x|={np.linalg.norm(e.witness_point):.3e}"
            lines.append(f"{e.name:<10} {str(e.passed):<7} {e.measured_bound:>16.6g}  {witness}")
        return "\n".join(lines)


def audit_radii(lo: float, hi: float, per_decade: int = AUDIT_PER_DECADE) -> np.ndarray:
    count = max(2, int(round(per_decade * math.log10(hi / lo))) + 1)
    return np.geomspace(lo, hi, count)


def _directions(dimension: int) -> np.ndarray:
    rng = np.random.default_rng(0)
    dirs = [np.eye(dimension)[0], np.ones(dimension) / math.sqrt(dimension)]
    for _ in range(2):
        v = rng.standard_normal(dimension)
        dirs.append(v / np.linalg.norm(v))
    return np.array(dirs)


def _witness(m: Measure, r: float) -> tuple:
    return tuple(float(v) for v in r * np.eye(m.dimension)[0])


def _local_integrability(m: Measure, name: str, integrand: Callable) -> HypothesisEntry:
    # integrable at 0 iff r·F(r) r^{N-1} keeps shrinking as r → 0
    rule = radial_rule(m.dimension, breakpoints=(1.0,), upper=1.0)
    value = rule.integrate(integrand(rule.nodes))
    probe = np.array([1e-10, 1e-5])
    trend = probe * probe ** (m.dimension - 1) * np.abs(integrand(probe))
    passed = bool(np.isfinite(value) and trend[0] <= trend[1] * (1 + 1e-9))
    return HypothesisEntry(
        name=name,
        passed=passed,
        measured_bound=float(value),
        witness_point=None if passed else _witness(m, probe[0]),
        grid_spec="B_1 composite Gauss-Legendre, log panels to 1e-12",
    )


def check_H1(m: Measure, R: float = 10.0, per_decade: int = AUDIT_PER_DECADE) -> list[HypothesisEntry]:
    """(H1)(i) drift in L^{N+1}_loc and (H1)(ii) positive infimum of μ on compacts."""
    n = m.dimension
    drift_power = lambda r: np.abs(m.radial_drift_terms(r)[0] * r) ** (n + 1)
    first = _local_integrability(m, "H1(i)", drift_power)

    radii = audit_radii(10.0 ** AUDIT_DECADES[0], R, per_decade)
    log_density = m.log_density_radial(radii)
    worst = int(np.argmin(log_density))
    passed = bool(np.all(np.isfinite(log_density)))
    second = HypothesisEntry(
        name="H1(ii)",
        passed=passed,
        measured_bound=float(log_density[worst]),
        witness_point=None if passed else _witness(m, radii[worst]),
        grid_spec=f"log mu on {radii.size} log-spaced radii in [1e-6, {R:g}]",
    )
    return [first, second]


def check_H2(
    m: Measure,
    R0: float,
    R_far: float = 10.0 ** AUDIT_DECADES[1],
    per_decade: int = AUDIT_PER_DECADE,
) -> list[HypothesisEntry]:
    """(H2)(i) local integrability, (ii) |x|²U ≤ ¼|log|x||^{-2} on B_{R0}, (iii) U bounded above outside B_{R0}."""
    if not 0 < R0 < 1:
        raise MisuseError(f"check_H2 needs 0 < R0 < 1 (log envelope degenerates at 1), got {R0}")

    entries = [
        _local_integrability(
            m,
            "H2(i)",
            lambda r: (m.radial_drift_terms(r)[0] * r) ** 2 * m.density_radial(r)
            + np.abs(m.laplacian_ratio_radial(r)) * m.density_radial(r),
        )
    ]

    radii = audit_radii(10.0 ** AUDIT_DECADES[0], R0, per_decade)
    scaled = radii**2 * m.potential_radial(radii)
    envelope = 0.25 / np.log(radii) ** 2
    excess = scaled - envelope
    worst = int(np.argmax(excess))
    passed = bool(excess[worst] <= 0)
    entries.append(
        HypothesisEntry(
            name="H2(ii)",
            passed=passed,
            measured_bound=float(excess[worst]),
            witness_point=None if passed else _witness(m, radii[worst]),
            grid_spec=f"{radii.size} log-spaced radii in [1e-6, {R0:g}]",
            details={"R0": R0},
        )
    )

    far = audit_radii(R0, R_far, per_decade)
    potential = m.potential_radial(far)
    top = int(np.argmax(potential))
    passed = bool(np.isfinite(potential[top]))
    entries.append(
        HypothesisEntry(
            name="H2(iii)",
            passed=passed,
            measured_bound=float(potential[top]),
            witness_point=None if passed else _witness(m, far[top]),
            grid_spec=f"{far.size} log-spaced radii in [{R0:g}, {R_far:g}]",
        )
    )
    return entries


def _minimal_constant(values, singular, drift_norm, radii):
    # smallest C with values <= singular + C·|b| on the grid
    need = np.maximum(values - singular, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(need > 0, need / drift_norm, 0.0)
    ratio = np.where((need > 0) & (drift_norm == 0), np.inf, ratio)
    worst = int(np.argmax(ratio))
    return float(ratio[worst]), radii[worst]


def check_H3(
    m: Measure,
    eps_list=EPS_LIST,
    per_decade: int = AUDIT_PER_DECADE,
) -> list[HypothesisEntry]:
    """Minimal C_ε making (H3)(i)/(ii) hold on the sampled grid, for each ε."""
    if not eps_list or any(e <= 0 for e in eps_list):
        raise MisuseError(f"eps_list must be non-empty and positive, got {eps_list}")
    radii = audit_radii(10.0 ** AUDIT_DECADES[0], 10.0 ** AUDIT_DECADES[1], per_decade)
    dirs = _directions(m.dimension)
    points = (radii[:, None, None] * dirs[None, :, :]).reshape(-1, m.dimension)
    point_r = np.repeat(radii, dirs.shape[0])

    drift_norm = np.linalg.norm(m.drift(points), axis=1)
    first_order = np.abs(m.drift_jacobian(points)).reshape(len(points), -1).max(axis=1)
    second_order = np.abs(m.drift_hessian(points)).reshape(len(points), -1).max(axis=1)

    entries = []
    for name, values, power_ in (("H3(i)", first_order, 2), ("H3(ii)", second_order, 3)):
        constants, witnesses = {}, {}
        for eps in eps_list:
            c, r = _minimal_constant(values, eps / point_r**power_, drift_norm, point_r)
            constants[str(eps)] = c
            witnesses[str(eps)] = r
        worst_eps = max(constants, key=constants.get)
        passed = all(math.isfinite(c) for c in constants.values())
        entries.append(
            HypothesisEntry(
                name=name,
                passed=passed,
                measured_bound=constants[worst_eps],
                witness_point=None if passed else _witness(m, witnesses[worst_eps]),
                grid_spec=f"{radii.size} radii in [1e-6, 1e3] x {dirs.shape[0]} directions",
                details={"C_eps": constants},
            )
        )
    return entries


def audit(m: Measure, r0_candidates=R0_CANDIDATES, eps_list=EPS_LIST) -> HypothesisReport:
    """Run H1–H3; H2 uses the largest admissible R0 among the candidates."""
    entries = check_H1(m)
    chosen, h2 = None, None
    for r0 in sorted(r0_candidates, reverse=True):
        h2 = check_H2(m, r0)
        if all(e.passed for e in h2):
            chosen = r0
            break
    entries += h2
    entries += check_H3(m, eps_list)
    report = HypothesisReport(measure=m.describe(), entries=entries, r0=chosen)
    for e in report.entries:
        if not e.passed:
            logger.warning("%s failed for %s: bound=%g", e.name, m.family, e.measured_bound)
    logger.info("Audit %s N=%d: passed=%s R0=%s", m.family, m.dimension, report.passed, chosen)
    return report


def potential_sup(m: Measure, lo: float = 1e-6, hi: float = 1e3) -> float:
    """Sampled sup of U; any C1 >= sup U makes the weighted Hardy inequality hold."""
    return float(np.max(m.potential_radial(audit_radii(lo, hi))))


# --- Consistency oracle ---


def _central(f: Callable, x: np.ndarray, h: float) -> np.ndarray:
    """Order-4 central differences of f at x along every axis; output axis appended last."""
    cols = []
    for k in range(x.size):
        e = np.zeros_like(x)
        e[k] = h
        cols.append((f(x - 2 * e) - 8 * f(x - e) + 8 * f(x + e) - f(x + 2 * e)) / (12 * h))
    return np.stack(cols, axis=-1)


def finite_difference_consistency(m: Measure, points) -> dict[str, float]:
    """
    Max relative error of b, Db, D²b against differences of log μ, b, Db.

    Errors are scaled by 1 + |exact|; points must avoid singularities.
    """
    errors = {"drift": 0.0, "jacobian": 0.0, "hessian": 0.0}
    log_mu = lambda y: float(m.log_density_radial(np.linalg.norm(y)))
    for x in np.atleast_2d(np.asarray(points, dtype=float)):
        h = 1e-3 * (1 + np.linalg.norm(x))
        pairs = (
            ("drift", _central(log_mu, x, h), m.drift(x)),
            # J[i, j] = D_i b_j; differencing b along axis i fills the last axis
            ("jacobian", np.swapaxes(_central(m.drift, x, h), 0, 1), m.drift_jacobian(x)),
            ("hessian", _central(m.drift_jacobian, x, h), m.drift_hessian(x)),
        )
        for name, approx, exact in pairs:
            scale = 1.0 + np.max(np.abs(exact))
            errors[name] = max(errors[name], float(np.max(np.abs(approx - exact)) / scale))
    return errors
