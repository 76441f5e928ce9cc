"""
Weighted Hardy, Rellich and interpolation inequalities on trial suites.

Both sides of every inequality are integrated numerically: radial trials by
the radial rule against μ(r) ω_N r^{N-1} dr, polynomial trials (Gaussian μ
only) exactly in the Hermite basis. Empirical constants are reported, never
asserted against closed-form values.

The sharpness probe builds the spliced radial profile

    φ_n(r) = α_n + β_n r^{γ1}   on (0, 1/n]
           = r^γ                 on (1/n, 1]
           = r^γ ϑ(r)            on (1, 2),  0 beyond,

and tracks λ₁(φ_n) = (‖Lφ_n‖² - c‖φ_n/|x|²‖²) / (‖φ_n‖² + ‖∇φ_n‖²) as n grows.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from lib.artifacts import ordered_map
from lib.errors import IntegrabilityError, MisuseError, ParameterDomainError
from lib.hermite import SpectralFunction
from lib.measures import EPS_LIST, Measure, gaussian, potential_sup
from lib.radial import RadialTrial, integrable_near_zero, radial_fields, radial_rule

logger = logging.getLogger(__name__)

TOLERANCE = 1e-9
HIGHER_ESTIMATES = (
    "rellich_h2",
    "gradient_r4",
    "rellich_r6",
    "gradient_r6",
    "hessian_r4",
)
# estimates needing N >= 7
NEEDS_SEVEN = {"rellich_r6", "gradient_r6", "hessian_r4"}


# --- Constants ---


def hardy_constant(dimension: int) -> float:
    """C0 = ((N-2)/2)²."""
    return ((dimension - 2) / 2) ** 2


def rellich_constant(dimension: int) -> float:
    """(C0 - 1)² = (N(N-4)/4)²."""
    return (dimension * (dimension - 4) / 4) ** 2


def rellich_feasible(c: float, dimension: int) -> bool:
    """Whether 0 <= V <= c/|x|⁴ stays under the optimal Rellich constant."""
    return c <= rellich_constant(dimension)


def hardy_C1(m: Measure) -> float:
    """A C1 for which the weighted Hardy inequality holds: sup U, floored at 0."""
    return max(potential_sup(m), 0.0)


# --- Reports ---


@dataclass
class InequalityReport:
    name: str
    lhs: float
    rhs: float
    constants: dict
    trial: str
    tolerance: float = TOLERANCE
    details: dict = field(default_factory=dict)

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def passed(self) -> bool:
        return bool(self.margin >= -self.tolerance)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "passed": self.passed,
            "constants": self.constants,
            "trial": self.trial,
            "tolerance": self.tolerance,
            "details": self.details,
        }


def _report(name, lhs, rhs, constants, trial, details=None) -> InequalityReport:
    tolerance = TOLERANCE * (1.0 + abs(lhs) + abs(rhs))
    report = InequalityReport(name, float(lhs), float(rhs), constants, trial, tolerance, details or {})
    logger.debug("%s on %s: lhs=%.6g rhs=%.6g", name, trial, lhs, rhs)
    return report


def _base_constants(dimension: int, **extra) -> dict:
    c0 = hardy_constant(dimension)
    return {"C0": c0, "C2": c0 - 1, **extra}


# --- Trial norms ---


@dataclass
class TrialNorms:
    """Squared L²_μ norms of a trial and of its derivatives (None where unavailable)."""

    trial: str
    order_at_zero: float | None
    u2: float
    grad2: float
    hess2: float
    third2: float
    lu2: float
    dlu2: float
    l_grad2: float
    au2: float
    drift2: float
    singular: dict | None = None

    @property
    def h2(self) -> float:
        return self.u2 + self.grad2 + self.hess2

    @property
    def h3(self) -> float:
        return self.h2 + self.third2

    def weighted(self, key: str) -> float:
        if self.singular is None:
            raise MisuseError(f"Singular weight {key!r} needs a radial trial")
        value = self.singular[key]
        if value is None:
            raise IntegrabilityError(f"{key} diverges at the origin for {self.trial}")
        return value


def _leading_order(terms) -> float:
    exps = [e for e, c in terms if c != 0.0]
    return min(exps) if exps else math.inf


def _radial_norms(m: Measure, u: RadialTrial) -> TrialNorms:
    n = m.dimension
    rule = radial_rule(n)
    r = rule.nodes
    with np.errstate(over="ignore", invalid="ignore", divide="ignore", under="ignore"):
        fields = radial_fields(m, u, r)
        density = m.density_radial(r)
        integrate = lambda values: rule.integrate(values, density)

        # leading orders at 0 of u and u'; |D²u| ~ r^{order(u') - 1}
        p0 = u.order_at_zero
        p1 = _leading_order(u.derivative_terms(1))
        p2 = p1 - 1
        singular = {}
        for key, values, order, power_ in (
            ("u_r2", fields.u**2 / r**2, p0, 2),
            ("u_r4", fields.u**2 / r**4, p0, 4),
            ("u_r6", fields.u**2 / r**6, p0, 6),
            ("grad_r4", fields.grad2 / r**4, p1, 4),
            ("grad_r6", fields.grad2 / r**6, p1, 6),
            ("hess_r4", fields.hess2 / r**4, p2, 4),
        ):
            ok = order == math.inf or integrable_near_zero(order, power_, n)
            singular[key] = integrate(values) if ok else None

        return TrialNorms(
            trial=u.name,
            order_at_zero=p0,
            u2=integrate(fields.u**2),
            grad2=integrate(fields.grad2),
            hess2=integrate(fields.hess2),
            third2=integrate(fields.third2),
            lu2=integrate(fields.lu**2),
            dlu2=integrate(fields.dlu**2),
            l_grad2=integrate(fields.l_grad2),
            au2=integrate(fields.au**2),
            drift2=integrate(fields.drift2),
            singular=singular,
        )


def _spectral_norms(m: Measure, s: SpectralFunction) -> TrialNorms:
    if m.family != "gaussian" or m.dimension != s.dimension:
        raise MisuseError("Polynomial trials are integrated exactly only under the Gaussian of their dimension")
    k = s.orders.astype(float)
    c2 = s.coefficients**2
    moment = lambda weights: float(np.sum(weights * c2))
    drift2 = sum(s.multiply_coordinate(j).norm() ** 2 for j in range(s.dimension))
    return TrialNorms(
        trial=f"hermite(N={s.dimension}, d={s.max_degree})",
        order_at_zero=None,
        u2=moment(np.ones_like(k)),
        grad2=moment(k),
        hess2=moment(k * (k - 1)),
        third2=moment(k * (k - 1) * (k - 2)),
        lu2=moment(k**2),
        dlu2=moment(k**3),
        l_grad2=moment(k * (k - 1) ** 2),
        au2=moment(k**4),
        drift2=float(drift2),
    )


def trial_norms(m: Measure, u) -> TrialNorms:
    if isinstance(u, RadialTrial):
        return _radial_norms(m, u)
    if isinstance(u, SpectralFunction):
        return _spectral_norms(m, u)
    raise MisuseError(f"Unsupported trial type {type(u).__name__}")


def _norms_for(m: Measure, trials) -> list[TrialNorms]:
    return ordered_map(lambda u: trial_norms(m, u), trials)


# --- Hardy and Rellich ---


def _require_dimension(dimension: int, minimum: int, what: str) -> None:
    if dimension < minimum:
        raise MisuseError(f"{what} needs N >= {minimum}, got N={dimension}")


def hardy_report(m: Measure, u, C1: float | None = None) -> InequalityReport:
    """C0 ∫u²/|x|² dμ <= ∫|∇u|² dμ + C1 ∫u² dμ."""
    _require_dimension(m.dimension, 3, "Hardy inequality")
    C1 = hardy_C1(m) if C1 is None else float(C1)
    norms = trial_norms(m, u)
    c0 = hardy_constant(m.dimension)
    weighted = norms.weighted("u_r2")
    lhs = c0 * weighted
    rhs = norms.grad2 + C1 * norms.u2
    minimal = max(0.0, (lhs - norms.grad2) / norms.u2) if norms.u2 > 0 else 0.0
    return _report("hardy", lhs, rhs, _base_constants(m.dimension, C1=C1), norms.trial, {"minimal_C1": minimal})


def minimal_C1(m: Measure, trials) -> float:
    """Smallest C1 making the Hardy inequality hold on every trial of the suite."""
    c0 = hardy_constant(m.dimension)
    best = 0.0
    for norms in _norms_for(m, trials):
        if norms.u2 > 0:
            best = max(best, (c0 * norms.weighted("u_r2") - norms.grad2) / norms.u2)
    return best


def rellich_report(m: Measure, u, C1: float | None = None) -> InequalityReport:
    """
    (C0-1)² ∫u²/|x|⁴ dμ <= ‖Lu‖² + 2(C0-1)C1/C0 ‖∇u‖² + 2(C0-1)C1²/C0 ‖u‖².

    The ε-forms for EPS_LIST are attached under details["eps_forms"].
    """
    _require_dimension(m.dimension, 5, "Rellich inequality")
    C1 = hardy_C1(m) if C1 is None else float(C1)
    norms = trial_norms(m, u)
    c0 = hardy_constant(m.dimension)
    c2 = c0 - 1
    rellich = rellich_constant(m.dimension)
    weighted = norms.weighted("u_r4")
    lhs = rellich * weighted
    rhs = norms.lu2 + 2 * c2 * C1 / c0 * norms.grad2 + 2 * c2 * C1**2 / c0 * norms.u2
    eps_forms = [rellich_eps_report(m, norms, C1, eps).to_dict() for eps in EPS_LIST]
    constants = _base_constants(m.dimension, C1=C1, rellich=rellich)
    return _report("rellich", lhs, rhs, constants, norms.trial, {"eps_forms": eps_forms})


def rellich_eps_report(m: Measure, u, C1: float, eps: float) -> InequalityReport:
    """((C0-1)² - ε) ∫u²/|x|⁴ dμ <= ‖Lu‖² + ((C0-1)C1)²/ε ‖u‖²."""
    if not eps > 0:
        raise MisuseError(f"ε must be > 0, got {eps}")
    norms = u if isinstance(u, TrialNorms) else trial_norms(m, u)
    c2 = hardy_constant(m.dimension) - 1
    rellich = rellich_constant(m.dimension)
    lhs = (rellich - eps) * norms.weighted("u_r4")
    rhs = norms.lu2 + (c2 * C1) ** 2 / eps * norms.u2
    constants = _base_constants(m.dimension, C1=C1, rellich=rellich, eps=eps)
    return _report("rellich_eps", lhs, rhs, constants, norms.trial)


# --- Suite constants ---


def interpolation_report(m: Measure, u, eps: float, C_eps: float) -> InequalityReport:
    """‖∇u‖² <= ε‖D²u‖² + C_ε‖u‖²."""
    if not eps > 0:
        raise MisuseError(f"ε must be > 0, got {eps}")
    norms = trial_norms(m, u)
    lhs = norms.grad2
    rhs = eps * norms.hess2 + C_eps * norms.u2
    return _report("interpolation", lhs, rhs, _base_constants(m.dimension, eps=eps, C_eps=C_eps), norms.trial)


def minimal_C_eps(m: Measure, trials, eps: float) -> float:
    """Smallest C_ε with ‖∇u‖² <= ε‖D²u‖² + C_ε‖u‖² on the suite."""
    best = 0.0
    for n in _norms_for(m, trials):
        if n.u2 > 0:
            best = max(best, (n.grad2 - eps * n.hess2) / n.u2)
    return best


def interpolation_reports(m: Measure, trials, eps_list=EPS_LIST) -> list[InequalityReport]:
    """One report per (ε, trial) at the suite-minimal C_ε."""
    trials = list(trials)
    reports = []
    for eps in eps_list:
        c_eps = minimal_C_eps(m, trials, eps)
        reports += [interpolation_report(m, u, eps, c_eps) for u in trials]
    return reports


def calderon_zygmund_constant(m: Measure, trials) -> float:
    """max over the suite of ‖D²u‖ / (‖Lu‖ + ‖u‖)."""
    best = 0.0
    for n in _norms_for(m, trials):
        denom = math.sqrt(n.lu2) + math.sqrt(n.u2)
        if denom > 0:
            best = max(best, math.sqrt(n.hess2) / denom)
    return best


def drift_bound_report(m: Measure, u, C: float | None = None) -> InequalityReport:
    """‖b u‖ <= C (‖∇u‖ + ‖u‖); C defaults to this trial's minimal constant."""
    norms = trial_norms(m, u)
    lhs = math.sqrt(norms.drift2)
    base = math.sqrt(norms.grad2) + math.sqrt(norms.u2)
    minimal = lhs / base if base > 0 else math.inf
    C = minimal if C is None else float(C)
    return _report("drift_bound", lhs, C * base, {"C": C}, norms.trial, {"minimal_C": minimal})


def drift_bound_constant(m: Measure, trials) -> float:
    best = 0.0
    for n in _norms_for(m, trials):
        base = math.sqrt(n.grad2) + math.sqrt(n.u2)
        best = max(best, math.sqrt(n.drift2) / base if base > 0 else math.inf)
    return best


# --- Higher-order estimates ---


def _higher_sides(name: str, n: TrialNorms) -> tuple[float, float]:
    if name == "rellich_h2":
        return n.weighted("u_r4"), n.h2
    if name == "gradient_r4":
        return n.weighted("grad_r4"), n.dlu2 + n.h2
    if name == "rellich_r6":
        return n.weighted("u_r6"), n.l_grad2 + n.h2
    if name == "gradient_r6":
        return n.weighted("grad_r6"), n.au2 + n.h3
    if name == "hessian_r4":
        return n.weighted("hess_r4"), n.au2 + n.h3
    raise MisuseError(f"Unknown higher-order estimate {name!r}")


def higher_rellich_reports(m: Measure, trials, estimates=None) -> list[InequalityReport]:
    """
    Minimal empirical constant over the suite for each higher-order estimate.

    Estimates: ∫u²/|x|⁴ <= C‖u‖²_{H²}; ∫|∇u|²/|x|⁴ <= C(‖∇Lu‖² + ‖u‖²_{H²});
    for N >= 7 also ∫u²/|x|⁶, ∫|∇u|²/|x|⁶ and ∫|D²u|²/|x|⁴ against
    ‖L∇u‖² or ‖Au‖² plus Sobolev norms.
    """
    n = m.dimension
    _require_dimension(n, 5, "Higher-order Rellich estimates")
    if estimates is None:
        estimates = [e for e in HIGHER_ESTIMATES if n >= 7 or e not in NEEDS_SEVEN]
    for name in estimates:
        if name not in HIGHER_ESTIMATES:
            raise MisuseError(f"Unknown higher-order estimate {name!r}")
        if name in NEEDS_SEVEN:
            _require_dimension(n, 7, f"Estimate {name}")

    norms = _norms_for(m, list(trials))
    if not norms:
        raise MisuseError("Higher-order estimates need a non-empty trial suite")
    reports = []
    for name in estimates:
        sides = [_higher_sides(name, t) for t in norms]
        ratios = [lhs / base if base > 0 else (0.0 if lhs == 0 else math.inf) for lhs, base in sides]
        worst = int(np.argmax(ratios))
        constant = float(ratios[worst])
        lhs, base = sides[worst]
        reports.append(
            _report(
                name,
                lhs,
                constant * base if math.isfinite(constant) else math.inf,
                _base_constants(n, C=constant),
                norms[worst].trial,
                {"minimal_constant": constant, "suite_size": len(norms), "finite": math.isfinite(constant)},
            )
        )
    return reports


# --- Sharpness probe ---


@dataclass
class RayleighProbe:
    c: float
    dimension: int
    gamma: float
    gamma1: float
    n: int
    alpha_n: float
    beta_n: float
    lambda1_estimate: float = math.nan

    def to_dict(self) -> dict:
        return {
            "c": self.c,
            "dimension": self.dimension,
            "gamma": self.gamma,
            "gamma1": self.gamma1,
            "n": self.n,
            "alpha_n": self.alpha_n,
            "beta_n": self.beta_n,
            "lambda1_estimate": self.lambda1_estimate,
        }


def check_probe_parameters(dimension: int, gamma: float, gamma1: float) -> None:
    if not 1 - dimension / 2 < gamma <= 2 - dimension / 2:
        raise ParameterDomainError(f"γ={gamma} outside (1 - N/2, 2 - N/2] for N={dimension}")
    if not 2 - dimension / 2 < gamma1 < 0:
        raise ParameterDomainError(f"γ1={gamma1} outside (2 - N/2, 0) for N={dimension}")
    if not 2 * gamma - 4 <= -dimension < 2 * gamma - 2:
        raise ParameterDomainError(f"γ={gamma} violates 2γ - 4 <= -N < 2γ - 2 for N={dimension}")


def splice_coefficients(gamma: float, gamma1: float, n: int) -> tuple[float, float]:
    """(α_n, β_n) making α + β r^{γ1} meet r^γ with matching slope at r = 1/n."""
    beta = (gamma / gamma1) * float(n) ** (-(gamma - gamma1))
    alpha = float(n) ** (-gamma) - beta * float(n) ** (-gamma1)
    return alpha, beta


def _smoothstep(t):
    return 6 * t**5 - 15 * t**4 + 10 * t**3, 30 * t**4 - 60 * t**3 + 30 * t**2, 120 * t**3 - 180 * t**2 + 60 * t


def cutoff(r):
    """ϑ = 1 on [0, 1], quintic descent on [1, 2], 0 beyond; returns (ϑ, ϑ', ϑ'')."""
    r = np.asarray(r, dtype=float)
    t = np.clip(r - 1.0, 0.0, 1.0)
    s, ds, dds = _smoothstep(t)
    inside = (r > 1.0) & (r < 2.0)
    return 1.0 - s, np.where(inside, -ds, 0.0), np.where(inside, -dds, 0.0)


def spliced_profile(gamma: float, gamma1: float, n: int, r):
    """φ_n, φ_n', φ_n'' at radii r."""
    alpha, beta = splice_coefficients(gamma, gamma1, n)
    r = np.asarray(r, dtype=float)
    inner = r <= 1.0 / n
    with np.errstate(divide="ignore", invalid="ignore"):
        core = np.where(inner, alpha + beta * r**gamma1, r**gamma)
        d1 = np.where(inner, beta * gamma1 * r ** (gamma1 - 1), gamma * r ** (gamma - 1))
        d2 = np.where(
            inner,
            beta * gamma1 * (gamma1 - 1) * r ** (gamma1 - 2),
            gamma * (gamma - 1) * r ** (gamma - 2),
        )
    theta, dtheta, ddtheta = cutoff(r)
    phi = core * theta
    dphi = d1 * theta + core * dtheta
    ddphi = d2 * theta + 2 * d1 * dtheta + core * ddtheta
    return phi, dphi, ddphi


def splice_mismatch(gamma: float, gamma1: float, n: int) -> tuple[float, float]:
    """|jump of φ_n| and |jump of φ_n'| across r = 1/n."""
    alpha, beta = splice_coefficients(gamma, gamma1, n)
    r = 1.0 / n
    value = abs(alpha + beta * r**gamma1 - r**gamma)
    slope = abs(beta * gamma1 * r ** (gamma1 - 1) - gamma * r ** (gamma - 1))
    return value, slope


def rayleigh_lambda1(
    c: float,
    dimension: int,
    gamma: float,
    gamma1: float,
    n: int,
    measure: Measure | None = None,
) -> RayleighProbe:
    """λ₁(φ_n) by radial quadrature with panels at r = 1/n and r = 1."""
    if not c > 0:
        raise ParameterDomainError(f"Probe constant c must be > 0, got {c}")
    if int(n) != n or n < 2:
        raise ParameterDomainError(f"Probe index n must be an integer >= 2, got {n}")
    check_probe_parameters(dimension, gamma, gamma1)
    m = gaussian(dimension) if measure is None else measure
    if m.dimension != dimension:
        raise MisuseError(f"Measure dimension {m.dimension} != {dimension}")

    rule = radial_rule(dimension, breakpoints=(1.0 / n, 1.0), upper=2.0)
    r = rule.nodes
    phi, dphi, ddphi = spliced_profile(gamma, gamma1, int(n), r)
    g, _, _ = m.radial_drift_terms(r)
    lphi = ddphi + ((dimension - 1) / r + g * r) * dphi
    density = m.density_radial(r)

    numerator = rule.integrate(lphi**2 - c * phi**2 / r**4, density)
    denominator = rule.integrate(phi**2 + dphi**2, density)
    alpha, beta = splice_coefficients(gamma, gamma1, int(n))
    probe = RayleighProbe(c, dimension, gamma, gamma1, int(n), alpha, beta, numerator / denominator)
    logger.debug("λ₁(φ_%d) = %.8g for c=%g", n, probe.lambda1_estimate, c)
    return probe


def lambda1_sweep(c, dimension, gamma, gamma1, ns=(10, 100, 1000, 10000), measure=None) -> list[RayleighProbe]:
    probes = ordered_map(lambda n: rayleigh_lambda1(c, dimension, gamma, gamma1, n, measure), ns)
    logger.info(
        "λ₁ sweep c=%g: %s",
        c,
        ", ".join(f"n={p.n}: {p.lambda1_estimate:.4g}" for p in probes),
    )
    return probes
