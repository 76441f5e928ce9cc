"""
Kolmogorov operator L = Δ + b·∇ and its square A = L².

Spectral application is exact in the Gaussian case (Ĥ_α are eigenfunctions
with L Ĥ_α = -|α| Ĥ_α). Pointwise application works for any registered
measure and evaluates A through its explicit eight-term expansion in the
drift b = ∇μ/μ and its derivatives.
"""

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from lib.errors import MisuseError, MissingDerivativeError
from lib.hermite import QuadratureRule, SpectralFunction, basis_matrix
from lib.measures import Measure

logger = logging.getLogger(__name__)

A_TERM_NAMES = (
    "bilaplacian",
    "drift_grad_laplacian",
    "hessian_coupling",
    "drift_hessian_drift",
    "mu_hessian_grad_drift",
    "grad_laplacian_mu",
    "laplacian_mu_drift",
    "drift_cubed",
)


# --- Spectral ---


@dataclass(frozen=True)
class OperatorApplication:
    input: SpectralFunction
    operator: str
    method: str
    result: SpectralFunction


def apply_L_spectral(s: SpectralFunction) -> SpectralFunction:
    """c_α ↦ -|α| c_α."""
    return s.map_orders(lambda k: -k.astype(float))


def apply_A_spectral(s: SpectralFunction) -> SpectralFunction:
    """c_α ↦ |α|² c_α."""
    return s.map_orders(lambda k: k.astype(float) ** 2)


def apply_spectral(s: SpectralFunction, operator: str = "A") -> OperatorApplication:
    if operator not in ("L", "A"):
        raise MisuseError(f"Unknown operator {operator!r}")
    result = apply_L_spectral(s) if operator == "L" else apply_A_spectral(s)
    return OperatorApplication(input=s, operator=operator, method="spectral", result=result)


# --- Trial functions with derivatives ---


class PolynomialTrial:
    """Exact derivatives of a spectral function, evaluated pointwise."""

    def __init__(self, s: SpectralFunction):
        self.spectral = s
        self.dimension = s.dimension
        self._partials: dict[tuple[int, ...], SpectralFunction] = {(): s}
        self._rows: dict[bytes, np.ndarray] = {}

    def _partial_function(self, axes) -> SpectralFunction:
        key = tuple(sorted(axes))
        if key not in self._partials:
            self._partials[key] = self._partial_function(key[:-1]).derivative(key[-1])
        return self._partials[key]

    def _row(self, x: np.ndarray) -> np.ndarray:
        key = x.tobytes()
        row = self._rows.get(key)
        if row is None:
            if len(self._rows) > 512:
                self._rows.clear()
            row = basis_matrix(self.dimension, self.spectral.max_degree, x.reshape(1, -1))[:, 0]
            self._rows[key] = row
        return row

    def partial(self, x, axes=()) -> float:
        x = np.asarray(x, dtype=float).reshape(-1)
        return float(self._partial_function(axes).coefficients @ self._row(x))

    def value(self, x) -> float:
        return self.partial(x)

    def gradient(self, x) -> np.ndarray:
        return np.array([self.partial(x, (i,)) for i in range(self.dimension)])

    def hessian(self, x) -> np.ndarray:
        n = self.dimension
        return np.array([[self.partial(x, (i, j)) for j in range(n)] for i in range(n)])

    def third(self, x) -> np.ndarray:
        n = self.dimension
        return np.array(
            [[[self.partial(x, (i, j, k)) for k in range(n)] for j in range(n)] for i in range(n)]
        )

    def bilaplacian(self, x) -> float:
        n = self.dimension
        return sum(self.partial(x, (i, i, j, j)) for i in range(n) for j in range(n))

    def derivative_trial(self, k: int) -> "PolynomialTrial":
        return PolynomialTrial(self.spectral.derivative(k))


@dataclass
class CallableTrial:
    """Closed-form derivatives supplied as callables of a point x (shape (N,))."""

    dimension: int
    value_fn: Callable
    gradient_fn: Callable
    hessian_fn: Callable
    third_fn: Callable | None = None
    bilaplacian_fn: Callable | None = None

    def value(self, x) -> float:
        return float(self.value_fn(np.asarray(x, dtype=float)))

    def gradient(self, x) -> np.ndarray:
        return np.asarray(self.gradient_fn(np.asarray(x, dtype=float)), dtype=float).reshape(self.dimension)

    def hessian(self, x) -> np.ndarray:
        n = self.dimension
        return np.asarray(self.hessian_fn(np.asarray(x, dtype=float)), dtype=float).reshape(n, n)

    def third(self, x) -> np.ndarray:
        if self.third_fn is None:
            raise MissingDerivativeError("Trial has no third derivatives")
        n = self.dimension
        return np.asarray(self.third_fn(np.asarray(x, dtype=float)), dtype=float).reshape(n, n, n)

    def bilaplacian(self, x) -> float:
        if self.bilaplacian_fn is None:
            raise MissingDerivativeError("Trial has no fourth derivatives")
        return float(self.bilaplacian_fn(np.asarray(x, dtype=float)))

    def derivative_trial(self, k: int) -> "CallableTrial":
        if self.third_fn is None:
            raise MissingDerivativeError("∂_k of this trial needs third derivatives")
        return CallableTrial(
            dimension=self.dimension,
            value_fn=lambda x: self.gradient(x)[k],
            gradient_fn=lambda x: self.hessian(x)[:, k],
            hessian_fn=lambda x: self.third(x)[:, :, k],
        )


def _central_step(x: np.ndarray) -> float:
    return 1e-3 * (1 + np.linalg.norm(x))


def central_gradient(f: Callable, x, h: float | None = None) -> np.ndarray:
    """Order-4 central differences; output axis appended last."""
    x = np.asarray(x, dtype=float).reshape(-1)
    h = _central_step(x) if h is None else h
    cols = []
    for k in range(x.size):
        e = np.zeros_like(x)
        e[k] = h
        cols.append(
            (np.asarray(f(x - 2 * e)) - 8 * np.asarray(f(x - e)) + 8 * np.asarray(f(x + e)) - np.asarray(f(x + 2 * e)))
            / (12 * h)
        )
    return np.stack(cols, axis=-1)


class FiniteDifferenceTrial:
    """Gradient and Hessian by order-4 central differences; nothing beyond."""

    def __init__(self, f: Callable, dimension: int):
        self.f = f
        self.dimension = dimension

    def value(self, x) -> float:
        return float(self.f(np.asarray(x, dtype=float)))

    def gradient(self, x) -> np.ndarray:
        return central_gradient(self.f, x)

    def hessian(self, x) -> np.ndarray:
        return central_gradient(self.gradient, x)

    def third(self, x):
        raise MissingDerivativeError("Finite-difference trials stop at second derivatives")

    def bilaplacian(self, x):
        raise MissingDerivativeError("Finite-difference trials stop at second derivatives")

    def derivative_trial(self, k: int):
        raise MissingDerivativeError("Finite-difference trials stop at second derivatives")


# --- Pointwise operators ---


def apply_L_pointwise(m: Measure, f, x) -> float:
    """Δf(x) + b(x)·∇f(x)."""
    x = np.asarray(x, dtype=float).reshape(-1)
    return float(np.trace(f.hessian(x)) + m.drift(x) @ f.gradient(x))


def a_terms(m: Measure, f, x) -> dict[str, float]:
    """
    The eight summands of A u = L²u, each inspectable on its own.

    With D²μ/μ = Db + b bᵀ and ∇Δμ/μ = ∇(Δμ/μ) + (Δμ/μ) b.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    b = m.drift(x)
    jac = m.drift_jacobian(x)
    hess_b = m.drift_hessian(x)
    lap_ratio = m.laplacian_ratio(x)

    grad = f.gradient(x)
    hess = f.hessian(x)
    grad_lap = np.einsum("jii->j", f.third(x))
    bilap = f.bilaplacian(x)

    mu_hessian = jac + np.outer(b, b)
    grad_lap_ratio = np.einsum("jii->j", hess_b) + 2 * jac @ b
    grad_lap_mu = grad_lap_ratio + lap_ratio * b
    b_grad = b @ grad

    return {
        "bilaplacian": float(bilap),
        "drift_grad_laplacian": float(2 * b @ grad_lap),
        "hessian_coupling": float(2 * np.sum(mu_hessian * hess)),
        "drift_hessian_drift": float(-(hess @ b) @ b),
        "mu_hessian_grad_drift": float(-(mu_hessian @ grad) @ b),
        "grad_laplacian_mu": float(grad_lap_mu @ grad),
        "laplacian_mu_drift": float(-lap_ratio * b_grad),
        "drift_cubed": float((b @ b) * b_grad),
    }


def apply_A_pointwise(m: Measure, f, x) -> float:
    """A u(x) as the sum of the eight explicit terms."""
    return float(sum(a_terms(m, f, x).values()))


def bi_ou_pointwise(f, x) -> float:
    """Gaussian specialization Δ²f - 2x·∇Δf + Tr(x⊗x D²f) - 2Δf + x·∇f."""
    x = np.asarray(x, dtype=float).reshape(-1)
    hess = f.hessian(x)
    grad_lap = np.einsum("jii->j", f.third(x))
    return float(
        f.bilaplacian(x)
        - 2 * x @ grad_lap
        + x @ hess @ x
        - 2 * np.trace(hess)
        + x @ f.gradient(x)
    )


def commutator_check(m: Measure, f, x, k: int) -> float:
    """
    |L(D_k f) - D_k(L f) + ∇(b_k)·∇f| at x.

    D_k(L f) is taken by order-4 central differences of the pointwise Lf,
    so the residual tests the identity rather than restating it.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    if not 0 <= k < x.size:
        raise MisuseError(f"Axis {k} out of range for dimension {x.size}")
    l_of_dk = apply_L_pointwise(m, f.derivative_trial(k), x)
    lf = lambda y: apply_L_pointwise(m, f, y)
    dk_of_l = float(central_gradient(lf, x)[k])
    correction = float(m.drift_jacobian(x)[:, k] @ f.gradient(x))
    return abs(l_of_dk - dk_of_l + correction)


# --- Form identities (quadrature) ---


def _values(m: Measure, f: PolynomialTrial, rule: QuadratureRule, op: Callable) -> np.ndarray:
    return np.array([op(m, f, x) for x in rule.nodes])


def symmetry_residual(m: Measure, f: PolynomialTrial, g: PolynomialTrial, rule: QuadratureRule) -> float:
    """|⟨Lf, g⟩_μ - ⟨f, Lg⟩_μ| by Gauss–Hermite quadrature (Gaussian μ)."""
    lf = _values(m, f, rule, apply_L_pointwise)
    lg = _values(m, g, rule, apply_L_pointwise)
    fv = np.array([f.value(x) for x in rule.nodes])
    gv = np.array([g.value(x) for x in rule.nodes])
    return abs(rule.integrate(lf * gv) - rule.integrate(fv * lg))


def dissipativity_residual(m: Measure, f: PolynomialTrial, rule: QuadratureRule) -> float:
    """|⟨Lf, f⟩_μ + ‖∇f‖²_μ|."""
    lf = _values(m, f, rule, apply_L_pointwise)
    fv = np.array([f.value(x) for x in rule.nodes])
    grad2 = np.array([f.gradient(x) @ f.gradient(x) for x in rule.nodes])
    return abs(rule.integrate(lf * fv) + rule.integrate(grad2))


def a_positivity_residual(m: Measure, f: PolynomialTrial, rule: QuadratureRule) -> float:
    """|⟨Af, f⟩_μ - ‖Lf‖²_μ|."""
    af = _values(m, f, rule, apply_A_pointwise)
    lf = _values(m, f, rule, apply_L_pointwise)
    fv = np.array([f.value(x) for x in rule.nodes])
    return abs(rule.integrate(af * fv) - rule.integrate(lf**2))
