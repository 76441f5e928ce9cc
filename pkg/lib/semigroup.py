"""
Spectral propagators for the Gaussian case.

e^{tL} and e^{-tA} act diagonally on Hermite coefficients. The spectral gap
min_{|α| >= 1} |α|² = 1 is explicit, so 0 is a simple eigenvalue of A and
every trajectory converges to its mean at rate e^{-t}.

Propagators act on the finite truncation; e^{-tA} damps high modes, so the
truncation error of a projected datum shrinks with t.
"""

import logging
from dataclasses import dataclass

import numpy as np

from lib.errors import MisuseError
from lib.hermite import SpectralFunction

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EvolutionResult:
    state: SpectralFunction
    time: float
    conserved_mean: float


def _check_time(t: float) -> None:
    if not t >= 0:
        raise MisuseError(f"Time must be >= 0, got {t}")


def evolve_L(s: SpectralFunction, t: float) -> SpectralFunction:
    """c_α ↦ e^{-|α|t} c_α."""
    _check_time(t)
    return s.map_orders(lambda k: np.exp(-k * t))


def evolve_L_result(s: SpectralFunction, t: float) -> EvolutionResult:
    state = evolve_L(s, t)
    return EvolutionResult(state=state, time=float(t), conserved_mean=state.mean)


def evolve_A(s: SpectralFunction, t: float) -> EvolutionResult:
    """c_α ↦ e^{-|α|²t} c_α; the mean c_0 is carried along unchanged."""
    _check_time(t)
    state = s.map_orders(lambda k: np.exp(-(k.astype(float) ** 2) * t))
    return EvolutionResult(state=state, time=float(t), conserved_mean=state.mean)


def asymptotic_projection(s: SpectralFunction) -> SpectralFunction:
    """The constant ∫ f dμ, i.e. the limit of e^{-tA} f."""
    return s.map_orders(lambda k: (k == 0).astype(float))


def resolvent_A(s: SpectralFunction, lam: float) -> SpectralFunction:
    """R(λ, -A) s: c_α ↦ c_α / (λ + |α|²)."""
    if not lam > 0:
        raise MisuseError(f"Resolvent needs λ > 0, got {lam}")
    return s.map_orders(lambda k: 1.0 / (lam + k.astype(float) ** 2))


def ergodic_average(s: SpectralFunction, t: float) -> SpectralFunction:
    """t^{-1} ∫_0^t e^{-rA} s dr."""
    if not t > 0:
        raise MisuseError(f"Ergodic average needs t > 0, got {t}")

    def factor(k):
        eig = k.astype(float) ** 2
        safe = np.where(eig > 0, eig, 1.0)
        return np.where(eig > 0, -np.expm1(-safe * t) / (t * safe), 1.0)

    return s.map_orders(factor)


def distance_to_mean(s: SpectralFunction) -> float:
    """‖s - ∫ s dμ‖."""
    return (s - asymptotic_projection(s)).norm()


def decay_bound_holds(s: SpectralFunction, t: float, tol: float = 1e-12) -> bool:
    """‖e^{-tA}s - mean‖ ≤ e^{-t}‖s - mean‖."""
    evolved = evolve_A(s, t).state
    return distance_to_mean(evolved) <= np.exp(-t) * distance_to_mean(s) * (1 + tol) + tol
