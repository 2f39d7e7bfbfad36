"""Convergence constraints and threshold search for a single (lambda, rho) pair."""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .analysis import PhiModel, SnrPoint, get_phi_model
from .degdist import DegreeDistribution

__all__ = [
    "Constraint",
    "ConvergenceVerdict",
    "ThresholdResult",
    "NoThresholdError",
    "check_constraints",
    "stability_bound",
    "threshold",
    "de_trajectory",
]

log = logging.getLogger(__name__)

CONVERGENCE_EPS = 1e-7
MAX_ITERATIONS = 5000
STALL_EPS = 1e-10
RATE_TOL = 1e-9
SUM_TOL = 1e-12


class Constraint(str, enum.Enum):
    C1 = "C1"  # rate
    C2 = "C2"  # normalisation
    C3 = "C3"  # convergence of the fixed-point recursion
    C4 = "C4"  # stability of the zero-error fixed point


class NoThresholdError(RuntimeError):
    """Density evolution does not converge anywhere on the search bracket."""


@dataclass(frozen=True)
class ConvergenceVerdict:
    converged: bool
    iterations_used: int
    final_r: float
    violated_constraint: Constraint | None = None
    stability_bound: float = math.inf
    rate_residual: float = 0.0

    def __post_init__(self):
        if self.converged == (self.violated_constraint is not None):
            raise ValueError("violated_constraint must be set iff not converged")

    def __bool__(self) -> bool:
        return self.converged


@dataclass(frozen=True)
class ThresholdResult:
    """Largest noise variance at which all constraints hold."""

    sigma2: float
    rate: float
    saturated: bool = False
    bracket: tuple[float, float] = field(default=(0.0, 0.0))

    @property
    def snr(self) -> SnrPoint:
        return SnrPoint.from_sigma2(self.sigma2, self.rate)

    @property
    def ebn0_db(self) -> float:
        return self.snr.ebn0_db

    @property
    def s(self) -> float:
        return 2.0 / self.sigma2


def stability_bound(rho: DegreeDistribution, sigma2: float) -> float:
    """Upper limit on lambda_2: ``exp(1 / (2 sigma^2)) / sum_j rho_j (j - 1)``."""
    return math.exp(1.0 / (2.0 * sigma2)) / rho.derivative_at_one()


class _Recursion:
    """Scalar recursion r <- h(s, r) with the distribution arrays unpacked."""

    def __init__(self, lam: DegreeDistribution, rho: DegreeDistribution, model: PhiModel):
        self.model = model
        self.lam_deg1 = lam.degrees.astype(float) - 1.0
        self.lam_w = lam.weights
        self.rho_deg1 = rho.degrees.astype(float) - 1.0
        self.rho_w = rho.weights

    def step(self, s: float, r: float) -> float:
        arg = -np.expm1(self.rho_deg1 * math.log1p(-r)) if r < 1.0 else np.ones_like(self.rho_w)
        m = float(self.model.phi_inv(arg) @ self.rho_w)
        return float(self.model.phi(s + self.lam_deg1 * m) @ self.lam_w)


def de_trajectory(lam, rho, sigma2, *, model="approx", max_iterations=MAX_ITERATIONS,
                  convergence_eps=CONVERGENCE_EPS, stall_eps=STALL_EPS):
    """Run r_0 = phi(s), r_l = h(s, r_{l-1}) and return the visited values."""
    pm = get_phi_model(model)
    rec = _Recursion(lam, rho, pm)
    s = 2.0 / sigma2
    r = pm.phi_scalar(s)
    out = [r]
    for _ in range(max_iterations):
        r_next = rec.step(s, r)
        out.append(r_next)
        if r_next < convergence_eps or abs(r_next - r) < stall_eps:
            break
        r = r_next
    return np.array(out)


def check_constraints(lam: DegreeDistribution, rho: DegreeDistribution, target_rate: float,
                      sigma2: float, *, model: str | PhiModel = "approx",
                      convergence_eps: float = CONVERGENCE_EPS,
                      max_iterations: int = MAX_ITERATIONS,
                      stall_eps: float = STALL_EPS) -> ConvergenceVerdict:
    """Check C1-C4 for edge-perspective ``lam``/``rho`` at noise variance ``sigma2``.

    Constraints are tested in the order C2, C1, C4, C3 and the first failure
    is reported; C3 is decided by iterating the recursion until r drops below
    ``convergence_eps`` (converged), stalls, or ``max_iterations`` runs out.
    """
    if not sigma2 > 0:
        raise ValueError(f"sigma2 must be positive, got {sigma2}")
    lam.require_edge()
    rho.require_edge()
    pm = get_phi_model(model)
    s = 2.0 / sigma2

    bound = stability_bound(rho, sigma2)
    residual = lam.inverse_moment() - rho.inverse_moment() / (1.0 - target_rate)

    def fail(c, it=0, r=1.0):
        return ConvergenceVerdict(False, it, r, c, bound, residual)

    if abs(lam.weights.sum() - 1.0) > SUM_TOL or abs(rho.weights.sum() - 1.0) > SUM_TOL:
        return fail(Constraint.C2)
    if abs(residual) > RATE_TOL:
        return fail(Constraint.C1)
    if not lam[2] < bound:
        return fail(Constraint.C4)

    rec = _Recursion(lam, rho, pm)
    r = pm.phi_scalar(s)
    for it in range(1, max_iterations + 1):
        r_next = rec.step(s, r)
        if r_next < convergence_eps:
            return ConvergenceVerdict(True, it, r_next, None, bound, residual)
        if abs(r_next - r) < stall_eps:
            return fail(Constraint.C3, it, r_next)
        r = r_next
    return fail(Constraint.C3, max_iterations, r)


def threshold(lam: DegreeDistribution, rho: DegreeDistribution, target_rate: float, *,
              bracket: tuple[float, float] = (0.1, 4.0), max_expansions: int = 3,
              tol: float = 1e-5, model: str | PhiModel = "approx",
              **check_kwargs) -> ThresholdResult:
    """Bisection on sigma^2 for the largest variance satisfying C1-C4.

    When the verdict is the same at both ends of ``bracket`` the bracket is
    widened by a factor of two on the relevant side, at most
    ``max_expansions`` times. A bracket that still converges everywhere gives
    a saturated result at its upper edge.
    """
    lo, hi = map(float, bracket)
    if not 0 < lo < hi:
        raise ValueError(f"invalid bracket {bracket}")
    pm = get_phi_model(model)

    def ok(v):
        return check_constraints(lam, rho, target_rate, v, model=pm, **check_kwargs).converged

    ok_lo, ok_hi = ok(lo), ok(hi)
    for _ in range(max_expansions):
        if ok_lo and ok_hi:
            lo, ok_lo = hi, True
            hi *= 2.0
            ok_hi = ok(hi)
        elif not ok_lo and not ok_hi:
            hi, ok_hi = lo, False
            lo /= 2.0
            ok_lo = ok(lo)
        else:
            break
    if not ok_lo:
        verdict = check_constraints(lam, rho, target_rate, lo, model=pm, **check_kwargs)
        raise NoThresholdError(
            f"no convergence down to sigma2={lo:g} (violated {verdict.violated_constraint})")
    if ok_hi:
        log.warning("threshold search saturated at sigma2=%g", hi)
        return ThresholdResult(hi, target_rate, True, (lo, hi))
    start = (lo, hi)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return ThresholdResult(lo, target_rate, False, start)
