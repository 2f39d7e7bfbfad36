"""Joint design of Bob's and Frank's variable-node degree distributions.

Both codes use concentrated check distributions, so for a fixed mean check
degree the rate constraint is a linear equality in lambda. Containment of
Frank's graph in Bob's graph then becomes linear too: Bob needs at least as
many variable nodes of every degree as Frank, i.e.

    lambda~_B,i >= (1 - R_s) * lambda~_F,i

because Frank's graph has (1 - R_s) n of Bob's n variable nodes. Each
feasibility test is a linear program that maximises a normalised
convergence margin over a log-spaced grid of r values.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.optimize import brentq, linprog

from .analysis import PhiModel, SnrPoint, biawgn_capacity, de_components, get_phi_model
from .degdist import (DegreeDistribution, Perspective, concentrated_rho,
                      format_distribution, frank_rate, parse_distribution, rho_for_mean,
                      to_edge_perspective, to_node_perspective)
from .densevo import CONVERGENCE_EPS, MAX_ITERATIONS, check_constraints, stability_bound, threshold

__all__ = [
    "JointDesign",
    "ContainmentReport",
    "InfeasibleDesignError",
    "verify_containment",
    "optimize_lambda_lp",
    "joint_optimize",
    "best_single_design",
    "edge_rho_for",
    "format_design",
    "parse_design",
    "write_design",
    "read_design",
]

log = logging.getLogger(__name__)

N_GRID = 500
R_MIN = 1e-6
# A relative decrease of at least MARGIN per iteration reaches CONVERGENCE_EPS
# from r_0 <= 1 within MAX_ITERATIONS steps.
MARGIN = math.log(1.0 / CONVERGENCE_EPS) / MAX_ITERATIONS
PRUNE = 1e-10
CONTAINMENT_TOL = 1e-9


class InfeasibleDesignError(RuntimeError):
    def __init__(self, message: str, diagnostics: Sequence[str] = ()):
        self.diagnostics = list(diagnostics)
        super().__init__(message + ("" if not diagnostics else "; " + "; ".join(diagnostics)))


@dataclass(frozen=True)
class ContainmentReport:
    ok: bool
    slack: dict[int, float]

    def __bool__(self):
        return self.ok

    @property
    def worst_degree(self) -> int:
        return min(self.slack, key=self.slack.get)


def verify_containment(lambda_B: DegreeDistribution, lambda_F: DegreeDistribution,
                       secret_rate: float, tol: float = CONTAINMENT_TOL) -> ContainmentReport:
    """Check that Bob has at least as many variable nodes of each degree as Frank.

    Slack at degree i is ``lambda~_B,i - (1 - R_s) lambda~_F,i`` for every
    i in [2, d_v^(F)]; the check passes when every slack is >= -tol.
    """
    nb = to_node_perspective(lambda_B) if lambda_B.perspective is Perspective.EDGE else lambda_B
    nf = to_node_perspective(lambda_F) if lambda_F.perspective is Perspective.EDGE else lambda_F
    share = 1.0 - secret_rate
    slack = {i: nb[i] - share * nf[i] for i in range(2, nf.max_degree + 1)}
    return ContainmentReport(all(v >= -tol for v in slack.values()), slack)


def edge_rho_for(lam: DegreeDistribution, rate: float) -> DegreeDistribution:
    """Edge-perspective concentrated check distribution matching ``lam`` at ``rate``."""
    return to_edge_perspective(concentrated_rho(to_node_perspective(lam), rate))


@dataclass(frozen=True)
class JointDesign:
    """Degree-distribution pair for Bob (full graph) and Frank (subgraph).

    ``sigma2_B``/``sigma2_F`` are the density-evolution thresholds of the
    stored distributions; ``design_sigma2`` is the (Bob, Frank) point at
    which the optimiser certified them.
    """

    secret_rate: float
    bob_rate: float
    lambda_F: DegreeDistribution
    lambda_B: DegreeDistribution
    rho_F: DegreeDistribution
    rho_B: DegreeDistribution
    sigma2_F: float = math.nan
    sigma2_B: float = math.nan
    design_sigma2: tuple[float, float] | None = None
    meta: Mapping[str, object] = field(default_factory=dict)

    @property
    def frank_rate(self) -> float:
        return frank_rate(self.secret_rate, self.bob_rate)

    @property
    def c_star(self) -> float:
        return self.sigma2_B + self.sigma2_F

    @property
    def threshold_B(self) -> SnrPoint:
        return SnrPoint.from_sigma2(self.sigma2_B, self.bob_rate)

    @property
    def threshold_F(self) -> SnrPoint:
        return SnrPoint.from_sigma2(self.sigma2_F, self.frank_rate)

    @classmethod
    def from_lambdas(cls, secret_rate: float, bob_rate: float, lambda_F: DegreeDistribution,
                     lambda_B: DegreeDistribution, **kwargs) -> JointDesign:
        rf = frank_rate(secret_rate, bob_rate)
        return cls(secret_rate, bob_rate, lambda_F, lambda_B, edge_rho_for(lambda_F, rf),
                   edge_rho_for(lambda_B, bob_rate), **kwargs)

    def containment(self) -> ContainmentReport:
        return verify_containment(self.lambda_B, self.lambda_F, self.secret_rate)

    def with_thresholds(self, model: str | PhiModel = "approx") -> JointDesign:
        """Return a copy whose sigma2 fields are recomputed by density evolution."""
        tb = threshold(self.lambda_B, self.rho_B, self.bob_rate, model=model)
        tf = threshold(self.lambda_F, self.rho_F, self.frank_rate, model=model)
        meta = dict(self.meta)
        if tf.saturated or tb.saturated:
            meta["saturated"] = True
        return replace(self, sigma2_B=tb.sigma2, sigma2_F=tf.sigma2, meta=meta)

    def n_distinct_degrees(self) -> int:
        return len(self.lambda_F) + len(self.lambda_B)


# --- linear programs ---------------------------------------------------------


def _r_grid(s: float, model: PhiModel, n_grid: int) -> np.ndarray:
    top = model.phi_scalar(s)
    return np.logspace(math.log10(R_MIN), math.log10(top), n_grid)


@dataclass
class _Block:
    """Constraint rows of one code inside a (possibly joint) LP."""

    degrees: np.ndarray
    rate: float
    rho: DegreeDistribution
    sigma2: float
    offset: int
    model: PhiModel
    n_grid: int

    @property
    def size(self) -> int:
        return len(self.degrees)

    @property
    def inv_moment(self) -> float:
        # sum lambda_i / i fixed by the rate constraint
        return self.rho.inverse_moment() / (1.0 - self.rate)

    def rows(self, n_vars: int):
        s = 2.0 / self.sigma2
        r = _r_grid(s, self.model, self.n_grid)
        h = de_components(s, r, self.degrees, self.rho, self.model)
        a_ub = np.zeros((len(r), n_vars))
        a_ub[:, self.offset:self.offset + self.size] = h / r[:, None]
        a_ub[:, -1] = 1.0  # margin variable t
        b_ub = np.ones(len(r))
        a_eq = np.zeros((2, n_vars))
        a_eq[0, self.offset:self.offset + self.size] = 1.0
        a_eq[1, self.offset:self.offset + self.size] = 1.0 / self.degrees
        b_eq = np.array([1.0, self.inv_moment])
        bounds = [(0.0, 1.0)] * self.size
        if 2 in self.degrees:
            # stability with the same margin: lambda_2 / bound + t <= 1
            stab = np.zeros((1, n_vars))
            stab[0, self.offset + int(np.flatnonzero(self.degrees == 2)[0])] = (
                1.0 / stability_bound(self.rho, self.sigma2))
            stab[0, -1] = 1.0
            a_ub = np.vstack([a_ub, stab])
            b_ub = np.append(b_ub, 1.0)
        return a_ub, b_ub, a_eq, b_eq, bounds

    def extract(self, x: np.ndarray) -> DegreeDistribution | None:
        w = np.array(x[self.offset:self.offset + self.size], dtype=float)
        w[w < PRUNE] = 0.0
        if w.sum() <= 0:
            return None
        w /= w.sum()
        return DegreeDistribution.from_arrays(self.degrees, w)


@dataclass(frozen=True)
class _LpOutcome:
    margin: float
    lambdas: tuple[DegreeDistribution, ...] | None

    @property
    def feasible(self) -> bool:
        return self.lambdas is not None and self.margin >= MARGIN


_INFEASIBLE = _LpOutcome(-math.inf, None)


def _solve(blocks: list[_Block], extra_ub=None, lower: dict[int, float] | None = None,
           upper: dict[int, float] | None = None) -> _LpOutcome:
    n_vars = sum(b.size for b in blocks) + 1
    a_ub, b_ub, a_eq, b_eq, bounds = [], [], [], [], []
    for b in blocks:
        u, bu, e, be, bd = b.rows(n_vars)
        a_ub.append(u)
        b_ub.append(bu)
        a_eq.append(e)
        b_eq.append(be)
        bounds += bd
    bounds.append((-1.0, 1.0))
    for idx, lo in (lower or {}).items():
        bounds[idx] = (max(bounds[idx][0], lo), bounds[idx][1])
    for idx, hi in (upper or {}).items():
        bounds[idx] = (bounds[idx][0], min(bounds[idx][1], hi))
    if any(lo > hi + 1e-15 for lo, hi in bounds):
        return _INFEASIBLE
    if extra_ub is not None:
        a_ub.append(extra_ub[0])
        b_ub.append(extra_ub[1])
    c = np.zeros(n_vars)
    c[-1] = -1.0
    res = linprog(c, A_ub=np.vstack(a_ub), b_ub=np.concatenate(b_ub), A_eq=np.vstack(a_eq),
                  b_eq=np.concatenate(b_eq), bounds=bounds, method="highs")
    if res.status != 0:
        return _INFEASIBLE
    lams = tuple(b.extract(res.x) for b in blocks)
    if any(lam is None for lam in lams):
        return _INFEASIBLE
    return _LpOutcome(float(res.x[-1]), lams)


def _degrees(allowed: Iterable[int] | int) -> np.ndarray:
    if isinstance(allowed, (int, np.integer)):
        return np.arange(2, int(allowed) + 1)
    deg = np.array(sorted(set(int(d) for d in allowed)))
    if deg.size == 0 or deg[0] < 2:
        raise ValueError("allowed degrees must be a nonempty set of integers >= 2")
    return deg


def optimize_lambda_lp(rho: DegreeDistribution, rate: float, sigma2: float,
                       allowed_degrees: Iterable[int] | int = 50,
                       extra_lower_bounds: Mapping[int, float] | None = None, *,
                       model: str | PhiModel = "approx", n_grid: int = N_GRID,
                       max_refinements: int = 2, verify: bool = True) -> DegreeDistribution | None:
    """Variable distribution satisfying C1-C4 at ``sigma2`` for a fixed ``rho``.

    ``extra_lower_bounds`` maps degree -> minimum node fraction (how Frank's
    containment enters Bob's program). Returns ``None`` when infeasible. The
    LP solution is re-checked by the exact fixed-point recursion and the r
    grid is refined when the discretised program was too optimistic.
    """
    if not sigma2 > 0:
        raise ValueError(f"sigma2 must be positive, got {sigma2}")
    rho.require_edge()
    pm = get_phi_model(model)
    deg = _degrees(allowed_degrees)
    for attempt in range(max_refinements + 1):
        block = _Block(deg, rate, rho, sigma2, 0, pm, n_grid * 2**attempt)
        lower = {}
        for d, frac in (extra_lower_bounds or {}).items():
            hits = np.flatnonzero(deg == int(d))
            if frac <= 0:
                continue
            if hits.size == 0:
                return None
            lower[int(hits[0])] = int(d) * frac * block.inv_moment
        out = _solve([block], lower=lower)
        if not out.feasible:
            return None
        lam = out.lambdas[0]
        if not verify or check_constraints(lam, rho, rate, sigma2, model=pm).converged:
            return lam
        log.info("LP grid too coarse at sigma2=%g, refining", sigma2)
    return None


# --- single-code search ------------------------------------------------------


def _shannon_sigma2(rate: float) -> float:
    """Noise variance at which the BI-AWGN capacity equals ``rate``."""
    return 1.0 / brentq(lambda g: biawgn_capacity(g) - rate, 1e-8, 1e4, xtol=1e-12)


def _sigma2_bracket(rate: float) -> tuple[float, float]:
    return 0.05, min(200.0, 2.0 * _shannon_sigma2(rate))


def _golden_max(f, lo: float, hi: float, evals: int):
    """Golden-section maximisation of a unimodal f on [lo, hi]."""
    g = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    x1, x2 = b - g * (b - a), a + g * (b - a)
    f1, f2 = f(x1), f(x2)
    best = max((f1, x1), (f2, x2))
    for _ in range(max(0, evals - 2)):
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - g * (b - a)
            f1 = f(x1)
            best = max(best, (f1, x1))
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + g * (b - a)
            f2 = f(x2)
            best = max(best, (f2, x2))
    return best[1], best[0]


def _mean_var_degree_range(deg: np.ndarray) -> tuple[float, float]:
    # mean variable-node degree; a wide upper end only slows the scan
    top = float(min(deg[-1], 20))
    return float(deg[0]) + 0.02, max(float(deg[0]) + 0.05, top)


@dataclass(frozen=True)
class _SingleOptimum:
    sigma2: float
    mean_var_degree: float
    lam: DegreeDistribution | None
    saturated: bool = False


class _Code:
    """One side of the design: rate, allowed degrees and phi model."""

    def __init__(self, rate: float, deg: np.ndarray, model: PhiModel, n_grid: int):
        self.rate, self.deg, self.model, self.n_grid = rate, deg, model, n_grid

    def rho(self, mean_var_degree: float) -> DegreeDistribution:
        return to_edge_perspective(rho_for_mean(mean_var_degree / (1.0 - self.rate)))

    def block(self, sigma2: float, mean_var_degree: float, offset: int = 0) -> _Block:
        return _Block(self.deg, self.rate, self.rho(mean_var_degree), sigma2, offset, self.model,
                      self.n_grid)

    def margin(self, sigma2: float, a: float) -> _LpOutcome:
        return _solve([self.block(sigma2, a)])


def _best_margin(code: _Code, sigma2: float, window: tuple[float, float], coarse: int,
                 fine: int) -> tuple[float, _LpOutcome]:
    lo, hi = window
    grid = np.geomspace(lo, hi, coarse) if coarse > 1 else np.array([0.5 * (lo + hi)])
    scores = [code.margin(sigma2, a) for a in grid]
    k = int(np.argmax([o.margin for o in scores]))
    if fine <= 0:
        return float(grid[k]), scores[k]
    a_lo, a_hi = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    cache: dict[float, _LpOutcome] = {}

    def f(a):
        cache[a] = code.margin(sigma2, a)
        return cache[a].margin

    a_best, m_best = _golden_max(f, a_lo, a_hi, fine)
    if m_best >= scores[k].margin:
        return a_best, cache[a_best]
    return float(grid[k]), scores[k]


def best_single_design(rate: float, d_v: int | Iterable[int] = 50, *,
                       model: str | PhiModel = "approx", n_grid: int = N_GRID,
                       tol: float = 1e-4) -> _SingleOptimum:
    """Largest sigma^2 for which some concentrated-rho LP design exists."""
    code = _Code(rate, _degrees(d_v), get_phi_model(model), n_grid)
    return _single(code, tol)


def _single(code: _Code, tol: float) -> _SingleOptimum:
    lo, hi = _sigma2_bracket(code.rate)
    window = _mean_var_degree_range(code.deg)
    a_hi, out_hi = _best_margin(code, hi, window, 16, 8)
    if out_hi.feasible:
        return _SingleOptimum(hi, a_hi, out_hi.lambdas[0], saturated=True)
    a_lo, out_lo = _best_margin(code, lo, window, 16, 8)
    if not out_lo.feasible:
        raise InfeasibleDesignError(f"no rate-{code.rate:g} design even at sigma2={lo:g}")
    best = (lo, a_lo, out_lo)
    first = True
    while (hi - lo) > tol * hi:
        mid = 0.5 * (lo + hi)
        if first:
            a, out = _best_margin(code, mid, window, 16, 8)
            first = False
        else:
            w = (max(window[0], best[1] / 1.25), min(window[1], best[1] * 1.25))
            a, out = _best_margin(code, mid, w, 5, 6)
        if out.feasible:
            lo, best = mid, (mid, a, out)
        else:
            hi = mid
    return _SingleOptimum(best[0], best[1], best[2].lambdas[0])


# --- joint search ------------------------------------------------------------


@dataclass(frozen=True)
class _JointPoint:
    sigma2_B: float
    sigma2_F: float
    a_B: float
    a_F: float
    outcome: _LpOutcome

    @property
    def c(self) -> float:
        return self.sigma2_B + self.sigma2_F


class _JointProblem:
    def __init__(self, secret_rate: float, bob: _Code, frank: _Code):
        self.share = 1.0 - secret_rate
        self.bob, self.frank = bob, frank

    def solve(self, s2b: float, s2f: float, a_b: float, a_f: float) -> _LpOutcome:
        fb = self.frank.block(s2f, a_f, 0)
        bb = self.bob.block(s2b, a_b, fb.size)
        n_vars = fb.size + bb.size + 1
        # Bob's node fraction >= share * Frank's node fraction, per degree:
        #   lambda_B,i / (i S_B) >= share * lambda_F,i / (i S_F)
        ratio = self.share * bb.inv_moment / fb.inv_moment
        rows = []
        upper = {}
        for k, d in enumerate(fb.degrees):
            hit = np.flatnonzero(bb.degrees == d)
            if hit.size == 0:
                upper[k] = 0.0
                continue
            row = np.zeros(n_vars)
            row[k] = ratio
            row[fb.size + int(hit[0])] = -1.0
            rows.append(row)
        extra = (np.array(rows), np.zeros(len(rows))) if rows else None
        return _solve([fb, bb], extra_ub=extra, upper=upper)

    def best(self, s2b: float, s2f: float, a_b: float, a_f: float, span: float = 1.2,
             evals: int = 6) -> _JointPoint:
        """Coordinate golden search over the two mean variable degrees."""
        cur = self.solve(s2b, s2f, a_b, a_f)
        for code, which in ((self.bob, "b"), (self.frank, "f")):
            lo_w, hi_w = _mean_var_degree_range(code.deg)
            centre = a_b if which == "b" else a_f
            lo, hi = max(lo_w, centre / span), min(hi_w, centre * span)
            if hi <= lo:
                continue
            cache: dict[float, _LpOutcome] = {}

            def f(a):
                cache[a] = (self.solve(s2b, s2f, a, a_f) if which == "b"
                            else self.solve(s2b, s2f, a_b, a))
                return cache[a].margin

            a_new, m_new = _golden_max(f, lo, hi, evals)
            if m_new > cur.margin:
                cur = cache[a_new]
                if which == "b":
                    a_b = a_new
                else:
                    a_f = a_new
        return _JointPoint(s2b, s2f, a_b, a_f, cur)


def _ray_search(problem: _JointProblem, bob0: _SingleOptimum, frank0: _SingleOptimum,
                theta: float, tol: float) -> _JointPoint | None:
    """Back off from the pair of single-code optima along a ray with split ``theta``.

    Bob's variance shrinks at rate ``theta`` and Frank's at ``1 - theta``
    (relative to their single-code optima); bisection finds the smallest
    feasible backoff.
    """

    def point(tau):
        return (bob0.sigma2 * (1.0 - tau * theta), frank0.sigma2 * (1.0 - tau * (1.0 - theta)))

    def test(tau):
        s2b, s2f = point(tau)
        return problem.best(s2b, s2f, bob0.mean_var_degree, frank0.mean_var_degree)

    best = None
    hit = test(0.0)
    if hit.outcome.feasible:
        return hit
    lo, hi = 0.0, 1.0
    far = test(hi)
    if not far.outcome.feasible:
        return None
    best = far
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        p = test(mid)
        if p.outcome.feasible:
            hi, best = mid, p
        else:
            lo = mid
    return best


def _tie_key(p: _JointPoint, c_tol: float):
    lf, lb = p.outcome.lambdas
    degrees = tuple(sorted(lf.coeffs)) + (0,) + tuple(sorted(lb.coeffs))
    return (-round(p.c / c_tol), len(lf) + len(lb), degrees)


def _verified(problem: _JointProblem, p: _JointPoint, secret_rate: float,
              max_refinements: int = 2) -> _JointPoint | None:
    """Re-check an LP point with the exact recursion, refining the grid as needed."""
    for attempt in range(max_refinements + 1):
        lf, lb = p.outcome.lambdas
        ok_f = check_constraints(lf, edge_rho_for(lf, problem.frank.rate), problem.frank.rate,
                                 p.sigma2_F, model=problem.frank.model).converged
        ok_b = check_constraints(lb, edge_rho_for(lb, problem.bob.rate), problem.bob.rate,
                                 p.sigma2_B, model=problem.bob.model).converged
        if ok_f and ok_b and verify_containment(lb, lf, secret_rate, tol=1e-9):
            return p
        problem.bob.n_grid *= 2
        problem.frank.n_grid *= 2
        out = problem.solve(p.sigma2_B, p.sigma2_F, p.a_B, p.a_F)
        problem.bob.n_grid //= 2
        problem.frank.n_grid //= 2
        if not out.feasible:
            return None
        p = replace(p, outcome=out)
    return None


def _run_ray(args):
    secret_rate, bob, frank, bob0, frank0, theta, tol = args
    problem = _JointProblem(secret_rate, bob, frank)
    p = _ray_search(problem, bob0, frank0, theta, tol)
    return None if p is None else _verified(problem, p, secret_rate)


def joint_optimize(secret_rate: float, bob_rate: float, d_v_B: int | Iterable[int] = 50,
                   d_v_F: int | Iterable[int] = 50, seed: int = 0, *,
                   split_ratios: Sequence[float] | None = None, model: str | PhiModel = "approx",
                   n_grid: int = N_GRID, tol: float = 2e-3, workers: int = 1) -> JointDesign:
    """Maximise c = sigma2_B + sigma2_F subject to C1-C5.

    The search starts from the two single-code optima and, for each split
    ratio, bisects the backoff along a ray towards smaller variances. The
    best verified point wins (ties: fewer distinct degrees, then the
    lexicographically smallest degree sets). ``seed`` is recorded in the
    design metadata; the search itself is deterministic.
    """
    if not 0.0 < secret_rate < bob_rate < 1.0:
        raise ValueError(f"need 0 < R_s < R_B < 1, got R_s={secret_rate}, R_B={bob_rate}")
    pm = get_phi_model(model)
    rf = frank_rate(secret_rate, bob_rate)
    bob = _Code(bob_rate, _degrees(d_v_B), pm, n_grid)
    frank = _Code(rf, _degrees(d_v_F), pm, n_grid)
    diagnostics: list[str] = []

    bob0 = _single(bob, 1e-4)
    frank0 = _single(frank, 1e-4)
    if rf < 0.01:
        diagnostics.append(f"Frank's rate {rf:.3g} is near zero; his variance is limited by "
                           f"the convergence margin (sigma2_F = {frank0.sigma2:.4g}) rather "
                           "than by a capacity gap")
    if frank0.saturated:
        diagnostics.append(f"Frank's rate {rf:.3g} saturates the variance bracket at "
                           f"sigma2={frank0.sigma2:g}")
    if bob0.saturated:
        diagnostics.append(f"Bob's variance bracket saturates at sigma2={bob0.sigma2:g}")
    ratios = list(np.linspace(0.1, 0.9, 17) if split_ratios is None else split_ratios)
    jobs = [(secret_rate, bob, frank, bob0, frank0, float(t), tol) for t in ratios]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            points = list(ex.map(_run_ray, jobs))
    else:
        points = [_run_ray(j) for j in jobs]
    found = [p for p in points if p is not None]
    if not found:
        raise InfeasibleDesignError(
            f"no jointly feasible design for R_s={secret_rate}, R_B={bob_rate}", diagnostics)
    c_tol = 1e-6 * max(p.c for p in found)
    best = min(found, key=lambda p: _tie_key(p, c_tol))
    lf, lb = best.outcome.lambdas
    design = JointDesign.from_lambdas(
        secret_rate, bob_rate, lf, lb, design_sigma2=(best.sigma2_B, best.sigma2_F),
        meta={"seed": int(seed), "d_v_B": int(bob.deg[-1]), "d_v_F": int(frank.deg[-1]),
              "phi_model": pm.name, "single_sigma2_B": bob0.sigma2,
              "single_sigma2_F": frank0.sigma2, "diagnostics": diagnostics})
    design = design.with_thresholds(pm)
    for w in diagnostics:
        log.warning(w)
    return design


# --- file format -------------------------------------------------------------
#
#   # joint-design
#   # secret_rate: 0.4
#   # bob_rate: 0.5
#   # sigma2_B: ...
#   [lambda_F]
#   # perspective: edge
#   # kind: variable
#   2 0.42
#   ...

_SECTIONS = ("lambda_F", "lambda_B", "rho_F", "rho_B")


def format_design(d: JointDesign) -> str:
    head = ["# joint-design", f"# secret_rate: {float(d.secret_rate)!r}", f"# bob_rate: {float(d.bob_rate)!r}",
            f"# frank_rate: {float(d.frank_rate)!r}", f"# sigma2_B: {float(d.sigma2_B)!r}",
            f"# sigma2_F: {float(d.sigma2_F)!r}", f"# c_star: {float(d.c_star)!r}"]
    if np.isfinite(d.sigma2_B):
        head.append(f"# threshold_B_ebn0_db: {float(d.threshold_B.ebn0_db)!r}")
    if np.isfinite(d.sigma2_F):
        head.append(f"# threshold_F_ebn0_db: {float(d.threshold_F.ebn0_db)!r}")
    for key in sorted(d.meta):
        if key != "diagnostics":
            head.append(f"# {key}: {d.meta[key]!r}")
    body = []
    for name in _SECTIONS:
        body.append(f"[{name}]")
        body.append(format_distribution(getattr(d, name)).rstrip("\n"))
    return "\n".join(head + body) + "\n"


def parse_design(text: str) -> JointDesign:
    header: dict[str, str] = {}
    sections: dict[str, list[tuple[int, str]]] = {}
    current = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if s.startswith("[") and s.endswith("]"):
            current = s[1:-1]
            sections[current] = []
        elif current is None:
            key, sep, value = s.lstrip("#").partition(":")
            if sep:
                header[key.strip()] = value.strip()
        else:
            sections[current].append((lineno, line))
    dists = {}
    for name in _SECTIONS:
        if name not in sections:
            raise ValueError(f"design file lacks section [{name}]")
        rows = sections[name]
        dists[name] = parse_distribution([l for _, l in rows],
                                         first_line=rows[0][0] if rows else 1)

    def num(key):
        return float(header[key]) if key in header else math.nan

    return JointDesign(num("secret_rate"), num("bob_rate"), dists["lambda_F"], dists["lambda_B"],
                       dists["rho_F"], dists["rho_B"], num("sigma2_F"), num("sigma2_B"))


def write_design(d: JointDesign, path: str | Path) -> None:
    Path(path).write_text(format_design(d))


def read_design(path: str | Path) -> JointDesign:
    return parse_design(Path(path).read_text())
