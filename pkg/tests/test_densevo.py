import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wiretap_ldpc.degdist import DegreeDistribution, Kind
from wiretap_ldpc.densevo import (Constraint, NoThresholdError, check_constraints, de_trajectory,
                                  stability_bound, threshold)
from wiretap_ldpc.jointopt import edge_rho_for

LAM36 = DegreeDistribution({3: 1.0})
RHO36 = DegreeDistribution({6: 1.0}, kind=Kind.CHECK)


def _chung(x):
    if x <= 0:
        return 1.0
    if x < 10:
        return min(1.0, math.exp(-0.4527 * x**0.86 + 0.0218))
    return math.sqrt(math.pi / x) * math.exp(-x / 4) * (1 - 10 / (7 * x))


def _chung_inv(y):
    lo, hi = 0.0, 2000.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if _chung(mid) > y else (lo, mid)
    return 0.5 * (lo + hi)


def _oracle_converges(sigma2, dv=3, dc=6, iters=5000):
    """Independent scalar recursion for a regular code."""
    s = 2 / sigma2
    r = _chung(s)
    for _ in range(iters):
        nxt = _chung(s + (dv - 1) * _chung_inv(1 - (1 - r) ** (dc - 1)))
        if nxt < 1e-7:
            return True
        if abs(nxt - r) < 1e-10:
            return False
        r = nxt
    return False


def test_regular_36_threshold_matches_literature():
    t = threshold(LAM36, RHO36, 0.5)
    # Gaussian-approximation threshold of the (3, 6) ensemble: sigma ~ 0.8747
    assert math.sqrt(t.sigma2) == pytest.approx(0.8747, abs=2e-3)
    assert not t.saturated


def test_regular_36_threshold_matches_independent_recursion():
    t = threshold(LAM36, RHO36, 0.5)
    assert _oracle_converges(t.sigma2 - 2e-4)
    assert not _oracle_converges(t.sigma2 + 2e-4)


def test_verdicts_report_first_violation():
    ok = check_constraints(LAM36, RHO36, 0.5, 0.6)
    assert ok.converged and ok.violated_constraint is None and bool(ok)
    assert ok.final_r < 1e-7
    bad = check_constraints(LAM36, RHO36, 0.5, 0.9)
    assert bad.violated_constraint is Constraint.C3
    wrong_rate = check_constraints(LAM36, RHO36, 0.4, 0.6)
    assert wrong_rate.violated_constraint is Constraint.C1
    lam = DegreeDistribution({2: 0.9, 3: 0.1})
    rho = edge_rho_for(lam, 0.5)
    v = check_constraints(lam, rho, 0.5, 0.5)
    assert v.violated_constraint is Constraint.C4
    assert v.stability_bound == pytest.approx(stability_bound(rho, 0.5))
    drift = DegreeDistribution({3: 0.5, 4: 0.5 + 5e-10})
    assert check_constraints(drift, RHO36, 0.5, 0.6).violated_constraint is Constraint.C2


def test_stability_bound_formula():
    assert stability_bound(RHO36, 0.5) == pytest.approx(math.exp(1.0) / 5.0)


def test_trajectory_is_decreasing_below_threshold():
    traj = de_trajectory(LAM36, RHO36, 0.7)
    assert traj[-1] < 1e-7
    assert np.all(np.diff(traj) < 0)


@given(st.floats(0.3, 1.2), st.floats(0.01, 0.3))
@settings(max_examples=25, deadline=None)
def test_convergence_is_monotone_in_noise(sigma2, delta):
    if check_constraints(LAM36, RHO36, 0.5, sigma2).converged:
        assert check_constraints(LAM36, RHO36, 0.5, sigma2 - delta * sigma2).converged


def test_bracket_edges():
    # very low rate code converges everywhere on a small bracket: saturated
    lam = DegreeDistribution({3: 1.0})
    rho = DegreeDistribution({4: 1.0}, kind=Kind.CHECK)
    t = threshold(lam, rho, 0.25, bracket=(0.1, 0.2), max_expansions=0)
    assert t.saturated and t.sigma2 == 0.2
    # the bracket expands upward until it straddles the threshold
    t2 = threshold(LAM36, RHO36, 0.5, bracket=(0.1, 0.3))
    assert math.sqrt(t2.sigma2) == pytest.approx(0.8747, abs=2e-3)
    with pytest.raises(NoThresholdError):
        threshold(LAM36, RHO36, 0.5, bracket=(3.0, 4.0), max_expansions=0)
    with pytest.raises(ValueError):
        threshold(LAM36, RHO36, 0.5, bracket=(1.0, 0.5))

