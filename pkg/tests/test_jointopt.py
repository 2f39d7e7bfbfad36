import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import design_for
from wiretap_ldpc.analysis import SnrPoint
from wiretap_ldpc.degdist import (DegreeDistribution, Perspective, rho_for_mean,
                                  to_edge_perspective, to_node_perspective)
from wiretap_ldpc.densevo import check_constraints
from wiretap_ldpc.jointopt import (InfeasibleDesignError, best_single_design,
                                   edge_rho_for, format_design, joint_optimize, optimize_lambda_lp,
                                   parse_design, read_design, verify_containment, write_design)


def test_containment_equal_distributions():
    lam = DegreeDistribution({2: 0.3, 3: 0.3, 8: 0.4})
    rep = verify_containment(lam, lam, 0.4)
    assert rep.ok and min(rep.slack.values()) >= 0


def test_containment_detects_swapped_pair():
    lam_f = DegreeDistribution({2: 0.6, 3: 0.4})
    lam_b = DegreeDistribution({2: 0.1, 3: 0.9})
    rep = verify_containment(lam_b, lam_f, 0.2)
    assert not rep.ok
    assert rep.worst_degree == 2 and rep.slack[2] < 0


@st.composite
def node_dists(draw):
    deg = draw(st.lists(st.integers(2, 20), min_size=1, max_size=5, unique=True))
    w = np.array(draw(st.lists(st.floats(0.01, 1), min_size=len(deg), max_size=len(deg))))
    return DegreeDistribution.from_arrays(deg, w / w.sum(), Perspective.NODE)


@given(node_dists(), node_dists(), st.floats(0.05, 0.9))
@settings(max_examples=60, deadline=None)
def test_containment_holds_for_node_mixtures(frank, extra, rs):
    # Bob = Frank's (1 - R_s) n nodes plus R_s n arbitrary extra nodes
    keys = set(frank.coeffs) | set(extra.coeffs)
    mix = {d: (1 - rs) * frank[d] + rs * extra[d] for d in keys}
    bob = DegreeDistribution.from_weights(mix, Perspective.NODE)
    assert verify_containment(bob, frank, rs).ok


def test_reference_containment_per_column(reference_designs):
    flags = {(d.secret_rate, d.bob_rate): d.containment().ok for d in reference_designs}
    assert all(ok for key, ok in flags.items() if key != (0.33, 0.35))
    # the (0.33, 0.35) pair has fewer Bob degree-2 nodes than Frank's subgraph needs
    assert not flags[(0.33, 0.35)]


def test_lp_feasible_in_slack_regime():
    rho = to_edge_perspective(rho_for_mean(7.0))
    lam = optimize_lambda_lp(rho, 0.5, 0.5, 30)
    assert lam is not None
    assert check_constraints(lam, rho, 0.5, 0.5).converged
    # the rate equality holds for the returned distribution
    assert lam.inverse_moment() == pytest.approx(rho.inverse_moment() / 0.5, abs=1e-9)


def test_lp_infeasible_beyond_shannon():
    rho = edge_rho_for(DegreeDistribution({3: 0.5, 10: 0.5}), 0.5)
    # BI-AWGN capacity 0.5 is reached at sigma2 ~ 0.958
    assert optimize_lambda_lp(rho, 0.5, 1.0, 50) is None


def test_lp_with_containment_lower_bounds(reference_designs, working_points):
    d = design_for(reference_designs, 0.45, 0.5)
    wp = next(w for w in working_points if w.secret_rate == 0.45)
    sigma2 = SnrPoint.from_ebn0(wp.threshold_B + 0.02, 0.5).sigma2
    lam_f_node = to_node_perspective(d.lambda_F)
    bounds = {i: (1 - 0.45) * lam_f_node[i] for i in lam_f_node.degrees}
    lam_b = optimize_lambda_lp(d.rho_B, 0.5, sigma2, 50, bounds)
    assert lam_b is not None
    assert verify_containment(lam_b, d.lambda_F, 0.45).ok
    assert check_constraints(lam_b, d.rho_B, 0.5, sigma2).converged


def test_single_design_is_verified():
    opt = best_single_design(0.5, 12)
    rho = edge_rho_for(opt.lam, 0.5)
    assert check_constraints(opt.lam, rho, 0.5, opt.sigma2).converged
    # a degree-12 irregular design beats the (3, 6) ensemble (sigma2 ~ 0.765)
    assert opt.sigma2 > 0.8


@pytest.fixture(scope="module")
def small_design():
    return joint_optimize(0.4, 0.5, 12, 12, seed=5, split_ratios=[0.5])


def test_joint_design_satisfies_all_constraints(small_design):
    d = small_design
    s2b, s2f = d.design_sigma2
    assert check_constraints(d.lambda_B, d.rho_B, 0.5, s2b).converged
    assert check_constraints(d.lambda_F, d.rho_F, d.frank_rate, s2f).converged
    assert d.containment().ok
    assert d.c_star == pytest.approx(d.sigma2_B + d.sigma2_F)
    # thresholds of the stored distributions are at least the certified point
    assert d.sigma2_B >= s2b - 1e-5 and d.sigma2_F >= s2f - 1e-5
    assert d.meta["seed"] == 5


def test_joint_design_is_deterministic(small_design):
    again = joint_optimize(0.4, 0.5, 12, 12, seed=5, split_ratios=[0.5])
    assert format_design(again) == format_design(small_design)


def test_design_file_round_trip(small_design, tmp_path):
    path = tmp_path / "design.txt"
    write_design(small_design, path)
    back = read_design(path)
    assert back.lambda_B == small_design.lambda_B and back.rho_F == small_design.rho_F
    assert back.sigma2_B == small_design.sigma2_B
    assert parse_design(format_design(back)).c_star == pytest.approx(small_design.c_star)


def test_c_star_grows_with_degree_budget():
    c = [joint_optimize(0.4, 0.5, dv, dv, split_ratios=[0.5]).c_star for dv in (6, 12)]
    assert c[1] >= c[0] - 1e-4


def test_near_zero_frank_rate_is_diagnosed():
    d = joint_optimize(0.499, 0.5, 8, 8, split_ratios=[0.5])
    assert any("near zero" in msg for msg in d.meta["diagnostics"])
    assert d.containment().ok


def test_invalid_rates():
    with pytest.raises(ValueError):
        joint_optimize(0.5, 0.4)


def test_infeasible_schedule_raises():
    # with only degree 2 available no rate-0.5 code converges anywhere
    with pytest.raises(InfeasibleDesignError):
        joint_optimize(0.2, 0.5, [2], [2], split_ratios=[0.5])
