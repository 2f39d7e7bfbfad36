import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wiretap_ldpc.degdist import (DegreeDistribution, DistributionFormatError, Kind, Perspective,
                                  WiretapCodeSpec, concentrated_rho, design_rate,
                                  format_distribution, frank_rate, parse_distribution,
                                  read_distribution, rho_for_mean, to_edge_perspective,
                                  to_node_perspective)
from wiretap_ldpc.jointopt import edge_rho_for


@st.composite
def distributions(draw, max_degree=50):
    degrees = draw(st.lists(st.integers(2, max_degree), min_size=1, max_size=8, unique=True))
    raw = draw(st.lists(st.floats(1e-3, 1.0), min_size=len(degrees), max_size=len(degrees)))
    w = np.array(raw) / sum(raw)
    return DegreeDistribution.from_arrays(degrees, w)


@given(distributions())
@settings(max_examples=100, deadline=None)
def test_perspective_round_trip(lam):
    back = to_edge_perspective(to_node_perspective(lam))
    assert back.close_to(lam, 1e-12)
    assert to_node_perspective(lam).perspective is Perspective.NODE


@given(distributions(), st.floats(0.05, 0.9))
@settings(max_examples=100, deadline=None)
def test_concentrated_rho_structure(lam, rate):
    node = to_node_perspective(lam)
    c_m = node.mean_degree() / (1 - rate)
    if c_m < 2:
        return
    rho = concentrated_rho(node, rate)
    assert rho.kind is Kind.CHECK and rho.perspective is Perspective.NODE
    assert len(rho) <= 2
    if len(rho) == 2:
        lo, hi = rho.degrees
        assert hi == lo + 1
    assert rho.mean_degree() == pytest.approx(c_m, rel=1e-12)
    # the matching edge-perspective pair has the requested design rate
    assert design_rate(lam, edge_rho_for(lam, rate)) == pytest.approx(rate, abs=1e-12)


def test_concentrated_rho_examples():
    assert rho_for_mean(6.0).coeffs == {6: 1.0}
    r = rho_for_mean(6.25)
    assert r[6] == pytest.approx(0.75) and r[7] == pytest.approx(0.25)
    with pytest.raises(ValueError):
        rho_for_mean(1.5)


def test_distribution_validation():
    with pytest.raises(ValueError):
        DegreeDistribution({1: 1.0})
    with pytest.raises(ValueError):
        DegreeDistribution({2: 0.5, 3: 0.4})
    with pytest.raises(ValueError):
        DegreeDistribution({})
    d = DegreeDistribution({2: 0.5, 3: 0.5, 7: 0.0})
    assert list(d.degrees) == [2, 3] and d[7] == 0.0
    assert d.derivative_at_one() == pytest.approx(1.5)
    assert d.inverse_moment() == pytest.approx(0.5 / 2 + 0.5 / 3)
    with pytest.raises(ValueError):
        to_edge_perspective(d)


def test_format_parse_round_trip():
    d = DegreeDistribution({2: 0.25, 3: 0.3, 12: 0.45})
    back = parse_distribution(format_distribution(d).splitlines())
    assert back == d
    assert read_distribution(io.StringIO(format_distribution(d))) == d


def test_parse_errors_carry_line_numbers():
    with pytest.raises(DistributionFormatError) as exc:
        parse_distribution(["# kind: variable", "2 0.5", "three 0.5"])
    assert exc.value.line == 3
    with pytest.raises(DistributionFormatError):
        parse_distribution(["2 0.5", "2 0.5"])
    # small print-rounding drift is renormalised
    d = parse_distribution(["2 0.5", "3 0.50001"])
    assert d.weights.sum() == pytest.approx(1.0, abs=1e-12)


def test_wiretap_spec_partition():
    spec = WiretapCodeSpec.from_rates(10000, 0.5, 0.75)
    assert (spec.k_s, spec.k_r, spec.r) == (5000, 2500, 2500)
    assert spec.n_frank == 5000
    assert spec.rate_frank == pytest.approx(frank_rate(0.5, 0.75)) == pytest.approx(0.5)
    assert WiretapCodeSpec.from_rates(1000, 0.0, 0.5).k_s == 0
    with pytest.raises(ValueError):
        WiretapCodeSpec(10, 5, 5, 0)
    with pytest.raises(ValueError):
        WiretapCodeSpec.from_rates(100, 0.6, 0.5)


def test_frank_rate_examples():
    assert frank_rate(0.725, 0.75) == pytest.approx(1 / 11)
    assert frank_rate(0.4, 0.5) == pytest.approx(1 / 6)
