import math
import warnings

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import design_for
from wiretap_ldpc.construct import (ConstructionError, SparseParityCheck, SystematicEncoder,
                                    build_wiretap_matrix, frank_submatrix, gf2_rank, girth,
                                    has_four_cycles, peg_construct, quantize_distribution,
                                    read_alist, write_alist)
from wiretap_ldpc.degdist import DegreeDistribution, Perspective, WiretapCodeSpec, to_node_perspective


def _nx_girth(h):
    g = nx.Graph()
    for j in range(h.n_cols):
        for i in h.column(j):
            g.add_edge(("v", j), ("c", int(i)))
    return nx.girth(g)


def _dense_rank(a):
    a = a.copy() % 2
    rank = 0
    for c in range(a.shape[1]):
        rows = np.nonzero(a[rank:, c])[0]
        if len(rows) == 0:
            continue
        p = rank + rows[0]
        a[[rank, p]] = a[[p, rank]]
        for i in range(a.shape[0]):
            if i != rank and a[i, c]:
                a[i] ^= a[rank]
        rank += 1
        if rank == a.shape[0]:
            break
    return rank


def test_quantize_examples():
    assert quantize_distribution(DegreeDistribution({3: 1.0}, Perspective.NODE), 100) == {3: 100}
    # equal remainders: the larger degree takes the extra node
    half = DegreeDistribution({2: 0.5, 3: 0.5}, Perspective.NODE)
    assert quantize_distribution(half, 7) == {2: 3, 3: 4}
    with pytest.raises(ValueError):
        quantize_distribution(half, 0)


def test_quantize_reference_design(reference_designs):
    d = design_for(reference_designs, 0.5, 0.75)
    node = to_node_perspective(d.lambda_B)
    counts = quantize_distribution(node, 10000)
    assert sum(counts.values()) == 10000
    for deg, frac in node:
        assert abs(counts.get(deg, 0) / 10000 - frac) <= 1e-4


@given(st.lists(st.floats(0.01, 1.0), min_size=1, max_size=8), st.integers(1, 5000))
@settings(max_examples=80, deadline=None)
def test_quantize_sums_and_rounds(raw, n):
    w = np.array(raw) / sum(raw)
    node = DegreeDistribution.from_arrays(np.arange(2, 2 + len(w)), w, Perspective.NODE)
    counts = quantize_distribution(node, n)
    assert sum(counts.values()) == n
    for deg, frac in node:
        assert abs(counts.get(deg, 0) - frac * n) < 1.0


def test_peg_tiny_graphs_against_exhaustive_girth():
    h3 = peg_construct([2, 2, 2], 3, seed=0)
    assert girth(h3) == _nx_girth(h3) == 6
    # four degree-2 columns on three rows must repeat a row pair
    h4 = peg_construct([2, 2, 2, 2], 3, seed=0)
    assert girth(h4) == _nx_girth(h4) == 4
    assert has_four_cycles(h4) and not has_four_cycles(h3)


def test_peg_regular_36():
    h = peg_construct([3] * 24, 12, seed=3)
    assert np.all(h.col_degrees() == 3)
    assert set(h.row_degrees()) <= {5, 6, 7}
    assert h.row_degrees().sum() == h.col_degrees().sum() == h.n_edges


@given(st.integers(0, 10_000), st.integers(12, 40))
@settings(max_examples=25, deadline=None)
def test_girth_matches_networkx(seed, n):
    rng = np.random.default_rng(seed)
    deg = rng.integers(2, 4, n)
    h = peg_construct(deg, n // 2, seed=seed)
    assert girth(h) == _nx_girth(h)
    assert np.array_equal(h.col_degrees(), np.sort(deg)) or sorted(h.col_degrees()) == sorted(deg)


def test_peg_errors():
    with pytest.raises(ConstructionError):
        peg_construct([5, 2], 4)
    with pytest.raises(ConstructionError):
        peg_construct([1, 2], 4)


def test_gf2_rank_matches_dense_oracle():
    rng = np.random.default_rng(7)
    for _ in range(10):
        dense = (rng.random((12, 30)) < 0.2).astype(np.uint8)
        dense[:, rng.integers(0, 30)] = 0
        h = SparseParityCheck.from_dense(dense)
        assert gf2_rank(h) == _dense_rank(dense)


@pytest.fixture(scope="module")
def wiretap_1000(reference_designs):
    d = design_for(reference_designs, 0.45, 0.5)
    spec = WiretapCodeSpec.from_rates(1000, 0.45, 0.5)
    return spec, d, build_wiretap_matrix(spec, d, seed=11)


def test_wiretap_matrix_realises_both_distributions(wiretap_1000):
    spec, d, h = wiretap_1000
    assert (h.k_s, h.k_r, h.r) == (spec.k_s, spec.k_r, spec.r)
    bob = quantize_distribution(d.lambda_B, spec.n)
    frank = quantize_distribution(d.lambda_F, spec.n_frank)
    assert h.degree_counts() == bob
    assert h.degree_counts(spec.k_s) == frank
    assert not has_four_cycles(h)
    assert h.row_degrees().sum() == h.n_edges
    assert gf2_rank(h) == h.n_rows


def test_four_cycles_forced_by_pair_count(reference_designs):
    # every column of degree d uses C(d, 2) row pairs; a 4-cycle-free matrix
    # needs them all distinct, which this design cannot meet on 250 rows
    d = design_for(reference_designs, 0.6, 0.75)
    spec = WiretapCodeSpec.from_rates(1000, 0.6, 0.75)
    counts = quantize_distribution(d.lambda_B, spec.n)
    demand = sum(c * math.comb(k, 2) for k, c in counts.items())
    assert demand > math.comb(spec.r, 2)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        h = build_wiretap_matrix(spec, d, seed=11)
    assert has_four_cycles(h)


def test_frank_submatrix_view(wiretap_1000):
    spec, _, h = wiretap_1000
    sub = frank_submatrix(h)
    assert sub.n_cols == spec.k_r + spec.r and sub.n_rows == h.n_rows
    assert np.shares_memory(sub.indices, h.indices)
    assert np.array_equal(sub.to_dense(), h.to_dense()[:, spec.k_s:])


def test_encoder_and_frank_syndrome(wiretap_1000):
    _, _, h = wiretap_1000
    enc = SystematicEncoder(h)
    rng = np.random.default_rng(0)
    dense = h.to_dense().astype(np.int64)
    for _ in range(5):
        m = rng.integers(0, 2, h.k_s)
        r = rng.integers(0, 2, h.k_r)
        c = enc.encode(m, r)
        assert np.array_equal(c[:h.k_s], m) and np.array_equal(c[h.k_s:h.k_s + h.k_r], r)
        assert not h.syndrome(c).any()
        # H' [R | P]^T = A M^T
        assert np.array_equal(frank_submatrix(h).syndrome(c[h.k_s:]), dense[:, :h.k_s] @ m % 2)


def test_construction_is_deterministic(reference_designs, wiretap_1000):
    spec, d, h = wiretap_1000
    again = build_wiretap_matrix(spec, d, seed=11)
    assert np.array_equal(again.indptr, h.indptr) and np.array_equal(again.indices, h.indices)
    other = build_wiretap_matrix(spec, d, seed=12)
    assert not np.array_equal(other.indices, h.indices)


def test_all_random_message_has_empty_a(reference_designs):
    d = design_for(reference_designs, 0.5, 0.75)
    spec = WiretapCodeSpec(400, 0, 200, 200)
    from dataclasses import replace
    d0 = replace(d, secret_rate=0.0, bob_rate=0.5, lambda_B=d.lambda_F)
    h = build_wiretap_matrix(spec, d0, seed=1)
    assert h.k_s == 0
    assert np.array_equal(frank_submatrix(h).to_dense(), h.to_dense())


def test_alist_round_trip(wiretap_1000, tmp_path):
    _, _, h = wiretap_1000
    path = tmp_path / "h.alist"
    write_alist(h, path)
    back = read_alist(path)
    assert (back.k_s, back.k_r, back.seed) == (h.k_s, h.k_r, h.seed)
    assert np.array_equal(back.indptr, h.indptr) and np.array_equal(back.indices, h.indices)
    assert path.read_text().splitlines()[0] == f"{h.n_cols} {h.n_rows}"


def test_matrix_validation():
    with pytest.raises(ValueError):
        SparseParityCheck(3, np.array([0, 2]), np.array([1, 1]))
    with pytest.raises(ValueError):
        SparseParityCheck(3, np.array([0, 1]), np.array([5]))
