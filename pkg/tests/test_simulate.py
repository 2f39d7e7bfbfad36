import csv
import itertools
import warnings

import numpy as np
import pytest

from conftest import design_for
from wiretap_ldpc.analysis import SnrPoint
from wiretap_ldpc.construct import (SystematicEncoder, build_wiretap_matrix, frank_submatrix,
                                    gf2_rank, peg_construct, systematic_layout)
from wiretap_ldpc.degdist import WiretapCodeSpec
from wiretap_ldpc.simulate import (CSV_COLUMNS, BPDecoder, Role, SimResult, StopRule, bp_decode,
                                   clopper_pearson, find_operating_snr, measure_cer, transmit,
                                   write_results_csv)


def _full_rank_peg(degrees, rows):
    n = len(degrees)
    for seed in range(50):
        h = peg_construct(degrees, rows, seed, k_r=n - rows)
        if gf2_rank(h) == rows:
            return systematic_layout(h)
    raise AssertionError("no full-rank code found")


@pytest.fixture(scope="module")
def code48():
    return _full_rank_peg([3] * 48, 24)


@pytest.fixture(scope="module")
def code12():
    h = _full_rank_peg([2] * 6 + [3] * 6, 6)
    dense = h.to_dense().astype(np.int64)
    words = np.array(list(itertools.product((0, 1), repeat=12)), dtype=np.int64)
    book = words[~((words @ dense.T) % 2).any(axis=1)]
    assert len(book) == 64
    return h, book


@pytest.fixture(scope="module")
def wiretap_code(reference_designs):
    d = design_for(reference_designs, 0.45, 0.5)
    spec = WiretapCodeSpec.from_rates(1000, 0.45, 0.5)
    return d, build_wiretap_matrix(spec, d, seed=11)


# --- channel -----------------------------------------------------------------


def test_transmit_noise_statistics():
    rng = np.random.default_rng(1)
    y = transmit(np.zeros(1_000_000, np.uint8), 0.7, rng)
    assert abs(y.mean() - 1.0) < 5e-3
    assert abs(y.var() / 0.7 - 1.0) < 0.01


def test_transmit_noiseless_limit_and_mapping():
    c = np.array([0, 1, 1, 0], np.uint8)
    y = transmit(c, 1e-300, np.random.default_rng(0))
    assert np.array_equal(y, [1.0, -1.0, -1.0, 1.0])
    with pytest.raises(ValueError):
        transmit(c, 0.0, np.random.default_rng(0))


def test_transmit_is_deterministic_given_rng():
    c = np.zeros(16, np.uint8)
    a = transmit(c, 0.5, np.random.default_rng(9))
    b = transmit(c, 0.5, np.random.default_rng(9))
    assert np.array_equal(a, b)


# --- decoder -----------------------------------------------------------------


def test_noiseless_codeword_decodes_immediately(code48):
    h = code48
    dense = h.to_dense().astype(np.int64)
    rng = np.random.default_rng(3)
    enc = SystematicEncoder(h)
    cw = enc.encode(np.zeros(0, np.uint8), rng.integers(0, 2, h.n_cols - h.n_rows, dtype=np.uint8))
    assert not ((dense @ cw) % 2).any()
    res = bp_decode(h, 20.0 * (1.0 - 2.0 * cw))
    assert res.converged and res.iterations <= 1
    assert np.array_equal(res.bits, cw)


def test_coset_symmetry_all_trials(code48):
    h = code48
    dec = BPDecoder(h)
    rng = np.random.default_rng(2024)
    sigma2 = 0.8
    agree = 0
    for _ in range(1000):
        llr = 2.0 * transmit(np.zeros(h.n_cols, np.uint8), sigma2, rng) / sigma2
        x0 = rng.integers(0, 2, h.n_cols, dtype=np.uint8)
        s = h.syndrome(x0)
        base = dec.decode(llr)
        shifted = dec.decode(llr * (1.0 - 2.0 * x0), s)
        agree += (np.array_equal(shifted.bits, base.bits ^ x0)
                  and shifted.converged == base.converged
                  and shifted.iterations == base.iterations)
    assert agree == 1000


def test_bp_matches_ml_on_small_code(code12):
    h, book = code12
    snr = SnrPoint.from_ebn0(6.0, 0.5)
    rng = np.random.default_rng(5)
    signs = 1.0 - 2.0 * book
    dec = BPDecoder(h)
    trials, agree = 1000, 0
    for _ in range(trials):
        c = book[rng.integers(len(book))].astype(np.uint8)
        y = transmit(c, snr.sigma2, rng)
        ml = book[np.argmax(signs @ y)]
        agree += np.array_equal(dec.decode(2.0 * y / snr.sigma2).bits, ml)
    assert agree / trials >= 0.95


def test_decoder_dimension_checks(code48):
    with pytest.raises(ValueError, match="llr length"):
        bp_decode(code48, np.zeros(47))
    with pytest.raises(ValueError, match="syndrome length"):
        bp_decode(code48, np.zeros(48), np.zeros(23, np.uint8))


def test_batch_decode_matches_single(code48):
    h = code48
    dec = BPDecoder(h)
    rng = np.random.default_rng(8)
    llr = 2.0 * transmit(np.zeros((6, h.n_cols), np.uint8), 0.9, rng) / 0.9
    syn = np.zeros((6, h.n_rows), np.uint8)
    bits, ok, it = dec.decode_batch(llr, syn)
    for b in range(6):
        one = dec.decode(llr[b])
        assert np.array_equal(bits[b], one.bits)
        assert bool(ok[b]) == one.converged and int(it[b]) == one.iterations


# --- statistics --------------------------------------------------------------


def test_clopper_pearson_closed_forms():
    lo, hi = clopper_pearson(0, 10)
    assert lo == 0.0 and hi == pytest.approx(1 - 0.025 ** 0.1, rel=1e-10)
    lo, hi = clopper_pearson(10, 10)
    assert hi == 1.0 and lo == pytest.approx(0.025 ** 0.1, rel=1e-10)
    lo, hi = clopper_pearson(30, 100)
    assert lo < 0.3 < hi
    assert clopper_pearson(0, 0) == (0.0, 1.0)


def test_sim_result_invariants():
    snr = SnrPoint.from_ebn0(1.0, 0.5)
    r = SimResult(snr, 200, 4, 30, 100, 5.0)
    assert r.cer == 0.02 and r.ber == 30 / 20000
    with pytest.raises(ValueError):
        SimResult(snr, 10, 11, 0, 100, 1.0)


# --- Monte Carlo -------------------------------------------------------------


@pytest.mark.parametrize("role, rate", [(Role.BOB, 0.5), (Role.FRANK, 0.05 / 0.55)])
def test_high_snr_is_error_free(wiretap_code, role, rate):
    _, h = wiretap_code
    res = measure_cer(h, role, SnrPoint.from_ebn0(10.0, rate), StopRule(1, 1000), seed=4)
    assert res.frames == 1000 and res.frame_errors == 0


def test_measure_cer_independent_of_batch_size(wiretap_code):
    _, h = wiretap_code
    snr = SnrPoint.from_ebn0(0.8, 0.5)
    stop = StopRule(10_000, 96)
    a = measure_cer(h, "bob", snr, stop, seed=7, batch_size=32)
    b = measure_cer(h, "bob", snr, stop, seed=7, batch_size=7)
    assert (a.frame_errors, a.bit_errors, a.avg_iterations) == (
        b.frame_errors, b.bit_errors, b.avg_iterations)
    c = measure_cer(h, "bob", snr, stop, seed=8)
    assert c.frames == 96


def test_cer_nonincreasing_over_sweep(wiretap_code):
    _, h = wiretap_code
    stop = StopRule(10_000, 300)
    res = [measure_cer(h, "bob", SnrPoint.from_ebn0(db, 0.5), stop, seed=1)
           for db in (0.5, 1.0, 1.5, 2.0)]
    for a, b in zip(res, res[1:]):
        assert b.ci[0] <= a.ci[1]
    assert res[0].cer > res[-1].cer


def test_frank_beats_bob_at_same_noise(reference_designs):
    # Frank decodes a lower-rate code on the same channel
    for d in reference_designs:
        spec = WiretapCodeSpec.from_rates(1000, d.secret_rate, d.bob_rate)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            h = build_wiretap_matrix(spec, d, seed=11)
        sigma2 = d.with_thresholds("approx").sigma2_B
        stop = StopRule(20, 200)
        bob = measure_cer(h, "bob", SnrPoint.from_sigma2(sigma2, spec.rate_bob), stop, seed=3)
        frank = measure_cer(h, "frank", SnrPoint.from_sigma2(sigma2, spec.rate_frank), stop,
                            seed=3)
        assert frank.cer < bob.cer, (d.secret_rate, d.bob_rate, frank.cer, bob.cer)


def test_frank_decodes_known_coset(wiretap_code):
    _, h = wiretap_code
    enc = SystematicEncoder(h)
    rng = np.random.default_rng(0)
    m = rng.integers(0, 2, h.k_s, dtype=np.uint8)
    c = enc.encode(m, rng.integers(0, 2, h.k_r, dtype=np.uint8))
    sub = frank_submatrix(h)
    assert np.array_equal(sub.syndrome(c[h.k_s:]), h.syndrome(np.concatenate(
        [m, np.zeros(h.n_cols - h.k_s, np.uint8)])))
    res = bp_decode(sub, 30.0 * (1.0 - 2.0 * c[h.k_s:]), sub.syndrome(c[h.k_s:]))
    assert res.converged and np.array_equal(res.bits, c[h.k_s:])


def test_find_operating_snr_degenerate_target(wiretap_code):
    _, h = wiretap_code
    wp = find_operating_snr(h, "bob", target_cer=1.0, stop=StopRule(1, 10),
                            bracket_db=(-1.0, 4.0))
    assert wp.ebn0_db == pytest.approx(-1.0)


def test_find_operating_snr_is_reproducible(wiretap_code):
    _, h = wiretap_code
    kw = dict(target_cer=0.1, tolerance_db=0.1, stop=StopRule(10, 100), seed=5,
              bracket_db=(0.0, 3.0))
    a = find_operating_snr(h, "bob", **kw)
    b = find_operating_snr(h, "bob", **kw)
    assert a == b and 0.0 < a.ebn0_db <= 3.0


def test_results_csv(tmp_path):
    snr = SnrPoint.from_ebn0(1.5, 0.5)
    path = tmp_path / "r.csv"
    write_results_csv([SimResult(snr, 100, 3, 12, 1000, 4.5)], path)
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert rows[0]["frame_errors"] == "3" and float(rows[0]["cer"]) == 0.03
    assert float(rows[0]["ebn0_db"]) == pytest.approx(1.5)
