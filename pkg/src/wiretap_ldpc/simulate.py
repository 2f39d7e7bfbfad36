"""BPSK/AWGN Monte-Carlo simulation with sum-product decoding.

Bob decodes the full matrix against a zero syndrome. Frank knows the secret
message M, so he decodes H' = [B | C] against the syndrome s = A M^T.
"""

from __future__ import annotations

import contextlib
import csv
import enum
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, TextIO

import numba as nb
import numpy as np
from scipy.stats import beta

from .analysis import SnrPoint
from .construct import SparseParityCheck, SystematicEncoder, frank_submatrix

__all__ = [
    "Role",
    "StopRule",
    "SimResult",
    "BPResult",
    "transmit",
    "bp_decode",
    "BPDecoder",
    "measure_cer",
    "find_operating_snr",
    "clopper_pearson",
    "write_results_csv",
    "CSV_COLUMNS",
]

log = logging.getLogger(__name__)

MAX_ITERS = 100
TANH_MAX = 1.0 - 1e-15  # caps check messages near +-36.7
CSV_COLUMNS = ("ebn0_db", "sigma2", "frames", "frame_errors", "cer", "ci_lo", "ci_hi", "ber",
               "avg_iters")


class Role(str, enum.Enum):
    BOB = "bob"
    FRANK = "frank"


@dataclass(frozen=True)
class StopRule:
    min_errors: int = 100
    max_frames: int = 1_000_000

    def __post_init__(self):
        if self.min_errors < 1 or self.max_frames < 1:
            raise ValueError("stop rule limits must be positive")


def clopper_pearson(k: int, n: int, level: float = 0.95) -> tuple[float, float]:
    """Exact binomial confidence interval for k successes in n trials."""
    if n == 0:
        return 0.0, 1.0
    a = 1.0 - level
    lo = 0.0 if k == 0 else float(beta.ppf(a / 2, k, n - k + 1))
    hi = 1.0 if k == n else float(beta.ppf(1 - a / 2, k + 1, n - k))
    return lo, hi


@dataclass(frozen=True)
class SimResult:
    snr: SnrPoint
    frames: int
    frame_errors: int
    bit_errors: int
    n_bits: int
    avg_iterations: float
    partial_frame_errors: int = 0  # M-only (Bob) or R-only (Frank) errors

    def __post_init__(self):
        if not 0 <= self.frame_errors <= self.frames:
            raise ValueError("frame_errors must lie in [0, frames]")

    @property
    def cer(self) -> float:
        return self.frame_errors / self.frames if self.frames else math.nan

    @property
    def ci(self) -> tuple[float, float]:
        return clopper_pearson(self.frame_errors, self.frames)

    @property
    def ber(self) -> float:
        return self.bit_errors / (self.frames * self.n_bits) if self.frames else math.nan

    @property
    def partial_cer(self) -> float:
        return self.partial_frame_errors / self.frames if self.frames else math.nan

    def row(self) -> dict[str, float]:
        lo, hi = self.ci
        return {"ebn0_db": self.snr.ebn0_db, "sigma2": self.snr.sigma2, "frames": self.frames,
                "frame_errors": self.frame_errors, "cer": self.cer, "ci_lo": lo, "ci_hi": hi,
                "ber": self.ber, "avg_iters": self.avg_iterations}


def transmit(codeword: np.ndarray, sigma2: float, rng: np.random.Generator) -> np.ndarray:
    """BPSK (0 -> +1, 1 -> -1) plus white Gaussian noise of variance ``sigma2``."""
    if not sigma2 > 0:
        raise ValueError(f"sigma2 must be positive, got {sigma2}")
    x = 1.0 - 2.0 * np.asarray(codeword, dtype=float)
    return x + math.sqrt(sigma2) * rng.standard_normal(x.shape)


# --- decoder -----------------------------------------------------------------


@nb.njit(cache=True)
def _syndrome_ok(bits, rowptr, rowedges, edge_col, syndrome):
    for i in range(len(rowptr) - 1):
        acc = syndrome[i]
        for t in range(rowptr[i], rowptr[i + 1]):
            acc ^= bits[edge_col[rowedges[t]]]
        if acc:
            return False
    return True


@nb.njit(cache=True)
def _decode(indptr, edge_col, rowptr, rowedges, llr, syndrome, max_iters, bits, v2c, c2v):
    n = len(indptr) - 1
    max_row = 0
    for i in range(len(rowptr) - 1):
        max_row = max(max_row, rowptr[i + 1] - rowptr[i])
    tanh_buf = np.empty(max_row)
    for j in range(n):
        bits[j] = 1 if llr[j] < 0 else 0
    if _syndrome_ok(bits, rowptr, rowedges, edge_col, syndrome):
        return True, 0
    for j in range(n):
        for e in range(indptr[j], indptr[j + 1]):
            v2c[e] = llr[j]
    for it in range(1, max_iters + 1):
        for i in range(len(rowptr) - 1):
            lo, hi = rowptr[i], rowptr[i + 1]
            # forward/backward products of tanh(m/2) give extrinsic products
            # without dividing by a possibly vanishing factor
            prod = 1.0 - 2.0 * syndrome[i]
            for t in range(lo, hi):
                th = math.tanh(0.5 * v2c[rowedges[t]])
                tanh_buf[t - lo] = th
                c2v[rowedges[t]] = prod
                prod *= th
            prod = 1.0
            for t in range(hi - 1, lo - 1, -1):
                e = rowedges[t]
                x = c2v[e] * prod
                if x > TANH_MAX:
                    x = TANH_MAX
                elif x < -TANH_MAX:
                    x = -TANH_MAX
                c2v[e] = 2.0 * math.atanh(x)
                prod *= tanh_buf[t - lo]
        for j in range(n):
            acc = llr[j]
            for e in range(indptr[j], indptr[j + 1]):
                acc += c2v[e]
            bits[j] = 1 if acc < 0 else 0
            for e in range(indptr[j], indptr[j + 1]):
                v2c[e] = acc - c2v[e]
        if _syndrome_ok(bits, rowptr, rowedges, edge_col, syndrome):
            return True, it
    return False, max_iters


@nb.njit(cache=True, parallel=True)
def _decode_batch(indptr, edge_col, rowptr, rowedges, llr, syndromes, max_iters):
    frames, n = llr.shape
    n_edges = len(edge_col)
    bits = np.empty((frames, n), np.uint8)
    ok = np.empty(frames, np.bool_)
    iters = np.empty(frames, np.int64)
    for f in nb.prange(frames):
        v2c = np.empty(n_edges)
        c2v = np.empty(n_edges)
        ok[f], iters[f] = _decode(indptr, edge_col, rowptr, rowedges, llr[f], syndromes[f],
                                  max_iters, bits[f], v2c, c2v)
    return bits, ok, iters


@dataclass(frozen=True)
class BPResult:
    bits: np.ndarray
    converged: bool
    iterations: int


class BPDecoder:
    """Sum-product decoder bound to one parity-check matrix."""

    def __init__(self, h: SparseParityCheck, max_iters: int = MAX_ITERS):
        self.h = h
        self.max_iters = int(max_iters)
        self.indptr = h.indptr
        self.edge_col = np.repeat(np.arange(h.n_cols), h.col_degrees()).astype(np.int64)
        order = np.argsort(h.indices, kind="stable").astype(np.int64)
        self.rowedges = order
        self.rowptr = np.concatenate([[0], np.cumsum(h.row_degrees())]).astype(np.int64)

    def _check(self, llr, syndrome):
        llr = np.ascontiguousarray(llr, dtype=float)
        if llr.shape[-1] != self.h.n_cols:
            raise ValueError(f"llr length {llr.shape[-1]} != {self.h.n_cols} columns")
        if syndrome is None:
            syndrome = np.zeros(llr.shape[:-1] + (self.h.n_rows,), np.uint8)
        syndrome = np.ascontiguousarray(syndrome, dtype=np.uint8)
        if syndrome.shape[-1] != self.h.n_rows:
            raise ValueError(f"syndrome length {syndrome.shape[-1]} != {self.h.n_rows} rows")
        return llr, syndrome

    def decode(self, llr: np.ndarray, syndrome: np.ndarray | None = None) -> BPResult:
        llr, syndrome = self._check(llr, syndrome)
        bits = np.empty(self.h.n_cols, np.uint8)
        v2c = np.empty(self.h.n_edges)
        c2v = np.empty(self.h.n_edges)
        ok, it = _decode(self.indptr, self.edge_col, self.rowptr, self.rowedges, llr, syndrome,
                         self.max_iters, bits, v2c, c2v)
        return BPResult(bits, bool(ok), int(it))

    def decode_batch(self, llr: np.ndarray, syndromes: np.ndarray | None = None):
        llr, syndromes = self._check(np.atleast_2d(llr), syndromes)
        return _decode_batch(self.indptr, self.edge_col, self.rowptr, self.rowedges, llr,
                             np.atleast_2d(syndromes), self.max_iters)


def bp_decode(h: SparseParityCheck, llr: np.ndarray, syndrome: np.ndarray | None = None,
              max_iters: int = MAX_ITERS) -> BPResult:
    """Decode one frame; ``syndrome`` defaults to all zeros."""
    return BPDecoder(h, max_iters).decode(llr, syndrome)


# --- Monte Carlo -------------------------------------------------------------


def _frame_rng(seed: int, frame: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(frame)]))


def measure_cer(h: SparseParityCheck, role: Role | str, snr: SnrPoint,
                stop: StopRule = StopRule(), seed: int = 0, *, batch_size: int = 32,
                encoder: SystematicEncoder | None = None, max_iters: int = MAX_ITERS,
                decoder: BPDecoder | None = None) -> SimResult:
    """Codeword error rate of Bob or Frank at ``snr``.

    Every frame draws its own M and R and noise from ``(seed, frame)``. Bob's
    frame error is any wrong bit of the full codeword; Frank's is any wrong
    bit of [R | P]. The M-only (Bob) and R-only (Frank) error counts are kept
    as ``partial_frame_errors``. Frames run in batches and the stop rule is
    checked between batches, so results depend only on the seed and batch
    size.
    """
    role = Role(role)
    enc = encoder or SystematicEncoder(h)
    if role is Role.BOB:
        dec = decoder or BPDecoder(h, max_iters)
        lo, part = 0, slice(0, h.k_s)
    else:
        dec = decoder or BPDecoder(frank_submatrix(h), max_iters)
        lo, part = h.k_s, slice(0, h.k_r)
    sigma2 = snr.sigma2
    a_block = SparseParityCheck(h.n_rows, h.indptr[:h.k_s + 1], h.indices[:h.indptr[h.k_s]])
    n_dec = h.n_cols - lo
    frames = errors = bit_errors = partial = iters = 0
    while errors < stop.min_errors and frames < stop.max_frames:
        size = min(batch_size, stop.max_frames - frames)
        cw = np.empty((size, n_dec), np.uint8)
        llr = np.empty((size, n_dec))
        syn = np.zeros((size, h.n_rows), np.uint8)
        for b in range(size):
            rng = _frame_rng(seed, frames + b)
            m = rng.integers(0, 2, h.k_s, dtype=np.uint8)
            r = rng.integers(0, 2, h.k_r, dtype=np.uint8)
            c = enc.encode(m, r)
            y = transmit(c, sigma2, rng)
            cw[b] = c[lo:]
            llr[b] = 2.0 * y[lo:] / sigma2
            if role is Role.FRANK and h.k_s:
                syn[b] = a_block.syndrome(m)
        bits, _, it = dec.decode_batch(llr, syn)
        wrong = bits != cw
        per_frame = wrong.sum(axis=1)
        errors += int(np.count_nonzero(per_frame))
        bit_errors += int(per_frame.sum())
        partial += int(np.count_nonzero(wrong[:, part].any(axis=1)))
        iters += int(it.sum())
        frames += size
    return SimResult(snr, frames, errors, bit_errors, n_dec, iters / frames, partial)


def find_operating_snr(h: SparseParityCheck, role: Role | str, target_cer: float = 1e-2,
                       tolerance_db: float = 0.05, stop: StopRule = StopRule(), seed: int = 0,
                       *, bracket_db: tuple[float, float] = (-2.0, 6.0),
                       rate: float | None = None, **kwargs) -> SnrPoint:
    """Smallest E_b/N_0 (dB) whose measured CER does not exceed ``target_cer``.

    Bisects ``bracket_db`` to a resolution of ``tolerance_db``. ``rate``
    defaults to Bob's code rate or Frank's rate k_r / (k_r + r).
    """
    role = Role(role)
    if rate is None:
        rate = (h.k_s + h.k_r) / h.n_cols if role is Role.BOB else h.k_r / (h.n_cols - h.k_s)
    enc = kwargs.pop("encoder", None) or SystematicEncoder(h)
    sub = h if role is Role.BOB else frank_submatrix(h)
    dec = kwargs.pop("decoder", None) or BPDecoder(sub, kwargs.pop("max_iters", MAX_ITERS))

    def meets(db):
        res = measure_cer(h, role, SnrPoint.from_ebn0(db, rate), stop, seed, encoder=enc,
                          decoder=dec, **kwargs)
        log.info("%s at %.3f dB: CER %.3g (%d frames)", role.value, db, res.cer, res.frames)
        return res.cer <= target_cer

    lo, hi = map(float, bracket_db)
    if meets(lo):
        return SnrPoint.from_ebn0(lo, rate)
    if not meets(hi):
        log.warning("target CER %g not reached at %.2f dB", target_cer, hi)
        return SnrPoint.from_ebn0(hi, rate)
    while hi - lo > tolerance_db:
        mid = 0.5 * (lo + hi)
        if meets(mid):
            hi = mid
        else:
            lo = mid
    return SnrPoint.from_ebn0(hi, rate)


def write_results_csv(results: Iterable[SimResult], path: str | Path | TextIO) -> None:
    """Write one CSV row per result to a path or an open text stream."""
    cm = contextlib.nullcontext(path) if hasattr(path, "write") else open(path, "w", newline="")
    with cm as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        for res in results:
            w.writerow({k: _fmt(v) for k, v in res.row().items()})


def _fmt(v):
    return v if isinstance(v, int) else repr(float(v))
