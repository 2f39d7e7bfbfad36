"""Finite-length parity-check matrices H = [A | B | C] built by progressive edge growth.

Column layout follows the codeword layout [M | R | P]: ``k_s`` secret bits,
``k_r`` random bits and ``r`` parity bits. The last ``k_r + r`` columns form
Frank's matrix H' = [B | C], which is built first so that it realises
Frank's quantised distribution exactly; the ``k_s`` columns of A are then
grown on top of it.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numba as nb
import numpy as np

from .degdist import DegreeDistribution, Perspective, WiretapCodeSpec, to_node_perspective

__all__ = [
    "ConstructionError",
    "SparseParityCheck",
    "SystematicEncoder",
    "quantize_distribution",
    "peg_construct",
    "build_wiretap_matrix",
    "frank_submatrix",
    "has_four_cycles",
    "girth",
    "gf2_rank",
    "systematic_layout",
    "write_alist",
    "read_alist",
]

log = logging.getLogger(__name__)


class ConstructionError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class SparseParityCheck:
    """Binary sparse matrix in compressed-column form with a [M | R | P] partition.

    ``indices[indptr[j]:indptr[j + 1]]`` are the sorted row indices of column j.
    """

    n_rows: int
    indptr: np.ndarray
    indices: np.ndarray
    k_s: int = 0
    k_r: int = 0
    seed: int | None = None
    meta: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        indptr = np.ascontiguousarray(self.indptr, dtype=np.int64)
        indices = np.ascontiguousarray(self.indices, dtype=np.int64)
        object.__setattr__(self, "indptr", indptr)
        object.__setattr__(self, "indices", indices)
        if indptr[0] != 0 or indptr[-1] != len(indices) or np.any(np.diff(indptr) < 0):
            raise ValueError("inconsistent column pointers")
        if len(indices) and (indices.min() < 0 or indices.max() >= self.n_rows):
            raise ValueError("row index out of range")
        if min(self.k_s, self.k_r) < 0 or self.k_s + self.k_r > self.n_cols:
            raise ValueError("partition does not fit the column count")
        if not _columns_sorted_unique(indptr, indices):
            raise ValueError("column row lists must be strictly increasing (no duplicates)")

    @property
    def n_cols(self) -> int:
        return len(self.indptr) - 1

    @property
    def r(self) -> int:
        return self.n_cols - self.k_s - self.k_r

    @property
    def spec(self) -> WiretapCodeSpec:
        return WiretapCodeSpec(self.n_cols, self.k_s, self.k_r, self.r)

    @property
    def n_edges(self) -> int:
        return len(self.indices)

    def column(self, j: int) -> np.ndarray:
        return self.indices[self.indptr[j]:self.indptr[j + 1]]

    def col_degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def row_degrees(self) -> np.ndarray:
        return np.bincount(self.indices, minlength=self.n_rows)

    def degree_counts(self, start: int = 0) -> dict[int, int]:
        deg, cnt = np.unique(self.col_degrees()[start:], return_counts=True)
        return dict(zip(deg.tolist(), cnt.tolist()))

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.n_rows, self.n_cols), dtype=np.uint8)
        cols = np.repeat(np.arange(self.n_cols), self.col_degrees())
        out[self.indices, cols] = 1
        return out

    @classmethod
    def from_dense(cls, dense: np.ndarray, k_s: int = 0, k_r: int = 0, **kwargs):
        d = np.asarray(dense) % 2
        rows, cols = np.nonzero(d.T)
        indptr = np.concatenate([[0], np.cumsum(np.bincount(rows, minlength=d.shape[1]))])
        return cls(d.shape[0], indptr, cols, k_s, k_r, **kwargs)

    def row_adjacency(self) -> tuple[np.ndarray, np.ndarray]:
        """Compressed-row form: (row pointers, column indices)."""
        order = np.argsort(self.indices, kind="stable")
        cols = np.repeat(np.arange(self.n_cols), self.col_degrees())[order]
        rowptr = np.concatenate([[0], np.cumsum(self.row_degrees())])
        return rowptr, cols

    def syndrome(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.uint8)
        cols = np.repeat(np.arange(self.n_cols), self.col_degrees())
        return (np.bincount(self.indices, weights=x[cols], minlength=self.n_rows) % 2).astype(
            np.uint8)

    def permute_columns(self, perm: np.ndarray) -> SparseParityCheck:
        """New matrix whose column ``j`` is old column ``perm[j]``."""
        perm = np.asarray(perm)
        deg = self.col_degrees()[perm]
        indptr = np.concatenate([[0], np.cumsum(deg)])
        idx = np.concatenate([self.column(j) for j in perm]) if len(perm) else self.indices[:0]
        return SparseParityCheck(self.n_rows, indptr, idx, self.k_s, self.k_r, self.seed,
                                 dict(self.meta))


@nb.njit(cache=True)
def _columns_sorted_unique(indptr, indices):
    for j in range(len(indptr) - 1):
        for e in range(indptr[j] + 1, indptr[j + 1]):
            if indices[e] <= indices[e - 1]:
                return False
    return True


def frank_submatrix(h: SparseParityCheck) -> SparseParityCheck:
    """Frank's H' = columns [k_s, n); the row-index array is shared, not copied."""
    base = h.indptr[h.k_s]
    sub = SparseParityCheck.__new__(SparseParityCheck)
    for name, value in (("n_rows", h.n_rows), ("indptr", h.indptr[h.k_s:] - base),
                        ("indices", h.indices[base:]), ("k_s", 0), ("k_r", h.k_r),
                        ("seed", h.seed), ("meta", dict(h.meta))):
        object.__setattr__(sub, name, value)
    return sub


# --- quantisation ------------------------------------------------------------


def quantize_distribution(node_dist: DegreeDistribution, num_nodes: int) -> dict[int, int]:
    """Largest-remainder rounding of node fractions to integer counts.

    Remainder ties go to the larger degree.
    """
    if num_nodes < 1:
        raise ValueError("num_nodes must be >= 1")
    if node_dist.perspective is Perspective.EDGE:
        node_dist = to_node_perspective(node_dist)
    deg = node_dist.degrees
    ideal = node_dist.weights * num_nodes
    counts = np.floor(ideal).astype(np.int64)
    rem = ideal - counts
    short = num_nodes - int(counts.sum())
    # sort by remainder descending, then degree descending
    order = np.lexsort((-deg, -rem))
    counts[order[:short]] += 1
    return {int(d): int(c) for d, c in zip(deg, counts) if c > 0}


def _column_degrees(counts: Mapping[int, int]) -> np.ndarray:
    return np.repeat(np.array(sorted(counts), dtype=np.int64),
                     [counts[d] for d in sorted(counts)])


# --- PEG ---------------------------------------------------------------------


@nb.njit(cache=True)
def _peg_kernel(n_rows, col_degrees, col_index, row_key, row_target, init_cols, init_rows):
    """Grow edges column by column.

    ``col_index`` gives the matrix column of each processed node; previously
    placed edges (``init_cols``/``init_rows``) seed the graph. Returns
    (edge_cols, edge_rows) of the new edges, or an empty array pair with a
    negative code when a column cannot be completed.
    """
    n_cols_total = 0
    for j in col_index:
        if j + 1 > n_cols_total:
            n_cols_total = j + 1
    for j in init_cols:
        if j + 1 > n_cols_total:
            n_cols_total = j + 1
    n_new = 0
    for d in col_degrees:
        n_new += d
    n_edges = len(init_cols) + n_new
    # linked lists of edges per row and per column
    row_head = -np.ones(n_rows, np.int64)
    col_head = -np.ones(n_cols_total, np.int64)
    nxt_row = -np.ones(n_edges, np.int64)
    nxt_col = -np.ones(n_edges, np.int64)
    e_row = np.empty(n_edges, np.int64)
    e_col = np.empty(n_edges, np.int64)
    row_deg = np.zeros(n_rows, np.int64)
    m = 0
    for t in range(len(init_cols)):
        c, rr = init_cols[t], init_rows[t]
        e_row[m], e_col[m] = rr, c
        nxt_row[m], row_head[rr] = row_head[rr], m
        nxt_col[m], col_head[c] = col_head[c], m
        row_deg[rr] += 1
        m += 1
    row_seen = np.zeros(n_rows, np.int64)
    col_seen = np.zeros(n_cols_total, np.int64)
    frontier = np.empty(n_rows, np.int64)
    nxt_front = np.empty(n_rows, np.int64)
    stamp = 0
    out_c = np.empty(n_new, np.int64)
    out_r = np.empty(n_new, np.int64)
    k = 0
    for t in range(len(col_degrees)):
        v = col_index[t]
        for _ in range(col_degrees[t]):
            stamp += 1
            col_seen[v] = stamp
            nf = 0
            e = col_head[v]
            while e >= 0:
                rr = e_row[e]
                if row_seen[rr] != stamp:
                    row_seen[rr] = stamp
                    frontier[nf] = rr
                    nf += 1
                e = nxt_col[e]
            reached = nf
            use_unseen = True
            if nf > 0:
                while True:
                    nn = 0
                    for q in range(nf):
                        e = row_head[frontier[q]]
                        while e >= 0:
                            c = e_col[e]
                            if col_seen[c] != stamp:
                                col_seen[c] = stamp
                                e2 = col_head[c]
                                while e2 >= 0:
                                    r2 = e_row[e2]
                                    if row_seen[r2] != stamp:
                                        row_seen[r2] = stamp
                                        nxt_front[nn] = r2
                                        nn += 1
                                    e2 = nxt_col[e2]
                            e = nxt_row[e]
                    if nn == 0:
                        break  # reachable set stopped growing
                    if reached + nn == n_rows:
                        use_unseen = False  # deepest level: choose among its rows
                        break
                    reached += nn
                    for q in range(nn):
                        frontier[q] = nxt_front[q]
                    nf = nn
            best = -1
            if use_unseen:
                for rr in range(n_rows):
                    if row_seen[rr] != stamp and _better(rr, best, row_deg, row_target, row_key):
                        best = rr
            else:
                for q in range(nn):
                    rr = nxt_front[q]
                    if _better(rr, best, row_deg, row_target, row_key):
                        best = rr
            if best < 0:
                return out_c[:0], out_r[:0], -1
            e_row[m], e_col[m] = best, v
            nxt_row[m], row_head[best] = row_head[best], m
            nxt_col[m], col_head[v] = col_head[v], m
            row_deg[best] += 1
            m += 1
            out_c[k], out_r[k] = v, best
            k += 1
    return out_c, out_r, 0


@nb.njit(cache=True)
def _better(rr, best, row_deg, row_target, row_key):
    if best < 0:
        return True
    # rows below their target degree first, then lower degree, then key
    ua = row_deg[rr] < row_target[rr]
    ub = row_deg[best] < row_target[best]
    if ua != ub:
        return ua
    if row_deg[rr] != row_deg[best]:
        return row_deg[rr] < row_deg[best]
    return row_key[rr] < row_key[best]


def _row_targets(n_edges: int, n_rows: int, key: np.ndarray) -> np.ndarray:
    """Concentrated row degrees: ``n_edges`` spread as evenly as possible."""
    base, extra = divmod(n_edges, n_rows)
    target = np.full(n_rows, base, dtype=np.int64)
    target[np.argsort(key)[:extra]] += 1
    return target


def _assemble(n_rows, n_cols, cols, rows, k_s, k_r, seed, meta) -> SparseParityCheck:
    order = np.lexsort((rows, cols))
    cols, rows = cols[order], rows[order]
    indptr = np.concatenate([[0], np.cumsum(np.bincount(cols, minlength=n_cols))])
    return SparseParityCheck(n_rows, indptr, rows, k_s, k_r, seed, meta)


def peg_construct(col_degrees: Sequence[int], rows: int, seed: int = 0, *, k_s: int = 0,
                  k_r: int = 0, existing: SparseParityCheck | None = None,
                  new_columns: Sequence[int] | None = None,
                  row_target: np.ndarray | None = None) -> SparseParityCheck:
    """Progressive edge growth for the given column degrees.

    Columns are processed in nondecreasing degree order. Each edge goes to a
    row that is unreachable from the current column or, when everything is
    reachable, at the deepest BFS level; ties prefer rows below
    ``row_target`` (default: concentrated), then the lowest current degree,
    then a seed-permuted row index.

    With ``existing`` the new columns (positions ``new_columns``) are grown
    on top of that matrix's edges.
    """
    deg = np.asarray(col_degrees, dtype=np.int64)
    if np.any(deg < 2):
        raise ConstructionError("column degrees must be >= 2")
    if len(deg) and deg.max() > rows:
        raise ConstructionError(f"column degree {deg.max()} exceeds the {rows} rows")
    rng = np.random.default_rng(seed)
    key = rng.permutation(rows).astype(np.int64)
    if existing is None:
        cols_pos = np.arange(len(deg), dtype=np.int64) if new_columns is None else np.asarray(
            new_columns, dtype=np.int64)
        n_cols = int(cols_pos.max()) + 1 if len(cols_pos) else 0
        init_c = np.zeros(0, np.int64)
        init_r = np.zeros(0, np.int64)
        base_edges = 0
    else:
        if existing.n_rows != rows:
            raise ConstructionError("existing matrix has a different row count")
        n_cols = existing.n_cols
        cols_pos = np.asarray(new_columns, dtype=np.int64)
        init_c = np.repeat(np.arange(n_cols), existing.col_degrees()).astype(np.int64)
        init_r = existing.indices.astype(np.int64)
        base_edges = existing.n_edges
    if len(cols_pos) != len(deg):
        raise ValueError("new_columns must match col_degrees in length")
    total = base_edges + int(deg.sum())
    if total > rows * n_cols:
        raise ConstructionError("degree demands exceed the matrix size")
    order = np.argsort(deg, kind="stable")
    target = _row_targets(total, rows, key) if row_target is None else np.asarray(row_target,
                                                                                  np.int64)
    oc, orow, code = _peg_kernel(rows, deg[order], cols_pos[order], key, target, init_c, init_r)
    if code != 0:
        raise ConstructionError("no admissible row for a column edge")
    all_c = np.concatenate([init_c, oc])
    all_r = np.concatenate([init_r, orow])
    return _assemble(rows, n_cols, all_c, all_r, k_s, k_r, seed, {})


# --- wiretap construction ----------------------------------------------------


def _repair_difference(bob: dict[int, int], frank: dict[int, int]) -> dict[int, int]:
    """Per-degree Bob-minus-Frank counts, repairing negatives by one-node moves."""
    bob = dict(bob)
    degrees = sorted(set(bob) | set(frank))
    for d in degrees:
        while bob.get(d, 0) < frank.get(d, 0):
            # borrow one Bob node from the nearest degree with spare nodes
            donors = sorted((abs(e - d), e) for e in degrees
                            if e != d and bob.get(e, 0) > frank.get(e, 0))
            if not donors:
                raise ConstructionError(f"cannot realise Frank's degree-{d} count inside Bob's")
            e = donors[0][1]
            if abs(e - d) > 1:
                raise ConstructionError(
                    f"degree-{d} count deficit needs a move from degree {e}; not adjacent")
            log.warning("moved one Bob node from degree %d to %d to keep containment", e, d)
            bob[e] -= 1
            bob[d] = bob.get(d, 0) + 1
    return {d: bob.get(d, 0) - frank.get(d, 0) for d in degrees
            if bob.get(d, 0) - frank.get(d, 0) > 0}


def build_wiretap_matrix(spec: WiretapCodeSpec, design, seed: int = 0) -> SparseParityCheck:
    """Two-stage PEG construction of H = [A | B | C] for a joint design.

    Frank's H' (``r x (k_r + r)``) is grown first from Frank's quantised
    node counts; the ``k_s`` columns of A take the per-degree difference
    between Bob's and Frank's counts. Columns of the Frank block are finally
    permuted so that an invertible set of parity columns sits in P.
    """
    rf_design = design.frank_rate
    if abs(design.bob_rate - spec.rate_bob) > 1e-6 and abs(design.bob_rate * spec.n
                                                           - spec.k) > 0.5:
        raise ValueError(f"design rate {design.bob_rate} does not match the code rate "
                         f"{spec.rate_bob}")
    if spec.k_s > 0 and abs(rf_design - spec.rate_frank) > 1e-6 and abs(
            rf_design * spec.n_frank - spec.k_r) > 0.5:
        raise ValueError(f"design Frank rate {rf_design} does not match {spec.rate_frank}")
    nf = spec.n_frank
    frank_counts = quantize_distribution(design.lambda_F, nf)
    bob_counts = quantize_distribution(design.lambda_B, spec.n)
    if spec.k_s == 0:
        bob_counts = dict(frank_counts)
    a_counts = _repair_difference(bob_counts, frank_counts)
    if sum(a_counts.values()) != spec.k_s:
        raise ConstructionError("A-column count does not match k_s")
    bob_counts = {d: frank_counts.get(d, 0) + a_counts.get(d, 0)
                  for d in set(frank_counts) | set(a_counts)}

    ss = np.random.SeedSequence(seed)
    s1, s2 = (int(s.generate_state(1)[0]) for s in ss.spawn(2))
    frank_deg = _column_degrees(frank_counts)
    # the Frank block occupies columns [k_s, n); A columns stay empty until stage 2
    h1 = peg_construct(frank_deg, spec.r, s1, new_columns=spec.k_s + np.arange(nf))
    a_deg = _column_degrees(a_counts)
    if spec.k_s:
        key = np.random.default_rng(s2).permutation(spec.r)
        total = h1.n_edges + int(a_deg.sum())
        h2 = peg_construct(a_deg, spec.r, s2, existing=h1, new_columns=np.arange(spec.k_s),
                           row_target=_row_targets(total, spec.r, key))
    else:
        h2 = h1
    h = SparseParityCheck(spec.r, h2.indptr, h2.indices, spec.k_s, spec.k_r, seed,
                          {"frank_counts": frank_counts, "bob_counts": bob_counts})
    h = systematic_layout(h)
    if h.degree_counts() != {d: c for d, c in bob_counts.items() if c}:
        raise ConstructionError("Bob degree counts not realised")
    if h.degree_counts(spec.k_s) != frank_counts:
        raise ConstructionError("Frank degree counts not realised")
    return h


# --- GF(2) elimination -------------------------------------------------------


def _pack_rows(h: SparseParityCheck) -> np.ndarray:
    words = (h.n_cols + 63) // 64
    packed = np.zeros((h.n_rows, words), dtype=np.uint64)
    cols = np.repeat(np.arange(h.n_cols), h.col_degrees())
    _set_bits(packed, h.indices, cols)
    return packed


@nb.njit(cache=True)
def _set_bits(packed, rows, cols):
    for t in range(len(rows)):
        c = cols[t]
        packed[rows[t], c >> 6] ^= np.uint64(1) << np.uint64(c & 63)


@nb.njit(cache=True)
def _gauss_jordan(packed, col_order):
    """In-place Gauss-Jordan over GF(2), trying pivot columns in ``col_order``.

    Returns (pivot column per pivot row, rank); rows [0, rank) hold pivots.
    """
    n_rows, words = packed.shape
    piv = -np.ones(n_rows, np.int64)
    rank = 0
    for c in col_order:
        w = c >> 6
        bit = np.uint64(1) << np.uint64(c & 63)
        sel = -1
        for i in range(rank, n_rows):
            if packed[i, w] & bit:
                sel = i
                break
        if sel < 0:
            continue
        if sel != rank:
            for q in range(words):
                tmp = packed[sel, q]
                packed[sel, q] = packed[rank, q]
                packed[rank, q] = tmp
        for i in range(n_rows):
            if i != rank and (packed[i, w] & bit):
                for q in range(words):
                    packed[i, q] ^= packed[rank, q]
        piv[rank] = c
        rank += 1
        if rank == n_rows:
            break
    return piv, rank


def gf2_rank(h: SparseParityCheck) -> int:
    piv, rank = _gauss_jordan(_pack_rows(h), np.arange(h.n_cols, dtype=np.int64))
    return int(rank)


def _frank_pivots(h: SparseParityCheck):
    packed = _pack_rows(h)
    order = np.arange(h.n_cols - 1, h.k_s - 1, -1, dtype=np.int64)
    piv, rank = _gauss_jordan(packed, order)
    return packed, piv[:rank], int(rank)


def systematic_layout(h: SparseParityCheck) -> SparseParityCheck:
    """Permute columns inside the Frank block so the pivot set occupies the P block."""
    _, piv, rank = _frank_pivots(h)
    if rank < h.n_rows:
        log.warning("Frank block has rank %d < %d rows", rank, h.n_rows)
    pset = set(piv.tolist())
    free = [j for j in range(h.k_s, h.n_cols) if j not in pset]
    perm = np.concatenate([np.arange(h.k_s), free, np.sort(piv)]).astype(np.int64)
    out = h.permute_columns(perm)
    meta = dict(out.meta)
    meta["rank"] = rank
    return SparseParityCheck(out.n_rows, out.indptr, out.indices, out.k_s, out.k_r, out.seed,
                             meta)


@nb.njit(cache=True)
def _encode_kernel(reduced, pivots, x_packed):
    """Fill pivot bits: x_p = parity(reduced_row & x) with pivot bits cleared in x."""
    for i in range(len(pivots)):
        acc = np.uint64(0)
        for q in range(x_packed.shape[0]):
            acc ^= reduced[i, q] & x_packed[q]
        acc ^= acc >> np.uint64(32)
        acc ^= acc >> np.uint64(16)
        acc ^= acc >> np.uint64(8)
        acc ^= acc >> np.uint64(4)
        acc ^= acc >> np.uint64(2)
        acc ^= acc >> np.uint64(1)
        p = pivots[i]
        if acc & np.uint64(1):
            x_packed[p >> 6] |= np.uint64(1) << np.uint64(p & 63)


class SystematicEncoder:
    """Maps (M, R) to a codeword [M | R | P] of a matrix in systematic layout.

    Parity columns without a pivot (rank-deficient Frank block) are held at 0.
    """

    def __init__(self, h: SparseParityCheck):
        packed, piv, rank = _frank_pivots(h)
        p_start = h.k_s + h.k_r
        if np.any(piv < p_start):
            raise ConstructionError("pivot columns fall outside the parity block; "
                                    "build the matrix with build_wiretap_matrix")
        self.h = h
        self.rank = rank
        self.pivots = piv.astype(np.int64)
        reduced = packed[:rank].copy()
        # clear the pivot bits so a single AND-parity yields each pivot value
        for c in self.pivots:
            reduced[:, c >> 6] &= ~np.uint64(1 << int(c & 63))
        self.reduced = reduced

    def encode(self, message: np.ndarray, random_bits: np.ndarray) -> np.ndarray:
        h = self.h
        x = np.zeros(h.n_cols, dtype=np.uint8)
        x[:h.k_s] = message
        x[h.k_s:h.k_s + h.k_r] = random_bits
        packed = np.packbits(x, bitorder="little")
        pad = (-len(packed)) % 8
        words = np.concatenate([packed, np.zeros(pad, np.uint8)]).view(np.uint64).copy()
        _encode_kernel(self.reduced, self.pivots, words)
        return np.unpackbits(words.view(np.uint8), bitorder="little")[:h.n_cols]


# --- girth -------------------------------------------------------------------


def has_four_cycles(h: SparseParityCheck) -> bool:
    """True when two columns share two or more rows."""
    keys = _row_pairs(h.indptr, h.indices, h.n_rows)
    return len(keys) != len(np.unique(keys))


@nb.njit(cache=True)
def _row_pairs(indptr, indices, n_rows):
    total = 0
    for j in range(len(indptr) - 1):
        d = indptr[j + 1] - indptr[j]
        total += d * (d - 1) // 2
    out = np.empty(total, np.int64)
    k = 0
    for j in range(len(indptr) - 1):
        for a in range(indptr[j], indptr[j + 1]):
            for b in range(a + 1, indptr[j + 1]):
                out[k] = indices[a] * n_rows + indices[b]
                k += 1
    return out


@nb.njit(cache=True)
def _girth_kernel(indptr, indices, rowptr, rowcols, n_rows):
    n_cols = len(indptr) - 1
    n = n_cols + n_rows  # nodes: columns first, then rows
    best = np.int64(1 << 62)
    dist = -np.ones(n, np.int64)
    parent = -np.ones(n, np.int64)
    queue = np.empty(n, np.int64)
    for s in range(n_cols):
        for i in range(n):
            dist[i] = -1
        dist[s] = 0
        parent[s] = -1
        head, tail = 0, 1
        queue[0] = s
        while head < tail:
            u = queue[head]
            head += 1
            if 2 * dist[u] + 2 > best:
                break
            if u < n_cols:
                lo, hi = indptr[u], indptr[u + 1]
            else:
                lo, hi = rowptr[u - n_cols], rowptr[u - n_cols + 1]
            for e in range(lo, hi):
                w = indices[e] + n_cols if u < n_cols else rowcols[e]
                if dist[w] < 0:
                    dist[w] = dist[u] + 1
                    parent[w] = u
                    queue[tail] = w
                    tail += 1
                elif w != parent[u]:
                    cyc = dist[u] + dist[w] + 1
                    if cyc < best:
                        best = cyc
    return best


def girth(h: SparseParityCheck) -> float:
    """Length of the shortest cycle in the Tanner graph (inf when acyclic)."""
    rowptr, rowcols = h.row_adjacency()
    g = _girth_kernel(h.indptr, h.indices, rowptr.astype(np.int64), rowcols.astype(np.int64),
                      h.n_rows)
    return math.inf if g >= (1 << 62) else float(g)


# --- alist I/O ---------------------------------------------------------------


def write_alist(h: SparseParityCheck, path: str | Path) -> None:
    """Write ``path`` in alist format plus ``path.json`` with the partition."""
    path = Path(path)
    rowptr, rowcols = h.row_adjacency()
    cdeg, rdeg = h.col_degrees(), h.row_degrees()
    lines = [f"{h.n_cols} {h.n_rows}", f"{cdeg.max(initial=0)} {rdeg.max(initial=0)}",
             " ".join(map(str, cdeg)), " ".join(map(str, rdeg))]

    def padded(vals, width):
        v = list(np.asarray(vals) + 1) + [0] * (width - len(vals))
        return " ".join(map(str, v))

    lines += [padded(h.column(j), cdeg.max()) for j in range(h.n_cols)]
    lines += [padded(rowcols[rowptr[i]:rowptr[i + 1]], rdeg.max()) for i in range(h.n_rows)]
    path.write_text("\n".join(lines) + "\n")
    side = {"k_s": h.k_s, "k_r": h.k_r, "r": h.r, "seed": h.seed}
    Path(str(path) + ".json").write_text(json.dumps(side, sort_keys=True) + "\n")


def read_alist(path: str | Path) -> SparseParityCheck:
    path = Path(path)
    tok = path.read_text().split()
    pos = 0

    def take(k):
        nonlocal pos
        out = np.array(tok[pos:pos + k], dtype=np.int64)
        if len(out) != k:
            raise ValueError(f"{path}: truncated alist file")
        pos += k
        return out

    n_cols, n_rows = take(2)
    max_c, _max_r = take(2)
    cdeg = take(n_cols)
    take(n_rows)
    cols = []
    for j in range(n_cols):
        entries = take(max_c)
        idx = entries[entries > 0] - 1
        if len(idx) != cdeg[j]:
            raise ValueError(f"{path}: column {j} lists {len(idx)} rows, header says {cdeg[j]}")
        cols.append(np.sort(idx))
    indptr = np.concatenate([[0], np.cumsum(cdeg)])
    indices = np.concatenate(cols) if cols else np.zeros(0, np.int64)
    side_path = Path(str(path) + ".json")
    k_s = k_r = 0
    seed = None
    if side_path.exists():
        side = json.loads(side_path.read_text())
        k_s, k_r, seed = int(side["k_s"]), int(side["k_r"]), side.get("seed")
    return SparseParityCheck(int(n_rows), indptr, indices, k_s, k_r, seed)
