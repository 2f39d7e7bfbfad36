"""Bundled reference degree distributions and SNR working points."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import TextIO

from .degdist import DegreeDistribution, DistributionFormatError, Perspective

__all__ = [
    "ReferenceDesign",
    "WorkingPoint",
    "parse_reference_designs",
    "load_reference_designs",
    "load_working_points",
]

log = logging.getLogger(__name__)

INGEST_SUM_TOL = 1e-3
RENORMALIZE_TOL = 1e-6


@dataclass(frozen=True)
class ReferenceDesign:
    secret_rate: float
    bob_rate: float
    lambda_F: DegreeDistribution
    lambda_B: DegreeDistribution
    renormalized: bool = False


@dataclass(frozen=True)
class WorkingPoint:
    """SNR values in dB; Frank's are referred to his own rate."""

    secret_rate: float
    bob_rate: float
    threshold_B: float
    threshold_F: float
    n10k_B: float
    n10k_F: float
    n50k_B: float
    n50k_F: float


def _column(weights: dict[int, float], lineno: int, label: str) -> tuple[DegreeDistribution, bool]:
    total = sum(weights.values())
    if abs(total - 1.0) > INGEST_SUM_TOL:
        raise DistributionFormatError(
            f"column {label} sums to {total:.6f}, outside 1 +- {INGEST_SUM_TOL}", lineno)
    renorm = abs(total - 1.0) > RENORMALIZE_TOL
    if renorm:
        log.warning("column %s sums to %.6f; renormalising", label, total)
    d = DegreeDistribution.from_weights(weights, Perspective.EDGE,
                                        renormalize_tol=RENORMALIZE_TOL)
    return d, renorm


def parse_reference_designs(lines) -> list[ReferenceDesign]:
    """Parse the paired-column table: ``R_s``/``R_B`` header rows, then one
    row per degree with a (lambda_F, lambda_B) pair per design point."""
    rs = rb = None
    rows: list[tuple[int, int, list[str]]] = []
    last = 0
    for lineno, raw in enumerate(lines, start=1):
        last = lineno
        text = raw.split("#", 1)[0].strip()
        if not text:
            continue
        parts = text.split()
        head = parts[0]
        try:
            if head == "R_s":
                rs = [float(v) for v in parts[1:]]
            elif head == "R_B":
                rb = [float(v) for v in parts[1:]]
            else:
                rows.append((lineno, int(head), parts[1:]))
        except ValueError:
            raise DistributionFormatError(f"cannot parse {text!r}", lineno) from None
    if rs is None or rb is None:
        raise DistributionFormatError("missing R_s or R_B header row", last)
    if len(rs) != len(rb):
        raise DistributionFormatError("R_s and R_B rows differ in length", last)
    n_pts = len(rs)
    cols: list[dict[int, float]] = [{} for _ in range(2 * n_pts)]
    for lineno, deg, vals in rows:
        if len(vals) != 2 * n_pts:
            raise DistributionFormatError(
                f"expected {2 * n_pts} entries for degree {deg}, got {len(vals)}", lineno)
        for k, v in enumerate(vals):
            if v == "-":
                continue
            try:
                cols[k][deg] = float(v)
            except ValueError:
                raise DistributionFormatError(f"bad weight {v!r}", lineno) from None
    out = []
    for p in range(n_pts):
        lf, rf = _column(cols[2 * p], last, f"{2 * p + 1} (lambda_F)")
        lb, rbn = _column(cols[2 * p + 1], last, f"{2 * p + 2} (lambda_B)")
        out.append(ReferenceDesign(rs[p], rb[p], lf, lb, rf or rbn))
    return out


def _open(name: str, path: str | Path | TextIO | None):
    if path is None:
        return resources.files(__package__).joinpath("data", name).read_text().splitlines()
    if hasattr(path, "read"):
        return path.read().splitlines()
    return Path(path).read_text().splitlines()


def load_reference_designs(path: str | Path | TextIO | None = None) -> list[ReferenceDesign]:
    return parse_reference_designs(_open("reference_designs.txt", path))


def load_working_points(path: str | Path | TextIO | None = None) -> list[WorkingPoint]:
    out = []
    for raw in _open("working_points.txt", path):
        text = raw.split("#", 1)[0].strip()
        if not text or text.startswith("R_s"):
            continue
        out.append(WorkingPoint(*map(float, text.split())))
    return out
