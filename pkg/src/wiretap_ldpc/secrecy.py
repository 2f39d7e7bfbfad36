"""Equivocation-rate lower bound and secrecy-capacity benchmark."""

from __future__ import annotations

import contextlib
import csv
import logging
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, TextIO

from .analysis import SnrPoint, biawgn_capacity
from .degdist import WiretapCodeSpec

__all__ = [
    "SecrecyReport",
    "equivocation_bound",
    "secrecy_capacity",
    "fractional_secrecy_capacity",
    "build_report",
    "write_report_csv",
    "REPORT_COLUMNS",
]

log = logging.getLogger(__name__)

CONSISTENCY_TOL = 1e-9
REPORT_COLUMNS = ("R_s", "R_B", "n", "regime", "ebn0_db_F", "eta", "c_e", "r_e_star",
                  "frac_r_e_star", "frac_c_s")


def _rates(spec: WiretapCodeSpec) -> tuple[float, float]:
    return spec.rate_bob, spec.rate_secret


def equivocation_bound(spec: WiretapCodeSpec, eta: float, c_e: float, *,
                       asymptotic: bool = False) -> float:
    """Lower bound ``R_c - C_E - (R_c - R_s) eta - 1/n`` on Eve's equivocation rate.

    ``asymptotic`` drops the 1/n term. The value may be negative.
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must lie in [0, 1], got {eta}")
    if not 0.0 <= c_e <= 1.0:
        raise ValueError(f"c_e must lie in [0, 1], got {c_e}")
    r_c, r_s = _rates(spec)
    tail = 0.0 if asymptotic else 1.0 / spec.n
    return r_c - c_e - (r_c - r_s) * eta - tail


def secrecy_capacity(spec: WiretapCodeSpec) -> float:
    """``C_s = R_B - R_F = R_s (1 - R_B) / (1 - R_s)`` for ideal codes."""
    r_b, r_s = _rates(spec)
    return r_s * (1.0 - r_b) / (1.0 - r_s)


def fractional_secrecy_capacity(spec: WiretapCodeSpec) -> float:
    """``C_s / R_s = (1 - R_B) / (1 - R_s)``; equals 1 when R_s = R_B."""
    r_b, r_s = _rates(spec)
    return (1.0 - r_b) / (1.0 - r_s)


@dataclass(frozen=True)
class SecrecyReport:
    spec: WiretapCodeSpec
    eve_snr: SnrPoint
    eta: float
    c_e: float
    r_e_star: float
    c_s: float
    asymptotic: bool = False

    @property
    def r_e_star_clamped(self) -> float:
        return max(0.0, self.r_e_star)

    @property
    def frac_r_e_star(self) -> float:
        return self.r_e_star / self.spec.rate_secret if self.spec.k_s else math.nan

    @property
    def frac_c_s(self) -> float:
        return fractional_secrecy_capacity(self.spec)

    @property
    def consistent(self) -> bool:
        """The bound does not beat the ideal-coding benchmark."""
        return self.frac_r_e_star <= self.frac_c_s + CONSISTENCY_TOL

    def row(self, regime: str) -> dict[str, object]:
        return {"R_s": self.spec.rate_secret, "R_B": self.spec.rate_bob, "n": self.spec.n,
                "regime": regime, "ebn0_db_F": self.eve_snr.ebn0_db, "eta": self.eta,
                "c_e": self.c_e, "r_e_star": self.r_e_star, "frac_r_e_star": self.frac_r_e_star,
                "frac_c_s": self.frac_c_s}


def build_report(spec: WiretapCodeSpec, frank_point: SnrPoint, eta: float, *,
                 asymptotic: bool = False) -> SecrecyReport:
    """Assemble the bound with Eve at Frank's working point.

    ``frank_point`` must be expressed at Frank's rate. With ``asymptotic``
    the point is read as a threshold, eta is forced to 0 and the 1/n term is
    dropped.
    """
    rf = spec.rate_frank
    if abs(frank_point.rate_ref - rf) > 1e-6:
        raise ValueError(f"Frank's working point must use his rate {rf:.6g}, "
                         f"got {frank_point.rate_ref:.6g}")
    if asymptotic:
        eta = 0.0
    c_e = float(biawgn_capacity(frank_point.gamma))
    r_e = equivocation_bound(spec, eta, c_e, asymptotic=asymptotic)
    rep = SecrecyReport(spec, frank_point, eta, c_e, r_e, secrecy_capacity(spec), asymptotic)
    if c_e < rf - 1e-12:
        warnings.warn(f"Eve's capacity {c_e:.4f} is below Frank's rate {rf:.4f}: the working "
                      "point is under the Shannon limit", RuntimeWarning, stacklevel=2)
    if not rep.consistent:
        warnings.warn(f"fractional bound {rep.frac_r_e_star:.4f} exceeds the ideal benchmark "
                      f"{rep.frac_c_s:.4f}", RuntimeWarning, stacklevel=2)
    return rep


def write_report_csv(rows: Iterable[tuple[str, SecrecyReport]],
                     path: str | Path | TextIO) -> None:
    """Write report rows to a path or an open text stream."""
    with _opened(path) as fh:
        w = csv.DictWriter(fh, fieldnames=REPORT_COLUMNS, lineterminator="\n")
        w.writeheader()
        for regime, rep in rows:
            w.writerow({k: (repr(float(v)) if isinstance(v, float) else v)
                        for k, v in rep.row(regime).items()})


def _opened(target):
    if hasattr(target, "write"):
        return contextlib.nullcontext(target)
    return open(target, "w", newline="")
