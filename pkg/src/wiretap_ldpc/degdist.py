"""Degree distributions, wiretap code dimensions and the concentrated check
distribution."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping, TextIO

import numpy as np

__all__ = [
    "Perspective",
    "Kind",
    "DegreeDistribution",
    "WiretapCodeSpec",
    "DistributionFormatError",
    "to_node_perspective",
    "to_edge_perspective",
    "design_rate",
    "concentrated_rho",
    "format_distribution",
    "parse_distribution",
    "read_distribution",
    "write_distribution",
]

SUM_TOL = 1e-9


class Perspective(str, enum.Enum):
    EDGE = "edge"
    NODE = "node"


class Kind(str, enum.Enum):
    VARIABLE = "variable"
    CHECK = "check"


class DistributionFormatError(ValueError):
    """Malformed distribution text; carries the 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class DegreeDistribution:
    """Fractions of edges (or nodes) per degree.

    Zero-weight degrees are dropped. ``max_degree`` defaults to the largest
    degree present.
    """

    coeffs: Mapping[int, float]
    perspective: Perspective = Perspective.EDGE
    kind: Kind = Kind.VARIABLE
    max_degree: int | None = field(default=None)

    def __post_init__(self):
        items = sorted((int(d), float(w)) for d, w in dict(self.coeffs).items() if w != 0.0)
        if not items:
            raise ValueError("degree distribution is empty")
        for d, w in items:
            if d < 2:
                raise ValueError(f"degrees must be >= 2, got {d}")
            if not (0.0 <= w <= 1.0 + SUM_TOL) or math.isnan(w):
                raise ValueError(f"weight for degree {d} must lie in [0, 1], got {w}")
        total = math.fsum(w for _, w in items)
        if abs(total - 1.0) > SUM_TOL:
            raise ValueError(f"weights sum to {total!r}, expected 1")
        object.__setattr__(self, "coeffs", dict(items))
        object.__setattr__(self, "perspective", Perspective(self.perspective))
        object.__setattr__(self, "kind", Kind(self.kind))
        top = items[-1][0]
        if self.max_degree is None:
            object.__setattr__(self, "max_degree", top)
        elif top > self.max_degree:
            raise ValueError(f"degree {top} exceeds max_degree {self.max_degree}")

    @classmethod
    def from_weights(cls, weights: Mapping[int, float], perspective=Perspective.EDGE,
                     kind=Kind.VARIABLE, max_degree=None, *, renormalize_tol: float = 0.0):
        """Build from raw weights, renormalising when the sum is off by more
        than ``renormalize_tol``."""
        clean = {int(d): float(w) for d, w in weights.items() if float(w) > 0.0}
        total = math.fsum(clean.values())
        if total <= 0:
            raise ValueError("degree distribution is empty")
        if abs(total - 1.0) > renormalize_tol:
            clean = {d: w / total for d, w in clean.items()}
        return cls(clean, perspective, kind, max_degree)

    @classmethod
    def from_arrays(cls, degrees, weights, perspective=Perspective.EDGE, kind=Kind.VARIABLE,
                    max_degree=None):
        return cls.from_weights(dict(zip(np.asarray(degrees).tolist(), np.asarray(weights).tolist())),
                                perspective, kind, max_degree, renormalize_tol=0.0)

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.fromiter(self.coeffs.keys(), dtype=np.int64)

    @cached_property
    def weights(self) -> np.ndarray:
        return np.fromiter(self.coeffs.values(), dtype=float)

    def __getitem__(self, degree: int) -> float:
        return self.coeffs.get(int(degree), 0.0)

    def __len__(self) -> int:
        return len(self.coeffs)

    def __iter__(self):
        return iter(self.coeffs.items())

    def require_edge(self):
        if self.perspective is not Perspective.EDGE:
            raise ValueError("expected an edge-perspective distribution")

    def require_node(self):
        if self.perspective is not Perspective.NODE:
            raise ValueError("expected a node-perspective distribution")

    def mean_degree(self) -> float:
        """Average node degree (works from either perspective)."""
        if self.perspective is Perspective.NODE:
            return float(self.degrees @ self.weights)
        return 1.0 / float(np.sum(self.weights / self.degrees))

    def inverse_moment(self) -> float:
        """Sum of w_i / i, the quantity entering rate computations."""
        return float(np.sum(self.weights / self.degrees))

    def derivative_at_one(self) -> float:
        """p'(1) = sum w_i (i - 1) for an edge-perspective polynomial."""
        self.require_edge()
        return float(self.weights @ (self.degrees - 1))

    def close_to(self, other: DegreeDistribution, tol: float) -> bool:
        keys = set(self.coeffs) | set(other.coeffs)
        return all(abs(self[d] - other[d]) <= tol for d in keys)


def to_node_perspective(d: DegreeDistribution) -> DegreeDistribution:
    """Edge fractions to node fractions: ``(w_i / i) / sum_k (w_k / k)``."""
    d.require_edge()
    raw = d.weights / d.degrees
    return DegreeDistribution.from_arrays(d.degrees, raw / raw.sum(), Perspective.NODE, d.kind,
                                          d.max_degree)


def to_edge_perspective(d: DegreeDistribution) -> DegreeDistribution:
    """Node fractions to edge fractions: ``(w_i * i) / sum_k (w_k * k)``."""
    d.require_node()
    raw = d.weights * d.degrees
    return DegreeDistribution.from_arrays(d.degrees, raw / raw.sum(), Perspective.EDGE, d.kind,
                                          d.max_degree)


def design_rate(lam: DegreeDistribution, rho: DegreeDistribution) -> float:
    """Design rate ``1 - (sum rho_j / j) / (sum lambda_i / i)``."""
    lam.require_edge()
    rho.require_edge()
    den = lam.inverse_moment()
    if den <= 0:
        raise ValueError("variable distribution has zero inverse moment")
    return 1.0 - rho.inverse_moment() / den


def concentrated_rho(lambda_node: DegreeDistribution, rate: float) -> DegreeDistribution:
    """Two-adjacent-degree check distribution (node perspective) with mean
    ``c_m = (sum_j lambda~_j j) / (1 - rate)``.

    An integral ``c_m`` yields a single degree.
    """
    lambda_node.require_node()
    if not 0.0 < rate < 1.0:
        raise ValueError(f"rate must lie in (0, 1), got {rate}")
    c_m = lambda_node.mean_degree() / (1.0 - rate)
    return rho_for_mean(c_m)


def rho_for_mean(c_m: float) -> DegreeDistribution:
    """Concentrated node-perspective check distribution with mean ``c_m``."""
    if c_m < 2.0:
        raise ValueError(f"mean check degree must be >= 2, got {c_m}")
    lo = math.floor(c_m)
    # snap values that are integral up to rounding noise
    if abs(c_m - round(c_m)) < 1e-12:
        return DegreeDistribution({int(round(c_m)): 1.0}, Perspective.NODE, Kind.CHECK)
    b = c_m - lo
    return DegreeDistribution({lo: 1.0 - b, lo + 1: b}, Perspective.NODE, Kind.CHECK)


@dataclass(frozen=True)
class WiretapCodeSpec:
    """Codeword layout [M | R | P]: ``k_s`` secret bits, ``k_r`` random bits,
    ``r`` redundancy bits."""

    n: int
    k_s: int
    k_r: int
    r: int

    def __post_init__(self):
        if min(self.k_s, self.k_r, self.r) < 0:
            raise ValueError("partition sizes must be nonnegative")
        if self.k_s + self.k_r + self.r != self.n:
            raise ValueError(f"k_s + k_r + r = {self.k_s + self.k_r + self.r} != n = {self.n}")
        if self.r < 1:
            raise ValueError("at least one redundancy bit is required")

    @classmethod
    def from_rates(cls, n: int, secret_rate: float, bob_rate: float) -> WiretapCodeSpec:
        if not 0.0 <= secret_rate < bob_rate < 1.0:
            raise ValueError(f"need 0 <= R_s < R_B < 1, got R_s={secret_rate}, R_B={bob_rate}")
        k = int(round(bob_rate * n))
        k_s = int(round(secret_rate * n))
        return cls(n, k_s, k - k_s, n - k)

    @property
    def k(self) -> int:
        return self.k_s + self.k_r

    @property
    def n_frank(self) -> int:
        return self.k_r + self.r

    @property
    def rate_bob(self) -> float:
        return self.k / self.n

    @property
    def rate_secret(self) -> float:
        return self.k_s / self.n

    @property
    def rate_frank(self) -> float:
        return self.k_r / (self.k_r + self.r)


def frank_rate(secret_rate: float, bob_rate: float) -> float:
    """Rate of the syndrome-decoded subcode: ``(R_B - R_s) / (1 - R_s)``."""
    return (bob_rate - secret_rate) / (1.0 - secret_rate)


# --- text format ------------------------------------------------------------
#
#   # perspective: edge
#   # kind: variable
#   2 0.2259
#   3 0.1701


def format_distribution(d: DegreeDistribution) -> str:
    lines = [f"# perspective: {d.perspective.value}", f"# kind: {d.kind.value}"]
    lines += [f"{deg} {float(w)!r}" for deg, w in d]
    return "\n".join(lines) + "\n"


def parse_distribution(lines: Iterable[str], *, first_line: int = 1,
                       renormalize_tol: float = 1e-6) -> DegreeDistribution:
    header: dict[str, str] = {}
    weights: dict[int, float] = {}
    for lineno, raw in enumerate(lines, start=first_line):
        text = raw.strip()
        if not text:
            continue
        if text.startswith("#"):
            key, sep, value = text[1:].partition(":")
            if sep:
                header[key.strip().lower()] = value.strip().lower()
            continue
        parts = text.split()
        if len(parts) != 2:
            raise DistributionFormatError(f"expected 'degree weight', got {text!r}", lineno)
        try:
            deg, w = int(parts[0]), float(parts[1])
        except ValueError:
            raise DistributionFormatError(f"cannot parse {text!r}", lineno) from None
        if deg in weights:
            raise DistributionFormatError(f"duplicate degree {deg}", lineno)
        weights[deg] = w
    try:
        perspective = Perspective(header.get("perspective", "edge"))
        kind = Kind(header.get("kind", "variable"))
        return DegreeDistribution.from_weights(weights, perspective, kind,
                                               renormalize_tol=renormalize_tol)
    except ValueError as exc:
        raise DistributionFormatError(str(exc)) from exc


def write_distribution(d: DegreeDistribution, path: str | Path) -> None:
    Path(path).write_text(format_distribution(d))


def read_distribution(path: str | Path | TextIO) -> DegreeDistribution:
    if hasattr(path, "read"):
        return parse_distribution(path.read().splitlines())
    return parse_distribution(Path(path).read_text().splitlines())
