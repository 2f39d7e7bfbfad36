"""Experiment configuration and the optimise -> construct -> simulate -> secrecy pipeline."""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping, Sequence

import tomli

from .analysis import SnrPoint
from .construct import SystematicEncoder, build_wiretap_matrix, write_alist
from .degdist import WiretapCodeSpec
from .jointopt import JointDesign, joint_optimize, write_design
from .reference import load_reference_designs
from .secrecy import build_report, write_report_csv
from .simulate import StopRule, find_operating_snr

__all__ = [
    "ExperimentConfig",
    "ConfigError",
    "load_config",
    "ingest_reference_designs",
    "run_pipeline",
    "PipelineResult",
    "CONFIG_REFERENCE",
]

log = logging.getLogger(__name__)

# Every key with its default; `wiretap-ldpc pipeline --print-defaults` shows this text.
CONFIG_REFERENCE = """\
# (R_s, R_B) grid points, each with 0 < R_s < R_B < 1
rates = [[0.4, 0.5]]
# code lengths n for the finite-length stage; [] skips construction and simulation
lengths = [10000]
# maximum variable degrees for Bob's and Frank's distributions
d_v_B = 50
d_v_F = 50
# codeword error rate defining a working point
target_cer = 0.01
# working-point resolution in dB and bisection bracket for E_b/N_0
tolerance_db = 0.05
bracket_db = [-2.0, 6.0]
# "approx" (two-piece closed form) or "exact" (quadrature)
phi_model = "approx"
# take the bundled reference distributions instead of running the optimiser
use_reference_designs = false
# frames decoded between stop-rule checks and decoder iteration cap
batch_size = 32
max_iters = 100
# directory for all artifacts (overridden by --out)
out_dir = "results"

[seeds]
optimize = 0
construct = 1
simulate = 2

[stop]
min_errors = 100
max_frames = 1000000
"""


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    rates: tuple[tuple[float, float], ...] = ((0.4, 0.5),)
    lengths: tuple[int, ...] = (10000,)
    d_v_B: int = 50
    d_v_F: int = 50
    target_cer: float = 1e-2
    tolerance_db: float = 0.05
    bracket_db: tuple[float, float] = (-2.0, 6.0)
    phi_model: str = "approx"
    use_reference_designs: bool = False
    batch_size: int = 32
    max_iters: int = 100
    out_dir: str = "results"
    seeds: Mapping[str, int] = field(default_factory=lambda: {"optimize": 0, "construct": 1,
                                                              "simulate": 2})
    stop: StopRule = StopRule()

    def __post_init__(self):
        for rs, rb in self.rates:
            if not 0.0 < rs < rb < 1.0:
                raise ConfigError(f"rate pair ({rs}, {rb}) violates 0 < R_s < R_B < 1")
        if any(n <= 0 for n in self.lengths):
            raise ConfigError("lengths must be positive")
        if min(self.d_v_B, self.d_v_F) < 2:
            raise ConfigError("maximum variable degrees must be >= 2")
        if not 0.0 < self.target_cer <= 1.0:
            raise ConfigError("target_cer must lie in (0, 1]")
        if self.phi_model not in ("approx", "exact"):
            raise ConfigError(f"unknown phi_model {self.phi_model!r}")
        missing = {"optimize", "construct", "simulate"} - set(self.seeds)
        if missing:
            raise ConfigError(f"missing seeds: {sorted(missing)}")

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> ExperimentConfig:
        data = dict(data)
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
        try:
            if "rates" in data:
                data["rates"] = tuple((float(a), float(b)) for a, b in data["rates"])
            if "lengths" in data:
                data["lengths"] = tuple(int(n) for n in data["lengths"])
            if "bracket_db" in data:
                lo, hi = data["bracket_db"]
                data["bracket_db"] = (float(lo), float(hi))
            if "seeds" in data:
                data["seeds"] = {**cls().seeds, **{k: int(v) for k, v in data["seeds"].items()}}
            if "stop" in data:
                data["stop"] = StopRule(**data["stop"])
            return cls(**data)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    def semantic_dict(self) -> dict[str, Any]:
        """Everything that affects results (the output directory does not)."""
        d = asdict(self)
        d.pop("out_dir")
        d["rates"] = [list(p) for p in self.rates]
        d["lengths"] = list(self.lengths)
        d["bracket_db"] = list(self.bracket_db)
        d["seeds"] = dict(sorted(self.seeds.items()))
        return d

    def hash(self) -> str:
        blob = json.dumps(self.semantic_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        with open(path, "rb") as fh:
            data = tomli.load(fh)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return ExperimentConfig.from_mapping(data)


def ingest_reference_designs(path=None) -> list[JointDesign]:
    """Reference distribution pairs as designs (thresholds left unset).

    Each design records whether it satisfies the node-count containment.
    """
    out = []
    for ref in load_reference_designs(path):
        d = JointDesign.from_lambdas(ref.secret_rate, ref.bob_rate, ref.lambda_F, ref.lambda_B,
                                     meta={"source": "reference"})
        ok = d.containment()
        if not ok:
            warnings.warn(f"reference design ({ref.secret_rate}, {ref.bob_rate}) violates "
                          f"containment at degree {ok.worst_degree} "
                          f"(slack {ok.slack[ok.worst_degree]:.4f})", RuntimeWarning,
                          stacklevel=2)
        out.append(replace(d, meta={**d.meta, "containment": bool(ok),
                                    "renormalized": ref.renormalized}))
    return out


# --- pipeline ----------------------------------------------------------------


@dataclass
class PointResult:
    secret_rate: float
    bob_rate: float
    threshold_B: float = math.nan
    threshold_F: float = math.nan
    working: dict[int, tuple[float, float]] = field(default_factory=dict)
    artifacts: list[dict[str, Any]] = field(default_factory=list)
    secrecy: list[tuple[str, Any]] = field(default_factory=list)
    failures: list[str] = field(default_factory=list)


@dataclass
class PipelineResult:
    out_dir: Path
    manifest_path: Path
    points: list[PointResult]

    @property
    def ok(self) -> bool:
        return not any(p.failures for p in self.points)


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _tag(rs: float, rb: float) -> str:
    return f"rs{rs:g}_rb{rb:g}"


def _run_point(cfg: ExperimentConfig, rs: float, rb: float, out: Path) -> PointResult:
    res = PointResult(rs, rb)
    tag = _tag(rs, rb)

    def record(path: Path, kind: str, seed=None):
        res.artifacts.append({"path": path.relative_to(out).as_posix(), "kind": kind,
                              "seed": seed, "sha256": _sha256(path)})

    try:
        if cfg.use_reference_designs:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                matches = [d for d in ingest_reference_designs()
                           if math.isclose(d.secret_rate, rs) and math.isclose(d.bob_rate, rb)]
            if not matches:
                raise ConfigError(f"no reference design for ({rs}, {rb})")
            if not matches[0].meta["containment"]:
                log.warning("reference design for %s violates containment", tag)
            design = matches[0].with_thresholds(cfg.phi_model)
        else:
            design = joint_optimize(rs, rb, cfg.d_v_B, cfg.d_v_F, cfg.seeds["optimize"],
                                    model=cfg.phi_model)
        res.threshold_B = design.threshold_B.ebn0_db
        res.threshold_F = design.threshold_F.ebn0_db
        path = out / f"{tag}_design.txt"
        write_design(design, path)
        record(path, "design", cfg.seeds["optimize"])
        spec0 = WiretapCodeSpec.from_rates(max(cfg.lengths, default=1000), rs, rb)
        res.secrecy.append(("asymptotic", build_report(spec0, design.threshold_F, 0.0,
                                                       asymptotic=True)))
    except Exception as exc:  # recorded per point; the grid continues
        log.exception("design stage failed for %s", tag)
        res.failures.append(f"design: {type(exc).__name__}: {exc}")
        return res

    for n in cfg.lengths:
        stage = "construct"
        try:
            spec = WiretapCodeSpec.from_rates(n, rs, rb)
            h = build_wiretap_matrix(spec, design, cfg.seeds["construct"])
            path = out / f"{tag}_n{n}.alist"
            write_alist(h, path)
            record(path, "matrix", cfg.seeds["construct"])
            record(Path(str(path) + ".json"), "matrix-partition", cfg.seeds["construct"])
            stage = "simulate"
            enc = SystematicEncoder(h)
            common = dict(target_cer=cfg.target_cer, tolerance_db=cfg.tolerance_db,
                          stop=cfg.stop, seed=cfg.seeds["simulate"], bracket_db=cfg.bracket_db,
                          batch_size=cfg.batch_size, max_iters=cfg.max_iters, encoder=enc)
            wb = find_operating_snr(h, "bob", **common)
            wf = find_operating_snr(h, "frank", **common)
            res.working[n] = (wb.ebn0_db, wf.ebn0_db)
            stage = "secrecy"
            wf = SnrPoint.from_ebn0(wf.ebn0_db, spec.rate_frank)
            res.secrecy.append((f"n{n}", build_report(spec, wf, cfg.target_cer)))
        except Exception as exc:
            log.exception("%s stage failed for %s, n=%d", stage, tag, n)
            res.failures.append(f"{stage} n={n}: {type(exc).__name__}: {exc}")
    return res


def _fmt(v: float) -> str:
    return "" if v is None or (isinstance(v, float) and math.isnan(v)) else f"{v:.4f}"


def _write_table(cfg: ExperimentConfig, points: Sequence[PointResult], path: Path) -> None:
    head = ["R_s", "R_B", "th_B", "th_F"]
    for n in cfg.lengths:
        head += [f"n{n}_B", f"n{n}_F"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(head)
        for p in points:
            row = [f"{p.secret_rate:g}", f"{p.bob_rate:g}", _fmt(p.threshold_B),
                   _fmt(p.threshold_F)]
            for n in cfg.lengths:
                b, f = p.working.get(n, (math.nan, math.nan))
                row += [_fmt(b), _fmt(f)]
            w.writerow(row)


def run_pipeline(cfg: ExperimentConfig, out_dir: str | Path | None = None,
                 workers: int = 1) -> PipelineResult:
    """Run every grid point and write a manifest linking each artifact to its seed.

    The manifest carries no timestamps or absolute paths, so equal
    configurations give byte-identical manifests.
    """
    out = Path(out_dir if out_dir is not None else cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if workers > 1 and len(cfg.rates) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            points = list(ex.map(_run_point, [cfg] * len(cfg.rates),
                                 [p[0] for p in cfg.rates], [p[1] for p in cfg.rates],
                                 [out] * len(cfg.rates)))
    else:
        points = [_run_point(cfg, rs, rb, out) for rs, rb in cfg.rates]

    table = out / "working_points.csv"
    _write_table(cfg, points, table)
    secrecy = out / "secrecy.csv"
    write_report_csv([item for p in points for item in p.secrecy], secrecy)
    config_copy = out / "config.json"
    config_copy.write_text(json.dumps(cfg.semantic_dict(), sort_keys=True, indent=2) + "\n")

    artifacts = [a for p in points for a in p.artifacts]
    for path, kind in ((table, "working-points"), (secrecy, "secrecy"), (config_copy, "config")):
        artifacts.append({"path": path.name, "kind": kind, "seed": None,
                          "sha256": _sha256(path)})
    manifest = {
        "config_hash": cfg.hash(),
        "artifacts": artifacts,
        "failures": {_tag(p.secret_rate, p.bob_rate): p.failures for p in points if p.failures},
    }
    mpath = out / "manifest.json"
    mpath.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    return PipelineResult(out, mpath, points)
