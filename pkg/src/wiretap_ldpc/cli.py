"""Command-line entry point: ``wiretap-ldpc <subcommand> ...``.

Exit codes: 0 success, 2 invalid input, 3 infeasible design or construction,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
import warnings
from dataclasses import replace
from pathlib import Path

import numpy as np

from .analysis import SnrPoint, biawgn_capacity
from .construct import ConstructionError, build_wiretap_matrix, read_alist, write_alist
from .degdist import DistributionFormatError, WiretapCodeSpec, frank_rate, read_distribution
from .densevo import NoThresholdError, threshold
from .jointopt import (InfeasibleDesignError, edge_rho_for, format_design, joint_optimize,
                       read_design, write_design)
from .pipeline import (CONFIG_REFERENCE, ConfigError, ExperimentConfig, ingest_reference_designs,
                       load_config, run_pipeline)
from .secrecy import build_report, write_report_csv
from .simulate import Role, StopRule, find_operating_snr, measure_cer, write_results_csv

EXIT_OK, EXIT_INVALID, EXIT_INFEASIBLE, EXIT_NUMERIC = 0, 2, 3, 4

log = logging.getLogger("wiretap_ldpc")


class _Output:
    """Write to ``--out`` when given, else to stdout."""

    def __init__(self, out: str | None):
        self.path = Path(out) if out else None

    def lines(self, text: str) -> None:
        if self.path is None:
            sys.stdout.write(text)
        else:
            self.path.write_text(text)


def _config(args) -> ExperimentConfig:
    return load_config(args.config) if args.config else ExperimentConfig()


def _seed(args, cfg: ExperimentConfig, stage: str) -> int:
    return args.seed if args.seed is not None else cfg.seeds[stage]


def _num(v) -> str:
    # repr of a plain float round-trips exactly
    return repr(float(v))


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.replace(",", " ").split()]


def _design_from_args(args, cfg):
    if args.design:
        return read_design(args.design)
    if args.reference:
        rs, rb = _float_list(args.reference)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            designs = ingest_reference_designs()
        for d in designs:
            if np.isclose(d.secret_rate, rs) and np.isclose(d.bob_rate, rb):
                if not d.meta["containment"]:
                    log.warning("reference design (%g, %g) violates containment", rs, rb)
                return d.with_thresholds(cfg.phi_model)
        raise ValueError(f"no reference design for R_s={rs}, R_B={rb}")
    raise ValueError("give --design FILE or --reference 'R_s R_B'")


# --- subcommands -------------------------------------------------------------


def cmd_capacity(args, cfg):
    db = np.arange(args.start_db, args.stop_db + 0.5 * args.step_db, args.step_db)
    gamma = 10.0 ** (db / 10.0)
    cap = biawgn_capacity(gamma)
    rows = ["gamma_db,gamma,capacity"] + [",".join(map(_num, row)) for row in zip(db, gamma, cap)]
    _Output(args.out).lines("\n".join(rows) + "\n")


def cmd_threshold(args, cfg):
    model = args.model or cfg.phi_model
    rows = ["code,rate,sigma2,ebn0_db,saturated"]
    if args.lam:
        lam = read_distribution(args.lam)
        rho = read_distribution(args.rho) if args.rho else edge_rho_for(lam, args.rate)
        t = threshold(lam, rho, args.rate, model=model)
        rows.append(f"single,{_num(args.rate)},{_num(t.sigma2)},{_num(t.ebn0_db)},{t.saturated}")
    else:
        d = _design_from_args(args, cfg).with_thresholds(model)
        rows.append(f"bob,{_num(d.bob_rate)},{_num(d.sigma2_B)},{_num(d.threshold_B.ebn0_db)},"
                    f"{bool(d.meta.get('saturated'))}")
        rows.append(f"frank,{_num(d.frank_rate)},{_num(d.sigma2_F)},{_num(d.threshold_F.ebn0_db)},"
                    f"{bool(d.meta.get('saturated'))}")
    _Output(args.out).lines("\n".join(rows) + "\n")


def cmd_optimize(args, cfg):
    rs, rb = _float_list(args.rates)
    d = joint_optimize(rs, rb, args.dv_b or cfg.d_v_B, args.dv_f or cfg.d_v_F,
                       _seed(args, cfg, "optimize"), model=args.model or cfg.phi_model,
                       workers=args.workers)
    if args.out:
        write_design(d, args.out)
    print(f"Bob {d.threshold_B.ebn0_db:.3f} dB  Frank {d.threshold_F.ebn0_db:.3f} dB  "
          f"c* = {d.c_star:.5f}", file=sys.stderr if not args.out else sys.stdout)
    if not args.out:
        sys.stdout.write(format_design(d))


def cmd_construct(args, cfg):
    design = _design_from_args(args, cfg)
    spec = WiretapCodeSpec.from_rates(args.n, design.secret_rate, design.bob_rate)
    h = build_wiretap_matrix(spec, design, _seed(args, cfg, "construct"))
    if not args.out:
        raise ValueError("construct needs --out for the alist file")
    write_alist(h, args.out)
    print(f"{h.n_rows} x {h.n_cols}, k_s={h.k_s}, k_r={h.k_r}, rank={h.meta.get('rank')}")


def cmd_simulate(args, cfg):
    h = read_alist(args.matrix)
    role = Role(args.role)
    stop = StopRule(args.min_errors or cfg.stop.min_errors,
                    args.max_frames or cfg.stop.max_frames)
    rate = (h.k_s + h.k_r) / h.n_cols if role is Role.BOB else h.k_r / (h.n_cols - h.k_s)
    seed = _seed(args, cfg, "simulate")
    if args.target_cer is not None:
        wp = find_operating_snr(h, role, args.target_cer, cfg.tolerance_db, stop, seed,
                                bracket_db=cfg.bracket_db, rate=rate)
        dbs = [wp.ebn0_db]
    else:
        dbs = _float_list(args.snr_db)
    results = [measure_cer(h, role, SnrPoint.from_ebn0(db, rate), stop, seed,
                           batch_size=cfg.batch_size, max_iters=cfg.max_iters) for db in dbs]
    write_results_csv(results, args.out or sys.stdout)


def cmd_secrecy(args, cfg):
    rs, rb = _float_list(args.rates)
    spec = WiretapCodeSpec.from_rates(args.n, rs, rb)
    rf = frank_rate(rs, rb)
    rows = []
    if args.threshold_db is not None:
        rows.append(("asymptotic", build_report(spec, SnrPoint.from_ebn0(args.threshold_db, rf),
                                                0.0, asymptotic=True)))
    if args.frank_csv:
        with open(args.frank_csv, newline="") as fh:
            for rec in csv.DictReader(fh):
                eta = float(rec["cer"])
                pt = SnrPoint.from_ebn0(float(rec["ebn0_db"]), rf)
                rows.append((f"n{args.n}", build_report(spec, pt, eta)))
    if args.frank_db is not None:
        rows.append((f"n{args.n}", build_report(spec, SnrPoint.from_ebn0(args.frank_db, rf),
                                                args.eta)))
    if not rows:
        raise ValueError("give --threshold-db, --frank-db or --frank-csv")
    write_report_csv(rows, args.out or sys.stdout)


def cmd_pipeline(args, cfg):
    if args.print_defaults:
        sys.stdout.write(CONFIG_REFERENCE)
        return EXIT_OK
    if args.seed is not None:
        # one base seed fans out to the per-stage seeds
        cfg = replace(cfg, seeds={k: args.seed + i for i, k in enumerate(sorted(cfg.seeds))})
    res = run_pipeline(cfg, args.out, workers=args.workers)
    print(f"manifest: {res.manifest_path}")
    return EXIT_OK if res.ok else EXIT_NUMERIC


# --- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="overrides the config seed")
    common.add_argument("--out", default=None, help="output file (directory for pipeline)")
    common.add_argument("--config", default=None, help="TOML experiment configuration")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(
        prog="wiretap-ldpc", description="LDPC coset coding for the Gaussian wiretap channel.",
        epilog="Exit codes: 0 success, 2 invalid input, 3 infeasible design or construction, "
               "4 numerical failure.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("capacity", parents=[common], help="BI-AWGN capacity sweep as CSV")
    s.add_argument("--start-db", type=float, default=-10.0)
    s.add_argument("--stop-db", type=float, default=10.0)
    s.add_argument("--step-db", type=float, default=0.5)
    s.set_defaults(func=cmd_capacity)

    s = sub.add_parser("threshold", parents=[common], help="density-evolution thresholds")
    s.add_argument("--lam", help="variable distribution file (edge perspective)")
    s.add_argument("--rho", help="check distribution file; default: concentrated")
    s.add_argument("--rate", type=float, help="code rate for --lam")
    s.add_argument("--design", help="joint design file")
    s.add_argument("--reference", help="bundled reference pair 'R_s R_B'")
    s.add_argument("--model", choices=("approx", "exact"))
    s.set_defaults(func=cmd_threshold)

    s = sub.add_parser("optimize", parents=[common], help="joint degree-distribution design")
    s.add_argument("--rates", required=True, help="'R_s R_B'")
    s.add_argument("--dv-b", type=int)
    s.add_argument("--dv-f", type=int)
    s.add_argument("--model", choices=("approx", "exact"))
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_optimize)

    s = sub.add_parser("construct", parents=[common], help="PEG parity-check matrix (alist)")
    s.add_argument("--design")
    s.add_argument("--reference")
    s.add_argument("--n", type=int, required=True)
    s.set_defaults(func=cmd_construct)

    s = sub.add_parser("simulate", parents=[common], help="Monte-Carlo CER (CSV)")
    s.add_argument("--matrix", required=True, help="alist file with .json partition sidecar")
    s.add_argument("--role", choices=[r.value for r in Role], default="bob")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--snr-db", help="E_b/N_0 list in dB, e.g. '1.0 1.5 2.0'")
    g.add_argument("--target-cer", type=float)
    s.add_argument("--min-errors", type=int)
    s.add_argument("--max-frames", type=int)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("secrecy", parents=[common], help="equivocation-bound report (CSV)")
    s.add_argument("--rates", required=True, help="'R_s R_B'")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--frank-csv", help="simulate CSV for the frank role")
    s.add_argument("--frank-db", type=float, help="Frank's working point (dB, at his rate)")
    s.add_argument("--eta", type=float, default=1e-2)
    s.add_argument("--threshold-db", type=float, help="Frank's threshold for the asymptotic row")
    s.set_defaults(func=cmd_secrecy)

    s = sub.add_parser("pipeline", parents=[common], help="full experiment from a config")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--print-defaults", action="store_true", help="show the documented config")
    s.set_defaults(func=cmd_pipeline)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _config(args)
        code = args.func(args, cfg)
        return EXIT_OK if code is None else code
    except (InfeasibleDesignError, NoThresholdError, ConstructionError) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ConfigError, DistributionFormatError, ValueError, FileNotFoundError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (FloatingPointError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
