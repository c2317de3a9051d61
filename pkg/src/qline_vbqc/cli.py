"""Command-line entry point: ``qline-vbqc run <config>``.

Exit status: 0 accept, 2 abort, 1 usage/config/runtime error.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from .blindness import BlindnessReport, blindness_report
from .config import ConfigError, ConfigValidationError, RunConfig, from_mapping, load_config
from .devices import noisy_source_state
from .protocol import Transcript, run_protocol
from .verify import DegenerateVoteError, Verdict, decide, robustness_bound, soundness_bound

EXIT_ACCEPT, EXIT_ERROR, EXIT_ABORT = 0, 1, 2

BOUND_NOTE = ("robustness_bound and soundness_bound are generic Hoeffding tail bounds "
              "exp(-2 n_test gap^2), not the protocol's published error expressions")


@dataclass
class RunReport:
    config: RunConfig
    transcript: Transcript
    verdict: Verdict
    histogram: dict[str, list[int]]
    bounds: dict[str, float | None]
    blindness: BlindnessReport | None
    wall_clock_s: float
    overrides: dict[str, Any] = dataclasses.field(default_factory=dict)

    def summary(self) -> dict[str, Any]:
        th = self.config.thresholds
        s = self.verdict.stats
        out = {
            "verdict": self.verdict.name,
            "output": self.verdict.output,
            "epsilon": s.epsilon,
            "omega": th.omega,
            "sigma": th.sigma,
            "nu": th.nu,
            "n": s.n,
            "n_test": s.n_test,
            "n_comp": s.n_comp,
            "failed_tests": s.failed_tests,
            "majority_fraction": s.majority_fraction,
            **self.bounds,
            "bounds_note": BOUND_NOTE,
            "histogram": self.histogram,
            "seed": self.config.seed,
            "config": self.config.snapshot(),
            "overrides": self.overrides,
            "wall_clock_s": self.wall_clock_s,
        }
        if self.blindness is not None:
            out["blindness"] = self.blindness.to_dict()
        return out


def outcome_histogram(t: Transcript) -> dict[str, list[int]]:
    """Counts of (m1_true, m2_true) in order 00, 01, 10, 11 per round type."""
    code = 2 * t.m1_true + t.m2_true
    return {
        "test": np.bincount(code[t.is_test], minlength=4).tolist(),
        "computation": np.bincount(code[~t.is_test], minlength=4).tolist(),
    }


def run(config: RunConfig, threads: int | None = None) -> RunReport:
    start = time.perf_counter()
    t = run_protocol(config.algorithm, config.n, config.test_fraction, config.noise, config.behavior,
                     config.seed, config.realization, threads=threads)
    th = config.thresholds
    verdict = decide(t, th)
    n_test = verdict.stats.n_test
    bounds = {
        "robustness_bound": robustness_bound(n_test, th.omega, th.nu) if th.omega > th.nu else None,
        "soundness_bound": soundness_bound(n_test, th.sigma, th.omega),
    }
    blind = blindness_report(noisy_source_state(config.noise)) if config.blindness else None
    return RunReport(config=config, transcript=t, verdict=verdict, histogram=outcome_histogram(t),
                     bounds=bounds, blindness=blind, wall_clock_s=time.perf_counter() - start)


def emit(report: RunReport, out_dir, formats=("json", "csv")) -> list[Path]:
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    written = []
    if "json" in formats:
        p = out / "summary.json"
        p.write_text(json.dumps(report.summary(), indent=2, sort_keys=True) + "\n")
        written.append(p)
        p = out / "rounds.jsonl"
        report.transcript.write_jsonl(p)
        written.append(p)
    if "csv" in formats:
        p = out / "histogram.csv"
        with open(p, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["round_type", "m1m2_00", "m1m2_01", "m1m2_10", "m1m2_11"])
            for kind in ("test", "computation"):
                w.writerow([kind, *report.histogram[kind]])
        written.append(p)
    return written


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qline-vbqc", description="Simulate the two-client verifiable blind computation protocol.")
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run one configured experiment")
    r.add_argument("config", help="YAML run configuration")
    r.add_argument("--seed", type=int)
    r.add_argument("--rounds", type=int, dest="n")
    r.add_argument("--omega", type=float)
    r.add_argument("--adversary")
    r.add_argument("--blindness", action="store_true", default=None)
    r.add_argument("--out", dest="output_dir")
    r.add_argument("--threads", type=int, help="worker threads (default: $QLINE_VBQC_THREADS or 1)")
    return ap


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse uses 2 for usage errors, which would read as an abort
        return EXIT_ACCEPT if exc.code == 0 else EXIT_ERROR
    try:
        cfg = load_config(args.config)
        overrides = {k: getattr(args, k) for k in ("seed", "n", "omega", "adversary", "blindness", "output_dir")
                     if getattr(args, k) is not None}
        if overrides:
            raw = cfg.snapshot()
            raw["output_dir"] = cfg.output_dir
            raw.update(overrides)
            cfg = from_mapping(raw)
        report = run(cfg, threads=args.threads)
        report.overrides = overrides
        emit(report, cfg.output_dir)
    except ConfigError as exc:
        print(json.dumps(exc.to_dict()), file=sys.stderr)
        return EXIT_ERROR
    except (DegenerateVoteError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    s = report.summary()
    print(f"{s['verdict']}: output={s['output']} epsilon={s['epsilon']:.4f} omega={s['omega']} "
          f"n_test={s['n_test']} majority={s['majority_fraction']} -> {cfg.output_dir}")
    return EXIT_ACCEPT if report.verdict.accept else EXIT_ABORT


if __name__ == "__main__":
    sys.exit(main())
