#!/usr/bin/env python3
"""
METARX - Online Meta-Learned Deep Receivers over Time-Varying Channels

Usage:
    python main.py run --config config/experiment.yaml --seed 7
    python main.py sweep --config config/experiment.yaml --set experiment.snr_list=[8,10,12]
    python main.py fsweep --config config/experiment.yaml --f-list 5,25,50
    python main.py gen-taps --L 4 --J 300 --out taps.csv
    python main.py selftest
"""

import argparse
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np
from dotenv import load_dotenv

# Add src to path
src_path = Path(__file__).parent / "src"
sys.path.insert(0, str(src_path))

from channel.profiles import default_tap_spec, random_tap_profile, synth_tap_profile  # noqa: E402
from channel.trace_io import TraceParseError, save_tap_trace  # noqa: E402
from pipeline.config import ROOT, ConfigError, ExperimentConfig, load_config, validate_experiment  # noqa: E402
from pipeline.orchestrator import TrialPipeline, TrialResult  # noqa: E402
from pipeline.selftest import render_selftest, run_selftest  # noqa: E402
from pipeline.sweep import render_summary, run_f_sweep, run_sweep  # noqa: E402

DEFAULT_CONFIG = ROOT / "config" / "experiment.yaml"

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2


def print_banner():
    """Print METARX banner."""
    banner = """
    ====================================================================
                                  METARX
          Online Meta-Learned Deep Receivers for Time-Varying Channels
    ====================================================================
    """
    print(banner)


def print_result(result: TrialResult):
    """Print trial result summary."""
    status = "SUCCESS" if result.success else "FAILED"

    print(f"\n{'=' * 60}")
    print(f"Trial Result: {status}")
    print(f"{'=' * 60}")
    print(f"  Regime:         {result.regime}")
    print(f"  SNR:            {result.snr_db:g} dB")
    print(f"  Seed:           {result.seed}")
    print(f"  Phases:         {' -> '.join(p.value for p in result.phases_completed)}")
    print(f"  Final BER:      {result.final_ber:.4e}")
    print(f"  Gate accepted:  {result.gate_acceptance:.1%}")
    print(f"  Meta events:    {len(result.meta_events)}")
    print(f"  Grad steps:     {result.data_grad_steps} (data) / {result.initial_steps} (initial)")

    if result.results_path:
        print(f"\n  Results saved to: {result.results_path}")


def _experiment(args: argparse.Namespace) -> ExperimentConfig:
    cfg = load_config(args.config, overrides=args.set or ())
    if getattr(args, "out", None):
        cfg = cfg.with_overrides(output_dir=args.out)
    if getattr(args, "trace", None):
        scenario = "siso_trace" if cfg.is_siso else "mimo_trace"
        cfg = cfg.with_overrides(scenario=scenario, trace_path=args.trace)
        validate_experiment(cfg)
    return cfg


def cmd_run(args: argparse.Namespace) -> int:
    cfg = _experiment(args)
    if args.regime:
        cfg = cfg.with_overrides(regime=args.regime)
        validate_experiment(cfg)
    pipeline = TrialPipeline(
        cfg,
        snr_db=args.snr,
        output_dir=cfg.output_dir,
        verbose=not args.quiet,
    )
    result = pipeline.run(args.seed if args.seed is not None else cfg.seeds[0])
    if not args.quiet:
        print_result(result)
    return EXIT_OK if result.success else EXIT_RUNTIME


def cmd_sweep(args: argparse.Namespace) -> int:
    cfg = _experiment(args)
    sweep = run_sweep(cfg, workers=args.workers, progress=not args.quiet)
    paths = sweep.save(cfg.output_dir, f"{cfg.name}_sweep")
    if not args.quiet:
        render_summary(sweep.summary, f"{cfg.name}: final coded BER vs SNR")
        print(f"Saved: {paths[0]}, {paths[1]}")
    return EXIT_OK


def cmd_fsweep(args: argparse.Namespace) -> int:
    cfg = _experiment(args)
    try:
        f_list = [int(x) for x in args.f_list.split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"--f-list must be comma-separated integers, got {args.f_list!r}") from exc
    sweep = run_f_sweep(cfg, f_list, workers=args.workers, progress=not args.quiet)
    paths = sweep.save(cfg.output_dir, f"{cfg.name}_fsweep")
    if not args.quiet:
        render_summary(sweep.summary, f"{cfg.name}: final coded BER vs F at {cfg.snr_db:g} dB")
        print(f"Saved: {paths[0]}, {paths[1]}")
    return EXIT_OK


def cmd_gen_taps(args: argparse.Namespace) -> int:
    if args.L < 1 or args.J < 1:
        raise ConfigError("--L and --J must be positive")
    if args.profile == "random":
        profile = random_tap_profile(args.L, args.J, np.random.default_rng(args.seed))
    else:
        profile = synth_tap_profile(default_tap_spec(args.L, args.profile), args.L, args.J)
    path = save_tap_trace(profile, args.out)
    print(f"[GEN-TAPS] {args.profile} profile L={args.L} J={args.J} -> {path}")
    return EXIT_OK


def cmd_selftest(args: argparse.Namespace) -> int:
    results = run_selftest(args.suite or None, seed=args.seed)
    render_selftest(results)
    return EXIT_OK if all(r.passed for r in results) else EXIT_RUNTIME


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="metarx",
        description="METARX - online meta-learned deep receivers",
    )
    parser.add_argument(
        "--plain",
        action="store_true",
        help="Use compact/plain terminal output (no banner).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def experiment_args(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", "-c", default=str(DEFAULT_CONFIG), help="Experiment YAML/TOML file")
        p.add_argument(
            "--set",
            action="append",
            metavar="SECTION.KEY=VALUE",
            help="Override a config value (repeatable)",
        )
        p.add_argument("--trace", help="Tap-trace CSV; switches the scenario to its trace variant")
        p.add_argument("--out", "-o", help="Output directory")
        p.add_argument("--quiet", "-q", action="store_true", help="Suppress progress output")

    run = sub.add_parser("run", help="Run one trial")
    experiment_args(run)
    run.add_argument("--seed", type=int, help="Trial seed (default: first configured seed)")
    run.add_argument("--snr", type=float, help="SNR in dB (default: experiment.snr_db)")
    run.add_argument("--regime", help="Training regime (default: experiment.regime)")
    run.set_defaults(handler=cmd_run)

    sweep = sub.add_parser("sweep", help="Sweep regimes x SNR list x seeds")
    experiment_args(sweep)
    sweep.add_argument("--workers", type=int, help="Worker processes (capped by METARX_MAX_WORKERS)")
    sweep.set_defaults(handler=cmd_sweep)

    fsweep = sub.add_parser("fsweep", help="Sweep the meta frequency F")
    experiment_args(fsweep)
    fsweep.add_argument("--f-list", default="5,10,15,25,50", help="Comma-separated F values")
    fsweep.add_argument("--workers", type=int, help="Worker processes (capped by METARX_MAX_WORKERS)")
    fsweep.set_defaults(handler=cmd_fsweep)

    gen = sub.add_parser("gen-taps", help="Write a synthetic tap-trace CSV")
    gen.add_argument("--L", type=int, default=4, help="Number of taps")
    gen.add_argument("--J", type=int, default=300, help="Number of blocks")
    gen.add_argument("--out", required=True, help="Output CSV path")
    gen.add_argument("--profile", choices=("train", "test", "random"), default="train")
    gen.add_argument("--seed", type=int, default=0, help="Seed for the random profile")
    gen.set_defaults(handler=cmd_gen_taps)

    selftest = sub.add_parser("selftest", help="Run the oracle self-test suites")
    selftest.add_argument("--suite", action="append", help="Run only this suite (repeatable)")
    selftest.add_argument("--seed", type=int, default=0)
    selftest.set_defaults(handler=cmd_selftest)
    return parser


def cli_main(argv: Optional[Sequence[str]] = None) -> int:
    # Load environment variables from .env when present.
    load_dotenv()

    parser = build_parser()
    try:
        args = parser.parse_args(list(argv) if argv is not None else None)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_CONFIG

    if not args.plain and args.command in ("run", "sweep", "fsweep") and not args.quiet:
        print_banner()

    try:
        return args.handler(args)
    except (ConfigError, TraceParseError, FileNotFoundError) as exc:
        print(f"[ERROR] config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001
        print(f"[ERROR] {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def main(argv: Optional[List[str]] = None) -> None:
    sys.exit(cli_main(argv))


if __name__ == "__main__":
    main()
