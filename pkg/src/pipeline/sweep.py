"""
METARX Sweeps
Runs independent trials over (regime, SNR, seed) or over the meta
frequency F, in a process pool capped by METARX_MAX_WORKERS.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import pandas as pd
from rich.console import Console
from rich.table import Table
from tqdm import tqdm

from pipeline.config import META_REGIMES, ConfigError, ExperimentConfig
from pipeline.orchestrator import TrialPipeline

TRIAL_COLUMNS = ["regime", "snr_db", "meta_frequency", "seed", "final_ber", "gate_acceptance", "data_grad_steps"]

TrialTask = Tuple[ExperimentConfig, str, float, int, Optional[str]]


def resolve_workers(requested: Optional[int], tasks: int) -> int:
    """Requested (or CPU count) workers, capped by METARX_MAX_WORKERS and the task count."""
    workers = requested or os.cpu_count() or 1
    cap = os.getenv("METARX_MAX_WORKERS", "").strip()
    if cap:
        try:
            workers = min(workers, max(1, int(cap)))
        except ValueError as exc:
            raise ConfigError(f"METARX_MAX_WORKERS must be an integer, got {cap!r}") from exc
    return max(1, min(workers, tasks))


def _run_task(task: TrialTask) -> Dict[str, float]:
    cfg, regime, snr_db, seed, output_dir = task
    result = TrialPipeline(cfg, regime=regime, snr_db=snr_db, output_dir=output_dir).run(seed)
    return {
        "regime": regime,
        "snr_db": float(snr_db),
        "meta_frequency": cfg.train.meta_frequency,
        "seed": int(seed),
        "final_ber": result.final_ber,
        "gate_acceptance": result.gate_acceptance,
        "data_grad_steps": result.data_grad_steps,
    }


def run_tasks(tasks: Sequence[TrialTask], workers: Optional[int] = None, progress: bool = False) -> pd.DataFrame:
    """Execute trials; row order follows task order whatever the completion order."""
    count = resolve_workers(workers, len(tasks))
    if count == 1:
        rows = [_run_task(t) for t in tqdm(tasks, desc="trials", disable=not progress)]
    else:
        with ProcessPoolExecutor(max_workers=count) as pool:
            rows = list(tqdm(pool.map(_run_task, tasks), total=len(tasks), desc="trials", disable=not progress))
    return pd.DataFrame(rows, columns=TRIAL_COLUMNS)


@dataclass
class SweepResult:
    trials: pd.DataFrame
    summary: pd.DataFrame

    def save(self, directory: str | Path, stem: str) -> Tuple[Path, Path]:
        target = Path(directory)
        target.mkdir(parents=True, exist_ok=True)
        trials_path = target / f"{stem}_trials.csv"
        summary_path = target / f"{stem}_summary.csv"
        self.trials.to_csv(trials_path, index=False, float_format="%.12g", lineterminator="\n")
        self.summary.to_csv(summary_path, index=False, float_format="%.12g", lineterminator="\n")
        return trials_path, summary_path


def summarize(trials: pd.DataFrame, keys: Sequence[str]) -> pd.DataFrame:
    """Mean final BER per key group plus one column per seed."""
    keys = list(keys)
    mean = trials.groupby(keys, sort=False)["final_ber"].mean().rename("mean_ber")
    per_seed = trials.pivot_table(index=keys, columns="seed", values="final_ber", sort=False)
    per_seed.columns = [f"seed_{int(s)}" for s in per_seed.columns]
    return pd.concat([mean, per_seed], axis=1).reset_index()


def run_sweep(
    cfg: ExperimentConfig,
    workers: Optional[int] = None,
    output_dir: Optional[str] = None,
    progress: bool = False,
) -> SweepResult:
    """Every (regime, snr, seed) trial; one summary row per regime x snr."""
    if not cfg.snr_list or not cfg.seeds:
        raise ConfigError("a sweep needs at least one SNR and one seed", field="experiment")
    tasks: List[TrialTask] = [
        (cfg, regime, float(snr), int(seed), output_dir)
        for regime in cfg.regimes
        for snr in cfg.snr_list
        for seed in cfg.seeds
    ]
    trials = run_tasks(tasks, workers, progress)
    return SweepResult(trials, summarize(trials, ["regime", "snr_db"]))


def run_f_sweep(
    cfg: ExperimentConfig,
    f_list: Sequence[int],
    workers: Optional[int] = None,
    output_dir: Optional[str] = None,
    progress: bool = False,
) -> SweepResult:
    """Final BER per meta frequency F at the configured SNR, sorted by F."""
    if cfg.regime not in META_REGIMES:
        raise ConfigError("the F sweep needs a meta-learning regime", field="experiment.regime")
    if not f_list or any(int(f) < 1 for f in f_list):
        raise ConfigError("F values must be positive integers", field="training.meta_frequency")
    tasks: List[TrialTask] = [
        (cfg.with_train(meta_frequency=int(f)), cfg.regime, float(cfg.snr_db), int(seed), output_dir)
        for f in sorted({int(f) for f in f_list})
        for seed in cfg.seeds
    ]
    trials = run_tasks(tasks, workers, progress)
    summary = summarize(trials, ["meta_frequency"]).sort_values("meta_frequency").reset_index(drop=True)
    return SweepResult(trials, summary)


def _cell(name: str, value) -> str:
    if name == "mean_ber" or name.startswith("seed_"):
        return f"{float(value):.3e}"
    if isinstance(value, float) and value.is_integer():
        return f"{value:g}"
    return str(value)


def render_summary(summary: pd.DataFrame, title: str, console: Optional[Console] = None) -> None:
    table = Table(title=title)
    for column in summary.columns:
        table.add_column(str(column), justify="left" if column == "regime" else "right")
    for _, row in summary.iterrows():
        table.add_row(*[_cell(str(name), value) for name, value in row.items()])
    (console or Console()).print(table)
