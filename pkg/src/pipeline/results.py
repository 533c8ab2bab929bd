"""
METARX Block Records and Results Files
Per-block records of a trial and their fixed-column CSV form.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import List, Sequence

import pandas as pd

RESULT_COLUMNS = ["block_index", "regime", "snr_db", "seed", "gate_valid", "bit_errors", "cum_ber", "grad_steps"]


@dataclass(frozen=True)
class BlockRecord:
    block_index: int
    is_pilot: bool
    gate_valid: bool
    bit_errors: int
    cum_ber: float
    grad_steps: int
    meta_event: bool = False


class BerAccumulator:
    """Cumulative coded BER over data blocks only."""

    def __init__(self, bits_per_block: int):
        self.bits_per_block = bits_per_block
        self.errors = 0
        self.blocks = 0

    def add(self, bit_errors: int) -> float:
        self.errors += bit_errors
        self.blocks += 1
        return self.ber

    @property
    def ber(self) -> float:
        if self.blocks == 0:
            return 0.0
        return self.errors / (self.blocks * self.bits_per_block)


def records_frame(records: Sequence[BlockRecord], regime: str, snr_db: float, seed: int) -> pd.DataFrame:
    rows = [
        {
            "block_index": r.block_index,
            "regime": regime,
            "snr_db": float(snr_db),
            "seed": int(seed),
            "gate_valid": int(r.gate_valid),
            "bit_errors": int(r.bit_errors),
            "cum_ber": float(r.cum_ber),
            "grad_steps": int(r.grad_steps),
        }
        for r in records
    ]
    return pd.DataFrame(rows, columns=RESULT_COLUMNS)


def save_results_csv(frame: pd.DataFrame, path: str | Path) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(target, index=False, columns=RESULT_COLUMNS, float_format="%.12g", lineterminator="\n")
    return target


def load_results_csv(path: str | Path) -> pd.DataFrame:
    frame = pd.read_csv(Path(path))
    missing = [c for c in RESULT_COLUMNS if c not in frame.columns]
    if missing:
        raise ValueError(f"results CSV missing required columns: {missing}")
    return frame


def data_records(records: Sequence[BlockRecord]) -> List[BlockRecord]:
    return [r for r in records if not r.is_pilot]
