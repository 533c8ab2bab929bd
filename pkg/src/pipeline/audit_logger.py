"""
Audit Logger for METARX

Per-trial audit report: the protocol phases with wall-clock durations,
block-level gate and meta-event counters, and the final summary.
Timestamps live only here; the results CSV stays deterministic.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass
class PhaseRecord:
    phase_name: str
    started_at: str = field(default_factory=_utc_now)
    status: str = "RUNNING"
    duration_ms: Optional[float] = None
    details: Dict[str, Any] = field(default_factory=dict)
    _clock: float = field(default_factory=time.perf_counter, repr=False)

    def close(self, status: str, details: Optional[Dict[str, Any]] = None) -> None:
        self.status = status
        self.duration_ms = round((time.perf_counter() - self._clock) * 1000.0, 3)
        self.details.update(details or {})

    def to_dict(self) -> Dict[str, Any]:
        return {
            "phase_name": self.phase_name,
            "status": self.status,
            "started_at": self.started_at,
            "duration_ms": self.duration_ms,
            "details": self.details,
        }


@dataclass
class BlockCounters:
    pilot_blocks: int = 0
    data_blocks: int = 0
    gate_accepted: int = 0
    gate_rejected: int = 0
    meta_events: List[int] = field(default_factory=list)


class AuditLogger:
    """Audit trail of one (config, regime, snr, seed) trial."""

    def __init__(self, run_name: str, regime: str, snr_db: float, seed: int):
        self.trial_id = f"{run_name}/{regime}/{snr_db:g}dB/seed{seed}"
        self.header = {"run_name": run_name, "regime": regime, "snr_db": float(snr_db), "seed": int(seed)}
        self.started_at = _utc_now()
        self.finished_at: Optional[str] = None
        self.phases: List[PhaseRecord] = []
        self.blocks = BlockCounters()
        self.final_status = "UNKNOWN"
        self.summary: Dict[str, Any] = {}
        self.config: Dict[str, Any] = {}

    def start_phase(self, phase_name: str) -> PhaseRecord:
        record = PhaseRecord(phase_name)
        self.phases.append(record)
        return record

    def end_phase(self, record: PhaseRecord, status: str, details: Optional[Dict[str, Any]] = None) -> None:
        record.close(status, details)

    def record_block(self, is_pilot: bool, gate_valid: bool, meta_event: bool, index: int) -> None:
        if is_pilot:
            self.blocks.pilot_blocks += 1
        else:
            self.blocks.data_blocks += 1
            if gate_valid:
                self.blocks.gate_accepted += 1
            else:
                self.blocks.gate_rejected += 1
        if meta_event:
            self.blocks.meta_events.append(index)

    def finalize(self, final_status: str, summary: Optional[Dict[str, Any]] = None) -> None:
        self.final_status = final_status
        self.finished_at = _utc_now()
        self.summary.update(summary or {})

    def to_dict(self) -> Dict[str, Any]:
        return {
            "trial_id": self.trial_id,
            **self.header,
            "started_at": self.started_at,
            "finished_at": self.finished_at,
            "final_status": self.final_status,
            "phases": [p.to_dict() for p in self.phases],
            "blocks": vars(self.blocks),
            "summary": self.summary,
            "config": self.config,
        }

    def save(self, output_path: Path) -> Path:
        output_path.parent.mkdir(parents=True, exist_ok=True)
        output_path.write_text(json.dumps(self.to_dict(), indent=2), encoding="utf-8")
        return output_path
