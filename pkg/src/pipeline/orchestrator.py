"""
METARX Trial Orchestrator
Streams T_p pilot blocks and T_d coded data blocks through a receiver:
detect, decode, gate, then buffer, meta-learn and train per regime.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import List, Optional

import numpy as np

from fec.validation_gate import SelfSupervisionGate
from neural.mlp import clamp_tally
from pipeline.adapters import ReceiverAdapter, get_adapter
from pipeline.audit_logger import AuditLogger
from pipeline.config import ExperimentConfig
from pipeline.results import BerAccumulator, BlockRecord, records_frame, save_results_csv
from pipeline.scenario import BlockSource, ScenarioChannel
from training.buffer import LabeledBlock


class TrialPhase(Enum):
    PILOT = "pilot_phase"
    INITIAL_TRAINING = "initial_training"
    DATA = "data_phase"


@dataclass
class TrialStreams:
    """Independent random streams so every regime sees the same transmitted blocks."""

    message: np.random.Generator
    noise: np.random.Generator
    channel: np.random.Generator
    init: np.random.Generator
    train: np.random.Generator

    @classmethod
    def from_seed(cls, seed: int) -> "TrialStreams":
        children = np.random.SeedSequence(seed).spawn(5)
        return cls(*(np.random.default_rng(child) for child in children))


@dataclass
class TrialResult:
    """Result of one trial."""

    success: bool
    regime: str
    snr_db: float
    seed: int
    records: List[BlockRecord] = field(default_factory=list)
    phases_completed: List[TrialPhase] = field(default_factory=list)
    meta_events: List[int] = field(default_factory=list)
    initial_steps: int = 0
    clamped_probabilities: int = 0
    errors: List[str] = field(default_factory=list)
    results_path: Optional[Path] = None
    checkpoint_path: Optional[Path] = None

    @property
    def final_ber(self) -> float:
        data = [r for r in self.records if not r.is_pilot]
        return data[-1].cum_ber if data else 0.0

    @property
    def gate_acceptance(self) -> float:
        data = [r for r in self.records if not r.is_pilot]
        return sum(r.gate_valid for r in data) / len(data) if data else 0.0

    @property
    def data_grad_steps(self) -> int:
        return sum(r.grad_steps for r in self.records if not r.is_pilot)


class TrialPipeline:
    """
    One (config, regime, snr, seed) trial of the block-streaming protocol.

    Phases:
    1. PILOT: known pilot blocks enter the buffer (and train per block when streamed)
    2. INITIAL_TRAINING: pooled training on the pilot set
    3. DATA: detect -> RS decode -> gate -> adapt, with coded BER over data blocks
    """

    def __init__(
        self,
        cfg: ExperimentConfig,
        regime: Optional[str] = None,
        snr_db: Optional[float] = None,
        output_dir: Optional[str | Path] = None,
        verbose: bool = False,
    ):
        self.cfg = cfg
        self.regime = regime or cfg.regime
        self.snr_db = cfg.snr_db if snr_db is None else float(snr_db)
        self.output_dir = Path(output_dir) if output_dir is not None else None
        self.verbose = verbose
        self.gate = SelfSupervisionGate(cfg.rs_params, cfg.train.gate_threshold)

    def run(self, seed: int) -> TrialResult:
        cfg = self.cfg
        result = TrialResult(success=False, regime=self.regime, snr_db=self.snr_db, seed=seed)
        audit = AuditLogger(cfg.name, self.regime, self.snr_db, seed)
        audit.config = {"scenario": cfg.scenario, "receiver": cfg.receiver, "train": cfg.train.to_dict()}

        self._print_section(f"METARX TRIAL {cfg.name}")
        self._print_kv("Regime", self.regime)
        self._print_kv("SNR", f"{self.snr_db:g} dB")
        self._print_kv("Seed", str(seed))

        streams = TrialStreams.from_seed(seed)
        scenario = ScenarioChannel(cfg, streams.channel, self.snr_db)
        source = BlockSource(cfg, scenario, streams.message, streams.noise)
        adapter = get_adapter(cfg, self.regime, streams.init, scenario.link.sigma)
        pooled = cfg.pilot_training == "pooled"
        clamp_tally.reset()

        phase = audit.start_phase("PILOT_PHASE")
        try:
            pilots = self._pilot_phase(source, adapter, streams.train, pooled, result)
            audit.end_phase(phase, "SUCCESS", {"pilot_blocks": len(pilots), "mode": cfg.pilot_training})
        except Exception as exc:
            self._fail(result, audit, phase, "Pilot phase", exc)
            raise

        phase = audit.start_phase("INITIAL_TRAINING")
        try:
            result.initial_steps = adapter.initial_training(pilots, streams.train, pooled)
            result.phases_completed.append(TrialPhase.INITIAL_TRAINING)
            audit.end_phase(phase, "SUCCESS", {"gradient_steps": result.initial_steps})
        except Exception as exc:
            self._fail(result, audit, phase, "Initial training", exc)
            raise

        phase = audit.start_phase("DATA_PHASE")
        try:
            self._data_phase(source, adapter, streams.train, result)
            audit.end_phase(
                phase,
                "SUCCESS",
                {
                    "data_blocks": cfg.data_blocks,
                    "gate_acceptance": result.gate_acceptance,
                    "gradient_steps": result.data_grad_steps,
                },
            )
        except Exception as exc:
            self._fail(result, audit, phase, "Data phase", exc)
            raise

        result.meta_events = list(adapter.stats.meta_events)
        result.clamped_probabilities = clamp_tally.reset()
        if result.clamped_probabilities:
            self._print_step("WARN", "NUMERICS", f"{result.clamped_probabilities} label probabilities clamped at 1e-30")
        for record in result.records:
            audit.record_block(record.is_pilot, record.gate_valid, record.meta_event, record.block_index)
        result.success = True
        audit.finalize(
            "SUCCESS",
            {
                "final_ber": result.final_ber,
                "gate_acceptance": result.gate_acceptance,
                "meta_events": result.meta_events,
                "initial_steps": result.initial_steps,
                "data_grad_steps": result.data_grad_steps,
                "clamped_probabilities": result.clamped_probabilities,
            },
        )
        self._print_step("DONE", self.regime.upper(), f"final coded BER {result.final_ber:.3e}")
        self._save(result, audit, adapter)
        return result

    def _pilot_phase(
        self,
        source: BlockSource,
        adapter: ReceiverAdapter,
        rng: np.random.Generator,
        pooled: bool,
        result: TrialResult,
    ) -> List[LabeledBlock]:
        pilots: List[LabeledBlock] = []
        for j in range(self.cfg.pilot_blocks):
            block = source.next_block(j)
            labeled = LabeledBlock(j, block.symbols, block.observations)
            pilots.append(labeled)
            if pooled:
                adapter.observe(labeled)
                steps = 0
            else:
                steps = adapter.adapt(j, labeled, rng)
            result.records.append(BlockRecord(j, True, True, 0, 0.0, steps, j in adapter.stats.meta_events))
        result.phases_completed.append(TrialPhase.PILOT)
        self._print_step("PILOT", self.regime.upper(), f"{len(pilots)} pilot blocks received")
        return pilots

    def _data_phase(
        self,
        source: BlockSource,
        adapter: ReceiverAdapter,
        rng: np.random.Generator,
        result: TrialResult,
    ) -> None:
        cfg = self.cfg
        ber = BerAccumulator(cfg.users * cfg.rs_params.message_bits)
        for offset in range(cfg.data_blocks):
            j = cfg.pilot_blocks + offset
            block = source.next_block(j)
            detected = np.atleast_2d(adapter.detect(block.observations, block.channel))
            gates = self.gate.evaluate_block(detected)
            bit_errors = int(
                sum(np.count_nonzero(g.message_bits != truth) for g, truth in zip(gates, block.message_bits))
            )
            valid = all(g.valid for g in gates)
            labeled = None
            if valid:
                labels = np.vstack([g.reencoded_symbols for g in gates])
                labeled = LabeledBlock(j, labels, block.observations)
            steps = adapter.adapt(j, labeled, rng)
            cum_ber = ber.add(bit_errors)
            result.records.append(
                BlockRecord(j, False, valid, bit_errors, cum_ber, steps, j in adapter.stats.meta_events)
            )
            if self.verbose and (offset + 1) % 10 == 0:
                self._print_step("DATA", self.regime.upper(), f"block {j}: cumulative BER {cum_ber:.3e}")
        result.phases_completed.append(TrialPhase.DATA)

    def _fail(self, result: TrialResult, audit: AuditLogger, phase, label: str, exc: Exception) -> None:
        result.errors.append(f"{label} error: {exc}")
        audit.end_phase(phase, "FAILED", {"error": str(exc)})
        audit.finalize("FAILED")
        self._save_audit(audit, result.seed)

    def _save(self, result: TrialResult, audit: AuditLogger, adapter: ReceiverAdapter) -> None:
        if self.output_dir is None:
            return
        frame = records_frame(result.records, self.regime, self.snr_db, result.seed)
        result.results_path = save_results_csv(frame, self.output_dir / self._stem(result.seed, "csv"))
        result.checkpoint_path = adapter.save_checkpoint(self.output_dir / self._stem(result.seed, "npz"))
        self._save_audit(audit, result.seed)
        self._print_step("SAVE", "RESULTS", str(result.results_path))

    def _save_audit(self, audit: AuditLogger, seed: int) -> None:
        if self.output_dir is not None:
            audit.save(self.output_dir / self._stem(seed, "audit.json"))

    def _stem(self, seed: int, suffix: str) -> str:
        return f"{self.cfg.name}_{self.regime}_{self.snr_db:g}dB_seed{seed}.{suffix}"

    def _print_section(self, title: str):
        if not self.verbose:
            return
        print(f"\n{'=' * 72}")
        print(f"{title}")
        print(f"{'=' * 72}")

    def _print_step(self, phase: str, owner: str, message: str):
        if self.verbose:
            print(f"[{phase}] [{owner}] {message}")

    def _print_kv(self, key: str, value: str):
        if self.verbose:
            print(f"{key}: {value}")


def run_trial(
    cfg: ExperimentConfig,
    seed: int,
    regime: Optional[str] = None,
    snr_db: Optional[float] = None,
) -> List[BlockRecord]:
    """Records of one trial, without touching the filesystem."""
    return TrialPipeline(cfg, regime=regime, snr_db=snr_db).run(seed).records
