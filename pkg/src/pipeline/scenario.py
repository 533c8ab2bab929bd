"""
METARX Scenario Channels
Per-block channel realizations for each scenario and the coded block generator.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from channel.models import ChannelConfig, MimoChannelSpec, exp_decay_matrix, mimo_transmit, siso_transmit
from channel.profiles import (
    TapProfile,
    default_tap_spec,
    modulated_mimo_channel,
    random_tap_profile,
    synth_tap_profile,
    trace_mimo_channel,
)
from channel.trace_io import TraceParseError, load_tap_trace
from fec.modulation import bits_to_bpsk, symbols_to_bits
from fec.reed_solomon import rs_encode
from pipeline.config import ExperimentConfig


@dataclass
class BlockChannel:
    """The channel in force during one block; exactly one field is set."""

    taps: Optional[np.ndarray] = None
    mimo: Optional[MimoChannelSpec] = None


@dataclass
class CodedBlock:
    index: int
    is_pilot: bool
    message_bits: np.ndarray  # K x 8k
    symbols: np.ndarray  # K x B
    observations: np.ndarray  # N x B
    channel: BlockChannel


class ScenarioChannel:
    """Maps a global block index to its channel realization."""

    def __init__(self, cfg: ExperimentConfig, channel_rng: np.random.Generator, snr_db: float):
        self.cfg = cfg
        self.link = ChannelConfig.from_snr(snr_db, cfg.nonlinearity, cfg.tanh_scale)
        self._trace: Optional[TapProfile] = None
        if cfg.scenario.endswith("_trace"):
            self._trace = load_tap_trace(cfg.trace_path)
            expected = cfg.memory if cfg.is_siso else cfg.antennas * cfg.users
            if self._trace.L != expected:
                raise TraceParseError(
                    f"{cfg.trace_path}: trace has {self._trace.L} columns, the channel needs {expected}"
                )
        self._train_profile: Optional[TapProfile] = None
        self._test_profile: Optional[TapProfile] = None
        self._random_profile: Optional[TapProfile] = None
        if cfg.is_siso:
            self._train_profile = synth_tap_profile(default_tap_spec(cfg.memory, "train"), cfg.memory, max(cfg.pilot_blocks, 1))
            self._test_profile = synth_tap_profile(default_tap_spec(cfg.memory, "test"), cfg.memory, max(cfg.data_blocks, 1))
            if cfg.scenario == "siso_random":
                self._random_profile = random_tap_profile(cfg.memory, max(cfg.total_blocks, 1), channel_rng)

    def realization(self, j: int) -> BlockChannel:
        cfg = self.cfg
        is_pilot = j < cfg.pilot_blocks
        local = j if is_pilot else j - cfg.pilot_blocks
        phase = "train" if is_pilot else "test"

        if cfg.is_siso:
            if cfg.scenario == "siso_random":
                return BlockChannel(taps=self._random_profile.block_taps(j))
            if cfg.scenario == "siso_trace" and not is_pilot:
                return BlockChannel(taps=self._trace.block_taps(local))
            profile = self._train_profile if is_pilot else self._test_profile
            return BlockChannel(taps=profile.block_taps(local))

        N, K = cfg.antennas, cfg.users
        if cfg.scenario == "mimo_trace" and not is_pilot:
            return BlockChannel(mimo=trace_mimo_channel(self._trace, N, K, local))
        if cfg.scenario == "mimo_modular":
            return BlockChannel(mimo=modulated_mimo_channel(N, K, local, phase, users=[cfg.mobile_user]))
        if not cfg.mimo_time_varying:
            return BlockChannel(mimo=exp_decay_matrix(N, K))
        return BlockChannel(mimo=modulated_mimo_channel(N, K, local, phase))

    def transmit(self, symbols: np.ndarray, channel: BlockChannel, rng: np.random.Generator) -> np.ndarray:
        if channel.taps is not None:
            return siso_transmit(symbols, channel.taps, self.link, rng)
        return mimo_transmit(symbols, channel.mimo, self.link, rng)


class BlockSource:
    """Random RS-coded BPSK blocks, one independent codeword per user."""

    def __init__(
        self,
        cfg: ExperimentConfig,
        scenario: ScenarioChannel,
        message_rng: np.random.Generator,
        noise_rng: np.random.Generator,
    ):
        self.cfg = cfg
        self.scenario = scenario
        self.message_rng = message_rng
        self.noise_rng = noise_rng

    def next_block(self, j: int) -> CodedBlock:
        params = self.cfg.rs_params
        bits: List[np.ndarray] = []
        rows: List[np.ndarray] = []
        for _ in range(self.cfg.users):
            message = [int(v) for v in self.message_rng.integers(0, 256, size=params.k)]
            codeword_bits = symbols_to_bits(rs_encode(message, params))
            bits.append(symbols_to_bits(message))
            rows.append(bits_to_bpsk(codeword_bits))
        symbols = np.vstack(rows)
        channel = self.scenario.realization(j)
        observations = self.scenario.transmit(symbols, channel, self.noise_rng)
        return CodedBlock(
            index=j,
            is_pilot=j < self.cfg.pilot_blocks,
            message_bits=np.vstack(bits),
            symbols=symbols,
            observations=observations,
            channel=channel,
        )
