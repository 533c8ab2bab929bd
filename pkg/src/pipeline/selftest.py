"""
METARX Self-Test Suites
Quick oracle checks of the building blocks: field axioms, RS round trips,
MLP gradients, Viterbi against exhaustive search, the scalar meta-gradient
and uncoded AWGN calibration.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from rich.console import Console
from rich.table import Table

from channel.models import ChannelConfig, siso_transmit
from channel.theory import bpsk_awgn_ber
from fec.galois import GENERATOR, gf_add, gf_div, gf_inv, gf_mul, gf_pow
from fec.modulation import bits_to_bpsk
from fec.reed_solomon import RS_17_15, RS_19_15, rs_decode, rs_encode
from neural.mlp import LabeledBatch, classifier_spec, loss_and_grad, mlp_init, relu_pattern
from receivers.viterbinet import Trellis, state_labels, true_loglik_table, viterbi_detect
from training.config import MetaMode
from training.meta import meta_gradient
from training.objective import QuadraticObjective


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    duration_ms: int = 0


def check_field_axioms(rng: np.random.Generator, draws: int = 2000) -> str:
    if gf_pow(GENERATOR, 255) != 1 or len({gf_pow(GENERATOR, i) for i in range(255)}) != 255:
        raise AssertionError("generator does not have order 255")
    values = rng.integers(0, 256, size=(draws, 3))
    for a, b, c in values.tolist():
        if gf_mul(a, b) != gf_mul(b, a):
            raise AssertionError(f"multiplication not commutative for {a}, {b}")
        if gf_mul(a, gf_add(b, c)) != gf_add(gf_mul(a, b), gf_mul(a, c)):
            raise AssertionError(f"distributivity fails for {a}, {b}, {c}")
        if b and gf_mul(gf_div(a, b), b) != a:
            raise AssertionError(f"division does not invert multiplication for {a}, {b}")
        if a and gf_mul(a, gf_inv(a)) != 1:
            raise AssertionError(f"inverse fails for {a}")
    return f"{draws} random triples"


def check_rs_round_trips(rng: np.random.Generator, draws: int = 500) -> str:
    for params in (RS_17_15, RS_19_15):
        for _ in range(draws):
            msg = rng.integers(0, 256, size=params.k).tolist()
            word = rs_encode(msg, params)
            errors = int(rng.integers(0, params.t + 1))
            for pos in rng.choice(params.n, size=errors, replace=False):
                word[pos] ^= int(rng.integers(1, 256))
            decoded, corrected = rs_decode(word, params)
            if decoded != msg or corrected != errors:
                raise AssertionError(f"[{params.n},{params.k}] failed with {errors} symbol errors")
    return f"{draws} words per code"


def max_gradient_error(spec, params: np.ndarray, batch: LabeledBatch, step: float = 1e-5) -> float:
    """
    Relative error between the analytic gradient and central differences.
    Coordinates whose bump flips a ReLU unit sit on a kink and are skipped.
    """
    _, grad = loss_and_grad(spec, params, batch)
    numeric = grad.copy()
    for i in range(params.size):
        bump = np.zeros_like(params)
        bump[i] = step
        if not np.array_equal(
            relu_pattern(spec, params + bump, batch.inputs), relu_pattern(spec, params - bump, batch.inputs)
        ):
            continue
        numeric[i] = (loss_and_grad(spec, params + bump, batch)[0] - loss_and_grad(spec, params - bump, batch)[0]) / (
            2 * step
        )
    scale = max(float(np.linalg.norm(grad) + np.linalg.norm(numeric)), 1e-12)
    return float(np.linalg.norm(grad - numeric)) / scale


def check_gradients(rng: np.random.Generator, draws: int = 10) -> str:
    worst = 0.0
    for d_in, d_out in ((1, 4), (3, 2)):
        spec = classifier_spec(d_in, d_out, (5, 3))
        for _ in range(draws):
            params = mlp_init(spec, rng)
            batch = LabeledBatch(rng.normal(size=(8, d_in)), rng.integers(0, d_out, size=8))
            worst = max(worst, max_gradient_error(spec, params, batch))
    if worst >= 1e-4:
        raise AssertionError(f"gradient relative error {worst:.2e}")
    return f"max relative error {worst:.1e}"


def exhaustive_ml(table: np.ndarray, memory: int) -> np.ndarray:
    """Best sequence over all 2^B candidates; +1 precedes -1 on ties."""
    rows = np.arange(table.shape[0])
    best, best_seq = -np.inf, None
    for seq in itertools.product((1.0, -1.0), repeat=table.shape[0]):
        candidate = np.asarray(seq)
        score = table[rows, state_labels(candidate, memory)].sum()
        if score > best:
            best, best_seq = score, candidate
    return best_seq


def check_viterbi(rng: np.random.Generator, draws: int = 200) -> str:
    for _ in range(draws):
        memory = int(rng.integers(1, 4))
        length = int(rng.integers(memory, 11))
        taps = rng.normal(size=memory)
        s = bits_to_bpsk(rng.integers(0, 2, size=length))
        y = np.convolve(s, taps)[:length] + 0.7 * rng.normal(size=length)
        table = true_loglik_table(taps, 0.7, y)
        found = viterbi_detect(table, Trellis(memory))[0]
        expected = exhaustive_ml(table, memory)
        if not np.array_equal(found, expected):
            rows = np.arange(length)
            gap = table[rows, state_labels(expected, memory)].sum() - table[rows, state_labels(found, memory)].sum()
            if gap > 1e-9:
                raise AssertionError(f"viterbi misses the ML sequence by {gap:.3e} (L={memory}, B={length})")
    return f"{draws} random instances"


def check_meta_gradient(rng: np.random.Generator) -> str:
    objective = QuadraticObjective()
    theta, support, query = np.zeros(1), np.ones(1), np.full(1, 2.0)
    exact = meta_gradient(objective, theta, support, query, 0.1, MetaMode.EXACT_HVP)[0]
    first = meta_gradient(objective, theta, support, query, 0.1, MetaMode.FIRST_ORDER)[0]
    if abs(exact + 1.71) > 1e-10 or abs(first + 1.9) > 1e-10:
        raise AssertionError(f"meta-gradients {exact:.12f} / {first:.12f}, expected -1.71 / -1.9")
    return f"exact {exact:.6f}, first-order {first:.6f}"


def check_awgn_calibration(rng: np.random.Generator, blocks: int = 2000, block_length: int = 1000) -> str:
    """Single-tap channel, so the stream is detected as independent stacked blocks."""
    details = []
    symbols = blocks * block_length
    for snr_db in (4.0, 6.0, 8.0):
        link = ChannelConfig.from_snr(snr_db)
        s = bits_to_bpsk(rng.integers(0, 2, size=symbols))
        y = siso_transmit(s, np.ones(1), link, rng)[0]
        table = true_loglik_table(np.ones(1), link.sigma, y).reshape(blocks, block_length, 2)
        detected = viterbi_detect(table, Trellis(1)).reshape(-1)
        measured = float(np.mean(detected != s))
        expected = float(bpsk_awgn_ber(snr_db))
        if abs(measured - expected) > 0.15 * expected:
            raise AssertionError(f"{snr_db:g} dB: BER {measured:.4e} vs Q(sqrt(SNR)) {expected:.4e}")
        details.append(f"{snr_db:g}dB {measured:.3e}")
    return ", ".join(details)


SUITES: Dict[str, Callable[[np.random.Generator], str]] = {
    "field_axioms": check_field_axioms,
    "rs_round_trips": check_rs_round_trips,
    "gradients": check_gradients,
    "viterbi_oracle": check_viterbi,
    "meta_gradient": check_meta_gradient,
    "awgn_calibration": check_awgn_calibration,
}


def run_selftest(names: Optional[Sequence[str]] = None, seed: int = 0) -> List[CheckResult]:
    """Run the named suites (all by default); a failing suite never stops the rest."""
    selected = list(names or SUITES)
    unknown = [name for name in selected if name not in SUITES]
    if unknown:
        raise ValueError(f"Unknown self-test suite(s): {unknown}. Available: {list(SUITES)}")
    results = []
    for index, name in enumerate(selected):
        rng = np.random.default_rng([seed, index])
        started = time.time()
        try:
            detail, passed = SUITES[name](rng), True
        except AssertionError as exc:
            detail, passed = str(exc), False
        results.append(CheckResult(name, passed, detail, int((time.time() - started) * 1000)))
    return results


def render_selftest(results: Sequence[CheckResult], console: Optional[Console] = None) -> None:
    table = Table(title="METARX self-test")
    table.add_column("suite")
    table.add_column("status")
    table.add_column("detail")
    table.add_column("ms", justify="right")
    for r in results:
        table.add_row(r.name, "[green]PASS[/green]" if r.passed else "[red]FAIL[/red]", r.detail, str(r.duration_ms))
    (console or Console()).print(table)
