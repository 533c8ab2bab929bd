"""Configuration, trials, sweeps and the command line."""

import json

import numpy as np
import pandas as pd
import pytest
import yaml

from conftest import TINY_MIMO, merged
from main import cli_main
from pipeline.adapters import get_adapter
from pipeline.config import ROOT, ConfigError, apply_override, config_from_dict, load_config
from pipeline.orchestrator import TrialPipeline, TrialStreams, run_trial
from pipeline.results import RESULT_COLUMNS, load_results_csv
from pipeline.scenario import BlockSource, ScenarioChannel
from pipeline.sweep import resolve_workers, run_f_sweep, run_sweep
from training.buffer import LabeledBlock


def _data(records):
    return [r for r in records if not r.is_pilot]


# configuration


def test_shipped_configs_load():
    siso = load_config(ROOT / "config" / "experiment.yaml")
    assert siso.rs_params.n == 17 and siso.block_length == 136
    assert siso.train.meta_frequency == 5
    mimo = load_config(ROOT / "config" / "mimo_experiment.yaml")
    assert (mimo.users, mimo.antennas, mimo.block_length) == (4, 4, 152)


SHIPPED_CONFIGS = sorted((ROOT / "config").glob("*experiment.yaml")) + sorted(
    (ROOT / "config" / "campaigns").glob("*.yaml")
)


@pytest.mark.parametrize("path", SHIPPED_CONFIGS, ids=lambda p: p.stem)
def test_every_shipped_experiment_validates(path):
    cfg = load_config(path)
    assert cfg.block_length == 8 * cfg.rs_params.n
    if cfg.is_siso:
        assert cfg.users == cfg.antennas == 1


def test_single_user_configs_ignore_the_mobile_user(tiny_siso_raw):
    cfg = config_from_dict(merged(tiny_siso_raw, channel={"mobile_user": 3}))
    assert cfg.users == 1
    with pytest.raises(ConfigError) as info:
        config_from_dict(merged(TINY_MIMO, channel={"mobile_user": 3}))
    assert info.value.field == "channel.mobile_user"


@pytest.mark.parametrize(
    "sections,field",
    [
        ({"training": {"eta": -1.0}}, "training.eta"),
        ({"protocol": {"block_length": 100}}, "protocol.block_length"),
        ({"experiment": {"regime": "modular_meta"}}, "experiment.regime"),
        ({"experiment": {"scenario": "siso_trace"}}, "channel.trace_path"),
        ({"experiment": {"scenario": "mimo_linear"}}, "experiment.scenario"),
        ({"channel": {"memory": 0}}, "channel.memory"),
    ],
)
def test_config_errors_name_the_field(tiny_siso_raw, sections, field):
    with pytest.raises(ConfigError) as info:
        config_from_dict(merged(tiny_siso_raw, **sections))
    assert info.value.field == field


def test_unknown_keys_are_rejected(tiny_siso_raw):
    with pytest.raises(ConfigError) as info:
        config_from_dict(merged(tiny_siso_raw, training={"learning_rate": 0.1}))
    assert info.value.field == "training"


def test_overrides(tiny_siso_raw):
    raw = apply_override(tiny_siso_raw, "training.eta=0.05")
    raw = apply_override(raw, "experiment.snr_list=[4, 6]")
    cfg = config_from_dict(raw)
    assert cfg.train.eta == 0.05
    assert cfg.snr_list == [4, 6]
    assert tiny_siso_raw["training"].get("eta") is None
    with pytest.raises(ConfigError):
        apply_override(tiny_siso_raw, "no-equals-sign")
    with pytest.raises(ConfigError):
        apply_override(tiny_siso_raw, "eta=0.1")


def test_toml_and_environment(tmp_path, monkeypatch):
    path = tmp_path / "c.toml"
    path.write_text(
        '[experiment]\nname = "toml_run"\nscenario = "siso_linear"\nreceiver = "viterbinet"\n'
        "[protocol]\nblock_length = 24\n[code]\nn = 3\nk = 1\n"
    )
    monkeypatch.setenv("METARX_OUTPUT_DIR", str(tmp_path / "env_out"))
    cfg = load_config(path)
    assert cfg.name == "toml_run"
    assert cfg.output_dir == str(tmp_path / "env_out")
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.yaml")


def test_gate_threshold_from_environment(tiny_siso_raw, monkeypatch):
    monkeypatch.setenv("METARX_GATE_THRESHOLD", "0.1")
    cfg = config_from_dict(tiny_siso_raw)
    assert cfg.train.gate_threshold == 0.1
    assert TrialPipeline(cfg).gate.epsilon == 0.1
    explicit = config_from_dict(merged(tiny_siso_raw, training={"gate_threshold": 0.05}))
    assert explicit.train.gate_threshold == 0.05
    monkeypatch.setenv("METARX_GATE_THRESHOLD", "loose")
    with pytest.raises(ConfigError) as info:
        config_from_dict(tiny_siso_raw)
    assert info.value.field == "training.gate_threshold"


# trials


def test_trial_protocol_accounting(tiny_siso_raw):
    cfg = config_from_dict(tiny_siso_raw)
    records = run_trial(cfg, seed=3)
    assert len(records) == cfg.pilot_blocks + cfg.data_blocks
    assert [r.block_index for r in records] == list(range(cfg.total_blocks))
    assert all(r.is_pilot for r in records[: cfg.pilot_blocks])
    data = _data(records)
    assert len(data) == cfg.data_blocks
    assert data[-1].cum_ber == pytest.approx(sum(r.bit_errors for r in data) / (cfg.data_blocks * 8))


@pytest.mark.parametrize("regime", ["joint", "online", "meta"])
def test_gradient_step_accounting(tiny_siso_raw, regime):
    cfg = config_from_dict(tiny_siso_raw)
    train = cfg.train
    for r in _data(run_trial(cfg, seed=5, regime=regime)):
        if regime == "joint":
            assert r.grad_steps == 0
            continue
        expected = (train.sgd_iterations if r.gate_valid else 0) + (
            train.meta_iterations * train.meta_pair_draws if r.meta_event else 0
        )
        assert r.grad_steps == expected


def test_meta_events_follow_the_frequency(tiny_siso_raw):
    cfg = config_from_dict(tiny_siso_raw)
    result = TrialPipeline(cfg, regime="meta").run(2)
    assert result.meta_events == [2, 4, 6, 8]
    assert [r.block_index for r in _data(result.records) if r.meta_event] == [4, 6, 8]


def test_results_files_are_deterministic(tiny_siso_raw, tmp_path):
    cfg = config_from_dict(tiny_siso_raw)
    first = TrialPipeline(cfg, output_dir=tmp_path / "a").run(11)
    second = TrialPipeline(cfg, output_dir=tmp_path / "b").run(11)
    assert first.results_path.read_bytes() == second.results_path.read_bytes()
    frame = load_results_csv(first.results_path)
    assert list(frame.columns) == RESULT_COLUMNS
    assert len(frame) == cfg.total_blocks
    audit = json.loads(first.results_path.with_suffix(".audit.json").read_text())
    assert [p["phase_name"] for p in audit["phases"]] == ["PILOT_PHASE", "INITIAL_TRAINING", "DATA_PHASE"]
    assert audit["final_status"] == "SUCCESS"
    assert first.checkpoint_path is not None and first.checkpoint_path.exists()


def test_far_meta_frequency_tracks_online_training(tiny_siso_raw):
    raw = merged(tiny_siso_raw, training={"meta_frequency": 1000, "theta_policy": "track"})
    cfg = config_from_dict(raw)
    online = run_trial(cfg, seed=4, regime="online")
    meta = run_trial(cfg, seed=4, regime="meta")
    assert [(r.bit_errors, r.grad_steps, r.gate_valid) for r in online] == [
        (r.bit_errors, r.grad_steps, r.gate_valid) for r in meta
    ]


def test_online_without_iterations_equals_joint(tiny_siso_raw):
    raw = merged(tiny_siso_raw, protocol={"pilot_training": "pooled"}, training={"sgd_iterations": 0})
    cfg = config_from_dict(raw)
    joint = run_trial(cfg, seed=6, regime="joint")
    online = run_trial(cfg, seed=6, regime="online")
    assert [(r.bit_errors, r.cum_ber) for r in joint] == [(r.bit_errors, r.cum_ber) for r in online]


def test_pooled_pilot_training_reports_initial_steps(tiny_siso_raw):
    cfg = config_from_dict(merged(tiny_siso_raw, protocol={"pilot_training": "pooled"}))
    result = TrialPipeline(cfg, regime="meta").run(1)
    pairs = cfg.pilot_blocks - 1
    assert result.initial_steps == cfg.train.joint_iterations + pairs * cfg.train.meta_iterations
    assert all(r.grad_steps == 0 for r in result.records if r.is_pilot)


def test_perfect_csi_is_error_free_at_high_snr(tiny_siso_raw):
    cfg = config_from_dict(merged(tiny_siso_raw, experiment={"receiver": "viterbi_csi", "snr_db": 60}))
    records = run_trial(cfg, seed=1)
    assert _data(records)[-1].cum_ber == 0.0
    assert all(r.gate_valid for r in _data(records))


def test_rejected_blocks_leave_weights_unchanged(tiny_siso_raw):
    cfg = config_from_dict(tiny_siso_raw)
    adapter = get_adapter(cfg, "online", np.random.default_rng(0), 0.3)
    before = adapter.phi.copy()
    assert adapter.adapt(5, None, np.random.default_rng(1)) == 0
    np.testing.assert_array_equal(adapter.phi, before)


def test_modular_regime_keeps_static_modules_after_pilots(tiny_mimo_raw):
    cfg = config_from_dict(merged(tiny_mimo_raw, experiment={"regime": "modular_meta", "scenario": "mimo_modular"}))
    streams = TrialStreams.from_seed(3)
    scenario = ScenarioChannel(cfg, streams.channel, cfg.snr_db)
    source = BlockSource(cfg, scenario, streams.message, streams.noise)
    adapter = get_adapter(cfg, "modular_meta", streams.init, scenario.link.sigma)
    for j in range(cfg.total_blocks):
        block = source.next_block(j)
        adapter.adapt(j, LabeledBlock(j, block.symbols, block.observations), streams.train)
        if j == cfg.pilot_blocks - 1:
            snapshot = adapter.net.params_map()
    for module, params in snapshot.items():
        same = np.array_equal(adapter.net.modules[module], params)
        assert same == (module[0] != cfg.mobile_user)


@pytest.mark.parametrize("regime", ["online", "meta", "modular_online"])
def test_mimo_trials_run(tiny_mimo_raw, regime):
    cfg = config_from_dict(merged(tiny_mimo_raw, experiment={"regimes": [regime]}))
    records = run_trial(cfg, seed=2, regime=regime)
    assert len(_data(records)) == cfg.data_blocks
    assert 0.0 <= _data(records)[-1].cum_ber <= 1.0


# sweeps


def test_sweep_shapes(tiny_siso_raw):
    cfg = config_from_dict(merged(tiny_siso_raw, experiment={"snr_list": [8, 12], "seeds": [1]}))
    sweep = run_sweep(cfg, workers=1)
    assert len(sweep.summary) == 2 * len(cfg.regimes)
    assert len(sweep.trials) == 2 * len(cfg.regimes)
    assert {"regime", "snr_db", "mean_ber", "seed_1"} <= set(sweep.summary.columns)


def test_single_point_sweep_matches_trial(tiny_siso_raw):
    cfg = config_from_dict(merged(tiny_siso_raw, experiment={"regimes": ["meta"], "seeds": [7]}))
    sweep = run_sweep(cfg, workers=1)
    assert len(sweep.summary) == 1
    expected = _data(run_trial(cfg, seed=7, regime="meta"))[-1].cum_ber
    assert sweep.summary.loc[0, "mean_ber"] == pytest.approx(expected)


def test_f_sweep_is_sorted_and_needs_meta(tiny_siso_raw, tmp_path):
    cfg = config_from_dict(merged(tiny_siso_raw, experiment={"seeds": [1]}))
    sweep = run_f_sweep(cfg, [5, 2, 3], workers=1)
    assert list(sweep.summary["meta_frequency"]) == [2, 3, 5]
    trials_path, summary_path = sweep.save(tmp_path, "f")
    assert len(pd.read_csv(summary_path)) == 3
    with pytest.raises(ConfigError):
        run_f_sweep(cfg.with_overrides(regime="online"), [5])


def test_worker_cap(monkeypatch):
    monkeypatch.setenv("METARX_MAX_WORKERS", "2")
    assert resolve_workers(8, 10) == 2
    assert resolve_workers(8, 1) == 1
    monkeypatch.setenv("METARX_MAX_WORKERS", "many")
    with pytest.raises(ConfigError):
        resolve_workers(4, 4)


# command line


def _write_config(tmp_path, raw):
    path = tmp_path / "experiment.yaml"
    path.write_text(yaml.safe_dump(raw))
    return path


def test_cli_run_writes_results(tmp_path, tiny_siso_raw):
    path = _write_config(tmp_path, tiny_siso_raw)
    out = tmp_path / "out"
    assert cli_main(["run", "--config", str(path), "--seed", "7", "--out", str(out), "--quiet"]) == 0
    assert (out / "tiny_siso_meta_10dB_seed7.csv").exists()


def test_cli_usage_and_config_errors(tmp_path, tiny_siso_raw, capsys):
    assert cli_main(["run", "--no-such-flag"]) == 2
    assert "usage" in capsys.readouterr().err
    path = _write_config(tmp_path, tiny_siso_raw)
    assert cli_main(["run", "--config", str(path), "--set", "training.eta=-1", "--quiet"]) == 2
    assert cli_main(["run", "--config", str(path), "--regime", "bogus", "--quiet"]) == 2


def test_cli_generated_trace_feeds_a_run(tmp_path, tiny_siso_raw):
    taps = tmp_path / "taps.csv"
    assert cli_main(["gen-taps", "--L", "2", "--J", "12", "--out", str(taps)]) == 0
    path = _write_config(tmp_path, tiny_siso_raw)
    out = tmp_path / "out"
    code = cli_main(["run", "--config", str(path), "--trace", str(taps), "--out", str(out), "--quiet", "--seed", "1"])
    assert code == 0
    assert (out / "tiny_siso_meta_10dB_seed1.csv").exists()


def test_cli_selftest_suite():
    assert cli_main(["selftest", "--suite", "meta_gradient"]) == 0
    assert cli_main(["selftest", "--suite", "no_such_suite"]) == 1


def test_cli_errors_carry_the_bracket_tag(tmp_path, tiny_siso_raw, capsys):
    path = _write_config(tmp_path, tiny_siso_raw)
    assert cli_main(["run", "--config", str(path), "--set", "training.eta=-1", "--quiet"]) == 2
    assert capsys.readouterr().err.startswith("[ERROR] config:")
    assert cli_main(["selftest", "--suite", "no_such_suite"]) == 1
    assert capsys.readouterr().err.startswith("[ERROR] ValueError:")


def test_trace_with_the_wrong_tap_count_is_a_config_error(tmp_path, tiny_siso_raw):
    taps = tmp_path / "taps3.csv"
    assert cli_main(["gen-taps", "--L", "3", "--J", "5", "--out", str(taps)]) == 0
    path = _write_config(tmp_path, tiny_siso_raw)
    assert cli_main(["run", "--config", str(path), "--trace", str(taps), "--quiet"]) == 2
