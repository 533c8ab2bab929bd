"""Acceptance campaign checks on tiny configurations."""

import importlib.util

import pandas as pd
import pytest

from conftest import ROOT, TINY_MIMO, TINY_SISO, merged
from pipeline.config import config_from_dict, load_config


@pytest.fixture(scope="module")
def campaign():
    spec = importlib.util.spec_from_file_location("acceptance_campaign", ROOT / "scripts" / "acceptance_campaign.py")
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module


def test_campaign_configs_load(campaign):
    for name in ("siso_ordering", "mimo_ordering", "modular", "f_sweep", "random_control"):
        cfg = load_config(campaign.CAMPAIGNS / f"{name}.yaml")
        assert cfg.seeds


def test_siso_check_writes_per_seed_trials(campaign, tmp_path):
    cfg = config_from_dict(TINY_SISO)
    item = campaign.check_siso_ordering(cfg, 1, tmp_path)
    assert set(item) >= {"passed", "ordered_seeds", "seeds", "mean_ber", "gap"}
    assert item["seeds"] == 2
    assert set(item["mean_ber"]) == {"joint", "online", "meta"}
    trials = pd.read_csv(tmp_path / "siso_ordering_trials.csv")
    assert len(trials) == 6
    assert sorted(trials["seed"].unique()) == [1, 2]
    assert (tmp_path / "siso_ordering_summary.csv").exists()


def test_modular_and_f_sweep_checks(campaign, tmp_path):
    mimo = config_from_dict(merged(TINY_MIMO, experiment={"regimes": ["meta", "modular_meta"]}))
    item = campaign.check_modular(mimo, 1, tmp_path)
    assert set(item["mean_ber"]) == {"meta", "modular_meta"}
    assert (tmp_path / "modular_trials.csv").exists()

    item = campaign.check_f_sweep(config_from_dict(TINY_SISO), 1, tmp_path, f_values=[1, 3])
    assert list(item["mean_ber_by_f"]) == [1, 3]
    assert len(pd.read_csv(tmp_path / "f_sweep_trials.csv")) == 4


def test_accounting_matches_the_step_formula(campaign, tmp_path):
    item = campaign.check_accounting(config_from_dict(TINY_SISO), tmp_path, pilot_blocks=4, data_blocks=6)
    assert item["passed"], item["mismatches"]
    assert item["avg_steps_per_block"]["joint"] == 0
    blocks = pd.read_csv(tmp_path / "accounting_blocks.csv")
    assert len(blocks) == 18
    assert (blocks["grad_steps"] == blocks["expected_steps"]).all()
