"""Pair buffer, online/joint training and (modular) meta-learning."""

import numpy as np
import pytest

from neural.mlp import mlp_init
from receivers.deepsic import DeepSicNet, dynamic_module_set
from receivers.viterbinet import ViterbiNet
from training.buffer import LabeledBlock, NoValidPairError, NonMonotonicIndexError, PairBuffer
from training.config import MetaMode, ThetaPolicy, TrainConfig
from training.meta import (
    InsufficientPilotsError,
    initial_meta_steps,
    meta_gradient,
    meta_train_initial,
    meta_update,
    meta_update_counted,
    pilot_pairs,
)
from training.modular import modular_meta_update_counted, modular_online_train
from training.objective import MlpObjective, QuadraticObjective
from training.online import epoch_losses, joint_train, online_train


def _center_block(index, center):
    return LabeledBlock(index, np.array([float(center)]), np.zeros(1))


def _centers(block):
    return block.symbols


def _quadratic_buffer():
    buf = PairBuffer(5)
    buf.push(0, np.array([1.0]), np.zeros(1))
    buf.push(1, np.array([2.0]), np.zeros(1))
    return buf


# buffer


def test_buffer_is_fifo_with_monotonic_indices():
    buf = PairBuffer(3)
    for j in (0, 1, 3, 4):
        buf.push(j, np.ones(2), np.ones(2))
    assert buf.indices == [1, 3, 4]
    with pytest.raises(NonMonotonicIndexError):
        buf.push(4, np.ones(2), np.ones(2))
    pairs = buf.consecutive_pairs()
    assert [(a.index, b.index) for a, b in pairs] == [(3, 4)]


def test_pair_sampling_is_uniform_over_valid_pairs():
    buf = PairBuffer(10)
    for j in (0, 1, 2, 5, 6):
        buf.push(j, np.ones(1), np.ones(1))
    rng = np.random.default_rng(0)
    seen = {buf.sample_consecutive_pair(rng)[1].index for _ in range(200)}
    assert seen == {1, 2, 6}


def test_pair_sampling_frequency_is_even_over_two_pairs():
    buf = PairBuffer(10)
    for j in (0, 1, 5, 6):
        buf.push(j, np.ones(1), np.ones(1))
    rng = np.random.default_rng(17)
    draws = 2000
    later = sum(buf.sample_consecutive_pair(rng)[1].index == 6 for _ in range(draws))
    assert later / draws == pytest.approx(0.5, abs=0.05)


def test_missing_pair_consumes_no_randomness():
    buf = PairBuffer(4)
    buf.push(0, np.ones(1), np.ones(1))
    buf.push(2, np.ones(1), np.ones(1))
    rng = np.random.default_rng(9)
    before = rng.bit_generator.state
    with pytest.raises(NoValidPairError):
        buf.sample_consecutive_pair(rng)
    assert rng.bit_generator.state == before


def test_buffer_copies_its_blocks():
    symbols = np.ones(3)
    buf = PairBuffer(2).push(0, symbols, np.ones(3))
    symbols[0] = -1.0
    assert next(iter(buf)).symbols[0] == 1.0


# config


def test_train_config_defaults_and_dict_round_trip():
    cfg = TrainConfig()
    assert (cfg.eta, cfg.kappa, cfg.sgd_iterations, cfg.meta_iterations, cfg.meta_frequency) == (1e-3, 0.1, 200, 200, 5)
    assert cfg.support_lr == cfg.eta and cfg.outer_lr == cfg.kappa
    tuned = TrainConfig.from_dict({"meta_mode": "exact_hvp", "theta_policy": "track", "meta_support_lr": 0.1})
    assert tuned.meta_mode is MetaMode.EXACT_HVP
    assert tuned.theta_policy is ThetaPolicy.TRACK
    assert tuned.support_lr == 0.1
    assert TrainConfig.from_dict(tuned.to_dict()) == tuned
    with pytest.raises(ValueError):
        TrainConfig(meta_frequency=0)


# meta-gradient oracle


def test_scalar_quadratic_meta_gradients():
    objective = QuadraticObjective()
    args = (objective, np.zeros(1), np.ones(1), np.full(1, 2.0), 0.1)
    assert meta_gradient(*args, MetaMode.EXACT_HVP)[0] == pytest.approx(-1.71, abs=1e-10)
    assert meta_gradient(*args, MetaMode.FIRST_ORDER)[0] == pytest.approx(-1.9, abs=1e-10)


@pytest.mark.parametrize("mode,expected", [(MetaMode.EXACT_HVP, 1.71), (MetaMode.FIRST_ORDER, 1.9)])
def test_meta_update_takes_one_outer_step(mode, expected):
    cfg = TrainConfig(eta=0.1, kappa=1.0, meta_iterations=1, optimizer="sgd", meta_mode=mode)
    theta = meta_update(np.zeros(1), _quadratic_buffer(), _centers, QuadraticObjective(), cfg, np.random.default_rng(0))
    assert theta[0] == pytest.approx(expected, abs=1e-10)


@pytest.mark.parametrize("eta", [1e-1, 1e-2, 1e-3])
def test_exact_and_first_order_agree_as_eta_vanishes(eta):
    objective = QuadraticObjective()
    exact = meta_gradient(objective, np.zeros(1), np.ones(1), np.full(1, 2.0), eta, MetaMode.EXACT_HVP)
    first = meta_gradient(objective, np.zeros(1), np.ones(1), np.full(1, 2.0), eta, MetaMode.FIRST_ORDER)
    assert abs(exact[0] - first[0]) <= 2.0 * eta


def test_meta_update_without_pairs_is_a_no_op():
    buf = PairBuffer(3).push(0, np.ones(1), np.zeros(1))
    theta = np.array([0.3])
    updated, steps = meta_update_counted(
        theta, buf, _centers, QuadraticObjective(), TrainConfig(), np.random.default_rng(0)
    )
    assert steps == 0
    np.testing.assert_array_equal(updated, theta)


def test_meta_steps_scale_with_pair_draws():
    cfg = TrainConfig(meta_iterations=3, meta_pair_draws=2, optimizer="sgd")
    _, steps = meta_update_counted(
        np.zeros(1), _quadratic_buffer(), _centers, QuadraticObjective(), cfg, np.random.default_rng(0)
    )
    assert steps == 6


def test_initial_meta_training_needs_consecutive_pilots():
    cfg = TrainConfig(meta_iterations=2, optimizer="sgd")
    with pytest.raises(InsufficientPilotsError):
        meta_train_initial([_center_block(0, 1.0)], _centers, QuadraticObjective(), np.zeros(1), cfg, None)
    pilots = [_center_block(2, 3.0), _center_block(0, 1.0), _center_block(1, 2.0)]
    assert [(a.index, b.index) for a, b in pilot_pairs(pilots)] == [(0, 1), (1, 2)]
    assert initial_meta_steps(pilots, cfg) == 4
    theta = meta_train_initial(pilots, _centers, QuadraticObjective(), np.zeros(1), cfg, np.random.default_rng(0))
    assert theta[0] > 0.0


def test_meta_initialization_beats_random_start_on_the_next_block():
    """Paired over seeds: same random start, with and without the pilot meta sweep."""
    cfg = TrainConfig(eta=0.3, kappa=0.1, sgd_iterations=1, meta_iterations=100, optimizer="sgd")
    drift = np.array([0.3, -0.2])
    wins = 0
    for seed in range(20):
        rng = np.random.default_rng(seed)
        centers = [np.array([4.0, -2.0]) + j * drift + 0.05 * rng.normal(size=2) for j in range(7)]
        blocks = [LabeledBlock(j, c, np.zeros(2)) for j, c in enumerate(centers)]
        start = 3.0 * rng.normal(size=2)
        objective = QuadraticObjective()
        theta0 = meta_train_initial(blocks[:5], _centers, objective, start, cfg, rng)
        losses = []
        for init in (theta0, start):
            phi = online_train(init, blocks[5], _centers, objective, cfg, rng)
            losses.append(objective.loss_and_grad(phi, centers[6])[0])
        wins += int(losses[0] < losses[1])
    assert wins == 20


# online and joint training


def test_online_training_descends_the_block_loss():
    cfg = TrainConfig(eta=0.5, sgd_iterations=50, optimizer="sgd")
    phi = online_train(np.zeros(1), _center_block(0, 3.0), _centers, QuadraticObjective(), cfg, None)
    assert phi[0] == pytest.approx(3.0, abs=1e-6)
    idle = TrainConfig(sgd_iterations=0)
    unchanged = online_train(np.zeros(1), _center_block(0, 3.0), _centers, QuadraticObjective(), idle, None)
    np.testing.assert_array_equal(unchanged, np.zeros(1))


def _siso_pilots(rng, count=3):
    blocks = []
    for j in range(count):
        s = np.where(rng.random(48) < 0.5, 1.0, -1.0)
        y = s + 0.5 * np.concatenate([[0.0], s[:-1]]) + 0.1 * rng.normal(size=48)
        blocks.append(LabeledBlock(j, s.reshape(1, -1), y.reshape(1, -1)))
    return blocks


def test_joint_training_is_order_independent(rng):
    model = ViterbiNet(2, (6,))
    objective = MlpObjective(model.spec, 32)
    build = lambda b: model.training_batch(b.symbols, b.observations)  # noqa: E731
    pilots = _siso_pilots(rng)
    cfg = TrainConfig(joint_iterations=20)
    init = mlp_init(model.spec, np.random.default_rng(1))
    history = []
    a = joint_train(pilots, build, objective, init, cfg, np.random.default_rng(2), history)
    b = joint_train(pilots[::-1], build, objective, init, cfg, np.random.default_rng(2))
    np.testing.assert_array_equal(a, b)
    assert len(history) == 20
    assert len(epoch_losses(history, 144, 32)) == 5
    with pytest.raises(ValueError):
        joint_train([], build, objective, init, cfg, rng)


# modular meta-learning


def test_modular_updates_leave_static_modules_alone(rng):
    net = DeepSicNet.initialize(2, 2, 2, rng, (4,))
    dynamic = dynamic_module_set(2, 2, 2)
    buf = PairBuffer(4)
    for j in range(3):
        S = np.where(rng.random((2, 24)) < 0.5, 1.0, -1.0)
        buf.push(j, S, S + 0.1 * rng.normal(size=S.shape))
    cfg = TrainConfig(meta_iterations=2, sgd_iterations=2, batch_size=16)
    theta, steps = modular_meta_update_counted(net.params_map(), buf, net, dynamic, cfg, rng)
    assert steps == 2
    for module in net.module_ids():
        if module not in dynamic:
            np.testing.assert_array_equal(theta[module], net.modules[module])
    block = next(iter(buf))
    trained = modular_online_train(net, theta, block, dynamic, cfg, rng)
    for module in net.module_ids():
        if module in dynamic:
            assert not np.array_equal(trained.modules[module], net.modules[module])
        else:
            np.testing.assert_array_equal(trained.modules[module], net.modules[module])
