"""Federation tests: partitioning, Adam, local updates, aggregation, schedule.

Adam steps are checked against hand-evaluated closed forms; the federated
loop is checked for determinism and for collapsing to plain centralized
training when there is one client.
"""

import numpy as np
import pytest

from flqdsnn import circuit
from flqdsnn.circuit import CircuitParams, SpikeConfig, build_gate_sequence, compute_spike_mask
from flqdsnn.datasets import Dataset, load_builtin, preprocess_split
from flqdsnn.errors import ConfigurationError, TrainingError, UsageError
from flqdsnn.fedcore import (
    AdamState,
    ClientShard,
    FederationConfig,
    adam_step,
    aggregate,
    local_update,
    make_shards,
    partition_fingerprint,
    partition_non_iid,
    schedule_tau,
    train_federated,
)


def iris_split():
    return preprocess_split(load_builtin("iris"), seed=0)


def synthetic_pair(seed=0, n=48, n_classes=2):
    """A small [0,1]-featured train/test pair for fast federation runs."""
    rng = np.random.default_rng(seed)
    feats = rng.uniform(0, 1, size=(n, 4))
    labels = (feats[:, 0] + feats[:, 1] > 1.0).astype(np.int64)
    if n_classes > 2:
        labels = rng.integers(0, n_classes, size=n)
    cut = int(0.8 * n)
    train = Dataset("synt", feats[:cut], labels[:cut], n_classes)
    test = Dataset("synt", feats[cut:], labels[cut:], n_classes)
    return train, test


# ---------------------------------------------------------------------------
# partition_non_iid
# ---------------------------------------------------------------------------


def test_partition_conserves_and_separates_iris():
    # iris holds duplicate rows, so compare as multisets of (features, label)
    iris = load_builtin("iris")
    shards = partition_non_iid(iris.features, iris.labels, 5, 0.5, seed=3)
    assert len(shards) == 5
    assert sum(s.labels.size for s in shards) == 150
    got = sorted(
        tuple(row) + (int(lab),)
        for s in shards
        for row, lab in zip(s.features, s.labels)
    )
    want = sorted(
        tuple(row) + (int(lab),) for row, lab in zip(iris.features, iris.labels)
    )
    assert got == want


def test_partition_disjoint_and_complete_over_many_configs():
    rng = np.random.default_rng(0)
    base = np.arange(300, dtype=np.float64).reshape(100, 3) / 300.0
    labels = np.tile([0, 1, 2, 3], 25).astype(np.int64)
    for trial in range(30):
        n_clients = int(rng.integers(1, 26))
        alpha = float(rng.choice([0.1, 0.5, 1.0, 10.0]))
        shards = partition_non_iid(base, labels, n_clients, alpha, seed=trial)
        rows = np.concatenate([s.features[:, 0] for s in shards])
        assert rows.size == 100
        # first column uniquely identifies the sample; union must be exact
        assert np.array_equal(np.sort(rows), base[:, 0])
        assert all(s.labels.size >= 1 for s in shards)


def test_partition_near_uniform_alpha_matches_global_histogram():
    iris = load_builtin("iris")
    global_hist = np.bincount(iris.labels, minlength=3) / iris.labels.size
    for seed in range(20):
        shards = partition_non_iid(iris.features, iris.labels, 5, 1e6, seed)
        for s in shards:
            hist = np.bincount(s.labels, minlength=3) / s.labels.size
            tv = 0.5 * np.abs(hist - global_hist).sum()
            assert tv < 0.1


def test_partition_small_alpha_is_strongly_skewed():
    iris = load_builtin("iris")
    global_hist = np.bincount(iris.labels, minlength=3) / iris.labels.size
    for seed in range(20):
        shards = partition_non_iid(iris.features, iris.labels, 5, 0.1, seed)
        tvs = [
            0.5 * np.abs(np.bincount(s.labels, minlength=3) / s.labels.size - global_hist).sum()
            for s in shards
        ]
        assert max(tvs) > 0.3


def test_partition_is_deterministic_and_seed_sensitive():
    iris = load_builtin("iris")
    a = partition_non_iid(iris.features, iris.labels, 7, 0.5, seed=11)
    b = partition_non_iid(iris.features, iris.labels, 7, 0.5, seed=11)
    c = partition_non_iid(iris.features, iris.labels, 7, 0.5, seed=12)
    assert partition_fingerprint(a) == partition_fingerprint(b)
    assert partition_fingerprint(a) != partition_fingerprint(c)


def test_partition_repairs_empty_shards():
    # 10 samples across 10 clients with a tiny alpha forces the repair path.
    feats = np.linspace(0, 1, 10).reshape(10, 1)
    labels = np.zeros(10, dtype=np.int64)
    for seed in range(5):
        shards = partition_non_iid(feats, labels, 10, 0.01, seed)
        assert sorted(s.labels.size for s in shards) == [1] * 10


def test_partition_errors():
    feats = np.zeros((3, 2))
    labels = np.array([0, 0, 1])
    with pytest.raises(ConfigurationError):
        partition_non_iid(feats, labels, 4, 0.5, 0)
    with pytest.raises(ConfigurationError):
        partition_non_iid(feats, labels, 0, 0.5, 0)
    with pytest.raises(ConfigurationError):
        partition_non_iid(feats, labels, 2, 0.0, 0)
    with pytest.raises(UsageError):
        partition_non_iid(feats, np.array([0, 1]), 2, 0.5, 0)


# ---------------------------------------------------------------------------
# adam_step
# ---------------------------------------------------------------------------


def test_adam_zero_gradient_keeps_params():
    params = np.array([1.0, -2.0, 3.0])
    out, state = adam_step(params, np.zeros(3), AdamState.zeros((3,)), lr=0.05)
    np.testing.assert_array_equal(out, params)
    assert state.t == 1


def test_adam_first_step_closed_form():
    # For t=1 and g=1: m_hat = 1, v_hat = 1, so the step is lr / (1 + eps).
    theta = np.array([0.7])
    out, state = adam_step(theta, np.array([1.0]), AdamState.zeros((1,)), lr=0.05)
    expected = 0.7 - 0.05 * (1.0 / (1.0 + 1e-8))
    assert abs(out[0] - expected) < 1e-12
    assert abs(out[0] - 0.6500000005) < 1e-10
    np.testing.assert_allclose(state.m, [0.1])
    np.testing.assert_allclose(state.v, [0.001])


def test_adam_two_constant_steps_closed_form():
    # Constant gradients keep m_hat = g and v_hat = g^2, so each step is
    # lr * g / (|g| + eps); evaluate the full recurrence by hand regardless.
    theta = np.array([0.0])
    state = AdamState.zeros((1,))
    g = np.array([2.0])
    out, state = adam_step(theta, g, state, lr=0.1)
    out, state = adam_step(out, g, state, lr=0.1)

    m1 = 0.1 * 2.0
    v1 = 0.001 * 4.0
    step1 = 0.1 * (m1 / (1 - 0.9)) / (np.sqrt(v1 / (1 - 0.999)) + 1e-8)
    m2 = 0.9 * m1 + 0.1 * 2.0
    v2 = 0.999 * v1 + 0.001 * 4.0
    step2 = 0.1 * (m2 / (1 - 0.9**2)) / (np.sqrt(v2 / (1 - 0.999**2)) + 1e-8)
    assert abs(out[0] - (-step1 - step2)) < 1e-12
    assert state.t == 2


def test_adam_rejects_bad_gradients():
    with pytest.raises(TrainingError):
        adam_step(np.zeros(2), np.array([1.0, np.nan]), AdamState.zeros((2,)), 0.05)
    with pytest.raises(UsageError):
        adam_step(np.zeros(2), np.zeros(3), AdamState.zeros((3,)), 0.05)


# ---------------------------------------------------------------------------
# local_update
# ---------------------------------------------------------------------------


def test_local_update_zero_iterations_is_identity():
    train, _ = synthetic_pair()
    shard = ClientShard(train.features[:8], train.labels[:8], 0)
    params = CircuitParams.random(np.random.default_rng(1))
    out, final_loss = local_update(
        shard, params, SpikeConfig(threshold=0.3), 0, 0.05, n_classes=2
    )
    np.testing.assert_array_equal(out.angles, params.angles)
    assert final_loss >= 0.0


def test_local_update_single_sample_composes_gradient_and_adam():
    train, _ = synthetic_pair()
    shard = ClientShard(train.features[:1], train.labels[:1], 0)
    params = CircuitParams.random(np.random.default_rng(2))
    cfg = SpikeConfig(threshold=0.4)
    out, _ = local_update(shard, params, cfg, 1, 0.05, n_classes=2)

    # reference: the verified single-sample shift-rule gradient + one Adam step
    g = circuit.gradient(shard.features[0], int(shard.labels[0]), params, cfg, 2)
    expected, _ = adam_step(params.angles, g, AdamState.zeros(params.angles.shape), 0.05)
    np.testing.assert_allclose(out.angles, expected, atol=1e-12)


def test_local_update_loss_improves_on_iris_shards():
    train, _ = iris_split()
    finals = {1: [], 20: []}
    for seed in range(5):
        shards = partition_non_iid(train.features, train.labels, 5, 0.5, seed)
        shard = max(shards, key=lambda s: s.labels.size)
        params = CircuitParams.random(np.random.default_rng(seed))
        for iters in (1, 20):
            _, final_loss = local_update(
                shard, params, SpikeConfig(threshold=0.5), iters, 0.05, n_classes=3
            )
            finals[iters].append(final_loss)
    assert np.median(finals[20]) <= np.median(finals[1])


def test_local_update_per_sample_mode_runs_and_differs():
    train, _ = synthetic_pair()
    shard = ClientShard(train.features[:6], train.labels[:6], 0)
    params = CircuitParams.random(np.random.default_rng(3))
    cfg = SpikeConfig(threshold=0.2)
    full, _ = local_update(shard, params, cfg, 2, 0.05, n_classes=2)
    per, _ = local_update(
        shard, params, cfg, 2, 0.05, n_classes=2, local_mode="per_sample"
    )
    assert not np.allclose(full.angles, per.angles)


def test_local_update_threshold_list_must_match_iters():
    train, _ = synthetic_pair()
    shard = ClientShard(train.features[:4], train.labels[:4], 0)
    params = CircuitParams.random(np.random.default_rng(4))
    with pytest.raises(UsageError):
        local_update(
            shard, params, SpikeConfig(), 3, 0.05, n_classes=2,
            thresholds=np.array([0.1, 0.2]),
        )


# ---------------------------------------------------------------------------
# aggregate
# ---------------------------------------------------------------------------


def test_aggregate_identity_and_arithmetic():
    one = CircuitParams(np.ones((2, 2, 3)))
    three = CircuitParams(np.full((2, 2, 3), 3.0))
    np.testing.assert_array_equal(aggregate([one]).angles, one.angles)
    np.testing.assert_array_equal(aggregate([one, three]).angles, np.full((2, 2, 3), 2.0))
    same = CircuitParams.random(np.random.default_rng(5))
    agg = aggregate([CircuitParams(same.angles.copy()) for _ in range(7)])
    # summing 7 copies costs one rounding step; the mean contract is 1e-15
    np.testing.assert_allclose(agg.angles, same.angles, rtol=1e-15, atol=0)


def test_aggregate_is_elementwise_mean_and_permutation_invariant():
    rng = np.random.default_rng(6)
    tensors = [CircuitParams(rng.uniform(0, 2 * np.pi, (5, 4, 3))) for _ in range(9)]
    agg = aggregate(tensors).angles
    # independent route: plain sequential summation
    total = np.zeros((5, 4, 3))
    for p in tensors:
        total = total + p.angles
    np.testing.assert_allclose(agg, total / 9, rtol=1e-15, atol=1e-15)
    perm = aggregate(tensors[::-1]).angles
    np.testing.assert_allclose(agg, perm, rtol=1e-15, atol=1e-15)


def test_aggregate_errors():
    with pytest.raises(UsageError):
        aggregate([])
    with pytest.raises(UsageError):
        aggregate([CircuitParams(np.zeros((2, 2, 3))), CircuitParams(np.zeros((3, 2, 3)))])


# ---------------------------------------------------------------------------
# schedule_tau
# ---------------------------------------------------------------------------


def test_schedule_tau_linear_ramp_and_clamp():
    cfg = FederationConfig()
    assert schedule_tau(0, cfg) == 0.0
    assert schedule_tau(10, cfg) == pytest.approx(0.5)
    assert schedule_tau(40, cfg) == 1.0
    fixed = FederationConfig(tau_fixed=0.25)
    assert schedule_tau(99, fixed) == 0.25
    with pytest.raises(UsageError):
        schedule_tau(-1, cfg)


def test_federation_config_validation():
    with pytest.raises(ConfigurationError):
        FederationConfig(n_clients=0)
    with pytest.raises(ConfigurationError):
        FederationConfig(local_iters=0)
    with pytest.raises(ConfigurationError):
        FederationConfig(global_rounds=-1)
    with pytest.raises(ConfigurationError):
        FederationConfig(learning_rate=0.0)
    with pytest.raises(ConfigurationError):
        FederationConfig(dirichlet_alpha=-0.5)
    with pytest.raises(ConfigurationError):
        FederationConfig(tau_initial=0.8, tau_max=0.5)
    with pytest.raises(ConfigurationError):
        FederationConfig(tau_max=1.5)
    with pytest.raises(ConfigurationError):
        FederationConfig(tau_fixed=2.0)
    with pytest.raises(ConfigurationError):
        FederationConfig(spiking_mode="never")
    with pytest.raises(ConfigurationError):
        FederationConfig(tau_tick="hourly")
    with pytest.raises(ConfigurationError):
        FederationConfig(local_mode="minibatch")


# ---------------------------------------------------------------------------
# train_federated
# ---------------------------------------------------------------------------


def small_cfg(**kw):
    base = dict(n_clients=3, local_iters=2, global_rounds=2, seed=0)
    base.update(kw)
    return FederationConfig(**base)


def test_zero_rounds_returns_initial_params_and_empty_log():
    pair = synthetic_pair()
    params, logs = train_federated(pair, small_cfg(global_rounds=0))
    assert logs == []
    assert params.angles.shape == (5, 4, 3)
    again, _ = train_federated(pair, small_cfg(global_rounds=0))
    np.testing.assert_array_equal(params.angles, again.angles)


def test_single_client_round_equals_centralized_training():
    pair = synthetic_pair(seed=7)
    cfg = small_cfg(n_clients=1, local_iters=4, global_rounds=1)
    init, _ = train_federated(pair, FederationConfig(n_clients=1, local_iters=4,
                                                     global_rounds=0, seed=0))
    fed_params, logs = train_federated(pair, cfg)

    train = pair[0]
    shard = ClientShard(train.features, train.labels, 0)
    spike = SpikeConfig(enabled=True, threshold=schedule_tau(0, cfg), mode="final_layer")
    central, central_loss = local_update(
        shard, init, spike, 4, cfg.learning_rate, n_classes=train.n_classes
    )
    np.testing.assert_array_equal(fed_params.angles, central.angles)
    assert logs[0].per_client_loss == [central_loss]


def test_training_is_bit_deterministic():
    pair = synthetic_pair(seed=1)
    cfg = small_cfg()
    p1, logs1 = train_federated(pair, cfg)
    p2, logs2 = train_federated(pair, cfg)
    np.testing.assert_array_equal(p1.angles, p2.angles)
    assert [
        (l.round, l.global_accuracy, l.global_loss, l.tau, l.per_client_loss)
        for l in logs1
    ] == [
        (l.round, l.global_accuracy, l.global_loss, l.tau, l.per_client_loss)
        for l in logs2
    ]


def test_tau_trace_follows_global_schedule():
    pair = synthetic_pair(seed=2)
    cfg = small_cfg(global_rounds=4, tau_increment=0.3)
    _, logs = train_federated(pair, cfg)
    taus = [l.tau for l in logs]
    assert taus == [0.0, 0.3, 0.6, pytest.approx(0.9)]
    assert all(a <= b for a, b in zip(taus, taus[1:]))
    assert max(taus) <= cfg.tau_max


def test_tau_trace_under_local_tick_advances_per_iteration():
    pair = synthetic_pair(seed=3)
    cfg = small_cfg(global_rounds=2, local_iters=3, tau_increment=0.1, tau_tick="local")
    _, logs = train_federated(pair, cfg)
    # round r starts at tick r * local_iters
    assert [l.tau for l in logs] == [0.0, pytest.approx(0.3)]


def test_tau_fixed_overrides_the_ramp():
    pair = synthetic_pair(seed=4)
    _, logs = train_federated(pair, small_cfg(tau_fixed=0.75, global_rounds=3))
    assert [l.tau for l in logs] == [0.75, 0.75, 0.75]


def test_round_log_shapes_and_ranges():
    pair = synthetic_pair(seed=5)
    cfg = small_cfg(global_rounds=3)
    _, logs = train_federated(pair, cfg)
    assert [l.round for l in logs] == [0, 1, 2]
    for log in logs:
        assert 0.0 <= log.global_accuracy <= 1.0
        assert log.global_loss >= 0.0
        assert len(log.per_client_loss) == cfg.n_clients


def test_disabled_spiking_emits_no_conditional_x():
    # Structural ablation check at the gate level: angles far above any
    # threshold still must not fire when spiking is off.
    params = CircuitParams(np.full((5, 4, 3), 2.0))
    cfg = FederationConfig(spiking_enabled=False)
    spike = SpikeConfig(enabled=cfg.spiking_enabled, threshold=0.0, mode=cfg.spiking_mode)
    gates = build_gate_sequence(
        np.zeros(4), params, compute_spike_mask(params, spike)
    )
    assert not any(g.kind == "x" for g in gates)


def test_make_shards_matches_partition():
    train, _ = synthetic_pair(seed=6)
    cfg = small_cfg()
    direct = partition_non_iid(
        train.features, train.labels, cfg.n_clients, cfg.dirichlet_alpha, cfg.seed
    )
    assert partition_fingerprint(make_shards(train.features, train.labels, cfg)) == \
        partition_fingerprint(direct)


def test_client_shard_validation():
    with pytest.raises(UsageError):
        ClientShard(np.zeros((2, 3)), np.zeros(3, dtype=np.int64), 0)
    with pytest.raises(UsageError):
        ClientShard(np.zeros((0, 3)), np.zeros(0, dtype=np.int64), 0)
