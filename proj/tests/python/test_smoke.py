import math

import pytest

import mhdnet


def test_network_shapes_and_counts():
    net = mhdnet.MultiHypothesisNetwork(2, 4, 2, seed=3)
    assert net.parameter_count() == 22
    assert net.subnetwork_count() == 16
    assert len(net.forward([0.1, -0.2])) == 2
    hyps = net.enumerate_hypotheses([0.1, -0.2])
    assert len(hyps) == 16
    assert all(len(h) == 2 for h in hyps)


def test_training_is_deterministic_per_seed():
    def run():
        net = mhdnet.MultiHypothesisNetwork(2, 4, 2, subset_size=4, seed=11)
        losses = [net.train_swta_step([0.3, 0.4], [0.9, 0.1], 0.2) for _ in range(20)]
        return losses, net.mean([0.3, 0.4])

    a, b = run(), run()
    assert a == b


def test_training_moves_a_hypothesis_toward_the_target():
    net = mhdnet.MultiHypothesisNetwork(2, 4, 2, subset_size=16, seed=5)
    target = [0.8, 0.2]
    for _ in range(500):
        net.train_swta_step([0.3, 0.4], target, 0.5)
    best = min(
        sum((h - t) ** 2 for h, t in zip(hyp, target))
        for hyp in net.enumerate_hypotheses([0.3, 0.4])
    )
    assert best < 1e-3


def test_variance_nonnegative_and_mc_inference_finite():
    net = mhdnet.MultiHypothesisNetwork(2, 4, 2, seed=7)
    assert all(v >= 0.0 for v in net.variance([0.5, 0.5]))
    assert all(math.isfinite(v) for v in net.mc_inference([0.5, 0.5]))


def test_mixture_model_coefficients_normalized(tmp_path):
    model = mhdnet.MixtureModel(1, 1, components=3, seed=2)
    for _ in range(50):
        model.train_step([0.4], [0.7], 0.05)
    phi = model.coefficients([0.4])
    assert len(phi) == 3
    assert abs(sum(phi) - 1.0) < 1e-9

    samples = model.sample([0.4], 10)
    assert len(samples) == 10
    assert all(0 <= m < 3 and len(v) == 1 for m, v in samples)

    path = tmp_path / "mixture.json"
    model.save(str(path))
    loaded = mhdnet.MixtureModel(str(path))
    assert loaded.coefficients([0.4]) == phi


def test_autoencoder_tokens_and_generation(tmp_path):
    ae = mhdnet.QuantizedAutoencoder(2, 2, primary_entries=4, secondary_entries=2, seed=9)
    data = [[0.2 + 0.01 * (i % 3), 0.8 - 0.01 * (i % 5)] for i in range(40)]
    for row in data:
        ae.train_step(row, 0.05)
    z, z2 = ae.tokens(data[0])
    assert 0 <= z < 4
    assert 0 <= z2 < 2

    ae.fit_posterior(data)
    out = ae.sample(5)
    assert len(out) == 5
    assert all(len(row) == 2 for row in out)

    path = tmp_path / "autoencoder.json"
    ae.save(str(path))
    loaded = mhdnet.QuantizedAutoencoder(str(path))
    assert loaded.tokens(data[0]) == (z, z2)


def test_sdd_hand_value():
    targets = [[0.3, 0.4], [-0.3, -0.4]]
    constant = [[0.0, 0.0], [0.0, 0.0]]
    assert mhdnet.standard_deviation_distance([constant], [targets]) == pytest.approx(0.5)


def test_subset_size_from_ratio():
    assert mhdnet.subset_size_from_ratio(0.1, 16) == 2
    assert mhdnet.subset_size_from_ratio(1.0, 256) == 256
    with pytest.raises(mhdnet.ConfigError):
        mhdnet.subset_size_from_ratio(0.0, 16)


def test_sine_branches_invert_the_forward_map():
    for x in (0.45, 0.5, 0.55):
        for y in mhdnet.sine_branches(x):
            assert y + 0.3 * math.sin(2 * math.pi * y) == pytest.approx(x, abs=1e-8)
