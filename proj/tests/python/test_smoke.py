import math

import numpy as np
import pytest

import engage_mil as em


def test_pooling():
    rng = np.random.default_rng(0)
    r = rng.normal(size=100).tolist()
    assert em.topk_pool(r, 10) == pytest.approx(np.mean(sorted(r)[-10:]), abs=1e-12)
    assert em.topk_pool(r, 100) == pytest.approx(em.mean_pool(r), abs=1e-12)
    with pytest.raises(em.EngageError) as info:
        em.topk_pool(r, 0)
    assert info.value.code == "invalid-argument"


def test_uniform_bins():
    bins = [em.uniform_bin(c) for c in range(256)]
    assert sorted(set(bins)) == list(range(59))
    assert bins.count(58) == 256 - 58


def test_lbp_top_histograms():
    rng = np.random.default_rng(1)
    frames = rng.integers(0, 256, size=(10, 12, 14), dtype=np.uint8)
    h = np.asarray(em.lbp_top(frames, 0, 10))
    assert h.shape == (177,)
    for plane in h.reshape(3, 59):
        assert plane.sum() == pytest.approx(1.0, abs=1e-12)


def test_pose_gaze_still_head():
    track = np.tile(np.arange(12, dtype=float), (20, 1))
    assert em.pose_gaze_feature(track, 0, 20) == [0.0] * 9


def test_segments():
    assert len(em.segment(1800, 20, 10)) == 179
    assert em.resample_indices(50, 100)[:4] == [0, 0, 1, 1]


def test_synth_split_and_roundtrip(tmp_path):
    d = em.synth_generate(subjects=12, videos=24, M=6, dim=3,
                          class_distribution=[0.25] * 4, seed=3)
    assert d["instances"].shape == (24, 6, 3)
    train, test = em.split_subject_independent(
        d["instances"], d["labels"], d["video_ids"], d["subject_ids"], 0.25, seed=1)
    assert not set(train["subject_ids"]) & set(test["subject_ids"])
    assert len(train["labels"]) + len(test["labels"]) == 24
    em.write_dataset(tmp_path / "index.json", d["instances"], d["labels"],
                     d["video_ids"], d["subject_ids"])
    back = em.read_dataset(tmp_path / "index.json")
    # Feature files store float32.
    np.testing.assert_allclose(back["instances"], d["instances"], rtol=1e-6, atol=1e-6)
    assert back["labels"] == d["labels"]


def test_milnet_learns_and_localizes(tmp_path):
    d = em.synth_generate(subjects=20, videos=40, M=10, dim=6,
                          class_distribution=[0.25] * 4, seed=0)
    net, trace = em.train_milnet(d["instances"], d["labels"], hidden=[16, 8],
                                 pooling="mean", epochs=40, seed=0)
    assert len(trace) == 40
    assert trace[-1] < trace[0]
    x = d["instances"][0]
    assert len(net.localize(x)) == 10
    assert np.mean(net.localize(x)) == pytest.approx(net.predict(x), abs=1e-9)
    net.save(tmp_path / "m.emnn")
    again = em.load_net(tmp_path / "m.emnn")
    assert isinstance(again, em.MilNet)
    assert again.predict(x) == net.predict(x)


def test_seqnet_shapes():
    d = em.synth_generate(subjects=6, videos=12, M=5, dim=3,
                          class_distribution=[0.25] * 4, seed=0)
    net, trace = em.train_seqnet(d["instances"], d["labels"], lstm_hidden=4,
                                 head_hidden=[6], epochs=3)
    assert net.M == 5
    assert 0.0 <= net.predict(d["instances"][0]) <= 3.0
    assert len(net.localize(d["instances"][0])) == 5


def test_baselines():
    rng = np.random.default_rng(2)
    x = rng.normal(size=(40, 3))
    y = (x @ np.array([1.0, -0.5, 0.25]) + 0.3).tolist()
    w, b, alpha, beta = em.bayesian_ridge_train(x, y)
    np.testing.assert_allclose(w, [1.0, -0.5, 0.25], atol=1e-3)
    assert b == pytest.approx(0.3, abs=1e-3)
    svr = em.svr_train(x, y, C=10.0, epsilon=0.01, sigma=2.0)
    assert np.max(np.abs(svr.predict(x) - y)) < 0.1
    w, b, trace = em.sgd_linear_train(x, y, epochs=30, eta0=0.05)
    assert trace[-1] < trace[0]


def test_kappa_and_metrics():
    a = [0, 1, 2, 3, 2, 1]
    assert em.quadratic_weighted_kappa(a, a) == 1.0
    labels, reliability, dropped = em.fuse_labels(
        [[0, 0, 0, 0, 3], [1, 1, 1, 1, 2], [2, 2, 2, 2, 1], [3, 3, 3, 3, 0],
         [None, 2, 2, 2, 1]])
    assert dropped == [4]
    assert labels == [0, 1, 2, 3, 2]
    r = em.evaluate([0.0, 1.0, 2.0, 3.0], [0.0, 1.0, 2.0, 3.0])
    assert r["mse"] == 0.0 and r["pcc"] == pytest.approx(1.0)
    assert em.evaluate([1.0, 1.0], [0.0, 3.0])["pcc"] is None
    assert math.isclose(em.mse([1.0], [3.0]), 4.0)
