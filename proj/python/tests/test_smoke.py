import math

import numpy as np
import pytest

import ctmls


def test_kapur_uniform():
    p = np.full(256, 1.0 / 256)
    score = ctmls.kapur_objective(p, 64, 128, 192)
    assert score == pytest.approx(4 * math.log(64), abs=1e-9)


def test_metrics_arithmetic():
    m = ctmls.metrics(tp=203, fn=47, fp=52, tn=198)
    assert m["acc"] == pytest.approx(0.8020, abs=5e-5)
    assert m["sen"] == pytest.approx(0.8120, abs=5e-5)
    assert m["spe"] == pytest.approx(0.7920, abs=5e-5)
    assert m["pre"] == pytest.approx(0.7961, abs=5e-5)
    assert m["npv"] == pytest.approx(0.8082, abs=5e-5)


def test_image_roundtrip_and_features(tmp_path):
    rng = np.random.default_rng(7)
    img = rng.integers(0, 256, size=(64, 64), dtype=np.uint8)
    path = tmp_path / "img.pgm"
    ctmls.save_pgm(img, path)
    back = ctmls.load_image(path)
    assert np.array_equal(img, back)

    values = ctmls.extract_raw(img)
    names = ctmls.feature_names()
    assert len(values) == 74
    assert len(names) == 74
    assert names[0] == "dwt_LL1_mean"
    assert names[-1] == "ent_yager"
    assert all(math.isfinite(v) for v in values)


def test_threshold_filter_partition():
    img = np.array([[0, 100], [179, 255]], dtype=np.uint8)
    roi, artifact = ctmls.threshold_filter(img, th=179)
    assert np.array_equal(roi, np.array([[0, 100], [179, 0]], dtype=np.uint8))
    assert np.array_equal(artifact, np.array([[0, 0], [0, 255]], dtype=np.uint8))


def test_optimizer_close_to_oracle():
    rng = np.random.default_rng(3)
    counts = np.zeros(256)
    counts[:64] = rng.integers(1, 1000, size=64)
    p = counts / counts.sum()
    (oth, oracle_score) = ctmls.exhaustive_tri_threshold(p)
    result = ctmls.cba_optimize(p, max_iter=3000, seed=7)
    assert result["score"] <= oracle_score + 1e-12
    assert result["score"] >= 0.995 * oracle_score
    trace = result["trace"]
    assert all(a <= b + 1e-15 for a, b in zip(trace, trace[1:]))


def test_welch_t_known_value():
    t, p, df = ctmls.welch_t([1, 2, 3, 4, 5], [2, 4, 6, 8, 10])
    assert t == pytest.approx(-3 / math.sqrt(2.5), abs=1e-4)
    assert 0 < p < 1


def test_fit_predict_separable():
    rng = np.random.default_rng(11)
    a = rng.normal(0.0, 0.3, size=(40, 5))
    b = rng.normal(5.0, 0.3, size=(40, 5))
    x = np.vstack([a, b])
    y = [0] * 40 + [1] * 40
    for algorithm in ("nb", "knn", "dt", "rf", "svm"):
        model = ctmls.fit(algorithm, x, y, seed=3)
        labels, scores = model.predict(x)
        acc = sum((lbl == "covid") == (yy == 1) for lbl, yy in zip(labels, y)) / len(y)
        assert acc >= 0.99, algorithm
        assert len(scores) == len(y)


def test_model_roundtrip(tmp_path):
    x = np.array([[0.0, 0.1], [0.2, 0.1], [5.0, 5.2], [5.1, 4.9]])
    y = [0, 0, 1, 1]
    model = ctmls.fit("svm", x, y, seed=1)
    path = tmp_path / "model.json"
    model.save(path)
    back = ctmls.load_model(path)
    l1, s1 = model.predict(x)
    l2, s2 = back.predict(x)
    assert l1 == l2
    assert s1 == pytest.approx(s2)
