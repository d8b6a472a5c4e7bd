import math

import numpy as np
import pytest

from safetycube.predictors import (
    ConstantVelocityPredictor,
    Hyperparams,
    LstmPredictor,
    TrainingError,
    build_training_set,
    load_predictor,
    predict,
    train_predictor,
)

FPS = 30.0


def line_history(v=4.0, theta=0.0, duration=3.0, fps=FPS):
    ts = np.arange(-duration, 1e-9, 1.0 / fps)
    d = np.array([math.cos(theta), math.sin(theta)])
    xy = (v * ts)[:, None] * d[None, :]
    return ts, np.ascontiguousarray(xy)


def arc_trajectory(v, omega, duration, fps=10.0, phase=0.0):
    ts = np.arange(0.0, duration + 1e-9, 1.0 / fps)
    r = v / omega
    ang = phase + omega * ts
    xy = r * np.column_stack([np.sin(ang), -np.cos(ang)])
    return ts, np.ascontiguousarray(xy)


def test_cv_predict_examples():
    cv = ConstantVelocityPredictor(window=10)
    hist = line_history(v=4.0)
    out = predict(cv, hist, 2.0)
    assert out.position == pytest.approx((8.0, 0.0), abs=1e-9)
    now = predict(cv, hist, 0.0)
    assert now.position == pytest.approx((0.0, 0.0), abs=1e-9)
    assert now.v == pytest.approx(4.0, abs=1e-9)


def test_cv_zero_error_on_linear_motion():
    rng = np.random.default_rng(3)
    cv = ConstantVelocityPredictor(window=10)
    for _ in range(30):
        v = rng.uniform(0.5, 12.0)
        theta = rng.uniform(-math.pi, math.pi)
        hist = line_history(v, theta)
        h = rng.uniform(0.5, 3.0)
        out = predict(cv, hist, h)
        want = (h * v * math.cos(theta), h * v * math.sin(theta))
        assert out.position == pytest.approx(want, abs=1e-9)


def test_cv_training_is_noop():
    p = train_predictor([], Hyperparams(kind="constant_velocity"))
    assert isinstance(p, ConstantVelocityPredictor)


def test_train_empty_lstm_dataset_errors():
    with pytest.raises(TrainingError):
        train_predictor([], Hyperparams(kind="lstm"))


def test_lstm_gradient_matches_finite_differences():
    hyper = Hyperparams(kind="lstm", hidden=4, window_steps=6, epochs=1)
    model = LstmPredictor(LstmPredictor.init_params(4, seed=1), hyper)
    rng = np.random.default_rng(2)
    X = rng.normal(0, 0.5, (3, 6, 2))
    Y = rng.normal(0, 0.5, (3, 2))

    def loss_fn():
        y, _, _ = model._forward(X)
        return float(np.mean((y - Y) ** 2))

    y, h_final, cache = model._forward(X, want_cache=True)
    grads = model._backward(2.0 * (y - Y) / y.size, h_final, cache)
    eps = 1e-6
    for key in ("Wx", "Wh", "b", "Wy", "by"):
        arr = model.params[key]
        flat_idx = [(0,) * arr.ndim, tuple(d - 1 for d in arr.shape)]
        rng2 = np.random.default_rng(5)
        for _ in range(3):
            flat_idx.append(tuple(int(rng2.integers(d)) for d in arr.shape))
        for idx in flat_idx:
            orig = arr[idx]
            arr[idx] = orig + eps
            up = loss_fn()
            arr[idx] = orig - eps
            down = loss_fn()
            arr[idx] = orig
            numeric = (up - down) / (2 * eps)
            assert grads[key][idx] == pytest.approx(numeric, rel=1e-4, abs=1e-7)


def toy_arc_set(n, seed, duration=4.0):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        v = rng.uniform(2.0, 8.0)
        omega = rng.uniform(0.1, 0.4) * (1 if rng.random() < 0.5 else -1)
        out.append(arc_trajectory(v, omega, duration, phase=rng.uniform(0, 2 * math.pi)))
    return out


def test_lstm_training_halves_loss_and_is_deterministic():
    hyper = Hyperparams(kind="lstm", hidden=16, window_steps=20, epochs=120, lr=0.02)
    data = toy_arc_set(60, seed=11)
    m1 = train_predictor(data, hyper, seed=7)
    m2 = train_predictor(data, hyper, seed=7)
    assert m1.loss_history[-1] < 0.5 * m1.loss_history[0]
    for k in m1.params:
        assert np.array_equal(m1.params[k], m2.params[k])
    m3 = train_predictor(data, hyper, seed=8)
    assert any(not np.array_equal(m3.params[k], m1.params[k]) for k in m1.params)


def test_lstm_beats_cv_on_arcs():
    hyper = Hyperparams(kind="lstm", hidden=16, window_steps=20, epochs=150, lr=0.02)
    model = train_predictor(toy_arc_set(80, seed=21), hyper, seed=3)
    cv = ConstantVelocityPredictor(window=10)
    rng = np.random.default_rng(30)
    errs_lstm, errs_cv = [], []
    for _ in range(25):
        v = rng.uniform(2.0, 8.0)
        omega = rng.uniform(0.1, 0.4) * (1 if rng.random() < 0.5 else -1)
        ts, xy = arc_trajectory(v, omega, 6.0, fps=10.0, phase=rng.uniform(0, 2 * math.pi))
        cut = int(4.0 * 10) + 1
        hist = (ts[:cut], xy[:cut])
        target_t = ts[cut - 1] + 2.0
        k_target = int(round(target_t * 10))
        truth = xy[k_target]
        for model_, errs in ((model, errs_lstm), (cv, errs_cv)):
            got = predict(model_, hist, 2.0)
            errs.append(float(np.hypot(got.position[0] - truth[0], got.position[1] - truth[1])))
    assert np.mean(errs_lstm) < np.mean(errs_cv)


def test_lstm_serialization_roundtrip(tmp_path):
    hyper = Hyperparams(kind="lstm", hidden=8, window_steps=10, epochs=5)
    model = train_predictor(toy_arc_set(10, seed=2), hyper, seed=1)
    path = tmp_path / "lstm.json"
    model.save(path)
    loaded = load_predictor(path)
    assert isinstance(loaded, LstmPredictor)
    for k in model.params:
        assert np.array_equal(loaded.params[k], model.params[k])
    hist = line_history(3.0, 0.4)
    a = predict(model, hist, 1.5)
    b = predict(loaded, hist, 1.5)
    assert a.position == pytest.approx(b.position, abs=0.0)


def test_cv_serialization_roundtrip(tmp_path):
    cv = ConstantVelocityPredictor(window=12)
    path = tmp_path / "cv.json"
    cv.save(path)
    loaded = load_predictor(path)
    assert isinstance(loaded, ConstantVelocityPredictor)
    assert loaded.window == 12


def test_build_training_set_shapes():
    hyper = Hyperparams(kind="lstm", window_steps=20, target_horizon_s=2.0, resample_hz=10.0)
    X, Y = build_training_set(toy_arc_set(5, seed=4), hyper)
    assert X.shape[1:] == (20, 2)
    assert Y.shape == (X.shape[0], 2)


def test_predict_rejects_negative_horizon():
    with pytest.raises(ValueError):
        predict(ConstantVelocityPredictor(), line_history(), -1.0)
