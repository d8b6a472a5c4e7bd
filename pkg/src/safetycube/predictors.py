"""Trajectory predictors: parameter-free constant velocity and a small
recurrent (LSTM) network trained from scratch in numpy.

The LSTM consumes per-step (speed, heading-change) pairs from the history
resampled at a fixed rate and regresses the mean speed and turn rate over
the next couple of seconds; predictions then roll the current pose forward
along the implied circular arc. Training is deterministic for a fixed seed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import Config
from .pcr import InsufficientHistoryError, KinematicState, estimate_state, wrap_angle, _times_xy

FORMAT_VERSION = 1
_V_SCALE = 10.0  # m/s normalization for LSTM inputs/targets


class TrainingError(RuntimeError):
    pass


@dataclass(frozen=True)
class Hyperparams:
    kind: str = "constant_velocity"
    hidden: int = 32
    window_steps: int = 20
    resample_hz: float = 10.0
    target_horizon_s: float = 2.0
    epochs: int = 200
    lr: float = 0.01

    @classmethod
    def from_config(cls, config: Config, kind: str | None = None) -> "Hyperparams":
        return cls(
            kind=kind or config.predictor_kind,
            hidden=config.lstm_hidden,
            window_steps=config.lstm_window_steps,
            resample_hz=config.lstm_resample_hz,
            target_horizon_s=config.lstm_target_horizon_s,
            epochs=config.lstm_epochs,
            lr=config.lstm_lr,
        )


def _arc_rollout(state: KinematicState, v: float, omega: float, h: float) -> KinematicState:
    """Advance a pose h seconds at constant speed and turn rate."""
    x, y = state.position
    th = state.theta
    if abs(omega) < 1e-9:
        return KinematicState((x + h * v * math.cos(th), y + h * v * math.sin(th)), v, th)
    th2 = th + omega * h
    r = v / omega
    return KinematicState(
        (x + r * (math.sin(th2) - math.sin(th)), y + r * (math.cos(th) - math.cos(th2))),
        v,
        wrap_angle(th2),
    )


class ConstantVelocityPredictor:
    """Parameter-free baseline: hold the current least-squares velocity."""

    kind = "constant_velocity"

    def __init__(self, window: int = 10):
        self.window = window

    def estimate(self, history) -> KinematicState:
        return estimate_state(history, self.window)

    def predict(self, history, h: float) -> KinematicState:
        state = self.estimate(history)
        return _arc_rollout(state, state.v, 0.0, h)

    # serialization ---------------------------------------------------------
    def to_dict(self) -> dict:
        return {"format_version": FORMAT_VERSION, "kind": self.kind, "window": self.window}

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), sort_keys=True))

    @classmethod
    def from_dict(cls, data: dict) -> "ConstantVelocityPredictor":
        return cls(window=int(data.get("window", 10)))


# ---------------------------------------------------------------------------
# LSTM predictor


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-x))


def _resample(t: np.ndarray, xy: np.ndarray, hz: float):
    """Uniform resampling by linear interpolation, anchored at the last
    sample so the most recent position is preserved exactly."""
    dt = 1.0 / hz
    n = int(math.floor((t[-1] - t[0]) / dt + 1e-9)) + 1
    grid = t[-1] - dt * np.arange(n - 1, -1, -1)
    gx = np.interp(grid, t, xy[:, 0])
    gy = np.interp(grid, t, xy[:, 1])
    return grid, np.column_stack([gx, gy])


def _step_features(q: np.ndarray, hz: float):
    """Per-step (speed, heading change) features from resampled positions."""
    disp = np.diff(q, axis=0)
    v = np.hypot(disp[:, 0], disp[:, 1]) * hz
    theta = np.arctan2(disp[:, 1], disp[:, 0])
    # motionless steps inherit the previous heading so dtheta stays 0
    for i in range(theta.shape[0]):
        if v[i] < 1e-9 and i > 0:
            theta[i] = theta[i - 1]
    dth = np.zeros_like(theta)
    if theta.shape[0] > 1:
        dth[1:] = np.arctan2(np.sin(np.diff(theta)), np.cos(np.diff(theta)))
    return v, dth


class LstmPredictor:
    """Single-layer LSTM (hidden size H) regressing horizon-mean speed and
    turn rate from the recent step sequence."""

    kind = "lstm"

    def __init__(self, params: dict[str, np.ndarray], hyper: Hyperparams, state_window: int = 10):
        self.params = params
        self.hyper = hyper
        self.state_window = state_window
        self.loss_history: list[float] = []

    # ---- network ----------------------------------------------------------
    @staticmethod
    def init_params(hidden: int, seed: int) -> dict[str, np.ndarray]:
        rng = np.random.Generator(np.random.Philox(seed))
        def mat(rows, cols, scale):
            return (rng.standard_normal((rows, cols)) * scale).astype(np.float64)

        h = hidden
        params = {
            "Wx": mat(2, 4 * h, 0.25),
            "Wh": mat(h, 4 * h, 1.0 / math.sqrt(h)),
            "b": np.zeros(4 * h),
            "Wy": mat(h, 2, 1.0 / math.sqrt(h)),
            "by": np.zeros(2),
        }
        # forget-gate bias starts positive: remember by default
        params["b"][h : 2 * h] = 1.0
        return params

    def _forward(self, X: np.ndarray, want_cache: bool = False):
        """X: (B, T, 2) normalized features -> (B, 2) outputs."""
        p = self.params
        H = p["Wh"].shape[0]
        B, T, _ = X.shape
        h = np.zeros((B, H))
        c = np.zeros((B, H))
        cache = []
        for t in range(T):
            z = X[:, t, :] @ p["Wx"] + h @ p["Wh"] + p["b"]
            i = _sigmoid(z[:, :H])
            f = _sigmoid(z[:, H : 2 * H])
            g = np.tanh(z[:, 2 * H : 3 * H])
            o = _sigmoid(z[:, 3 * H :])
            c_prev = c
            c = f * c_prev + i * g
            tc = np.tanh(c)
            h_prev = h
            h = o * tc
            if want_cache:
                cache.append((X[:, t, :], i, f, g, o, c_prev, tc, h_prev))
        y = h @ p["Wy"] + p["by"]
        return (y, h, cache) if want_cache else (y, h, None)

    def _backward(self, dy: np.ndarray, h_final: np.ndarray, cache) -> dict[str, np.ndarray]:
        p = self.params
        H = p["Wh"].shape[0]
        grads = {k: np.zeros_like(v) for k, v in p.items()}
        grads["Wy"] = h_final.T @ dy
        grads["by"] = dy.sum(axis=0)
        dh = dy @ p["Wy"].T
        dc = np.zeros_like(dh)
        for x_t, i, f, g, o, c_prev, tc, h_prev in reversed(cache):
            do = dh * tc
            dc = dc + dh * o * (1.0 - tc * tc)
            di = dc * g
            df = dc * c_prev
            dg = dc * i
            dz = np.concatenate(
                [di * i * (1 - i), df * f * (1 - f), dg * (1 - g * g), do * o * (1 - o)],
                axis=1,
            )
            grads["Wx"] += x_t.T @ dz
            grads["Wh"] += h_prev.T @ dz
            grads["b"] += dz.sum(axis=0)
            dh = dz @ p["Wh"].T
            dc = dc * f
        return grads

    # ---- feature plumbing --------------------------------------------------
    def _window_features(self, history) -> np.ndarray:
        t, xy = _times_xy(history)
        if t.shape[0] < 2:
            raise InsufficientHistoryError("lstm predictor needs at least 2 points")
        _, q = _resample(t, xy, self.hyper.resample_hz)
        v, dth = _step_features(q, self.hyper.resample_hz)
        W = self.hyper.window_steps
        if v.shape[0] >= W:
            v, dth = v[-W:], dth[-W:]
        else:  # left-pad short histories by repeating the first step
            pad = W - v.shape[0]
            v = np.concatenate([np.full(pad, v[0]), v])
            dth = np.concatenate([np.zeros(pad), dth])
        return np.column_stack([v / _V_SCALE, dth])

    def _regress(self, history) -> tuple[float, float]:
        X = self._window_features(history)[None, :, :]
        y, _, _ = self._forward(X)
        v = max(0.0, float(y[0, 0]) * _V_SCALE)
        omega = float(y[0, 1])
        return v, omega

    # ---- predictor contract -------------------------------------------------
    def estimate(self, history) -> KinematicState:
        base = estimate_state(history, self.state_window)
        v, _ = self._regress(history)
        return KinematicState(base.position, v, base.theta)

    def predict(self, history, h: float) -> KinematicState:
        base = estimate_state(history, self.state_window)
        v, omega = self._regress(history)
        return _arc_rollout(KinematicState(base.position, v, base.theta), v, omega, h)

    # ---- serialization -------------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "kind": self.kind,
            "state_window": self.state_window,
            "hyper": {
                "kind": self.hyper.kind,
                "hidden": self.hyper.hidden,
                "window_steps": self.hyper.window_steps,
                "resample_hz": self.hyper.resample_hz,
                "target_horizon_s": self.hyper.target_horizon_s,
                "epochs": self.hyper.epochs,
                "lr": self.hyper.lr,
            },
            "params": {k: v.tolist() for k, v in self.params.items()},
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), sort_keys=True))

    @classmethod
    def from_dict(cls, data: dict) -> "LstmPredictor":
        hyper = Hyperparams(**data["hyper"])
        params = {k: np.asarray(v, dtype=np.float64) for k, v in data["params"].items()}
        return cls(params, hyper, state_window=int(data.get("state_window", 10)))


def load_predictor(path: str | Path):
    data = json.loads(Path(path).read_text())
    if data.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported predictor format: {data.get('format_version')}")
    if data["kind"] == "constant_velocity":
        return ConstantVelocityPredictor.from_dict(data)
    if data["kind"] == "lstm":
        return LstmPredictor.from_dict(data)
    raise ValueError(f"unknown predictor kind {data['kind']!r}")


# ---------------------------------------------------------------------------
# training


def build_training_set(trajectories, hyper: Hyperparams):
    """Slice (window -> horizon-mean target) samples out of trajectories.

    Each trajectory is an ObjectTrack, a (times, xy) pair, or a TrackPoint
    sequence. Targets are the mean speed (normalized) and mean turn rate
    over the next `target_horizon_s` seconds.
    """
    W = hyper.window_steps
    K = max(1, int(round(hyper.target_horizon_s * hyper.resample_hz)))
    xs, ys = [], []
    for traj in trajectories:
        t, xy = _times_xy(traj)
        if t.shape[0] < 2:
            continue
        _, q = _resample(t, xy, hyper.resample_hz)
        v, dth = _step_features(q, hyper.resample_hz)
        n = v.shape[0]
        for a in range(W, n - K + 1):
            window = np.column_stack([v[a - W : a] / _V_SCALE, dth[a - W : a]])
            v_tgt = float(np.mean(v[a : a + K])) / _V_SCALE
            w_tgt = float(np.mean(dth[a : a + K])) * hyper.resample_hz
            xs.append(window)
            ys.append((v_tgt, w_tgt))
    if not xs:
        raise TrainingError("dataset produced no training windows")
    return np.stack(xs), np.asarray(ys, dtype=np.float64)


def train_predictor(dataset, hyperparams: Hyperparams | dict | None = None, seed: int = 0):
    """Train (or construct) a predictor.

    constant_velocity is parameter-free; lstm runs full-batch Adam on the
    squared-error objective and is bit-deterministic for a fixed seed.
    """
    if hyperparams is None:
        hyper = Hyperparams()
    elif isinstance(hyperparams, dict):
        hyper = Hyperparams(**hyperparams)
    else:
        hyper = hyperparams
    if hyper.kind == "constant_velocity":
        return ConstantVelocityPredictor()
    if hyper.kind != "lstm":
        raise ValueError(f"unknown predictor kind {hyper.kind!r}")
    if dataset is None or len(dataset) == 0:
        raise TrainingError("empty training dataset")

    X, Y = build_training_set(dataset, hyper)
    model = LstmPredictor(LstmPredictor.init_params(hyper.hidden, seed), hyper)
    p = model.params
    m = {k: np.zeros_like(v) for k, v in p.items()}
    s = {k: np.zeros_like(v) for k, v in p.items()}
    beta1, beta2, eps = 0.9, 0.999, 1e-8
    B = X.shape[0]
    for epoch in range(hyper.epochs):
        y, h_final, cache = model._forward(X, want_cache=True)
        err = y - Y
        loss = float(np.mean(err * err))
        if not math.isfinite(loss):
            raise TrainingError(f"non-finite loss at epoch {epoch}")
        model.loss_history.append(loss)
        grads = model._backward(2.0 * err / (B * 2), h_final, cache)
        step = epoch + 1
        for k in p:
            m[k] = beta1 * m[k] + (1 - beta1) * grads[k]
            s[k] = beta2 * s[k] + (1 - beta2) * grads[k] * grads[k]
            mhat = m[k] / (1 - beta1**step)
            shat = s[k] / (1 - beta2**step)
            p[k] -= hyper.lr * mhat / (np.sqrt(shat) + eps)
    y, _, _ = model._forward(X)
    err = y - Y
    model.loss_history.append(float(np.mean(err * err)))
    return model


def predict(predictor, history, h: float) -> KinematicState:
    """Central predicted state at t_now + h."""
    if h < 0:
        raise ValueError("horizon must be non-negative")
    if h == 0:
        return predictor.estimate(history)
    return predictor.predict(history, h)
