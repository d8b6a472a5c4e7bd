"""Predictive collision risk: short-horizon occupancy areas and severity.

For each prediction horizon h the object may occupy an annular circular
sector anchored at its current position: radius range h*[v_lo, v_hi] and
heading range [theta_lo, theta_hi] from the confidence intervals of its
recent speed and heading, buffered by the object's half-footprint. Severity
is the level of the smallest horizon whose two areas overlap:

    1 s -> danger, 2 s -> warning, 3 s -> relatively safe, none -> normal

Danger takes precedence by construction (horizons are checked ascending).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from . import geometry, kernels
from .config import Config, DEFAULT_CONFIG
from .scene_model import FRAME_DT_TOL_S, ObjectTrack

TWO_PI = 2.0 * math.pi
_MIN_EXTENT = 1e-6


class InsufficientHistoryError(ValueError):
    pass


class RiskLevel(IntEnum):
    NORMAL = 1
    RELATIVELY_SAFE = 2
    WARNING = 3
    DANGER = 4

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def from_label(cls, label: str) -> "RiskLevel":
        return cls[label.upper()]


# ascending-horizon severity: first overlap at the k-th smallest horizon
HORIZON_LEVELS = (RiskLevel.DANGER, RiskLevel.WARNING, RiskLevel.RELATIVELY_SAFE)


@dataclass(frozen=True)
class KinematicState:
    position: tuple[float, float]
    v: float       # m/s, >= 0
    theta: float   # radians in (-pi, pi]

    def __post_init__(self):
        if not (math.isfinite(self.v) and self.v >= 0):
            raise ValueError(f"speed must be finite and non-negative, got {self.v}")
        object.__setattr__(self, "theta", wrap_angle(self.theta))


@dataclass(frozen=True)
class IntervalEstimate:
    v_lo: float
    v_hi: float
    theta_lo: float
    theta_hi: float

    def __post_init__(self):
        if self.v_lo > self.v_hi:
            raise ValueError("v_lo > v_hi")
        span = self.theta_hi - self.theta_lo
        if span < 0 or span > TWO_PI + 1e-9:
            raise ValueError(f"heading span must be in [0, 2*pi], got {span}")


@dataclass(frozen=True)
class PCRA:
    h: float
    polygon: np.ndarray

    def __post_init__(self):
        poly = geometry.as_polygon(self.polygon)
        object.__setattr__(self, "polygon", poly)
        if self.h <= 0:
            raise ValueError("horizon must be positive")

    @property
    def area(self) -> float:
        return geometry.polygon_area(self.polygon)


def wrap_angle(theta: float) -> float:
    """Normalize to (-pi, pi]."""
    t = math.fmod(theta + math.pi, TWO_PI)
    if t <= 0:
        t += TWO_PI
    return t - math.pi


def _times_xy(history) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(history, ObjectTrack):
        return history.times, history.xy
    if isinstance(history, tuple) and len(history) == 2:
        t, xy = history
        return np.asarray(t, dtype=np.float64), np.ascontiguousarray(xy, dtype=np.float64)
    pts = list(history)
    t = np.array([p.t for p in pts], dtype=np.float64)
    xy = np.ascontiguousarray([[p.x, p.y] for p in pts], dtype=np.float64)
    return t, xy


def _last_heading(xy: np.ndarray) -> float:
    """Heading of the most recent displacement, scanning back past any
    motionless tail; 0 when the whole history is one spot."""
    for i in range(xy.shape[0] - 1, 0, -1):
        dx = xy[i, 0] - xy[i - 1, 0]
        dy = xy[i, 1] - xy[i - 1, 1]
        if math.hypot(dx, dy) > 1e-9:
            return math.atan2(dy, dx)
    return 0.0


def estimate_state(history, window: int = 10) -> KinematicState:
    """Current position plus least-squares velocity over the last `window`
    points."""
    t, xy = _times_xy(history)
    if t.shape[0] < 2:
        raise InsufficientHistoryError("state estimation needs at least 2 points")
    w = min(window, t.shape[0])
    tw = t[-w:]
    tc = tw - tw.mean()
    denom = float(tc @ tc)
    if denom < 1e-12:
        vx = vy = 0.0
    else:
        vx = float(tc @ (xy[-w:, 0] - xy[-w:, 0].mean())) / denom
        vy = float(tc @ (xy[-w:, 1] - xy[-w:, 1].mean())) / denom
    v = math.hypot(vx, vy)
    theta = math.atan2(vy, vx) if v > 1e-9 else _last_heading(xy)
    return KinematicState((float(xy[-1, 0]), float(xy[-1, 1])), v, theta)


def _step_speeds_headings(t: np.ndarray, xy: np.ndarray, window: int):
    """Per-frame speeds and headings over the last `window` points; headings
    of motionless steps carry the previous valid value."""
    w = min(window, t.shape[0])
    tw = t[-w:]
    pw = xy[-w:]
    disp = np.diff(pw, axis=0)
    dt = np.diff(tw)
    norms = np.hypot(disp[:, 0], disp[:, 1])
    speeds = norms / dt
    headings = np.empty_like(speeds)
    prev = np.nan
    for i in range(speeds.shape[0]):
        if norms[i] > 1e-9:
            prev = math.atan2(disp[i, 1], disp[i, 0])
        headings[i] = prev
    if np.isnan(headings).all():
        return speeds, None
    # leading motionless steps inherit the first valid heading
    first = headings[~np.isnan(headings)][0]
    headings = np.where(np.isnan(headings), first, headings)
    return speeds, headings


def confidence_intervals(
    history,
    predictor,
    z: float = 1.96,
    window: int = 10,
    eps_v: float = 0.1,
) -> IntervalEstimate:
    """Interval around the predictor's central (v, theta): half-widths are
    z times the sample std of per-frame speed and heading over the window.

    A motionless history yields speed [0, eps_v] and a full-circle heading
    span (conservative for suddenly-moving objects).
    """
    t, xy = _times_xy(history)
    if t.shape[0] < 2:
        raise InsufficientHistoryError("confidence intervals need at least 2 points")
    state = predictor.estimate(history)
    speeds, headings = _step_speeds_headings(t, xy, window)
    if headings is None:
        return IntervalEstimate(0.0, eps_v, state.theta - math.pi, state.theta + math.pi)
    sd_v = float(np.std(speeds, ddof=1)) if speeds.shape[0] > 1 else 0.0
    unwrapped = np.unwrap(headings)
    sd_th = float(np.std(unwrapped, ddof=1)) if unwrapped.shape[0] > 1 else 0.0
    half_th = min(z * sd_th, math.pi)
    return IntervalEstimate(
        v_lo=max(0.0, state.v - z * sd_v),
        v_hi=state.v + z * sd_v,
        theta_lo=state.theta - half_th,
        theta_hi=state.theta + half_th,
    )


# ---------------------------------------------------------------------------
# PCRA construction


def _disk(center: np.ndarray, radius: float, points: int) -> np.ndarray:
    ang = np.linspace(0.0, TWO_PI, points, endpoint=False)
    return center[None, :] + radius * np.column_stack([np.cos(ang), np.sin(ang)])


def build_pcra(
    state: KinematicState,
    ivl: IntervalEstimate,
    h: float,
    inflation: float = 0.0,
    arc_pts: int = 16,
) -> PCRA:
    """Annular circular sector at radius range h*[v_lo, v_hi] around
    state.position over [theta_lo, theta_hi], grown by the half-footprint
    `inflation` (radially, plus a matching angular widening). Degenerates to
    a disk when the object is effectively motionless or the span closes the
    full circle.
    """
    if h <= 0:
        raise ValueError("horizon must be positive")
    if arc_pts < 2:
        raise ValueError("arc_pts must be >= 2")
    center = np.array(state.position, dtype=np.float64)
    r_lo_raw = h * ivl.v_lo
    r_hi_raw = h * ivl.v_hi
    if r_hi_raw < inflation:
        return PCRA(h, _disk(center, inflation, max(12, 2 * arc_pts)))
    r_lo = max(0.0, r_lo_raw - inflation)
    r_hi = max(r_hi_raw + inflation, r_lo + _MIN_EXTENT)
    if inflation > 0.0:
        r_mid = 0.5 * (r_lo_raw + r_hi_raw)
        widen = inflation / max(r_mid, inflation)
    else:
        widen = 0.0
    lo = ivl.theta_lo - widen
    hi = ivl.theta_hi + widen
    if hi - lo < _MIN_EXTENT:
        mid = 0.5 * (lo + hi)
        lo, hi = mid - _MIN_EXTENT / 2, mid + _MIN_EXTENT / 2
    if hi - lo >= TWO_PI - 1e-9:
        # full-circle uncertainty: use the outer disk (inner hole dropped,
        # conservative for overlap tests)
        return PCRA(h, _disk(center, r_hi, max(12, 2 * arc_pts)))
    ang = np.linspace(lo, hi, arc_pts)
    outer = center[None, :] + r_hi * np.column_stack([np.cos(ang), np.sin(ang)])
    if r_lo <= 1e-9:
        verts = np.vstack([center[None, :], outer])
    else:
        inner = center[None, :] + r_lo * np.column_stack([np.cos(ang[::-1]), np.sin(ang[::-1])])
        verts = np.vstack([outer, inner])
    return PCRA(h, verts)


def polygons_intersect(a: np.ndarray, b: np.ndarray) -> bool:
    """True iff the boundaries intersect or either polygon contains a vertex
    of the other (covers full containment, including concave rings)."""
    a = geometry.as_polygon(a)
    b = geometry.as_polygon(b)
    if kernels.polygon_self_intersects(a):
        raise ValueError("first polygon is self-intersecting")
    if kernels.polygon_self_intersects(b):
        raise ValueError("second polygon is self-intersecting")
    if kernels.polygons_boundary_cross(a, b):
        return True
    if geometry.contains_point(b, a[0, 0], a[0, 1], tol=0.0):
        return True
    return geometry.contains_point(a, b[0, 0], b[0, 1], tol=0.0)


# ---------------------------------------------------------------------------
# classification


def _default_predictor(config: Config):
    from .predictors import ConstantVelocityPredictor  # local: avoid cycle

    if config.predictor_kind == "constant_velocity":
        return ConstantVelocityPredictor(window=config.state_window)
    raise ValueError(
        f"no default instance for predictor kind {config.predictor_kind!r}; pass one in"
    )


def pcra_pair(
    history,
    config: Config,
    predictor,
    inflation: float,
    horizons=None,
) -> list[PCRA]:
    """PCRAs for one object at every configured horizon."""
    ivl = confidence_intervals(
        history, predictor, config.ci_z, config.state_window, config.eps_v_mps
    )
    state = predictor.estimate(history)
    hs = config.horizons if horizons is None else tuple(sorted(horizons))
    return [build_pcra(state, ivl, h, inflation, config.arc_points) for h in hs]


def classify_pcr_level(
    veh_history,
    ped_history,
    predictor=None,
    config: Config = DEFAULT_CONFIG,
) -> RiskLevel:
    """Severity of the smallest horizon whose vehicle and pedestrian PCRAs
    overlap; normal when none do. Checking horizons in ascending order makes
    danger take precedence whenever several horizons overlap at once."""
    if predictor is None:
        predictor = _default_predictor(config)
    for history in (veh_history, ped_history):
        t, _ = _times_xy(history)
        if t.shape[0] < 2:
            raise InsufficientHistoryError("history too short for classification")
    ivl_v_state = predictor.estimate(veh_history)
    ivl_p_state = predictor.estimate(ped_history)
    ivl_v = confidence_intervals(
        veh_history, predictor, config.ci_z, config.state_window, config.eps_v_mps
    )
    ivl_p = confidence_intervals(
        ped_history, predictor, config.ci_z, config.state_window, config.eps_v_mps
    )
    for idx, h in enumerate(config.horizons):
        pcra_v = build_pcra(ivl_v_state, ivl_v, h, config.inflation_vehicle_m, config.arc_points)
        pcra_p = build_pcra(ivl_p_state, ivl_p, h, config.inflation_pedestrian_m, config.arc_points)
        if polygons_intersect(pcra_v.polygon, pcra_p.polygon):
            if idx < len(HORIZON_LEVELS):
                return HORIZON_LEVELS[idx]
            return HORIZON_LEVELS[-1]
    return RiskLevel.NORMAL


def eval_frames(veh: ObjectTrack, ped: ObjectTrack, config: Config):
    """Yield (t_now, veh_history, ped_history) at every `pcr_eval_stride`-th
    vehicle frame of the temporal overlap where both objects have enough
    history (state window and min_history_s) to classify."""
    tv, pv = veh.times, veh.xy
    tp, pp = ped.times, ped.xy
    lo = max(tv[0], tp[0])
    hi = min(tv[-1], tp[-1])
    if hi - lo < -FRAME_DT_TOL_S:
        return
    idx = np.flatnonzero((tv >= lo - FRAME_DT_TOL_S) & (tv <= hi + FRAME_DT_TOL_S))
    w = config.state_window
    min_hist = config.min_history_s - FRAME_DT_TOL_S
    for k in idx[:: config.pcr_eval_stride]:
        t_now = float(tv[k])
        nv = int(np.searchsorted(tv, t_now + FRAME_DT_TOL_S))
        np_ = int(np.searchsorted(tp, t_now + FRAME_DT_TOL_S))
        if nv < w or np_ < w:
            continue
        if t_now - tv[0] < min_hist or t_now - tp[0] < min_hist:
            continue
        yield t_now, (tv[:nv], pv[:nv]), (tp[:np_], pp[:np_])


def scene_pcr_level(
    veh: ObjectTrack,
    ped: ObjectTrack,
    config: Config = DEFAULT_CONFIG,
    predictor=None,
) -> RiskLevel | None:
    """Scene-level PCR: the maximum severity over sampled evaluation frames
    (danger precedence == max severity). None when the overlap never
    accumulates enough history to evaluate."""
    if predictor is None:
        predictor = _default_predictor(config)
    worst: RiskLevel | None = None
    for _, hist_v, hist_p in eval_frames(veh, ped, config):
        level = classify_pcr_level(hist_v, hist_p, predictor, config)
        if worst is None or level > worst:
            worst = level
        if worst == RiskLevel.DANGER:
            break
    return worst
