"""Analysis configuration.

One flat config object is threaded through feature extraction, risk
classification, fact generation, and the reports. Files may be TOML or JSON
with the same key names; unknown keys are rejected so typos fail loudly.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

try:
    import tomllib  # py311+
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib


@dataclass(frozen=True)
class Config:
    # feature extraction
    smoothing_window: int = 5          # frames, odd
    accel_threshold_mps2: float = 0.2
    v_stop_kmh: float = 1.0
    stop_min_dur_s: float = 0.5
    d_conflict_m: float = 1.0
    conflict_point_mode: str = "intersection"  # or "crosswalk_entry"
    bbox_margin_m: float = 200.0

    # predictive collision risk
    pcr_horizons_s: tuple[float, ...] = (1.0, 2.0, 3.0)
    ci_z: float = 1.96
    inflation_vehicle_m: float = 0.9
    inflation_pedestrian_m: float = 0.3
    predictor_kind: str = "constant_velocity"  # or "lstm"
    state_window: int = 10             # frames used for state estimation
    arc_points: int = 16               # vertices per PCRA arc
    eps_v_mps: float = 0.1             # speed half-width for motionless histories
    pcr_eval_stride: int = 5           # frames between scene-level PCR evaluations
    min_history_s: float = 1.0         # history needed before a PCR evaluation

    # lstm predictor
    lstm_hidden: int = 32
    lstm_window_steps: int = 20
    lstm_resample_hz: float = 10.0
    lstm_target_horizon_s: float = 2.0
    lstm_epochs: int = 200
    lstm_lr: float = 0.01

    # warehouse / dimensions
    day_start_hour: int = 6            # daytime is [day_start, day_end)
    day_end_hour: int = 18
    speed_bin_kmh: float = 10.0

    @property
    def horizons(self) -> tuple[float, ...]:
        return tuple(sorted(self.pcr_horizons_s))

    def inflation_for(self, object_type: str) -> float:
        return self.inflation_vehicle_m if object_type == "vehicle" else self.inflation_pedestrian_m

    def replace(self, **kw) -> "Config":
        return dataclasses.replace(self, **kw)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["pcr_horizons_s"] = list(d["pcr_horizons_s"])
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "Config":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        if "pcr_horizons_s" in data:
            data = {**data, "pcr_horizons_s": tuple(float(h) for h in data["pcr_horizons_s"])}
        return cls(**data)

    @classmethod
    def from_file(cls, path: str | Path) -> "Config":
        path = Path(path)
        raw = path.read_bytes()
        if path.suffix.lower() == ".json":
            return cls.from_dict(json.loads(raw))
        return cls.from_dict(tomllib.loads(raw.decode("utf-8")))


DEFAULT_CONFIG = Config()
