"""Crosswalk safety analytics: behavioral features and predictive collision
risk levels from top-view trajectories, loaded into a four-dimensional
star-schema data cube with OLAP roll-up / drill-down / slice / dice / pivot.
"""

from .config import Config, DEFAULT_CONFIG
from .cube import (
    Cube,
    CubeQuery,
    FactRecord,
    Filter,
    FactFilter,
    ResultGrid,
    aggregate,
    build_cube,
    dice,
    drill_down,
    drill_through,
    pivot,
    roll_up,
    slice_query,
)
from .features import FeatureRecord, SceneType, extract_features
from .pcr import (
    IntervalEstimate,
    KinematicState,
    PCRA,
    RiskLevel,
    build_pcra,
    classify_pcr_level,
    confidence_intervals,
    estimate_state,
    polygons_intersect,
)
from .predictors import ConstantVelocityPredictor, LstmPredictor, predict, train_predictor
from .scene_model import (
    ObjectTrack,
    ObjectType,
    Scene,
    SiteGeometry,
    SiteMetadata,
    TrackPoint,
    classify_pedestrian_zone,
    classify_vehicle_zone,
    validate_scene,
)
from .synthetic import EncounterSpec, GroundTruth, generate_corpus, generate_scene
from .warehouse import Warehouse, export_result, load_scene_file, load_site_metadata

__version__ = "0.1.0"
