"""Indoor localization workbench: RSS fingerprint survey, subarea
segmentation, nearest-neighbor and kernel estimators, a deterministic
radio simulator, an evaluation harness, and an HTTP service."""

from .core import (
    BeaconNode,
    ConflictError,
    DatabaseFormatError,
    DatabaseMeta,
    FeatureSet,
    FingerprintDatabase,
    InvalidInputError,
    LocalizationError,
    NoOverlapError,
    NumericalError,
    RawSampleBatch,
    ReferencePoint,
    RssVector,
    StaleStateError,
    Subarea,
    UnlocatableError,
    VersionError,
    average_samples,
    common_beacons,
    rss_distance,
)
from .estimators import (
    EstimationResult,
    KnnLocalizer,
    RbfLocalizer,
    RbfModel,
    ThreeNNFLocalizer,
    estimate_3nnf,
    estimate_knn,
    estimate_rbf,
    estimate_tracked,
    identify_subarea,
    median_nn_distance,
    train_rbf,
)
from .geometry import Point, Rect, euclid, segments_cross
from .io import (
    dumps_database,
    format_walk_trace,
    load_database,
    loads_database,
    parse_sample_lines,
    read_sample_file,
    save_database,
    write_walk_trace,
)
from .segmentation import (
    SegmentationParams,
    SegmentationReport,
    SegmentationVerdict,
    box_distance,
    commit_subarea,
    feature_of,
    is_distinct,
    matches_feature,
    partition_manual,
    resegment_subarea,
    segment_auto,
    segment_manual_check,
)
from .simulate import (
    Floorplan,
    PropagationParams,
    Scenario,
    Wall,
    grid_points,
    load_scenario,
    mean_rss,
    preset_hall,
    preset_office,
    query_at,
    sample_batch,
    save_scenario,
    substream,
    survey,
    test_points,
    walk,
    walk_positions,
)

__version__ = "0.1.0"
