"""sliceprof: synthetic mobile-telemetry traces, UE clustering, slice planning."""

from .features import (
    FEATURE_COLUMNS,
    FeatureMatrix,
    aggregate_features,
    featurize_trace,
    filter_records,
    mrmr_select,
    mutual_information,
    standardize,
)
from .hierarchy import Dendrogram, DistanceMatrix, agglomerate, cut, distance_matrix
from .kmeans import KMeansResult, centroid, kmeans, kmeans_restarts, sse
from .profiles import (
    ClusterProfile,
    SliceRules,
    SliceTemplate,
    profile_clusters,
    recommend_slices,
)
from .report import emit_report, report_metadata
from .synth import (
    ScenarioError,
    SessionEvent,
    assign_enodeb,
    default_scenario,
    generate,
    sample_itinerary,
    sample_sessions,
)
from .trace import (
    Enodeb,
    EventRecord,
    GeoPosition,
    ResourceSample,
    ScenarioSettings,
    ServiceFamily,
    Trace,
    TraceError,
    TraceParseError,
    TraceValidationError,
    UeLogRecord,
    UserProfile,
    ValidationReport,
    parse_scenario,
    parse_trace,
    validate_trace,
    write_scenario,
    write_trace,
)

__version__ = "0.1.0"
