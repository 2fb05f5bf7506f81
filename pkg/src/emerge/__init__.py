"""Emerging-entity analytics pipeline.

Builds per-entity daily mention-count series from timestamped entity-mention
streams, detects bursts, clusters entities by burst overlap, and reports
emergence statistics by cluster, stream, and entity type.
"""

from .ingest import (
    EntityMeta,
    EmergingDataset,
    FilterReport,
    MentionRecord,
    build_dataset,
    build_dataset_from_file,
    is_emerging_mention,
    parse_mentions,
    parse_metadata,
)
from .timeseries import EmergenceSeries, build_series, interpolate, standardize
from .bursts import Burst, BurstSet, burst_stats, detect_bursts, moving_average
from .similarity import (
    DistanceMatrix,
    RelativeBurstProfile,
    bsim,
    build_distance_matrix,
    to_relative_profile,
)
from .clustering import Dendrogram, FlatClustering, cut, hac_ward, truncate
from .analysis import (
    GroupSignature,
    GroupStats,
    StreamPartition,
    TypeReport,
    cross_stream_lag,
    descriptive_stats,
    dunn_posthoc,
    group_signature,
    holm_bonferroni,
    kruskal_wallis,
    partition_by_stream,
    type_report,
)

__version__ = "0.1.0"

__all__ = [
    "MentionRecord",
    "EntityMeta",
    "FilterReport",
    "EmergingDataset",
    "parse_mentions",
    "parse_metadata",
    "is_emerging_mention",
    "build_dataset",
    "build_dataset_from_file",
    "EmergenceSeries",
    "build_series",
    "interpolate",
    "standardize",
    "Burst",
    "BurstSet",
    "moving_average",
    "detect_bursts",
    "burst_stats",
    "RelativeBurstProfile",
    "DistanceMatrix",
    "to_relative_profile",
    "bsim",
    "build_distance_matrix",
    "Dendrogram",
    "FlatClustering",
    "hac_ward",
    "cut",
    "truncate",
    "GroupSignature",
    "GroupStats",
    "StreamPartition",
    "TypeReport",
    "group_signature",
    "descriptive_stats",
    "kruskal_wallis",
    "dunn_posthoc",
    "holm_bonferroni",
    "partition_by_stream",
    "cross_stream_lag",
    "type_report",
]
