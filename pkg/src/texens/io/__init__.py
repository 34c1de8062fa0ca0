"""File formats exchanged with external tools: feature tables and score CSVs."""

from .feature_files import (
    FeatureFileError,
    FeatureTable,
    read_feature_file,
    read_feature_header,
    write_feature_file,
)
from .score_files import (
    ScoreFileError,
    ScoreTable,
    fuse_score_tables,
    read_score_csv,
    score_table_accuracy,
    write_score_csv,
)

__all__ = [
    "FeatureFileError",
    "FeatureTable",
    "read_feature_file",
    "read_feature_header",
    "write_feature_file",
    "ScoreFileError",
    "ScoreTable",
    "fuse_score_tables",
    "read_score_csv",
    "score_table_accuracy",
    "write_score_csv",
]
