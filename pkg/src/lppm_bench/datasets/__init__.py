from .loaders import load, load_checkins, load_csv, load_geolife, load_sf_cabs, save_csv
from .model import Dataset, Provenance, Trace, TracePoint
from .preprocess import GeolifeDays, MinPointsPerUser, PreprocessRule, SfDropEmpty, parse_rule, preprocess
from .profile import DatasetProfile, profile
from .subsample import (
    SPATIAL_THRESHOLDS_M,
    TEMPORAL_THRESHOLDS_S,
    spatial_subsample,
    subsample_axis,
    subsample_dataset,
    temporal_subsample,
)

__all__ = [
    "Dataset",
    "DatasetProfile",
    "GeolifeDays",
    "MinPointsPerUser",
    "PreprocessRule",
    "Provenance",
    "SPATIAL_THRESHOLDS_M",
    "SfDropEmpty",
    "TEMPORAL_THRESHOLDS_S",
    "Trace",
    "TracePoint",
    "load",
    "load_checkins",
    "load_csv",
    "load_geolife",
    "load_sf_cabs",
    "parse_rule",
    "preprocess",
    "profile",
    "save_csv",
    "spatial_subsample",
    "subsample_axis",
    "subsample_dataset",
    "temporal_subsample",
]
