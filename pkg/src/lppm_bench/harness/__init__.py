from ..datasets.subsample import subsample_axis
from .config import ExperimentConfig, config_from_dict, load_config
from .output import CSV_HEADER, emit_csv, emit_plots
from .runner import AGGREGATE, ResultRow, run

__all__ = [
    "AGGREGATE",
    "CSV_HEADER",
    "ExperimentConfig",
    "ResultRow",
    "config_from_dict",
    "emit_csv",
    "emit_plots",
    "load_config",
    "run",
    "subsample_axis",
]
