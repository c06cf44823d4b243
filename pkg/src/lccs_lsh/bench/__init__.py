"""Benchmark plumbing: vecs files, ground truth, accuracy measures and sweeps."""

from .datasets import Dataset, from_fvecs, gaussian_clusters
from .io import FormatError, load_fvecs, load_ivecs, write_fvecs, write_ivecs
from .metrics import RATIO_CAP, GroundTruth, ground_truth, overall_ratio, recall_at_k, thread_count
from .sweep import (
    CSV_COLUMNS,
    RunRecord,
    best_by_recall_bin,
    dataset_from_grid,
    linear_scan_record,
    load_grid,
    parse_probes,
    read_csv,
    sweep,
    write_csv,
)

__all__ = [
    "CSV_COLUMNS", "Dataset", "FormatError", "GroundTruth", "RATIO_CAP", "RunRecord",
    "best_by_recall_bin", "dataset_from_grid", "from_fvecs", "gaussian_clusters", "ground_truth",
    "linear_scan_record", "load_fvecs", "load_grid", "load_ivecs", "overall_ratio", "parse_probes",
    "read_csv", "recall_at_k", "sweep", "thread_count", "write_csv", "write_fvecs", "write_ivecs",
]
