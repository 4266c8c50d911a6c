"""Voxel-wise segmentation metrics: precision, recall, F1, HD95.

HD95 follows the directed definition (95th percentile, nearest rank, of
nearest-surface distances from prediction surface to ground-truth
surface). The symmetric variant, max of the two directed values, is also
reported since much published tooling uses it; reports label both.
"""

from dataclasses import dataclass
from math import ceil

import numpy as np

from . import spatial
from .errors import UndefinedMetricError, ValidationError
from .volume import BINARY, Volume3D, surface_voxel_array

DIRECTED = "directed"
SYMMETRIC = "symmetric"


def _check_binary_pair(pred: Volume3D, gt: Volume3D):
    for name, vol in (("prediction", pred), ("ground truth", gt)):
        if vol.kind != BINARY:
            raise ValidationError(f"{name} must be a binary volume, got kind '{vol.kind}'")
    if pred.dims != gt.dims:
        raise ValidationError(
            f"prediction dims {tuple(pred.dims)} do not match ground truth dims {tuple(gt.dims)}")


def precision_recall_f1(pred: Volume3D, gt: Volume3D):
    """Fractions in [0, 1]; any 0/0 collapses to 0 by convention."""
    _check_binary_pair(pred, gt)
    p = pred.bool_data()
    g = gt.bool_data()
    tp = int(np.count_nonzero(p & g))
    fp = int(np.count_nonzero(p & ~g))
    fn = int(np.count_nonzero(~p & g))
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1, (tp, fp, fn)


def nearest_rank_percentile(values: np.ndarray, q: float) -> float:
    """ceil(q * n)-th smallest element of the sample."""
    values = np.sort(np.asarray(values, dtype=np.float64).ravel())
    if len(values) == 0:
        raise UndefinedMetricError("percentile of an empty sample is undefined")
    k = max(1, ceil(q * len(values)))
    return float(values[k - 1])


def _surface_points(vol: Volume3D, use_spacing: bool) -> np.ndarray:
    pts = surface_voxel_array(vol).astype(np.float64)
    if use_spacing:
        pts = pts * np.asarray(vol.spacing, dtype=np.float64)
    return pts


def hd95(pred: Volume3D, gt: Volume3D, mode: str = DIRECTED,
         use_spacing: bool = False) -> float:
    """95th-percentile surface distance; voxel units unless use_spacing."""
    if mode not in (DIRECTED, SYMMETRIC):
        raise ValidationError(f"mode must be '{DIRECTED}' or '{SYMMETRIC}', got {mode!r}")
    _check_binary_pair(pred, gt)
    if pred.foreground_count() == 0 or gt.foreground_count() == 0:
        raise UndefinedMetricError("hd95 is undefined when either mask is empty")
    pred_surface = _surface_points(pred, use_spacing)
    gt_surface = _surface_points(gt, use_spacing)
    fwd = nearest_rank_percentile(spatial.min_dists_to_set(pred_surface, gt_surface), 0.95)
    if mode == DIRECTED:
        return fwd
    bwd = nearest_rank_percentile(spatial.min_dists_to_set(gt_surface, pred_surface), 0.95)
    return max(fwd, bwd)


@dataclass(frozen=True)
class SegReport:
    """Percentages for precision/recall/F1 plus HD95 in both conventions.

    hd95 values are None when either mask is empty (undefined metric)."""

    precision: float
    recall: float
    f1: float
    hd95_directed: float | None
    hd95_symmetric: float | None
    counts: tuple

    def to_json_obj(self):
        return {
            "precision_pct": self.precision,
            "recall_pct": self.recall,
            "f1_pct": self.f1,
            "hd95_directed": self.hd95_directed,
            "hd95_symmetric": self.hd95_symmetric,
            "counts": {"tp": self.counts[0], "fp": self.counts[1], "fn": self.counts[2]},
        }


def evaluate_segmentation(pred: Volume3D, gt: Volume3D,
                          use_spacing: bool = False) -> SegReport:
    precision, recall, f1, counts = precision_recall_f1(pred, gt)
    if pred.foreground_count() and gt.foreground_count():
        directed = hd95(pred, gt, DIRECTED, use_spacing)
        symmetric = hd95(pred, gt, SYMMETRIC, use_spacing)
    else:
        directed = symmetric = None
    return SegReport(100.0 * precision, 100.0 * recall, 100.0 * f1,
                     directed, symmetric, counts)
