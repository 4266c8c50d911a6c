"""Trace-to-trace reconstruction metrics over SWC node sets.

Three distances between a predicted and a reference trace, computed on
node coordinates after optional uniform resampling (which makes node
counts proportional to arc length):

* esa: mean nearest-neighbor distance, prediction nodes to reference
  nodes (one-directional).
* dsa: mean nearest-reference distance over the mismatched prediction
  nodes only (those farther than the match threshold); 0 when every
  node matches.
* pds: mismatched node fraction counted over both traces together.
"""

from dataclasses import dataclass

import numpy as np

from . import spatial
from .errors import UndefinedMetricError, ValidationError
from .swc import Morphology, resample

DEFAULT_MATCH_THRESHOLD = 2.0


def _check_theta(theta):
    if theta <= 0:
        raise ValidationError(f"match threshold must be positive, got {theta}")


def esa(pred: Morphology, gt: Morphology) -> float:
    """Mean distance from each prediction node to its nearest reference node."""
    if pred.is_empty() or gt.is_empty():
        raise UndefinedMetricError("esa is undefined for empty traces")
    dists = spatial.min_dists_to_set(pred.node_positions(), gt.node_positions())
    return float(dists.mean())


def dsa(pred: Morphology, gt: Morphology,
        theta: float = DEFAULT_MATCH_THRESHOLD) -> float:
    """Mean nearest-reference distance over prediction nodes farther than
    theta from the reference; 0 when no such node exists."""
    _check_theta(theta)
    if gt.is_empty():
        raise UndefinedMetricError("dsa is undefined for an empty reference trace")
    if pred.is_empty():
        return 0.0
    dists = spatial.min_dists_to_set(pred.node_positions(), gt.node_positions())
    mism = dists[dists > theta]
    if len(mism) == 0:
        return 0.0
    return float(mism.mean())


def pds(pred: Morphology, gt: Morphology,
        theta: float = DEFAULT_MATCH_THRESHOLD) -> float:
    """Fraction of mismatched nodes over both traces: nodes whose nearest
    neighbor in the other trace is farther than theta. A trace facing an
    empty counterpart counts as fully mismatched."""
    _check_theta(theta)
    n_pred, n_gt = len(pred), len(gt)
    if n_pred == 0 and n_gt == 0:
        raise UndefinedMetricError("pds is undefined when both traces are empty")
    if n_pred == 0 or n_gt == 0:
        return 1.0
    d_pred = spatial.min_dists_to_set(pred.node_positions(), gt.node_positions())
    d_gt = spatial.min_dists_to_set(gt.node_positions(), pred.node_positions())
    mismatched = int(np.count_nonzero(d_pred > theta)) + int(np.count_nonzero(d_gt > theta))
    return mismatched / (n_pred + n_gt)


@dataclass(frozen=True)
class TraceReport:
    esa: float
    dsa: float
    pds: float
    match_threshold: float
    n_pred: int
    n_gt: int
    resample_step: float | None = None

    def to_json_obj(self):
        return {
            "esa": self.esa,
            "dsa": self.dsa,
            "pds": self.pds,
            "match_threshold": self.match_threshold,
            "n_pred": self.n_pred,
            "n_gt": self.n_gt,
            "resample_step": self.resample_step,
        }


def evaluate_trace(pred: Morphology, gt: Morphology,
                   theta: float = DEFAULT_MATCH_THRESHOLD,
                   resample_step: float | None = None) -> TraceReport:
    """Bundle of esa/dsa/pds; node counts reported after any resampling."""
    _check_theta(theta)
    if resample_step is not None:
        pred = resample(pred, resample_step)
        gt = resample(gt, resample_step)
    return TraceReport(
        esa=esa(pred, gt),
        dsa=dsa(pred, gt, theta),
        pds=pds(pred, gt, theta),
        match_threshold=theta,
        n_pred=len(pred),
        n_gt=len(gt),
        resample_step=resample_step,
    )
