"""Voxel-wise overlap losses and the deep-supervision combination.

All reductions run in float64 over the flat voxel order, so results are
bit-reproducible across runs.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .volume import Volume3D

CE_CLAMP = 1e-7
DICE_EPSILON = 1e-8


def _check_dims(p: Volume3D, g: Volume3D):
    if p.dims != g.dims:
        raise ValidationError(f"volume dims {tuple(p.dims)} do not match {tuple(g.dims)}")


def dice_loss(p: Volume3D, g: Volume3D, epsilon: float = DICE_EPSILON) -> float:
    """1 - 2*sum(p*g) / (sum(p^2) + sum(g^2) + epsilon)."""
    _check_dims(p, g)
    if epsilon <= 0:
        raise ValidationError(f"epsilon must be positive, got {epsilon}")
    pv = p.data.ravel().astype(np.float64)
    gv = g.data.ravel().astype(np.float64)
    num = 2.0 * float(np.sum(pv * gv))
    den = float(np.sum(pv * pv)) + float(np.sum(gv * gv)) + epsilon
    return 1.0 - num / den


def ce_loss(p: Volume3D, g: Volume3D, clamp: float = CE_CLAMP) -> float:
    """Summed binary cross-entropy, with p clamped to [clamp, 1-clamp]
    because the formula is undefined at exactly 0 or 1."""
    _check_dims(p, g)
    pv = np.clip(p.data.ravel().astype(np.float64), clamp, 1.0 - clamp)
    gv = g.data.ravel().astype(np.float64)
    return float(-np.sum(gv * np.log(pv) + (1.0 - gv) * np.log1p(-pv)))


@dataclass(frozen=True)
class ScaleLoss:
    """Precomputed per-scale loss values entering the combined objective."""

    dice: float
    ce: float
    tasl: float

    def __post_init__(self):
        for name in ("dice", "ce", "tasl"):
            v = getattr(self, name)
            if not np.isfinite(v):
                raise ValidationError(f"{name} must be finite, got {v}")
        if not (0.0 <= self.dice <= 1.0):
            raise ValidationError(f"dice must lie in [0, 1], got {self.dice}")
        if self.ce < 0:
            raise ValidationError(f"ce must be non-negative, got {self.ce}")
        if self.tasl < 0:
            raise ValidationError(f"tasl must be non-negative, got {self.tasl}")


@dataclass(frozen=True)
class DeepSupervisionConfig:
    """Per-scale weights plus the topology-term strength beta."""

    scale_weights: tuple
    beta: float = 1.0
    epsilon_dice: float = DICE_EPSILON

    def __post_init__(self):
        weights = tuple(float(w) for w in self.scale_weights)
        if not weights or any(w < 0 for w in weights):
            raise ValidationError("scale weights must be non-negative and non-empty")
        if all(w == 0 for w in weights):
            raise ValidationError("at least one scale weight must be positive")
        if self.beta < 0:
            raise ValidationError(f"beta must be non-negative, got {self.beta}")
        if self.epsilon_dice <= 0:
            raise ValidationError(f"epsilon_dice must be positive, got {self.epsilon_dice}")
        object.__setattr__(self, "scale_weights", weights)


def default_scale_weights(n_scales: int) -> tuple:
    """Halving schedule, normalized to sum 1: full resolution dominates."""
    if n_scales < 1:
        raise ValidationError(f"need at least one scale, got {n_scales}")
    raw = [2.0 ** -s for s in range(n_scales)]
    total = sum(raw)
    return tuple(w / total for w in raw)


def total_loss(scales, cfg: DeepSupervisionConfig) -> float:
    """sum_s w_s * (1 + beta * tasl_s) * (dice_s + ce_s)."""
    scales = list(scales)
    if len(scales) != len(cfg.scale_weights):
        raise ValidationError(
            f"got {len(scales)} per-scale inputs but {len(cfg.scale_weights)} scale weights")
    total = 0.0
    for w, s in zip(cfg.scale_weights, scales):
        total += w * (1.0 + cfg.beta * s.tasl) * (s.dice + s.ce)
    return total
