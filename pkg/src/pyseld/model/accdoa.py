"""ACCDOA targets, loss and decoding"""
from __future__ import annotations

from typing import Iterable

import numpy as np
import torch
import torch.nn.functional as F

from pyseld.exceptions import FrameRangeError, PreconditionError, ShapeError
from pyseld.nn import mse_loss
from pyseld.scenes import Label

DEFAULT_THRESHOLD = 0.5


def labels_to_accdoa(labels: Iterable[Label], n_frames: int, n_classes: int) -> np.ndarray:
    """Unit DOA targets at active (frame, class) cells, zeros elsewhere.

    Simultaneous tracks of one class keep the lowest track index.

    Return
    ------
    targets : ndarray
        32-bit targets, shape (n_frames, n_classes, 3)."""

    targets = np.zeros((n_frames, n_classes, 3), dtype=np.float32)
    tracks = np.full((n_frames, n_classes), np.iinfo(np.int64).max)

    for label in labels:

        if not 0 <= label.frame < n_frames:
            raise FrameRangeError(f"label frame {label.frame} outside [0, {n_frames})")

        if label.class_idx >= n_classes:
            raise ShapeError(f"label class {label.class_idx} outside the {n_classes} model classes")

        if label.track_idx < tracks[label.frame, label.class_idx]:
            tracks[label.frame, label.class_idx] = label.track_idx
            targets[label.frame, label.class_idx] = label.doa

    return targets


def resample_frames(x: torch.Tensor, n_frames: int) -> torch.Tensor:
    """adaptive average pooling of (B, T', ...) along time to n_frames"""

    if x.shape[1] == n_frames:
        return x

    tail = x.shape[2:]
    flat = x.reshape(x.shape[0], x.shape[1], -1).transpose(1, 2)
    pooled = F.adaptive_avg_pool1d(flat, n_frames)

    return pooled.transpose(1, 2).reshape(x.shape[0], n_frames, *tail)


def accdoa_loss(pred: torch.Tensor, target: torch.Tensor) -> torch.Tensor:
    """mean squared error over every frame, class and axis"""

    if pred.shape != target.shape:
        raise ShapeError(f"accdoa_loss shapes differ: {tuple(pred.shape)} vs {tuple(target.shape)}")

    return mse_loss(pred, target)


def accdoa_decode(pred: torch.Tensor | np.ndarray, threshold: float = DEFAULT_THRESHOLD) -> list[list[tuple[int, np.ndarray]]]:
    """Active classes and unit DOAs per frame.

    Parameters
    ----------
    pred : Tensor or ndarray
        ACCDOA output of one clip, shape (T, M, 3).
    threshold : float, default 0.5
        Activity threshold on the vector norm.

    Return
    ------
    frames : list
        Per frame a list of (class_idx, unit DOA)."""

    if not 0 < threshold < 1:
        raise PreconditionError(f"activity threshold must lie in (0, 1), got {threshold}")

    if isinstance(pred, torch.Tensor):
        pred = pred.detach().cpu().numpy()

    pred = np.asarray(pred, dtype=np.float64)
    if pred.ndim != 3 or pred.shape[-1] != 3:
        raise ShapeError(f"expected ACCDOA of shape (T, M, 3), got {pred.shape}")

    norms = np.linalg.norm(pred, axis=-1)
    active = norms > threshold

    return [
        [(int(c), pred[t, c] / norms[t, c]) for c in np.flatnonzero(active[t])]
        for t in range(pred.shape[0])
    ]
