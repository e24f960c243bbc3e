"""frame labels and their CSV format"""
from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Iterable

import numpy as np
import pandas as pd

from pyseld.acoustics import Direction
from pyseld.exceptions import DataError, DomainError

LABEL_HOP_S = 0.1
LABEL_COLUMNS = ["frame_100ms", "class_idx", "track_idx", "azimuth_deg", "elevation_deg"]


@dataclass(frozen=True, eq=False)
class Label:
    """Active class at one 100 ms frame"""

    frame: int
    class_idx: int
    track_idx: int
    doa: np.ndarray

    def __post_init__(self):

        doa = np.asarray(self.doa, dtype=np.float64)
        if doa.shape != (3,) or abs(np.linalg.norm(doa) - 1) > 1e-6:
            raise DomainError(f"label DOA must be a unit 3-vector, got {self.doa}")

        if self.frame < 0 or self.class_idx < 0 or self.track_idx < 0:
            raise DomainError("label frame, class and track must be non-negative")

        object.__setattr__(self, "doa", doa)

    def __eq__(self, other) -> bool:

        if not isinstance(other, Label):
            return NotImplemented

        return (
            (self.frame, self.class_idx, self.track_idx) == (other.frame, other.class_idx, other.track_idx)
            and np.allclose(self.doa, other.doa)
        )

    def __repr__(self) -> str:
        return f"Label(frame={self.frame}, class_idx={self.class_idx}, track_idx={self.track_idx}, doa={self.doa.round(3).tolist()})"


def labels_frame(labels: Iterable[Label]) -> pd.DataFrame:
    """labels as table with integer degrees"""

    rows = []
    for label in labels:
        azimuth, elevation = Direction.from_cartesian(label.doa).to_azel(degrees=True)

        # azimuth in (-180, 180]
        azimuth = int(round(azimuth))
        azimuth = 180 if azimuth == -180 else azimuth

        rows.append([label.frame, label.class_idx, label.track_idx, azimuth, int(round(elevation))])

    frame = pd.DataFrame(rows, columns=LABEL_COLUMNS, dtype=np.int64)
    return frame.sort_values(LABEL_COLUMNS[:3], kind="stable").reset_index(drop=True)


def write_label_csv(path: str | os.PathLike, labels: Iterable[Label]) -> None:
    """write labels as headerless CSV rows"""
    labels_frame(labels).to_csv(path, index=False, header=False)


def read_label_csv(path: str | os.PathLike) -> list[Label]:
    """read labels from headerless CSV rows"""

    try:
        frame = pd.read_csv(path, header=None, names=LABEL_COLUMNS, dtype=np.int64)
    except pd.errors.EmptyDataError:
        return []
    except ValueError as exc:
        raise DataError(f"malformed label file '{path}': {exc}") from exc

    labels = []
    for frame_idx, class_idx, track_idx, azimuth, elevation in frame.itertuples(index=False):
        doa = Direction.from_azel(azimuth, elevation, degrees=True).to_cartesian()
        labels.append(Label(int(frame_idx), int(class_idx), int(track_idx), doa))

    return labels
