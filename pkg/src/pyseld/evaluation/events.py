"""per-frame event lists of predictions and references"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from pyseld.exceptions import DomainError, FrameRangeError
from pyseld.model.accdoa import DEFAULT_THRESHOLD, accdoa_decode
from pyseld.scenes import Label

FrameList = list[list[tuple[int, np.ndarray]]]


@dataclass(frozen=True, eq=False)
class FrameEvents:
    """Active (class_idx, unit DOA) pairs per 100 ms frame"""

    frames: FrameList

    def __post_init__(self):

        frames = []
        for idx, events in enumerate(self.frames):

            checked = []
            for class_idx, doa in events:
                doa = np.asarray(doa, dtype=np.float64)
                if doa.shape != (3,) or abs(np.linalg.norm(doa) - 1) > 1e-6:
                    raise DomainError(f"frame {idx} holds a non-unit DOA for class {class_idx}")
                checked.append((int(class_idx), doa))

            frames.append(checked)

        object.__setattr__(self, "frames", frames)

    def __len__(self) -> int:
        return len(self.frames)

    @property
    def n_frames(self) -> int:
        """number of frames"""
        return len(self.frames)

    def by_class(self, frame: int) -> dict[int, np.ndarray]:
        """DOAs of one frame grouped by class, each (n, 3)"""

        grouped: dict[int, list[np.ndarray]] = {}
        for class_idx, doa in self.frames[frame]:
            grouped.setdefault(class_idx, []).append(doa)

        return {class_idx: np.stack(doas) for class_idx, doas in grouped.items()}

    def classes(self) -> set[int]:
        """classes active anywhere"""
        return {class_idx for events in self.frames for class_idx, _ in events}

    def relabel(self, mapping: Sequence[int]) -> FrameEvents:
        """events with class indices mapped through mapping"""
        return FrameEvents([[(mapping[c], doa) for c, doa in events] for events in self.frames])

    @classmethod
    def concat(cls, parts: Iterable[FrameEvents]) -> FrameEvents:
        """frames of several clips in sequence"""
        return cls([events for part in parts for events in part.frames])


def events_from_labels(labels: Iterable[Label], n_frames: int) -> FrameEvents:
    """reference events of one clip"""

    frames: FrameList = [[] for _ in range(n_frames)]
    for label in labels:

        if not 0 <= label.frame < n_frames:
            raise FrameRangeError(f"label frame {label.frame} outside [0, {n_frames})")

        frames[label.frame].append((label.class_idx, label.doa))

    return FrameEvents(frames)


def events_from_accdoa(pred, threshold: float = DEFAULT_THRESHOLD) -> FrameEvents:
    """decoded events of one clip's ACCDOA output (T, M, 3)"""
    return FrameEvents(accdoa_decode(pred, threshold))
