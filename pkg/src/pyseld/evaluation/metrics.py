"""joint localization and detection metrics"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
import pandas as pd
from scipy.optimize import linear_sum_assignment

from pyseld.exceptions import DomainError, FrameRangeError, PreconditionError

from .events import FrameEvents

DOA_THRESHOLD = 20.0
SEGMENT_FRAMES = 10

CLASS_COLUMNS = ["class_idx", "n_ref", "n_pred", "f20", "le_cd_deg", "lr_cd", "e_seld"]


def e_seld(er: float, f: float, le_deg: float, lr: float) -> float:
    """aggregate error, ¼ [ER + (1 - F) + LE / 180 + (1 - LR)]"""

    if not 0 <= le_deg <= 180:
        raise DomainError(f"localization error must lie in [0, 180] deg, got {le_deg}")

    return 0.25 * (er + (1 - f) + le_deg / 180 + (1 - lr))


@dataclass(frozen=True, eq=False)
class MetricScores:
    """Scores of one room or a room aggregate"""

    er20: float
    f20: float
    le_cd: float
    lr_cd: float
    e_seld: float
    per_class: pd.DataFrame = field(default_factory=lambda: pd.DataFrame(columns=CLASS_COLUMNS))
    per_room: pd.DataFrame | None = None

    def as_dict(self) -> dict[str, float]:
        """the five scores"""
        return {"er20": self.er20, "f20": self.f20, "le_cd": self.le_cd, "lr_cd": self.lr_cd, "e_seld": self.e_seld}


def angular_distances(ref: np.ndarray, pred: np.ndarray) -> np.ndarray:
    """great-circle angles in deg between unit vectors, shape (n_ref, n_pred)"""
    cross = np.linalg.norm(np.cross(ref[:, None, :], pred[None, :, :]), axis=-1)
    return np.rad2deg(np.arctan2(cross, ref @ pred.T))


def _match(ref: np.ndarray, pred: np.ndarray) -> np.ndarray:
    """angles of the minimum-cost assignment"""

    cost = angular_distances(ref, pred)
    rows, cols = linear_sum_assignment(cost)

    return cost[rows, cols]


def match_and_score(
    pred: FrameEvents,
    ref: FrameEvents,
    n_classes: int,
    doa_threshold: float = DOA_THRESHOLD,
    segment_frames: int = SEGMENT_FRAMES,
    matcher=_match,
) -> MetricScores:
    """Score predictions against references of one room.

    Parameters
    ----------
    pred, ref : FrameEvents
        Predicted and reference events over the same frames.
    n_classes : int
        Number of classes M.
    doa_threshold : float, default 20
        Spatial threshold in deg for location-dependent detection.
    segment_frames : int, default 10
        Frames per segment of the substitution, deletion and
        insertion accounting.
    matcher : Callable, default Hungarian
        Returns the matched angles of a class in a frame.

    Return
    ------
    scores : MetricScores
        Macro over the classes present in either side."""

    if pred.n_frames != ref.n_frames:
        raise FrameRangeError(f"prediction covers {pred.n_frames} frames, reference {ref.n_frames}")

    if segment_frames < 1:
        raise PreconditionError(f"segment length must be positive, got {segment_frames}")

    counts = {key: np.zeros(n_classes) for key in ("tp", "fp", "fp_spatial", "fn", "de_tp", "de_fn", "de_total", "n_ref", "n_pred")}
    subs = dels = ins = 0
    loc_fp = loc_fn = 0

    for frame in range(ref.n_frames):

        gt, pr = ref.by_class(frame), pred.by_class(frame)
        for class_idx in set(gt) | set(pr):

            if not 0 <= class_idx < n_classes:
                raise DomainError(f"class {class_idx} outside the {n_classes} classes")

            n_gt = len(gt.get(class_idx, ()))
            n_pr = len(pr.get(class_idx, ()))
            counts["n_ref"][class_idx] += n_gt
            counts["n_pred"][class_idx] += n_pr

            # class-correct frames
            if n_gt and n_pr:
                angles = matcher(gt[class_idx], pr[class_idx])

                matched = min(n_gt, n_pr)
                outside = int(np.sum(angles > doa_threshold))
                extra, missed = max(0, n_pr - n_gt), max(0, n_gt - n_pr)

                counts["de_total"][class_idx] += angles.sum()
                counts["de_tp"][class_idx] += matched
                counts["tp"][class_idx] += matched - outside
                counts["fp_spatial"][class_idx] += outside
                counts["fp"][class_idx] += extra
                counts["fn"][class_idx] += missed
                counts["de_fn"][class_idx] += missed

                loc_fp += extra + outside
                loc_fn += missed + outside

            elif n_gt:
                counts["fn"][class_idx] += n_gt
                counts["de_fn"][class_idx] += n_gt
                loc_fn += n_gt

            else:
                counts["fp"][class_idx] += n_pr
                loc_fp += n_pr

        # close segment
        if (frame + 1) % segment_frames == 0 or frame + 1 == ref.n_frames:
            subs += min(loc_fp, loc_fn)
            dels += max(0, loc_fn - loc_fp)
            ins += max(0, loc_fp - loc_fn)
            loc_fp = loc_fn = 0

    errors, n_ref = subs + dels + ins, counts["n_ref"].sum()
    er = errors / n_ref if n_ref else float(errors)

    present = np.flatnonzero((counts["n_ref"] > 0) | (counts["n_pred"] > 0))

    rows = []
    for c in present:

        tp, fp, fp_sp, fn = (counts[key][c] for key in ("tp", "fp", "fp_spatial", "fn"))
        de_tp, de_fn = counts["de_tp"][c], counts["de_fn"][c]

        f = tp / (tp + fp_sp + 0.5 * (fp + fn))
        le = counts["de_total"][c] / de_tp if de_tp else 180.0
        lr = de_tp / (de_tp + de_fn) if de_tp + de_fn else 0.0

        rows.append([int(c), int(counts["n_ref"][c]), int(counts["n_pred"][c]), f, le, lr, e_seld(er, f, le, lr)])

    per_class = pd.DataFrame(rows, columns=CLASS_COLUMNS)

    # perfect scores without events
    if per_class.empty:
        return MetricScores(er20=er, f20=1.0, le_cd=0.0, lr_cd=1.0, e_seld=e_seld(er, 1.0, 0.0, 1.0), per_class=per_class)

    f, le, lr = (float(per_class[col].mean()) for col in ("f20", "le_cd_deg", "lr_cd"))
    return MetricScores(er20=float(er), f20=f, le_cd=le, lr_cd=lr, e_seld=e_seld(er, f, le, lr), per_class=per_class)


def aggregate_rooms(scores: Mapping[str, MetricScores]) -> MetricScores:
    """macro average of room scores"""

    if not scores:
        raise PreconditionError("no room scores to aggregate")

    per_room = pd.DataFrame(
        [{"room": room, **score.as_dict()} for room, score in scores.items()]
    )

    er, f, le, lr = (float(per_room[col].mean()) for col in ("er20", "f20", "le_cd", "lr_cd"))
    return MetricScores(er20=er, f20=f, le_cd=le, lr_cd=lr, e_seld=e_seld(er, f, le, lr), per_room=per_room)
