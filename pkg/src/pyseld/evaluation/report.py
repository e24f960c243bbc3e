"""score tables and reports"""
from __future__ import annotations

import os
from typing import Any, Mapping

import pandas as pd
import yaml

from pyseld.utils.excel import write_workbook
from pyseld.utils.structured import to_plain

from .metrics import MetricScores, aggregate_rooms

SCORE_COLUMNS = ["room", "class", "er20", "f20", "le_cd_deg", "lr_cd", "e_seld"]
FLOAT_FORMAT = "%.6f"


def scores_frame(room_scores: Mapping[str, MetricScores]) -> pd.DataFrame:
    """Rows per room and class, a room row 'all' and a macro row"""

    rows = []
    for room, scores in room_scores.items():

        for item in scores.per_class.itertuples(index=False):
            rows.append([room, str(item.class_idx), scores.er20, item.f20, item.le_cd_deg, item.lr_cd, item.e_seld])

        rows.append([room, "all", scores.er20, scores.f20, scores.le_cd, scores.lr_cd, scores.e_seld])

    if room_scores:
        macro = aggregate_rooms(room_scores)
        rows.append(["macro", "all", macro.er20, macro.f20, macro.le_cd, macro.lr_cd, macro.e_seld])

    return pd.DataFrame(rows, columns=SCORE_COLUMNS)


def write_scores(path: str | os.PathLike, frame: pd.DataFrame) -> None:
    """score table as CSV with fixed precision"""
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")


def write_frame(path: str | os.PathLike, frame: pd.DataFrame) -> None:
    """indexed table, e.g. a similarity grid, as CSV"""
    frame.to_csv(path, float_format=FLOAT_FORMAT, lineterminator="\n")


def write_report(path: str | os.PathLike, room_scores: Mapping[str, MetricScores], extra: Mapping[str, Any] | None = None) -> None:
    """room-wise and macro scores as YAML"""

    content = {"rooms": {room: scores.as_dict() for room, scores in room_scores.items()}}
    if room_scores:
        content["macro"] = aggregate_rooms(room_scores).as_dict()

    content.update(extra or {})

    with open(path, mode="w", encoding="utf-8") as file:
        yaml.safe_dump(to_plain(content), file, sort_keys=False)


def export_workbook(path: str | os.PathLike, frames: Mapping[str, pd.DataFrame]) -> None:
    """analysis tables as one xlsx worksheet each"""
    write_workbook(path, frames)
