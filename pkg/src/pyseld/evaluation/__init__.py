"""SELD metrics, aggregation and analyses"""
from .analysis import AttenuationReport, attenuation_report, clustering_purity, diagonal_hits, similarity_map
from .events import FrameEvents, events_from_accdoa, events_from_labels
from .metrics import DOA_THRESHOLD, SEGMENT_FRAMES, MetricScores, aggregate_rooms, angular_distances, e_seld, match_and_score
from .report import export_workbook, scores_frame, write_frame, write_report, write_scores

__all__ = [
    "AttenuationReport",
    "DOA_THRESHOLD",
    "FrameEvents",
    "MetricScores",
    "SEGMENT_FRAMES",
    "aggregate_rooms",
    "angular_distances",
    "attenuation_report",
    "clustering_purity",
    "diagonal_hits",
    "e_seld",
    "events_from_accdoa",
    "events_from_labels",
    "export_workbook",
    "match_and_score",
    "scores_frame",
    "similarity_map",
    "write_frame",
    "write_report",
    "write_scores",
]
