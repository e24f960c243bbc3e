"""SELD metrics, score tables and representation analyses"""
from itertools import permutations

import numpy as np
import pandas as pd
import pytest
import torch
import yaml

from pyseld.evaluation import (
    FrameEvents,
    aggregate_rooms,
    angular_distances,
    attenuation_report,
    clustering_purity,
    diagonal_hits,
    e_seld,
    events_from_accdoa,
    events_from_labels,
    export_workbook,
    match_and_score,
    scores_frame,
    similarity_map,
    write_report,
    write_scores,
)
from pyseld.evaluation.report import SCORE_COLUMNS
from pyseld.exceptions import (
    AttenuationModeError,
    DomainError,
    FrameRangeError,
    PreconditionError,
    ShapeError,
    ZeroVectorError,
)
from pyseld.model import AttenuationConfig, EnvRepresentation, ExtractorConfig, SeldModel, layer_names
from pyseld.scenes import Label


def _rotated(doa: np.ndarray, degrees: float) -> np.ndarray:
    """doa on the horizontal plane rotated in azimuth"""

    angle = np.deg2rad(degrees)
    rotation = np.array([[np.cos(angle), -np.sin(angle), 0], [np.sin(angle), np.cos(angle), 0], [0, 0, 1]])

    return rotation @ doa


def _unit(rng: np.random.Generator) -> np.ndarray:
    vector = rng.normal(size=3)
    return vector / np.linalg.norm(vector)


def _single(doa, class_idx: int = 0) -> FrameEvents:
    return FrameEvents([[(class_idx, np.asarray(doa, dtype=float))]])


@pytest.mark.parametrize(("er", "f", "le", "lr", "expected"), [
    (0.722, 0.232, 22.2, 0.395, 0.555),
    (0.746, 0.209, 25.6, 0.414, 0.566),
])
def test_e_seld_reported_values(er, f, le, lr, expected):
    assert e_seld(er, f, le, lr) == pytest.approx(expected, abs=5e-4)


def test_e_seld_bounds():

    assert e_seld(0.0, 1.0, 0.0, 1.0) == 0.0
    assert e_seld(1.0, 0.0, 180.0, 0.0) == 1.0

    with pytest.raises(DomainError):
        e_seld(0.5, 0.5, 181.0, 0.5)


def test_identical_events_score_perfectly(rng):

    frames = [[(c, _unit(rng)) for c in range(3) if rng.random() < 0.5] for _ in range(25)]
    events = FrameEvents(frames)

    scores = match_and_score(events, events, n_classes=3)

    assert scores.er20 == 0
    assert scores.f20 == pytest.approx(1.0)
    assert scores.le_cd == pytest.approx(0.0, abs=1e-5)
    assert scores.lr_cd == pytest.approx(1.0)


def test_close_prediction_is_detected():

    ref = np.array([1.0, 0.0, 0.0])
    scores = match_and_score(_single(_rotated(ref, 10)), _single(ref), n_classes=2)

    assert scores.f20 == pytest.approx(1.0)
    assert scores.le_cd == pytest.approx(10.0)
    assert scores.lr_cd == pytest.approx(1.0)
    assert scores.er20 == 0


def test_distant_prediction_is_localized_but_not_detected():

    ref = np.array([0.0, 1.0, 0.0])
    scores = match_and_score(_single(_rotated(ref, 25)), _single(ref), n_classes=2)

    assert scores.f20 == pytest.approx(0.0)
    assert scores.le_cd == pytest.approx(25.0)
    assert scores.lr_cd == pytest.approx(1.0)


def test_far_pair_counts_as_false_positive_and_negative():

    ref_doa = np.array([1.0, 0.0, 0.0])
    ref = FrameEvents([[(0, ref_doa), (1, [0.0, 0.0, 1.0])]])
    pred = FrameEvents([[(0, _rotated(ref_doa, 25))]])

    scores = match_and_score(pred, ref, n_classes=2)

    # one substitution and one deletion over two references
    assert scores.er20 == pytest.approx(1.0)


def test_e_seld_is_monotone_on_grid():

    grid = np.linspace(0, 1, 6)
    angles = np.linspace(0, 180, 7)

    for er in grid:
        for f in grid:
            for le in angles:
                for lr in grid:
                    base = e_seld(er, f, le, lr)
                    assert e_seld(er + 0.1, f, le, lr) >= base
                    assert e_seld(er, f, min(le + 10, 180), lr) >= base
                    assert e_seld(er, max(f - 0.1, 0), le, lr) >= base
                    assert e_seld(er, f, le, max(lr - 0.1, 0)) >= base


def _random_scene(rng: np.random.Generator, n_frames: int, n_classes: int) -> FrameEvents:
    """up to three events per frame, same-class overlaps allowed"""
    return FrameEvents([
        [(int(rng.integers(n_classes)), _unit(rng)) for _ in range(rng.integers(0, 4))]
        for _ in range(n_frames)
    ])


def test_scores_invariant_to_class_relabeling(rng):

    n_classes = 4
    for _ in range(10):

        ref = _random_scene(rng, 30, n_classes)
        pred = _random_scene(rng, 30, n_classes)
        mapping = rng.permutation(n_classes).tolist()

        scores = match_and_score(pred, ref, n_classes=n_classes)
        relabeled = match_and_score(pred.relabel(mapping), ref.relabel(mapping), n_classes=n_classes)

        for key, value in scores.as_dict().items():
            assert relabeled.as_dict()[key] == pytest.approx(value)


def test_perfect_predictions_over_random_scenes(rng):

    for _ in range(100):

        scene = _random_scene(rng, int(rng.integers(1, 40)), n_classes=5)
        scores = match_and_score(scene, scene, n_classes=5)

        assert scores.er20 == 0
        assert scores.f20 == pytest.approx(1.0)
        assert scores.le_cd == pytest.approx(0.0, abs=1e-9)
        assert scores.lr_cd == pytest.approx(1.0)
        assert scores.e_seld == pytest.approx(0.0, abs=1e-9)


def test_missed_and_spurious_events():

    ref = FrameEvents([[(0, [1.0, 0.0, 0.0])], []])
    pred = FrameEvents([[], [(1, [0.0, 0.0, 1.0])]])

    scores = match_and_score(pred, ref, n_classes=2, segment_frames=1)

    assert scores.f20 == 0
    assert scores.le_cd == 180.0
    assert scores.lr_cd == 0
    assert scores.er20 == 2.0


def test_empty_events_score_perfectly():

    empty = FrameEvents([[], [], []])
    scores = match_and_score(empty, empty, n_classes=2)

    assert scores.as_dict() == {"er20": 0.0, "f20": 1.0, "le_cd": 0.0, "lr_cd": 1.0, "e_seld": 0.0}


def test_errors_without_reference_count_insertions():

    pred = FrameEvents([[(0, [1.0, 0.0, 0.0])], [(1, [0.0, 1.0, 0.0])]])
    empty = FrameEvents([[], []])

    assert match_and_score(pred, empty, n_classes=2).er20 == 2.0


def test_match_and_score_errors():

    one = FrameEvents([[]])
    two = FrameEvents([[], []])

    with pytest.raises(FrameRangeError):
        match_and_score(one, two, n_classes=2)

    with pytest.raises(PreconditionError):
        match_and_score(two, two, n_classes=2, segment_frames=0)

    with pytest.raises(DomainError):
        match_and_score(_single([1.0, 0.0, 0.0], class_idx=4), FrameEvents([[]]), n_classes=2)


def _brute_force(ref: np.ndarray, pred: np.ndarray) -> np.ndarray:
    """minimum-cost assignment by enumeration"""

    cost = angular_distances(ref, pred)
    if cost.shape[0] > cost.shape[1]:
        cost = cost.T

    rows = np.arange(cost.shape[0])
    best = min(permutations(range(cost.shape[1]), cost.shape[0]), key=lambda cols: cost[rows, list(cols)].sum())

    return cost[rows, list(best)]


def test_hungarian_matches_enumeration(rng):

    def frames(n_frames: int) -> list:
        return [
            [(int(rng.integers(0, 2)), _unit(rng)) for _ in range(rng.integers(0, 4))]
            for _ in range(n_frames)
        ]

    for _ in range(200):

        ref, pred = FrameEvents(frames(10)), FrameEvents(frames(10))

        hungarian = match_and_score(pred, ref, n_classes=2)
        enumerated = match_and_score(pred, ref, n_classes=2, matcher=_brute_force)

        for key, value in hungarian.as_dict().items():
            assert enumerated.as_dict()[key] == pytest.approx(value)


def test_angular_distances():

    axes = np.eye(3)
    distances = angular_distances(axes, np.vstack([axes, -axes[:1]]))

    assert distances.shape == (3, 4)
    assert np.allclose(np.diag(distances[:, :3]), 0.0)
    assert distances[0, 1] == pytest.approx(90.0)
    assert distances[0, 3] == pytest.approx(180.0)


def test_frame_events():

    events = FrameEvents([[(0, [1.0, 0.0, 0.0]), (0, [0.0, 1.0, 0.0])], [(1, [0.0, 0.0, -1.0])]])

    assert events.n_frames == 2
    assert events.classes() == {0, 1}
    assert events.by_class(0)[0].shape == (2, 3)
    assert events.relabel([1, 0]).classes() == {0, 1}
    assert FrameEvents.concat([events, events]).n_frames == 4

    with pytest.raises(DomainError):
        FrameEvents([[(0, [1.0, 1.0, 0.0])]])


def test_events_from_labels():

    labels = [Label(frame=1, class_idx=2, track_idx=0, doa=np.array([0.0, 0.0, 1.0]))]
    events = events_from_labels(labels, n_frames=3)

    assert [len(frame) for frame in events.frames] == [0, 1, 0]
    assert events.frames[1][0][0] == 2

    with pytest.raises(FrameRangeError):
        events_from_labels(labels, n_frames=1)


def test_events_from_accdoa():

    pred = np.zeros((2, 3, 3))
    pred[0, 1] = [0.0, 0.9, 0.0]
    pred[1, 2] = [0.3, 0.0, 0.0]

    events = events_from_accdoa(pred, threshold=0.5)

    assert len(events.frames[0]) == 1
    assert events.frames[0][0][0] == 1
    assert np.allclose(events.frames[0][0][1], [0.0, 1.0, 0.0])
    assert events.frames[1] == []


def _room_scores(ref_doa, offset: float):
    ref = FrameEvents([[(0, ref_doa)], [(1, ref_doa)]])
    pred = FrameEvents([[(0, _rotated(ref_doa, offset))], [(1, _rotated(ref_doa, offset))]])
    return match_and_score(pred, ref, n_classes=2)


def test_aggregate_rooms():

    rooms = {"room_a": _room_scores(np.array([1.0, 0, 0]), 4.0), "room_b": _room_scores(np.array([1.0, 0, 0]), 8.0)}
    macro = aggregate_rooms(rooms)

    assert macro.le_cd == pytest.approx(6.0)
    assert macro.f20 == pytest.approx(1.0)
    assert macro.per_room["room"].tolist() == ["room_a", "room_b"]

    with pytest.raises(PreconditionError):
        aggregate_rooms({})


def test_score_tables(tmp_path):

    rooms = {"room_a": _room_scores(np.array([0, 1.0, 0]), 4.0), "room_b": _room_scores(np.array([0, 1.0, 0]), 30.0)}

    frame = scores_frame(rooms)
    assert list(frame.columns) == SCORE_COLUMNS
    assert frame[["room", "class"]].values.tolist() == [
        ["room_a", "0"], ["room_a", "1"], ["room_a", "all"],
        ["room_b", "0"], ["room_b", "1"], ["room_b", "all"],
        ["macro", "all"],
    ]

    path = tmp_path / "scores.csv"
    write_scores(path, frame)
    reloaded = pd.read_csv(path, dtype={"class": str})
    assert np.allclose(reloaded["le_cd_deg"], frame["le_cd_deg"], atol=1e-6)

    report = tmp_path / "report.yaml"
    write_report(report, rooms, extra={"method": "meta_pp"})
    content = yaml.safe_load(report.read_text())

    assert set(content["rooms"]) == {"room_a", "room_b"}
    assert content["macro"]["le_cd"] == pytest.approx(17.0)
    assert content["method"] == "meta_pp"


def test_export_workbook(tmp_path):

    pytest.importorskip("xlsxwriter")

    path = tmp_path / "analysis.xlsx"
    export_workbook(path, {"similarity": pd.DataFrame(np.eye(2), index=pd.Index(["a", "b"], name="query"))})

    assert path.stat().st_size > 0


def test_similarity_map():

    support = [EnvRepresentation(torch.tensor([1.0, 0.0]), env_id="a"), EnvRepresentation(torch.tensor([0.0, 2.0]), env_id="b")]
    query = [np.array([3.0, 0.1]), np.array([0.1, 1.0])]

    grid = similarity_map(support, query)

    assert grid.columns.tolist() == ["a", "b"]
    assert grid.index.tolist() == ["query0", "query1"]
    assert grid.loc["query0", "a"] == pytest.approx(3.0 / np.hypot(3.0, 0.1))
    assert diagonal_hits(grid) == 2
    assert diagonal_hits(grid.iloc[::-1]) == 0


def test_similarity_map_errors():

    with pytest.raises(ZeroVectorError):
        similarity_map([np.zeros(2)], [np.ones(2)])

    with pytest.raises(ShapeError):
        similarity_map([np.ones(2)], [np.ones(3)])

    with pytest.raises(PreconditionError):
        similarity_map([], [np.ones(2)])


def test_clustering_purity(rng):

    centers = np.array([[5.0, 0.0, 0.0], [0.0, 5.0, 0.0]])
    reps = np.vstack([center + 0.1 * rng.normal(size=(10, 3)) for center in centers])
    labels = ["a"] * 10 + ["b"] * 10

    assert clustering_purity(reps, labels) == 1.0
    assert clustering_purity(reps, ["b"] + labels[1:]) == pytest.approx(0.95)

    with pytest.raises(ShapeError):
        clustering_purity(reps, labels[:5])


def test_attenuation_report(tiny_backbone, tiny_dataset):

    model = SeldModel.create(
        tiny_backbone, method="env_adaptive",
        extractor=ExtractorConfig(dim=20), attenuation=AttenuationConfig(hidden=8),
    )

    report = attenuation_report(model, tiny_dataset, tiny_dataset.env_ids, k_support=3)

    assert report.lambdas.shape == (3, 10)
    assert report.lambdas.columns.tolist() == layer_names(tiny_backbone)
    assert ((report.lambdas > 0) & (report.lambdas < 1)).all().all()
    assert report.summary().shape == (10, 3)

    bypassed = attenuation_report(model, tiny_dataset, tiny_dataset.env_ids, k_support=3, bypass=True)
    assert (bypassed.lambdas == 1.0).all().all()
    assert bypassed.insensitive == layer_names(tiny_backbone)

    with pytest.raises(AttenuationModeError):
        attenuation_report(model.with_method("meta_pp"), tiny_dataset, tiny_dataset.env_ids)
