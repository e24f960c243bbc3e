"""environment representation and attenuation analyses"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import pandas as pd
import torch

from pyseld.exceptions import AttenuationModeError, InsufficientClipsError, PreconditionError, ShapeError, ZeroVectorError
from pyseld.features import FeatureDataset
from pyseld.model import EnvRepresentation, SeldModel, layer_names

INSENSITIVE_STD = 1e-3


def _as_matrix(reps: Sequence[EnvRepresentation | np.ndarray | torch.Tensor], name: str) -> np.ndarray:

    if len(reps) == 0:
        raise PreconditionError(f"no {name} representations")

    rows = []
    for rep in reps:
        vector = rep.vector if isinstance(rep, EnvRepresentation) else rep
        if isinstance(vector, torch.Tensor):
            vector = vector.detach().cpu().numpy()
        rows.append(np.asarray(vector, dtype=np.float64).reshape(-1))

    if len({row.size for row in rows}) != 1:
        raise ShapeError(f"{name} representations differ in size")

    matrix = np.stack(rows)
    norms = np.linalg.norm(matrix, axis=1, keepdims=True)
    if np.any(norms == 0):
        raise ZeroVectorError(f"cosine similarity of a zero {name} representation is undefined")

    return matrix / norms


def _labels(reps, default: str) -> list[str]:
    return [
        rep.env_id if isinstance(rep, EnvRepresentation) and rep.env_id else f"{default}{idx}"
        for idx, rep in enumerate(reps)
    ]


def similarity_map(
    reps_support: Sequence[EnvRepresentation | np.ndarray],
    reps_query: Sequence[EnvRepresentation | np.ndarray],
) -> pd.DataFrame:
    """cosine similarity, rows query environments, columns support environments"""

    support = _as_matrix(reps_support, "support")
    query = _as_matrix(reps_query, "query")

    if support.shape[1] != query.shape[1]:
        raise ShapeError(f"support size {support.shape[1]} differs from query size {query.shape[1]}")

    return pd.DataFrame(
        query @ support.T,
        index=pd.Index(_labels(reps_query, "query"), name="query"),
        columns=pd.Index(_labels(reps_support, "support"), name="support"),
    )


def diagonal_hits(similarity: pd.DataFrame) -> int:
    """rows whose diagonal entry is the row maximum"""

    values = similarity.to_numpy()
    size = min(values.shape)

    return int(sum(values[i, i] >= values[i].max() for i in range(size)))


def clustering_purity(reps: np.ndarray, labels: Sequence[str]) -> float:
    """Nearest-centroid purity.

    Fraction of representations whose nearest class centroid, in
    cosine distance, is the centroid of their own label."""

    matrix = _as_matrix(list(np.asarray(reps)), "clustered")
    labels = np.asarray(labels)

    if labels.shape[0] != matrix.shape[0]:
        raise ShapeError(f"{matrix.shape[0]} representations but {labels.shape[0]} labels")

    classes = np.unique(labels)
    centroids = _as_matrix([matrix[labels == c].mean(axis=0) for c in classes], "centroid")
    nearest = classes[np.argmax(matrix @ centroids.T, axis=1)]

    return float(np.mean(nearest == labels))


@dataclass(frozen=True, eq=False)
class AttenuationReport:
    """λ per environment and layer"""

    lambdas: pd.DataFrame

    @property
    def std(self) -> pd.Series:
        """cross-environment std per layer"""
        return self.lambdas.std(axis=0, ddof=0)

    @property
    def insensitive(self) -> list[str]:
        """layers whose λ barely varies across environments"""
        return self.std.index[self.std < INSENSITIVE_STD].tolist()

    def summary(self) -> pd.DataFrame:
        """mean, std and insensitivity flag per layer"""

        return pd.DataFrame({
            "mean": self.lambdas.mean(axis=0),
            "std": self.std,
            "env_insensitive": self.std < INSENSITIVE_STD,
        })


def attenuation_report(
    model: SeldModel,
    dataset: FeatureDataset,
    env_ids: Sequence[str],
    k_support: int = 30,
    bypass: bool = False,
    training: bool = True,
) -> AttenuationReport:
    """Attenuation factors of each environment's first K support clips.

    Parameters
    ----------
    model : SeldModel
        Trained env_adaptive model.
    dataset : FeatureDataset
        Clips of the environments.
    env_ids : sequence of str
        Environments to report.
    k_support : int, default 30
        Support clips per environment.
    bypass : bool, default False
        Report the λ ≡ 1 of a bypassed model.
    training : bool, default True
        Normalize with support batch statistics.

    Return
    ------
    report : AttenuationReport
        λ matrix, environments by layers."""

    if not model.adaptive:
        raise AttenuationModeError(f"method '{model.method}' has no attenuation network")

    rows = {}
    for env_id in env_ids:

        clip_ids = dataset.clip_ids(env_id)
        if not clip_ids:
            raise InsufficientClipsError(f"environment '{env_id}' has no clips")

        x, y = dataset.batch(clip_ids[:k_support])
        lambdas, _ = model.attenuate(x, y, bypass=bypass, training=training, env_id=env_id)
        rows[env_id] = lambdas.detach().cpu().numpy().astype(np.float64)

    frame = pd.DataFrame.from_dict(rows, orient="index", columns=layer_names(model.backbone))
    frame.index.name = "env_id"

    return AttenuationReport(frame)
