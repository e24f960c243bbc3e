"""SRIR banks per room with WAV export"""
from __future__ import annotations

import os
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
import pandas as pd
import soundfile as sf

from pyseld.exceptions import GeometryError
from pyseld.logger import get_modulelogger
from pyseld.utils.pool import call_threaded

from .array import MicArraySpec
from .render import Srir, simulate_srir
from .room import RoomSpec

logger = get_modulelogger(__name__)

INDEX_COLUMNS = [
    "room_id", "src_id", "src_x", "src_y", "src_z",
    "azimuth_deg", "elevation_deg", "rt60_nominal_s", "wav_path",
]


def random_source_positions(
    room: RoomSpec,
    array: MicArraySpec,
    count: int,
    rng: np.random.Generator,
    margin: float = 0.5,
    min_distance: float = 1.0,
    max_attempts: int = 1000,
) -> list[tuple[float, float, float]]:
    """draw source positions away from walls and the array"""

    dims = np.asarray(room.dims)
    center = np.asarray(array.center)

    positions = []
    for _ in range(max_attempts * count):

        if len(positions) == count:
            break

        point = rng.uniform(margin, dims - margin)
        if np.linalg.norm(point - center) >= min_distance:
            positions.append(tuple(float(x) for x in point))

    if len(positions) < count:
        raise GeometryError(f"room {room.dims} too small for {count} sources at {min_distance} m")

    return positions


def write_srir(path: str | os.PathLike, srir: Srir) -> None:
    """write FOA response as 32-bit float WAV"""
    sf.write(path, srir.foa_ir.T.astype(np.float32), srir.fs, subtype="FLOAT")


def srir_index(room: RoomSpec, srirs: Mapping[int, Srir], paths: Mapping[int, str] | None = None) -> pd.DataFrame:
    """sidecar index of a bank"""

    rows = []
    for src_id, srir in srirs.items():
        azimuth, elevation = srir.source_doa.to_azel(degrees=True)
        x, y, z = srir.source_position

        rows.append({
            "room_id": room.room_id, "src_id": src_id,
            "src_x": x, "src_y": y, "src_z": z,
            "azimuth_deg": azimuth, "elevation_deg": elevation,
            "rt60_nominal_s": srir.rt60_nominal,
            "wav_path": None if paths is None else paths[src_id],
        })

    return pd.DataFrame(rows, columns=INDEX_COLUMNS)


def build_srir_bank(
    room: RoomSpec,
    array: MicArraySpec,
    positions: Sequence[Sequence[float]],
    out_dir: str | os.PathLike | None = None,
    workers: int | None = None,
) -> tuple[dict[int, Srir], pd.DataFrame]:
    """Simulate one SRIR per source position.

    Parameters
    ----------
    room : RoomSpec
        Shoebox room.
    array : MicArraySpec
        Microphone array.
    positions : sequence
        Source positions in m.
    out_dir : path, default None
        Write WAVs and srir_index.csv when given.
    workers : int, default None
        Worker threads, capped by PYSELD_MAX_WORKERS.

    Return
    ------
    srirs, index : dict, DataFrame
        Responses by source id and the sidecar index."""

    jobs = {idx: {"src": tuple(pos)} for idx, pos in enumerate(positions)}
    srirs = call_threaded(simulate_srir, jobs, workers=workers, room=room, array=array)
    logger.info("Simulated %d SRIRs for room '%s'", len(srirs), room.room_id)

    if out_dir is None:
        return srirs, srir_index(room, srirs)

    # export bank
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    paths = {}
    for src_id, srir in srirs.items():
        name = f"{room.room_id}_src{src_id:03d}.wav"
        write_srir(out_dir.joinpath(name), srir)
        paths[src_id] = name

    index = srir_index(room, srirs, paths)
    index.to_csv(out_dir.joinpath("srir_index.csv"), index=False)

    return srirs, index
