"""controlled environment studies"""
from __future__ import annotations

import numpy as np

from pyseld.exceptions import ConfigError

from .dataset import EnvironmentConfig
from .noise import load_noise_types

LADDER_RT60S = tuple(round(0.4 + 0.3 * step, 1) for step in range(8))


def reverb_ladder(
    dims: tuple[float, float, float] = (6.0, 5.0, 3.0),
    rt60s: tuple[float, ...] = LADDER_RT60S,
    n_clips: int = 16,
    n_sources: int = 16,
    max_order: int | None = None,
) -> tuple[EnvironmentConfig, ...]:
    """Rooms of equal geometry with increasing RT60, 0.4 to 2.5 s by default"""

    if any(b <= a for a, b in zip(rt60s, rt60s[1:])):
        raise ConfigError(f"ladder RT60s must strictly increase, got {rt60s}")

    return tuple(
        EnvironmentConfig(
            env_id=f"rt60_{rt60:.1f}".replace(".", "p"),
            dims=dims,
            rt60=rt60,
            n_clips=n_clips,
            n_sources=n_sources,
            max_order=max_order,
        )
        for rt60 in rt60s
    )


def noise_set(
    n_rooms: int,
    seed: int = 0,
    n_clips: int = 16,
    n_sources: int = 16,
    snr_range: tuple[float, float] = (10.0, 15.0),
    rt60_range: tuple[float, float] = (0.3, 0.8),
) -> tuple[EnvironmentConfig, ...]:
    """Rooms with a unique ambient noise type each.

    Geometry and RT60 vary per room, the SNR of every clip is drawn
    from snr_range."""

    noise_types = list(load_noise_types())
    if not 1 <= n_rooms <= len(noise_types):
        raise ConfigError(f"noise set supports 1 to {len(noise_types)} rooms, got {n_rooms}")

    rng = np.random.default_rng(seed)
    picks = rng.permutation(len(noise_types))[:n_rooms]

    rooms = []
    for idx, pick in enumerate(picks):

        dims = tuple(float(d) for d in np.round(rng.uniform((4.0, 3.5, 2.5), (9.0, 7.0, 4.0)), 2))
        rooms.append(
            EnvironmentConfig(
                env_id=f"noise_{idx:02d}_{noise_types[pick]}",
                dims=dims,
                rt60=round(float(rng.uniform(*rt60_range)), 2),
                noise_type=noise_types[pick],
                snr_range=snr_range,
                n_clips=n_clips,
                n_sources=n_sources,
            )
        )

    return tuple(rooms)
