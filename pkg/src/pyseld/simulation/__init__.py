"""image-source room simulation and FOA encoding"""
from .array import MicArraySpec, default_array, tetrahedral_directions
from .bank import build_srir_bank, random_source_positions, srir_index, write_srir
from .render import Srir, encode_foa, foa_encoder, render_array_rir, simulate_srir
from .room import (
    ImageSource,
    RoomSpec,
    absorption_for_rt60,
    enumerate_image_sources,
    estimate_rt60,
    image_source_arrays,
    sabine_rt60,
    schroeder_curve,
)

__all__ = [
    "ImageSource",
    "MicArraySpec",
    "RoomSpec",
    "Srir",
    "absorption_for_rt60",
    "build_srir_bank",
    "default_array",
    "encode_foa",
    "enumerate_image_sources",
    "estimate_rt60",
    "foa_encoder",
    "image_source_arrays",
    "random_source_positions",
    "render_array_rir",
    "sabine_rt60",
    "schroeder_curve",
    "simulate_srir",
    "srir_index",
    "tetrahedral_directions",
    "write_srir",
]
