"""backbone, environment extractor and attenuation networks"""
from .accdoa import DEFAULT_THRESHOLD, accdoa_decode, accdoa_loss, labels_to_accdoa, resample_frames
from .attenuation import (
    AttenuationConfig,
    attenuate,
    attenuation_coefficients,
    gradient_summary,
    init_attenuation,
)
from .backbone import BackboneConfig, BackboneOutput, backbone_forward, init_backbone, layer_channels, layer_names
from .extractor import EnvRepresentation, ExtractorConfig, extract_env_representation, init_extractor, pool_layer_map
from .seld import SeldModel

__all__ = [
    "AttenuationConfig",
    "BackboneConfig",
    "BackboneOutput",
    "DEFAULT_THRESHOLD",
    "EnvRepresentation",
    "ExtractorConfig",
    "SeldModel",
    "accdoa_decode",
    "accdoa_loss",
    "attenuate",
    "attenuation_coefficients",
    "backbone_forward",
    "extract_env_representation",
    "gradient_summary",
    "init_attenuation",
    "init_backbone",
    "init_extractor",
    "labels_to_accdoa",
    "layer_channels",
    "layer_names",
    "pool_layer_map",
    "resample_frames",
]
