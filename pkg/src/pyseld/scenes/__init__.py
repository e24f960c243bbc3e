"""labeled multi-environment FOA scene synthesis"""
from .dataset import ClipEntry, DatasetManifest, EnvironmentConfig, SynthesisConfig, build_dataset, build_environment, environment_srirs
from .events import DryEvent, EventClass, generate_event, load_event_classes
from .labels import LABEL_HOP_S, Label, read_label_csv, write_label_csv
from .mixing import PlacedEvent, SceneClip, max_overlap, place_events, scene_labels, synthesize_clip
from .noise import diffuse_noise, generate_noise, load_noise_types
from .studies import LADDER_RT60S, noise_set, reverb_ladder

__all__ = [
    "ClipEntry",
    "DatasetManifest",
    "DryEvent",
    "EnvironmentConfig",
    "EventClass",
    "LABEL_HOP_S",
    "LADDER_RT60S",
    "Label",
    "PlacedEvent",
    "SceneClip",
    "SynthesisConfig",
    "build_dataset",
    "build_environment",
    "diffuse_noise",
    "environment_srirs",
    "generate_event",
    "generate_noise",
    "load_event_classes",
    "load_noise_types",
    "max_overlap",
    "noise_set",
    "place_events",
    "read_label_csv",
    "reverb_ladder",
    "scene_labels",
    "synthesize_clip",
    "write_label_csv",
]
