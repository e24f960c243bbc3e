"""module defined types"""
from __future__ import annotations
from typing import Literal


ErrorHandling = Literal["ignore", "warn", "raise"]

Method = Literal["seld", "meta", "meta_pp", "env_adaptive"]

AttenuationInput = Literal["none", "gradients", "representations"]

ExtractorVariant = Literal["all_layers", "last_mean", "last_encode"]

OptimizerKind = Literal["sgd", "adamw"]

Study = Literal["reverb-ladder", "noise-set"]

EventKind = Literal["tone", "chirp", "harmonic", "noise_burst", "click_train"]

NoiseKind = Literal["white", "pink", "brown", "hum", "babble", "machinery", "rain", "wind"]
