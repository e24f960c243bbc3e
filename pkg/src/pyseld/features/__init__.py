"""STFT features: log-mel spectrograms and FOA intensity vectors"""
from .cache import read_feature_cache, write_feature_cache
from .dataset import FeatureDataset
from .spectral import FeatureConfig, FeatureTensor, extract_features, intensity_vectors, log_mel, mel_filterbank, stft

__all__ = [
    "FeatureConfig",
    "FeatureDataset",
    "FeatureTensor",
    "extract_features",
    "intensity_vectors",
    "log_mel",
    "mel_filterbank",
    "read_feature_cache",
    "stft",
    "write_feature_cache",
]
