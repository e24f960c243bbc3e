"""episodic meta-learning, supervised training and meta-test adaptation"""
from .adaptation import AdaptationResult, evaluate_zero_shot, meta_test_adapt, split_support, sweep_adaptation
from .engine import EpisodeGradients, MetaGradients, episode_gradients, inner_adapt, meta_gradients, meta_outer_step, meta_train
from .episodes import EpisodeBatch, MetaConfig, plan_episodes, sample_episodes
from .supervised import TrainConfig, train_supervised

__all__ = [
    "AdaptationResult",
    "EpisodeBatch",
    "EpisodeGradients",
    "MetaConfig",
    "MetaGradients",
    "TrainConfig",
    "episode_gradients",
    "evaluate_zero_shot",
    "inner_adapt",
    "meta_gradients",
    "meta_outer_step",
    "meta_test_adapt",
    "meta_train",
    "plan_episodes",
    "sample_episodes",
    "split_support",
    "sweep_adaptation",
    "train_supervised",
]
