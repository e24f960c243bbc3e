"""SELD model container shared by every training method"""
from __future__ import annotations

import os
from dataclasses import dataclass, field, replace

import torch

from pyseld.exceptions import AttenuationModeError, CheckpointFormatError, ConfigError
from pyseld.logger import get_modulelogger
from pyseld.nn import ParamSet, read_checkpoint, write_checkpoint
from pyseld.types import AttenuationInput, Method
from pyseld.utils.structured import from_mapping, to_plain

from .accdoa import accdoa_loss, resample_frames
from .attenuation import AttenuationConfig, attenuate, gradient_summary, init_attenuation, input_dim
from .backbone import BackboneConfig, BackboneOutput, BnState, backbone_forward, init_backbone, layer_channels
from .extractor import EnvRepresentation, ExtractorConfig, extract_env_representation, init_extractor, output_dim

logger = get_modulelogger(__name__)

CHECKPOINT_KIND = "pyseld-model"


@dataclass(frozen=True, eq=False)
class SeldModel:
    """Backbone Θ with optional extractor Ω and attenuation Φ.

    Only env_adaptive models carry Ω and Φ. Updates return new models."""

    backbone: BackboneConfig
    theta: ParamSet
    bn_state: BnState
    method: Method = "seld"
    extractor: ExtractorConfig = field(default_factory=ExtractorConfig)
    attenuation: AttenuationConfig = field(default_factory=AttenuationConfig)
    attenuation_input: AttenuationInput = "representations"
    omega: ParamSet | None = None
    phi: ParamSet | None = None

    def __post_init__(self):

        if self.method not in ("seld", "meta", "meta_pp", "env_adaptive"):
            raise ConfigError(f"Unsupported method: '{self.method}'")

        if self.adaptive and self.phi is None:
            raise AttenuationModeError("env_adaptive models need attenuation parameters")

    def __repr__(self) -> str:
        return f"SeldModel(method='{self.method}', theta={self.theta!r})"

    @property
    def adaptive(self) -> bool:
        """carries extractor and attenuation"""
        return self.method == "env_adaptive"

    @property
    def p(self) -> int:
        """number of backbone layers"""
        return self.theta.p

    @classmethod
    def create(
        cls,
        backbone: BackboneConfig | None = None,
        method: Method = "seld",
        extractor: ExtractorConfig | None = None,
        attenuation: AttenuationConfig | None = None,
        attenuation_input: AttenuationInput = "representations",
        seed: int = 0,
    ) -> SeldModel:
        """randomly initialized model"""

        backbone = backbone or BackboneConfig()
        extractor = extractor or ExtractorConfig()
        attenuation = attenuation or AttenuationConfig()

        theta, bn_state = init_backbone(backbone, seed=seed)
        model = cls(
            backbone=backbone, theta=theta, bn_state=bn_state, method="seld",
            extractor=extractor, attenuation=attenuation, attenuation_input=attenuation_input,
        )

        return model.with_method(method, seed=seed)

    def with_method(self, method: Method, attenuation_input: AttenuationInput | None = None, seed: int = 0) -> SeldModel:
        """same backbone under another method, adding Ω and Φ when needed"""

        mode = attenuation_input or self.attenuation_input
        if method != "env_adaptive":
            return replace(self, method=method, attenuation_input=mode, omega=None, phi=None)

        channels = layer_channels(self.backbone)
        omega = self.omega if self.omega is not None and mode == self.attenuation_input else None
        if omega is None:
            omega = init_extractor(channels, self.extractor, seed=seed + 1)

        phi = init_attenuation(
            mode, self.p, self.attenuation,
            in_dim=input_dim(mode, self.p, output_dim(self.extractor, channels)),
            seed=seed + 2,
        )

        return replace(self, method=method, attenuation_input=mode, omega=omega, phi=phi)

    def with_params(self, **changes) -> SeldModel:
        """copy with replaced parameters or statistics"""
        return replace(self, **changes)

    def forward(
        self,
        x: torch.Tensor,
        params: ParamSet | None = None,
        bn_state: BnState | None = None,
        training: bool = False,
    ) -> BackboneOutput:
        """backbone output at T' frames"""

        return backbone_forward(
            self.theta if params is None else params, x,
            self.bn_state if bn_state is None else bn_state,
            self.backbone, training=training,
        )

    def predict(self, x: torch.Tensor, params: ParamSet | None = None, training: bool = False) -> torch.Tensor:
        """ACCDOA at the label rate, shape (B, T_label, M, 3)"""
        return resample_frames(self.forward(x, params, training=training).accdoa, self.backbone.n_label_frames)

    def loss(
        self,
        x: torch.Tensor,
        y: torch.Tensor,
        params: ParamSet | None = None,
        bn_state: BnState | None = None,
        training: bool = False,
    ) -> tuple[torch.Tensor, BnState]:
        """ACCDOA loss at the label rate and the updated statistics"""

        output = self.forward(x, params, bn_state, training=training)
        pred = resample_frames(output.accdoa, self.backbone.n_label_frames)

        return accdoa_loss(pred, y), output.bn_state

    def representation(
        self,
        x: torch.Tensor,
        params: ParamSet | None = None,
        training: bool = False,
        env_id: str = "",
    ) -> EnvRepresentation:
        """environment representation of a support batch, Θ held constant"""

        if self.omega is None:
            raise AttenuationModeError(f"method '{self.method}' has no environment extractor")

        with torch.no_grad():
            maps = self.forward(x, params, training=training).layer_maps

        return extract_env_representation(self.omega, maps, self.extractor, env_id=env_id)

    def attenuation_input_vector(
        self,
        x: torch.Tensor,
        y: torch.Tensor,
        params: ParamSet | None = None,
        training: bool = False,
        env_id: str = "",
    ) -> torch.Tensor | None:
        """input of the attenuation network for the support batch"""

        if self.attenuation_input == "representations":
            return self.representation(x, params, training=training, env_id=env_id).vector

        if self.attenuation_input == "gradients":
            theta = (self.theta if params is None else params).leaves()
            loss, _ = self.loss(x, y, theta, training=training)
            grads = torch.autograd.grad(loss, list(theta.values()))
            return gradient_summary(dict(zip(theta, grads)), theta.layer_index, theta.p)

        return None

    def attenuate(
        self,
        x: torch.Tensor,
        y: torch.Tensor,
        bypass: bool = False,
        training: bool = False,
        env_id: str = "",
    ) -> tuple[torch.Tensor, ParamSet]:
        """λ and λ ⊙ Θ for the support batch, λ ≡ 1 for other methods or bypass"""

        if bypass or not self.adaptive:
            return attenuate(None, None, self.theta, bypass=True)

        input_vec = self.attenuation_input_vector(x, y, training=training, env_id=env_id)
        return attenuate(self.phi, input_vec, self.theta.detach(), mode=self.attenuation_input)

    def save(self, path: str | os.PathLike) -> None:
        """write checkpoint with config echo"""

        sections = {"backbone": dict(self.theta), "bn": dict(self.bn_state)}
        layer_index = {"backbone": self.theta.layer_index}

        if self.omega is not None:
            sections["extractor"] = dict(self.omega)
            layer_index["extractor"] = self.omega.layer_index

        if self.phi is not None:
            sections["attenuation"] = dict(self.phi)
            layer_index["attenuation"] = self.phi.layer_index

        metadata = {
            "kind": CHECKPOINT_KIND,
            "method": self.method,
            "attenuation_input": self.attenuation_input,
            "backbone": to_plain(self.backbone),
            "extractor": to_plain(self.extractor),
            "attenuation": to_plain(self.attenuation),
            "layer_index": layer_index,
        }

        write_checkpoint(path, sections, metadata)
        logger.debug("Saved %s model to '%s'", self.method, path)

    @classmethod
    def load(cls, path: str | os.PathLike) -> SeldModel:
        """read checkpoint written by save"""

        sections, metadata = read_checkpoint(path)
        if metadata.get("kind") != CHECKPOINT_KIND:
            raise CheckpointFormatError(f"'{path}' does not hold a model checkpoint")

        layer_index = metadata.get("layer_index", {})

        def params(section: str) -> ParamSet | None:
            if section not in sections:
                return None
            return ParamSet(sections[section], layer_index.get(section, {}))

        return cls(
            backbone=from_mapping(BackboneConfig, metadata["backbone"], "backbone"),
            theta=params("backbone"),
            bn_state=sections.get("bn", {}),
            method=metadata["method"],
            extractor=from_mapping(ExtractorConfig, metadata["extractor"], "extractor"),
            attenuation=from_mapping(AttenuationConfig, metadata["attenuation"], "attenuation"),
            attenuation_input=metadata["attenuation_input"],
            omega=params("extractor"),
            phi=params("attenuation"),
        )
