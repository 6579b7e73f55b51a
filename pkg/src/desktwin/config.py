"""Configuration bundle for the pipeline and the command-line tools.

Config files are JSON or YAML mappings whose top-level sections override the
defaults of one settings object each::

    icem:     {population: 300, iterations: 3}
    reward:   {distance: 0.0}
    noise:    {depth_sigma: 0.002, dropout: 0.02}
    camera:   {radius: 1.0}
    affordance: {n_dirs: 16}
    twin:     {theta_min_deg: 3.0}
    bench:    {episodes: 30, axis_jitter_deg: 2.0}
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping

from .affordance.oracle import AffordanceConfig
from .model.scene import Scene, SceneSensing
from .percept.cloud import NoiseConfig
from .planner.config import ICEMConfig, RewardWeights
from .shared.config import apply_overrides, read_document
from .shared.error_handling import ConfigurationError, ValidationError
from .twin.builder import TwinConfig

logger = logging.getLogger(__name__)

SECTIONS = ("icem", "reward", "noise", "camera", "affordance", "twin", "bench")


@dataclass(frozen=True)
class BenchConfig:
    """Episode protocol.

    Attributes:
        episodes: Episodes per category.
        seed: Master seed; episode ``i`` uses ``seed + i``.
        categories: Categories run by a full benchmark.
        prismatic_delta: Range of ``|target displacement|`` for prismatic joints (m).
        revolute_delta: Range of ``|target displacement|`` for revolute joints (rad).
        axis_jitter_deg: Tilt applied to the ground-truth axis; 0 disables it.
        push_attempts: Interactive pushes tried before giving up on motion.
        oracle_twin: Plan on the ground-truth object instead of a reconstruction.
        interactive: Observe a push before reconstructing; off duplicates the
            post-push cloud and builds the static fallback twin.
        workers: Episodes run concurrently.
    """

    episodes: int = 30
    seed: int = 1
    categories: tuple[str, ...] = ("drawer", "laptop", "faucet")
    prismatic_delta: tuple[float, float] = (0.05, 0.12)
    revolute_delta: tuple[float, float] = (0.3, 0.6)
    axis_jitter_deg: float = 0.0
    push_attempts: int = 3
    oracle_twin: bool = False
    interactive: bool = True
    workers: int = 1

    def __post_init__(self) -> None:
        if self.episodes < 0:
            raise ValidationError("episodes must be >= 0", field_path="bench.episodes")
        for name in ("prismatic_delta", "revolute_delta"):
            lo, hi = getattr(self, name)
            if not 0.0 < lo <= hi:
                raise ValidationError(
                    f"{name} must satisfy 0 < lo <= hi", field_path=f"bench.{name}"
                )
            object.__setattr__(self, name, (float(lo), float(hi)))
        if self.axis_jitter_deg < 0.0:
            raise ValidationError(
                "axis_jitter_deg must be >= 0", field_path="bench.axis_jitter_deg"
            )
        if self.push_attempts < 1:
            raise ValidationError(
                "push_attempts must be positive", field_path="bench.push_attempts"
            )
        if self.workers < 1:
            raise ValidationError("workers must be positive", field_path="bench.workers")
        object.__setattr__(self, "categories", tuple(str(item) for item in self.categories))


@dataclass(frozen=True)
class CameraConfig:
    """Camera sampling overrides; ``None`` keeps the scene's own setting."""

    azimuth_range: tuple[float, float] | None = None
    altitude_range: tuple[float, float] | None = None
    radius: float | None = None
    image_size: tuple[int, int] | None = None
    vertical_fov: float | None = None
    crop_margin: float | None = None

    def __post_init__(self) -> None:
        for name in ("azimuth_range", "altitude_range", "image_size"):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, tuple(value))
        # SceneSensing owns the range checks.
        self.sensing(SceneSensing())

    def sensing(self, base: SceneSensing) -> SceneSensing:
        updates = {key: value for key, value in vars(self).items() if value is not None}
        return replace(base, **updates) if updates else base

    def apply(self, scene: Scene, noise: NoiseConfig | None = None) -> Scene:
        sensing = self.sensing(scene.sensing)
        if noise is not None:
            sensing = replace(sensing, depth_sigma=noise.depth_sigma, dropout=noise.dropout)
        return replace(scene, sensing=sensing)


@dataclass(frozen=True)
class ConfigBundle:
    icem: ICEMConfig = field(default_factory=ICEMConfig.desk)
    reward: RewardWeights = field(default_factory=RewardWeights)
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    camera: CameraConfig = field(default_factory=CameraConfig)
    affordance: AffordanceConfig = field(default_factory=AffordanceConfig)
    twin: TwinConfig = field(default_factory=TwinConfig)
    bench: BenchConfig = field(default_factory=BenchConfig)

    @classmethod
    def desk(cls) -> "ConfigBundle":
        """Benchmark defaults: N = 100 with two optimizer iterations."""

        return cls()

    @classmethod
    def full_budget(cls) -> "ConfigBundle":
        """Full optimizer budget: N = 300 with three iterations."""

        return cls(icem=ICEMConfig.full())

    def with_overrides(self, document: Mapping[str, Any]) -> "ConfigBundle":
        unknown = sorted(set(document) - set(SECTIONS))
        if unknown:
            raise ConfigurationError(
                f"Unknown configuration section '{unknown[0]}'", context={"key": unknown[0]}
            )
        updates = {
            section: apply_overrides(getattr(self, section), document[section], section=section)
            for section in SECTIONS
            if section in document
        }
        return replace(self, **updates)

    def twin_config(self) -> TwinConfig:
        """Twin settings with the segmentation threshold tied to the sensor noise."""

        return replace(self.twin, depth_sigma=self.noise.depth_sigma)


def load_config(path: Path | None, *, full_budget: bool = False) -> ConfigBundle:
    """Defaults (desk or full budget) overridden by the file at ``path``."""

    bundle = ConfigBundle.full_budget() if full_budget else ConfigBundle.desk()
    if path is None:
        return bundle
    document = read_document(Path(path), error_cls=ConfigurationError)
    bundle = bundle.with_overrides(document)
    logger.info("Loaded configuration from %s", path)
    return bundle
