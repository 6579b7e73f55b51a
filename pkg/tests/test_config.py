from __future__ import annotations

import json
from pathlib import Path

import pytest

from desktwin.bench.generators import drawer_scene
from desktwin.config import BenchConfig, CameraConfig, ConfigBundle, load_config
from desktwin.percept.cloud import NoiseConfig
from desktwin.shared.error_handling import ConfigurationError, ValidationError


def test_desk_and_full_budgets() -> None:
    assert ConfigBundle.desk().icem.population == 100
    assert ConfigBundle.desk().icem.iterations == 2
    assert ConfigBundle.full_budget().icem.population == 300
    assert ConfigBundle.full_budget().icem.iterations == 3
    assert ConfigBundle.desk().reward.target == 50.0


def test_overrides_replace_single_fields() -> None:
    bundle = ConfigBundle().with_overrides(
        {
            "icem": {"population": 50, "elites": 5},
            "reward": {"distance": 0},
            "bench": {"prismatic_delta": [0.02, 0.04], "episodes": 3},
        }
    )

    assert bundle.icem.population == 50
    assert bundle.icem.horizon == 10
    assert bundle.reward.distance == 0.0
    assert bundle.bench.prismatic_delta == (0.02, 0.04)
    assert bundle.bench.episodes == 3


@pytest.mark.parametrize(
    "document",
    [
        {"planner": {}},
        {"icem": {"pop": 10}},
        {"icem": {"population": 10, "elites": 50}},
        {"bench": "fast"},
    ],
)
def test_bad_overrides_are_configuration_errors(document: dict) -> None:
    with pytest.raises(ConfigurationError):
        ConfigBundle().with_overrides(document)


def test_unknown_key_is_named() -> None:
    with pytest.raises(ConfigurationError) as excinfo:
        ConfigBundle().with_overrides({"twin": {"theta": 2.0}})

    assert excinfo.value.context["key"] == "twin.theta"


def test_load_config_reads_yaml_over_the_chosen_budget(tmp_path: Path) -> None:
    path = tmp_path / "config.yaml"
    path.write_text("noise:\n  depth_sigma: 0.004\ntwin:\n  theta_min_deg: 5\n", encoding="utf-8")

    bundle = load_config(path, full_budget=True)

    assert bundle.icem.population == 300
    assert bundle.noise.depth_sigma == pytest.approx(0.004)
    assert bundle.twin.theta_min_deg == pytest.approx(5.0)
    assert bundle.twin_config().effective_tau == pytest.approx(0.008)
    assert load_config(None) == ConfigBundle.desk()


def test_load_config_missing_file(tmp_path: Path) -> None:
    with pytest.raises(ConfigurationError, match="File not found"):
        load_config(tmp_path / "absent.json")


def test_camera_config_overrides_scene_sensing() -> None:
    scene = drawer_scene(0)

    configured = CameraConfig(radius=0.8, altitude_range=[20.0, 30.0]).apply(
        scene, NoiseConfig(depth_sigma=0.001, dropout=0.0)
    )

    assert configured.sensing.radius == pytest.approx(0.8)
    assert configured.sensing.altitude_range == (20.0, 30.0)
    assert configured.sensing.depth_sigma == pytest.approx(0.001)
    assert configured.sensing.dropout == 0.0
    assert configured.sensing.azimuth_range == scene.sensing.azimuth_range
    assert CameraConfig().apply(scene).sensing == scene.sensing


def test_camera_config_validates_through_sensing() -> None:
    with pytest.raises(ValidationError) as excinfo:
        CameraConfig(altitude_range=(0.0, 30.0))

    assert excinfo.value.field_path == "sensing.altitude_range"


def test_bench_config_validation() -> None:
    with pytest.raises(ValidationError) as excinfo:
        BenchConfig(revolute_delta=(0.5, 0.2))

    assert excinfo.value.field_path == "bench.revolute_delta"
    assert BenchConfig(categories=["drawer"]).categories == ("drawer",)


def test_config_file_round_trips_through_json(tmp_path: Path) -> None:
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"camera": {"radius": 1.1}}), encoding="utf-8")

    assert load_config(path).camera.radius == pytest.approx(1.1)
