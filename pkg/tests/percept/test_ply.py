from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from desktwin.percept.camera import CameraPose
from desktwin.percept.cloud import NoiseConfig, PointCloud, Provenance
from desktwin.percept.ply import read_ply, write_ply
from desktwin.shared.error_handling import PlyFormatError


def test_ply_keeps_frame_provenance_and_comments(tmp_path: Path) -> None:
    cloud = PointCloud(
        np.array([[0.1, 0.2, 0.3], [-1.0, 0.5, 1e-7]]),
        frame="object",
        provenance=Provenance(
            camera=CameraPose(azimuth=5.0, altitude=30.0, radius=1.1),
            noise=NoiseConfig(0.001, 0.0, seed=9),
            scene_id="drawer-001",
            joint_state=0.04,
        ),
        comments=("captured by bench",),
    )

    write_ply(cloud, tmp_path / "clouds" / "before.ply")
    restored = read_ply(tmp_path / "clouds" / "before.ply")

    assert np.array_equal(restored.points, cloud.points)
    assert restored.frame == "object"
    assert restored.comments == ("captured by bench",)
    assert restored.provenance.scene_id == "drawer-001"
    assert restored.provenance.noise.seed == 9
    assert restored.provenance.camera.altitude == pytest.approx(30.0)


def test_ply_accepts_extra_float_properties(tmp_path: Path) -> None:
    path = tmp_path / "extra.ply"
    path.write_text(
        "ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\nproperty float y\n"
        "property float z\nproperty float nx\nend_header\n0 0 0 1\n1 2 3 0\n",
        encoding="ascii",
    )

    cloud = read_ply(path)

    assert cloud.frame == "world"
    assert np.array_equal(cloud.points, [[0, 0, 0], [1, 2, 3]])


@pytest.mark.parametrize(
    "text",
    [
        "plx\nend_header\n",
        "ply\nformat binary_little_endian 1.0\nelement vertex 0\nend_header\n",
        "ply\nformat ascii 1.0\nelement vertex 2\nproperty double x\nproperty double y\n"
        "property double z\nend_header\n0 0 0\n",
        "ply\nformat ascii 1.0\nelement vertex 1\nproperty uchar x\nend_header\n1\n",
        "ply\nformat ascii 1.0\nelement vertex 1\nproperty double x\nproperty double y\n"
        "property double z\n",
    ],
)
def test_malformed_ply_is_rejected(tmp_path: Path, text: str) -> None:
    path = tmp_path / "bad.ply"
    path.write_text(text, encoding="ascii")

    with pytest.raises(PlyFormatError):
        read_ply(path)


def test_missing_file_is_a_ply_error(tmp_path: Path) -> None:
    with pytest.raises(PlyFormatError):
        read_ply(tmp_path / "absent.ply")


def test_vertex_count_must_be_a_non_negative_integer(tmp_path: Path) -> None:
    path = tmp_path / "count.ply"
    for count in ("two", "2.5", "-1"):
        path.write_text(
            f"ply\nformat ascii 1.0\nelement vertex {count}\nproperty double x\n"
            "property double y\nproperty double z\nend_header\n0 0 0\n",
            encoding="ascii",
        )

        with pytest.raises(PlyFormatError):
            read_ply(path)


@pytest.mark.parametrize(
    ("frame", "comments"),
    [
        ("world", ("caméra gauche",)),
        ("world", ("frame object",)),
        ("world", ("provenance {}",)),
        ("world", ("two\nlines",)),
        ("wörld", ()),
        ("object frame", ()),
    ],
)
def test_write_rejects_headers_that_would_not_read_back(
    tmp_path: Path, frame: str, comments: tuple[str, ...]
) -> None:
    cloud = PointCloud(np.zeros((1, 3)), frame=frame, comments=comments)

    with pytest.raises(PlyFormatError):
        write_ply(cloud, tmp_path / "bad.ply")

    assert not (tmp_path / "bad.ply").exists()


def test_reserved_words_inside_a_comment_are_kept(tmp_path: Path) -> None:
    cloud = PointCloud(np.ones((1, 3)), comments=("frameless", "see provenance below"))

    write_ply(cloud, tmp_path / "ok.ply")

    assert read_ply(tmp_path / "ok.ply").comments == cloud.comments


def test_random_clouds_survive_a_write_read_cycle(tmp_path: Path) -> None:
    rng = np.random.default_rng(20)
    frames = ("world", "object", "camera")

    for index in range(100):
        points = rng.normal(size=(int(rng.integers(1, 60)), 3)) * 10.0 ** rng.uniform(-6, 2)
        provenance = None
        if rng.random() < 0.5:
            provenance = Provenance(
                camera=CameraPose(
                    azimuth=float(rng.uniform(-60, 60)),
                    altitude=float(rng.uniform(15, 45)),
                    radius=float(rng.uniform(0.8, 1.5)),
                ),
                noise=NoiseConfig(float(rng.uniform(0, 0.01)), 0.0, seed=index),
                scene_id=f"scene-{index:03d}",
                joint_state=float(rng.uniform(-1, 1)),
            )
        cloud = PointCloud(
            points,
            frame=frames[index % len(frames)],
            provenance=provenance,
            comments=tuple(f"note {index} {k}" for k in range(int(rng.integers(0, 3)))),
        )
        path = tmp_path / f"cloud-{index:03d}.ply"

        write_ply(cloud, path)
        restored = read_ply(path)

        assert np.array_equal(restored.points, cloud.points)
        assert restored.frame == cloud.frame
        assert restored.comments == cloud.comments
        if provenance is None:
            assert restored.provenance is None
        else:
            assert restored.provenance.to_dict() == provenance.to_dict()
