"""Scene descriptions: bundled content, skeleton instantiation, feature setup."""

import json

import pytest

from csaf.environment.scenes import (
    SKELETON_ROLES,
    SceneError,
    builtin_scene_names,
    load_scene,
    scene_from_json,
)
from csaf.features import default_registry

EXPECTED_SCENES = {"city", "forest_complex", "forest_simple", "rural",
                   "space_sensitivity"}


def test_builtin_scene_names():
    assert set(builtin_scene_names()) == EXPECTED_SCENES


@pytest.mark.parametrize("name", sorted(EXPECTED_SCENES))
def test_builtin_scenes_instantiate(name):
    desc = load_scene(name)
    scene = desc.instantiate(default_registry())
    assert set(scene.roles) == set(SKELETON_ROLES)
    assert scene.roles["camera"].has("Camera")
    assert scene.roles["locomotion"].has("LocomotionHandler")
    assert scene.roles["experiment"].has("GameHandler")
    assert scene.roles["experiment"].has("DataSaver")
    env = scene.roles["environment"]
    assert env.has("PathCreator") and env.has("TerrainModifier")


def test_demo_scenes_have_terrain_path_music():
    for name in ("forest_simple", "forest_complex", "city", "rural"):
        desc = load_scene(name)
        assert desc.terrain is not None
        assert desc.path is not None
        assert desc.music is not None
        assert desc.collectibles and desc.collectibles["count"] > 0


def test_sensitivity_scene_is_minimal():
    desc = load_scene("space_sensitivity")
    scene = desc.instantiate(default_registry())
    assert scene.roles["experiment"].has("SensitivityTest")


def test_load_scene_from_path(tmp_path):
    doc = {"name": "custom", "features": [
        {"role": "camera", "type": "FovRestrictor", "values": {"fov_min": 70.0}}]}
    p = tmp_path / "custom.scene.json"
    p.write_text(json.dumps(doc), encoding="utf-8")
    desc = load_scene(p)
    scene = desc.instantiate(default_registry())
    cam = scene.roles["camera"]
    assert cam.attachment("FovRestrictor").values["fov_min"] == 70.0


def test_feature_enabled_flag_respected():
    desc = scene_from_json({"name": "x", "features": [
        {"role": "camera", "type": "VisionSnapper", "enabled": False}]})
    scene = desc.instantiate(default_registry())
    att = scene.roles["camera"].attachment("VisionSnapper")
    assert att.enabled is False


def test_unknown_role_rejected():
    desc = scene_from_json({"name": "x", "features": [
        {"role": "spaceship", "type": "Camera"}]})
    with pytest.raises(SceneError):
        desc.instantiate(default_registry())


def test_unknown_scene_name_rejected():
    with pytest.raises(SceneError):
        load_scene("not_a_scene")
