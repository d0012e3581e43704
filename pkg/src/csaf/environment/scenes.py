"""Scene-description files: terrain, path, collectibles, music, feature setup.

Scenes are JSON content, not code. The bundled set covers the four demo
themes (forest simple/complex, city, rural) plus the space-theme scene used
by the passive-motion susceptibility test. A scene may also list feature
attachments to place on the standard entity skeleton (camera, locomotion,
experiment, environment).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from ..registry import Registry, Scene
from .music import MusicTimeline, music_from_json
from .paths import PathSpec, path_from_json
from .terrain import TerrainSpec, terrain_from_json

SKELETON_ROLES = ("camera", "locomotion", "experiment", "environment")

_ROLE_NAMES = {
    "camera": "Main Camera",
    "locomotion": "XR Rig",
    "experiment": "Experiment",
    "environment": "Environment",
}

_ROLE_BASE_TYPES = {
    "camera": ("Camera",),
    "locomotion": ("LocomotionHandler",),
    "experiment": ("GameHandler", "DataSaver"),
    "environment": ("PathCreator", "TerrainModifier", "BackgroundMusic"),
}


class SceneError(ValueError):
    pass


@dataclass
class SceneDescription:
    name: str
    theme: str = ""
    terrain: TerrainSpec | None = None
    path: PathSpec | None = None
    collectibles: dict | None = None   # {"count", "jitter", "seed"}
    music: MusicTimeline | None = None
    objects: list = field(default_factory=list)
    features: list = field(default_factory=list)  # [{"role", "type", "enabled", "values"}]

    def instantiate(self, registry: Registry) -> Scene:
        """Build the entity skeleton and apply this scene's feature attachments."""
        scene = Scene(name=self.name)
        roles = {}
        for role in SKELETON_ROLES:
            ent = scene.new_entity(_ROLE_NAMES[role])
            roles[role] = ent
            for type_id in _ROLE_BASE_TYPES[role]:
                registry.attach(ent, type_id)
        for feat in self.features:
            role = feat.get("role", "camera")
            if role not in roles:
                raise SceneError(f"unknown skeleton role {role!r}")
            ent = roles[role]
            type_id = feat["type"]
            if not ent.has(type_id):
                registry.attach(ent, type_id)
            att = ent.attachment(type_id)
            att.enabled = bool(feat.get("enabled", True))
            if feat.get("values"):
                doc = registry.create_preset(type_id, "scene-setup", feat["values"])
                registry.apply_preset(ent, doc)
        scene.roles = roles
        return scene


def scene_from_json(doc: dict) -> SceneDescription:
    return SceneDescription(
        name=doc["name"],
        theme=doc.get("theme", ""),
        terrain=terrain_from_json(doc["terrain"]) if doc.get("terrain") else None,
        path=path_from_json(doc["path"]) if doc.get("path") else None,
        collectibles=doc.get("collectibles"),
        music=music_from_json(doc["music"]) if doc.get("music") else None,
        objects=doc.get("objects", []),
        features=doc.get("features", []),
    )


def load_scene_file(path: str | Path) -> SceneDescription:
    with open(path, encoding="utf-8") as f:
        return scene_from_json(json.load(f))


def builtin_scene_names() -> list[str]:
    root = resources.files("csaf.data") / "scenes"
    return sorted(p.name.removesuffix(".scene.json") for p in root.iterdir()
                  if p.name.endswith(".scene.json"))


def load_scene(name_or_path: str | Path) -> SceneDescription:
    """Load a scene by bundled name or by file path."""
    p = Path(name_or_path)
    if p.suffix == ".json" and p.exists():
        return load_scene_file(p)
    candidate = resources.files("csaf.data") / "scenes" / f"{name_or_path}.scene.json"
    if candidate.is_file():
        return scene_from_json(json.loads(candidate.read_text(encoding="utf-8")))
    raise SceneError(f"no scene named or at {name_or_path!r}")
