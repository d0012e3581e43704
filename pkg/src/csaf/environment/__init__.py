"""Procedural experiment environments: paths, collectibles, terrain, music."""

from .music import MusicTimeline, playlist_schedule
from .paths import CollectibleSet, PathSpec, PathTable, build_path, place_collectibles, pose_at
from .terrain import Heightmap, TerrainSpec, generate_terrain, terrain_height
from .scenes import SceneDescription, builtin_scene_names, load_scene, load_scene_file

__all__ = [
    "CollectibleSet", "Heightmap", "MusicTimeline", "PathSpec", "PathTable",
    "SceneDescription", "TerrainSpec", "build_path", "builtin_scene_names",
    "generate_terrain", "load_scene", "load_scene_file", "place_collectibles",
    "playlist_schedule", "pose_at", "terrain_height",
]
