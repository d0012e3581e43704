"""Built-in feature types for the four default categories.

Vision effects extend the camera; locomotion providers extend the
locomotion handler; the collectible placer extends the path creator.
`default_registry()` builds a fresh registry with the whole catalog.
"""

from __future__ import annotations

from .registry import FieldSpec, Registry, TypeTag

F = FieldSpec


def default_registry() -> Registry:
    reg = Registry()

    # Experiment ------------------------------------------------------------
    reg.register_type(TypeTag("GameHandler", "Experiment", (
        F("coin_count", "integer", 10),
        F("pickup_radius", "real", 0.5, unit="m"),
        F("duration", "real", 1200.0, unit="s"),
        F("fms_interval", "real", 60.0, unit="s"),
        F("fms_scale_min", "integer", 0),
        F("fms_scale_max", "integer", 20),
    )))
    reg.register_type(TypeTag("DataSaver", "Experiment", (
        F("log_rate", "real", 50.0, unit="Hz"),
        F("output_dir", "string", ""),
    )))
    reg.register_type(TypeTag("SensitivityTest", "Experiment", (
        F("reps_per_axis", "integer", 1),
        F("turn_duration", "real", 10.0, unit="s"),
        F("pause_after_turn", "real", 2.0, unit="s"),
        F("pause_between_triples", "real", 5.0, unit="s"),
        F("indicator_duration", "real", 1.0, unit="s"),
        F("include_translation", "boolean", False),
        F("translation_distance", "real", 4.0, unit="m"),
        F("translation_duration", "real", 4.0, unit="s"),
        F("alternate_direction", "boolean", True),
    )))
    reg.register_type(TypeTag("RodFrameTest", "Experiment", (
        F("frame_tilt", "real", 18.0, unit="deg"),
        F("rod_tilt", "real", 27.0, unit="deg"),
        F("repetitions_per_permutation", "integer", 4),
        F("rod_step", "real", 1.0, unit="deg/input"),
    )))

    # Environment -----------------------------------------------------------
    reg.register_type(TypeTag("PathCreator", "Environment", (
        F("closed", "boolean", False),
        F("sample_count", "integer", 1024),
    )))
    reg.register_type(TypeTag("CollectiblePlacer", "Environment", (
        F("count", "integer", 10),
        F("jitter", "real", 1.0, unit="m"),
        F("seed", "integer", 0),
    ), extended_tag="PathCreator"))
    reg.register_type(TypeTag("TerrainModifier", "Environment", (
        F("seed", "integer", 0),
        F("width", "integer", 64),
        F("depth", "integer", 64),
        F("cell_size", "real", 1.0, unit="m"),
        F("amplitude", "real", 5.0, unit="m"),
        F("frequency", "real", 0.05, unit="1/m"),
        F("octaves", "integer", 4),
        F("persistence", "real", 0.5),
    )))
    reg.register_type(TypeTag("BackgroundMusic", "Environment", (
        F("volume", "real", 1.0),
        F("play_intro", "boolean", True),
    )))

    # Vision ----------------------------------------------------------------
    reg.register_type(TypeTag("Camera", "Vision", (
        F("fov", "real", 110.0, unit="deg"),
    )))
    reg.register_type(TypeTag("RestFrames", "Vision", (
        F("model", "enum", "nose", choices=("nose", "hat")),
        F("offset_position", "vec3", [0.0, -0.06, 0.12], unit="m"),
        F("offset_rotation", "quat", [1.0, 0.0, 0.0, 0.0]),
    ), extended_tag="Camera"))
    reg.register_type(TypeTag("FovRestrictor", "Vision", (
        F("fov_max", "real", 110.0, unit="deg"),
        F("fov_min", "real", 60.0, unit="deg"),
        F("gain", "real", 10.0, unit="deg/(m/s)"),
        F("rate_limit", "real", 0.2, unit="deg/s"),
        F("dynamic", "boolean", True),
        F("include_angular", "boolean", False),
        F("angular_gain", "real", 0.0, unit="deg/(deg/s)"),
    ), extended_tag="Camera"))
    reg.register_type(TypeTag("VisionSnapper", "Vision", (
        F("omega_threshold", "real", 30.0, unit="deg/s"),
        F("fade_out", "real", 0.1, unit="s"),
        F("hold", "real", 0.2, unit="s"),
        F("fade_in", "real", 0.3, unit="s"),
    ), extended_tag="Camera"))
    reg.register_type(TypeTag("DepthOfField", "Vision", (
        F("focus_distance", "real", 2.0, unit="m"),
        F("max_blur", "real", 1.0),
        F("dynamic", "boolean", True),
    ), extended_tag="Camera"))
    reg.register_type(TypeTag("ColorManipulation", "Vision", (
        F("hue_r", "real", 0.0, unit="deg"),
        F("hue_g", "real", 0.0, unit="deg"),
        F("hue_b", "real", 0.0, unit="deg"),
        F("hue_w", "real", 0.0, unit="deg"),
        F("saturation_delta", "real", 0.0),
        F("contrast_delta", "real", 0.0),
        F("k_lin", "real", 0.0, unit="1/(m/s^2)"),
        F("k_rot", "real", 0.0, unit="1/(deg/s^2)"),
    ), extended_tag="Camera"))
    # Resolution downscale is computed but advisory-only: it cannot drive a
    # headset, whose screen size is fixed by the device.
    reg.register_type(TypeTag("Pixelize", "Vision", (
        F("screen_height", "integer", 270, unit="px"),
    ), extended_tag="Camera"))

    # Locomotion ------------------------------------------------------------
    reg.register_type(TypeTag("LocomotionHandler", "Locomotion", (
        F("fixed_dt", "real", 1.0 / 90.0, unit="s"),
    )))
    reg.register_type(TypeTag("ContinuousMove", "Locomotion", (
        F("speed", "real", 2.0, unit="m/s"),
        F("head_relative", "boolean", True),
    ), extended_tag="LocomotionHandler"))
    reg.register_type(TypeTag("Teleport", "Locomotion", (
        F("threshold", "real", 0.7),
    ), extended_tag="LocomotionHandler"))
    reg.register_type(TypeTag("GrabMove", "Locomotion", (),
                              extended_tag="LocomotionHandler"))
    reg.register_type(TypeTag("ContinuousTurn", "Locomotion", (
        F("turn_rate", "real", 60.0, unit="deg/s"),
    ), extended_tag="LocomotionHandler"))
    reg.register_type(TypeTag("SnapTurn", "Locomotion", (
        F("snap_angle", "real", 30.0, unit="deg"),
        F("threshold", "real", 0.7),
    ), extended_tag="LocomotionHandler"))
    reg.register_type(TypeTag("PathFollow", "Locomotion", (
        F("follow_speed", "real", 5.0, unit="m/s"),
        F("path_ref", "preset_ref", "scene"),
    ), extended_tag="LocomotionHandler"))

    return reg
