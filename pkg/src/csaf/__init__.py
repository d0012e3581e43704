"""Headless, deterministic engine for cybersickness experiments.

Subsystems: a preset/extension registry, procedural environments (paths,
terrain, music, scenes), locomotion providers, vision comfort effects,
susceptibility test batteries, a fixed-timestep session runtime, a
standardized study report, and an HTTP/CLI gateway.
"""

__version__ = "0.1.0"
