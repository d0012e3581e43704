"""Background-music timelines: an optional unlooped intro, then cycling loop tracks.

Pure metadata; no audio is decoded or played. The bundled scenes reference
two loopable tracks (an orchestral 120 bpm and a retro 126 bpm one).
"""

from __future__ import annotations

from dataclasses import dataclass, field


class MusicError(ValueError):
    pass


@dataclass
class MusicTimeline:
    intro: tuple | None = None         # (track_id, duration_s)
    loop_tracks: list = field(default_factory=list)  # (track_id, duration_s, bpm)
    horizon: float = 0.0               # seconds of schedule to emit

    def __post_init__(self):
        if self.horizon < 0:
            raise MusicError("horizon must be >= 0")
        if self.intro is not None and self.intro[1] <= 0:
            raise MusicError("intro duration must be > 0")
        for track in self.loop_tracks:
            if track[1] <= 0:
                raise MusicError(f"loop track {track[0]!r} duration must be > 0")


def playlist_schedule(timeline: MusicTimeline) -> list:
    """(start_s, track_id) events sorted by start; loops cycle until the horizon."""
    events = []
    t = 0.0
    if timeline.intro is not None:
        if t < timeline.horizon:
            events.append((t, timeline.intro[0]))
        t += timeline.intro[1]
    if timeline.loop_tracks:
        i = 0
        while t < timeline.horizon:
            track = timeline.loop_tracks[i % len(timeline.loop_tracks)]
            events.append((t, track[0]))
            t += track[1]
            i += 1
    return events


def music_from_json(doc: dict) -> MusicTimeline:
    intro = doc.get("intro")
    return MusicTimeline(
        intro=(intro["track"], float(intro["duration"])) if intro else None,
        loop_tracks=[(t["track"], float(t["duration"]), float(t.get("bpm", 0.0)))
                     for t in doc.get("loop_tracks", [])],
        horizon=float(doc.get("horizon", 0.0)),
    )
