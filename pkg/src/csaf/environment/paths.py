"""Experiment paths: centripetal Catmull-Rom curves with arc-length lookup.

The curve passes through every authored control point. `build_path` samples
it into an arc-length table; `pose_at` maps arc length back to the exact
spline (the table only stores the s -> parameter correspondence, so queried
positions always lie on the curve itself).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import geom

CR_ALPHA = 0.5  # centripetal knot exponent


class PathError(ValueError):
    pass


@dataclass
class PathSpec:
    control_points: list  # ordered 3-vectors, meters
    closed: bool = False
    sample_count: int = 1024

    def __post_init__(self):
        pts = [np.asarray(p, dtype=float) for p in self.control_points]
        if len(pts) < 2:
            raise PathError("path needs at least 2 control points")
        pairs = zip(pts, pts[1:] + ([pts[0]] if self.closed else []))
        for a, b in pairs:
            if np.allclose(a, b):
                raise PathError("consecutive duplicate control points are not allowed")
        if self.sample_count < 2:
            raise PathError("sample_count must be >= 2")
        self.control_points = pts


@dataclass
class PathTable:
    """Arc-length parameterization: strictly increasing s from 0 to total_length."""

    spec: PathSpec
    total_length: float
    samples: list  # (s, position, unit tangent) tuples
    _s: np.ndarray = field(repr=False, default=None)
    _u: np.ndarray = field(repr=False, default=None)


def _segment_controls(pts: list, closed: bool) -> list:
    """Per-segment (P0..P3) control quadruples, with reflected phantom endpoints."""
    n = len(pts)
    segs = []
    if closed:
        for i in range(n):
            segs.append((pts[(i - 1) % n], pts[i], pts[(i + 1) % n], pts[(i + 2) % n]))
    else:
        first = 2.0 * pts[0] - pts[1]
        last = 2.0 * pts[-1] - pts[-2]
        padded = [first] + pts + [last]
        for i in range(n - 1):
            segs.append((padded[i], padded[i + 1], padded[i + 2], padded[i + 3]))
    return segs


def _knots(p0, p1, p2, p3):
    t0 = 0.0
    t1 = t0 + float(np.linalg.norm(p1 - p0)) ** CR_ALPHA
    t2 = t1 + float(np.linalg.norm(p2 - p1)) ** CR_ALPHA
    t3 = t2 + float(np.linalg.norm(p3 - p2)) ** CR_ALPHA
    return t0, t1, t2, t3


def _eval_segment(controls, frac: np.ndarray):
    """Evaluate one segment at fractional parameters in [0, 1]; returns (pos, dpos/dt)."""
    p0, p1, p2, p3 = controls
    t0, t1, t2, t3 = _knots(p0, p1, p2, p3)
    t = (t1 + frac * (t2 - t1))[:, None]

    def lerp_pair(ta, tb, pa, pb):
        w = (t - ta) / (tb - ta)
        return (1.0 - w) * pa + w * pb, (pb - pa) / (tb - ta)

    a1, da1 = lerp_pair(t0, t1, p0, p1)
    a2, da2 = lerp_pair(t1, t2, p1, p2)
    a3, da3 = lerp_pair(t2, t3, p2, p3)

    def blend(ta, tb, pa, pb, dpa, dpb):
        w = (t - ta) / (tb - ta)
        val = (1.0 - w) * pa + w * pb
        dval = (pb - pa) / (tb - ta) + (1.0 - w) * dpa + w * dpb
        return val, dval

    b1, db1 = blend(t0, t2, a1, a2, da1, da2)
    b2, db2 = blend(t1, t3, a2, a3, da2, da3)
    c, dc = blend(t1, t2, b1, b2, db1, db2)
    return c, dc


def eval_spline(spec: PathSpec, u: np.ndarray):
    """Evaluate at global parameters u in [0, segment_count]; returns (pos, tangent)."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    segs = _segment_controls(spec.control_points, spec.closed)
    nseg = len(segs)
    idx = np.clip(np.floor(u).astype(int), 0, nseg - 1)
    frac = u - idx
    pos = np.empty((len(u), 3))
    dpos = np.empty((len(u), 3))
    for j in range(nseg):
        mask = idx == j
        if not mask.any():
            continue
        p, d = _eval_segment(segs[j], frac[mask])
        pos[mask] = p
        dpos[mask] = d
    return pos, dpos


def build_path(spec: PathSpec) -> PathTable:
    nseg = len(spec.control_points) - (0 if spec.closed else 1)
    u = np.linspace(0.0, nseg, spec.sample_count + 1)
    pos, dpos = eval_spline(spec, u)
    chords = np.linalg.norm(np.diff(pos, axis=0), axis=1)
    s = np.concatenate([[0.0], np.cumsum(chords)])
    total = float(s[-1])
    if total <= 0.0:
        raise PathError("degenerate path of zero length")
    tangents = dpos / np.linalg.norm(dpos, axis=1)[:, None]
    samples = [(float(s[i]), pos[i].copy(), tangents[i].copy()) for i in range(len(u))]
    return PathTable(spec=spec, total_length=total, samples=samples, _s=s, _u=u)


def pose_at(table: PathTable, s: float):
    """Position and unit tangent at arc length s; closed paths wrap."""
    length = table.total_length
    if table.spec.closed:
        s = s % length
    elif s < -1e-9 or s > length + 1e-9:
        raise PathError(f"arc length {s} outside [0, {length}]")
    s = min(max(s, 0.0), length)
    i = int(np.searchsorted(table._s, s, side="right")) - 1
    i = min(max(i, 0), len(table._s) - 2)
    ds = table._s[i + 1] - table._s[i]
    w = 0.0 if ds == 0.0 else (s - table._s[i]) / ds
    u = table._u[i] + w * (table._u[i + 1] - table._u[i])
    pos, dpos = eval_spline(table.spec, np.array([u]))
    tangent = dpos[0] / np.linalg.norm(dpos[0])
    return pos[0], tangent


@dataclass
class CollectibleSet:
    positions: list  # 3-vectors
    stations: list   # arc lengths of the unjittered stations
    seed: int


def place_collectibles(table: PathTable, n: int, seed: int, jitter: float) -> CollectibleSet:
    """n collectibles at centered arc-length stations, laterally jittered in xz."""
    if n < 0:
        raise PathError("collectible count must be >= 0")
    if jitter < 0:
        raise PathError("jitter must be >= 0")
    rng = np.random.default_rng(seed)
    positions = []
    stations = []
    length = table.total_length
    for i in range(n):
        s_i = (i + 0.5) * length / n
        pos, tangent = pose_at(table, s_i)
        lateral = np.array([tangent[2], 0.0, -tangent[0]])
        norm = np.linalg.norm(lateral)
        if norm > 0:
            lateral /= norm
        offset = rng.uniform(-jitter, jitter) if jitter > 0 else 0.0
        positions.append(pos + offset * lateral)
        stations.append(s_i)
    return CollectibleSet(positions=positions, stations=stations, seed=seed)


def path_from_json(doc: dict) -> PathSpec:
    return PathSpec(
        control_points=[geom.vec3(*p) for p in doc["control_points"]],
        closed=bool(doc.get("closed", False)),
        sample_count=int(doc.get("sample_count", 1024)),
    )
