"""Seeded gradient-noise terrain heightmaps.

Height at a node is a sum of noise octaves:

    h(x, z) = amplitude * sum_o persistence**o * noise(frequency * 2**o * (x, z))

`noise` is classic 2-D gradient noise over a seed-shuffled 256-entry
permutation table with 8 unit gradient directions, so |noise| <= sqrt(2)/2
and |h| <= amplitude * sum_o persistence**o always holds.

The inner kernel runs under numba when available; set CSAF_NO_NUMBA=1 (or
pass backend="numpy") to force the vectorized numpy fallback. Both paths
evaluate the same expression in the same order. `benchmarks/terrain_bench.py`
compares them.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

_S = 0.7071067811865476  # 1/sqrt(2)
# 8 unit gradients: axis and diagonal directions.
_GRAD_X = np.array([1.0, -1.0, 0.0, 0.0, _S, -_S, _S, -_S])
_GRAD_Z = np.array([0.0, 0.0, 1.0, -1.0, _S, _S, -_S, -_S])

_USE_NUMBA = os.environ.get("CSAF_NO_NUMBA", "") not in ("1", "true", "yes")
if _USE_NUMBA:
    try:
        from numba import njit
    except ImportError:
        _USE_NUMBA = False

if not _USE_NUMBA:
    def njit(*args, **kwargs):  # no-op decorator fallback
        if args and callable(args[0]):
            return args[0]
        return lambda f: f

NUMBA_AVAILABLE = _USE_NUMBA


class TerrainError(ValueError):
    pass


@dataclass
class TerrainSpec:
    seed: int
    width: int = 64          # cells along x
    depth: int = 64          # cells along z
    cell_size: float = 1.0   # m
    amplitude: float = 5.0   # m
    frequency: float = 0.05  # 1/m
    octaves: int = 4
    persistence: float = 0.5

    def __post_init__(self):
        if self.width < 2 or self.depth < 2:
            raise TerrainError("grid dims must be >= 2 cells")
        if self.amplitude < 0:
            raise TerrainError("amplitude must be >= 0")
        if self.octaves < 1:
            raise TerrainError("octaves must be >= 1")
        if not 0.0 < self.persistence <= 1.0:
            raise TerrainError("persistence must be in (0, 1]")
        if self.cell_size <= 0 or self.frequency <= 0:
            raise TerrainError("cell_size and frequency must be > 0")

    def octave_frequencies(self) -> np.ndarray:
        return self.frequency * 2.0 ** np.arange(self.octaves, dtype=np.float64)

    def octave_weights(self) -> np.ndarray:
        return self.amplitude * self.persistence ** np.arange(self.octaves, dtype=np.float64)

    def height_bound(self) -> float:
        return float(np.sum(self.persistence ** np.arange(self.octaves))) * self.amplitude


@dataclass
class Heightmap:
    heights: np.ndarray  # shape (depth+1, width+1), heights[iz, ix]
    cell_size: float

    @property
    def extent(self) -> tuple[float, float]:
        nz, nx = self.heights.shape
        return (nx - 1) * self.cell_size, (nz - 1) * self.cell_size

    def to_csv(self, path) -> None:
        # repr keeps full float64 precision so the CSV round-trips exactly.
        with open(path, "w", encoding="utf-8") as fh:
            for row in self.heights:
                fh.write(",".join(repr(float(v)) for v in row))
                fh.write("\n")


def _perm_table(seed: int) -> np.ndarray:
    perm = np.random.default_rng(seed).permutation(256)
    return np.concatenate([perm, perm]).astype(np.int64)


@njit(cache=True)
def _noise_grid_jit(out, perm, gx, gz, xs, zs, freqs, weights):
    nz = zs.shape[0]
    nx = xs.shape[0]
    for iz in range(nz):
        for ix in range(nx):
            h = 0.0
            for o in range(freqs.shape[0]):
                x = xs[ix] * freqs[o]
                z = zs[iz] * freqs[o]
                xi = int(np.floor(x))
                zi = int(np.floor(z))
                fx = x - xi
                fz = z - zi
                xi = xi & 255
                zi = zi & 255
                u = fx * fx * fx * (fx * (fx * 6.0 - 15.0) + 10.0)
                v = fz * fz * fz * (fz * (fz * 6.0 - 15.0) + 10.0)
                h00 = perm[perm[xi] + zi] & 7
                h10 = perm[perm[xi + 1] + zi] & 7
                h01 = perm[perm[xi] + zi + 1] & 7
                h11 = perm[perm[xi + 1] + zi + 1] & 7
                n00 = gx[h00] * fx + gz[h00] * fz
                n10 = gx[h10] * (fx - 1.0) + gz[h10] * fz
                n01 = gx[h01] * fx + gz[h01] * (fz - 1.0)
                n11 = gx[h11] * (fx - 1.0) + gz[h11] * (fz - 1.0)
                nx0 = n00 + u * (n10 - n00)
                nx1 = n01 + u * (n11 - n01)
                h = h + weights[o] * (nx0 + v * (nx1 - nx0))
            out[iz, ix] = h


def _noise_grid_numpy(out, perm, gx, gz, xs, zs, freqs, weights):
    X, Z = np.meshgrid(xs, zs)
    h = np.zeros_like(X)
    for o in range(freqs.shape[0]):
        x = X * freqs[o]
        z = Z * freqs[o]
        xi = np.floor(x).astype(np.int64)
        zi = np.floor(z).astype(np.int64)
        fx = x - xi
        fz = z - zi
        xi &= 255
        zi &= 255
        u = fx * fx * fx * (fx * (fx * 6.0 - 15.0) + 10.0)
        v = fz * fz * fz * (fz * (fz * 6.0 - 15.0) + 10.0)
        h00 = perm[perm[xi] + zi] & 7
        h10 = perm[perm[xi + 1] + zi] & 7
        h01 = perm[perm[xi] + zi + 1] & 7
        h11 = perm[perm[xi + 1] + zi + 1] & 7
        n00 = gx[h00] * fx + gz[h00] * fz
        n10 = gx[h10] * (fx - 1.0) + gz[h10] * fz
        n01 = gx[h01] * fx + gz[h01] * (fz - 1.0)
        n11 = gx[h11] * (fx - 1.0) + gz[h11] * (fz - 1.0)
        nx0 = n00 + u * (n10 - n00)
        nx1 = n01 + u * (n11 - n01)
        h = h + weights[o] * (nx0 + v * (nx1 - nx0))
    out[:] = h


def generate_terrain(spec: TerrainSpec, backend: str = "auto") -> Heightmap:
    """Node heights for a (width x depth)-cell grid; deterministic per seed."""
    if backend not in ("auto", "numba", "numpy"):
        raise TerrainError(f"unknown backend {backend!r}")
    use_jit = _USE_NUMBA if backend == "auto" else backend == "numba"
    if use_jit and not _USE_NUMBA:
        raise TerrainError("numba backend requested but numba is unavailable")
    perm = _perm_table(spec.seed)
    xs = np.arange(spec.width + 1, dtype=np.float64) * spec.cell_size
    zs = np.arange(spec.depth + 1, dtype=np.float64) * spec.cell_size
    out = np.empty((spec.depth + 1, spec.width + 1))
    kernel = _noise_grid_jit if use_jit else _noise_grid_numpy
    kernel(out, perm, _GRAD_X, _GRAD_Z, xs, zs,
           spec.octave_frequencies(), spec.octave_weights())
    return Heightmap(heights=out, cell_size=spec.cell_size)


def terrain_height(grid: Heightmap, x: float, z: float) -> float:
    """Bilinear interpolation of the four surrounding nodes; (x, z) must be in extent."""
    ex, ez = grid.extent
    if not (0.0 <= x <= ex and 0.0 <= z <= ez):
        raise TerrainError(f"query ({x}, {z}) outside terrain extent ({ex}, {ez})")
    cx = x / grid.cell_size
    cz = z / grid.cell_size
    ix = min(int(cx), grid.heights.shape[1] - 2)
    iz = min(int(cz), grid.heights.shape[0] - 2)
    fx = cx - ix
    fz = cz - iz
    h = grid.heights
    top = h[iz, ix] + fx * (h[iz, ix + 1] - h[iz, ix])
    bot = h[iz + 1, ix] + fx * (h[iz + 1, ix + 1] - h[iz + 1, ix])
    return float(top + fz * (bot - top))


def terrain_from_json(doc: dict) -> TerrainSpec:
    return TerrainSpec(
        seed=int(doc["seed"]),
        width=int(doc.get("width", 64)),
        depth=int(doc.get("depth", 64)),
        cell_size=float(doc.get("cell_size", 1.0)),
        amplitude=float(doc.get("amplitude", 5.0)),
        frequency=float(doc.get("frequency", 0.05)),
        octaves=int(doc.get("octaves", 4)),
        persistence=float(doc.get("persistence", 0.5)),
    )
