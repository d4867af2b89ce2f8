"""Bake a mesh into UV-space position and normal maps.

The rasterizer samples each texel at its center, (u, v) =
((x+0.5)/W, 1-(y+0.5)/H), so row 0 is the top image row and v=0 the
bottom one. Edge functions are evaluated in float32 with each edge's
endpoints taken in a canonical order; both triangles sharing a UV edge
therefore see bit-identical edge values and a boundary texel is claimed
by exactly one of them (tie rule: an edge owns its zero set when it
points up in v, or left when horizontal).
"""

from __future__ import annotations

import struct
import threading
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Optional

import numpy as np
from numba import njit

from .mesh import Mesh

LSM_MAGIC = b"LSM1"
MAX_MAP_DIM = 65535


class LocalMapsError(Exception):
    """Base for baking and serialization failures."""


class BudgetExceeded(LocalMapsError):
    """More triangles than texels: some triangle could never own a texel."""

    def __init__(self, triangle_count: int, width: int, height: int):
        self.triangle_count = triangle_count
        super().__init__(
            f"{triangle_count} triangles exceed the {width}x{height} texel budget"
        )


class OverlapDetected(LocalMapsError):
    """Two UV triangles claim the same texel center."""

    def __init__(self, texel: "TexelCoord"):
        self.texel = texel
        super().__init__(f"texel ({texel.x}, {texel.y}) claimed by more than one triangle")


class BadMagic(LocalMapsError):
    pass


class TruncatedPayload(LocalMapsError):
    pass


class DimensionOverflow(LocalMapsError):
    pass


class TexelCoord(NamedTuple):
    """Integer texel address: x is the column, y the row, row 0 on top."""

    x: int
    y: int


@dataclass
class LocalSpaceMaps:
    """Baked per-texel surface data for one mesh at one resolution.

    position_map/normal_map are (H, W, 3) float32; coverage marks texels
    owned by a UV triangle and dilated marks seam-padding texels added
    by dilate_maps. texel_writes instruments the generation pass.
    """

    width: int
    height: int
    position_map: np.ndarray
    normal_map: np.ndarray
    coverage: np.ndarray
    dilated: np.ndarray
    mesh_fingerprint: int
    texel_writes: int = field(default=0, compare=False)

    @property
    def paintable(self) -> np.ndarray:
        """Texels that projection may paint: covered or seam-dilated."""
        return self.coverage | self.dilated

    def __eq__(self, other) -> bool:
        if not isinstance(other, LocalSpaceMaps):
            return NotImplemented
        return (
            self.width == other.width
            and self.height == other.height
            and self.mesh_fingerprint == other.mesh_fingerprint
            and self.position_map.tobytes() == other.position_map.tobytes()
            and self.normal_map.tobytes() == other.normal_map.tobytes()
            and np.array_equal(self.coverage, other.coverage)
            and np.array_equal(self.dilated, other.dilated)
        )


def texel_centers(width: int, height: int) -> tuple[np.ndarray, np.ndarray]:
    """Float32 texel-center coordinates: u per column, v per row (top first)."""
    u = (np.arange(width, dtype=np.float32) + np.float32(0.5)) / np.float32(width)
    v = np.float32(1.0) - (np.arange(height, dtype=np.float32) + np.float32(0.5)) / np.float32(height)
    return u, v


@njit(cache=True)
def _canonical_edge(au, av, bu, bv):
    """Per-edge constants for the canonical-order float32 edge function:
    (lo_u, lo_v, d_u, d_v, sign, accepts_boundary)."""
    if (au < bu) or (au == bu and av <= bv):
        lou, lov, sign = au, av, np.float32(1.0)
        du_, dv_ = bu - au, bv - av
    else:
        lou, lov, sign = bu, bv, np.float32(-1.0)
        du_, dv_ = au - bu, av - bv
    accepts = (bv - av > 0) or (bv - av == 0 and bu - au < 0)
    return lou, lov, du_, dv_, sign, accepts


@njit(cache=True)
def _raster_kernel(uvs, triangles, positions, normals, width, height,
                   position, normal, claims, coverage, write_attrs):
    """Single-threaded scanline rasterization over each triangle's texel
    bounding box. Fills claims (and, when write_attrs, the maps) in
    place; returns the number of texels written."""
    half = np.float32(0.5)
    one = np.float32(1.0)
    zero = np.float32(0.0)
    w32 = np.float32(width)
    h32 = np.float32(height)
    writes = 0
    for t in range(triangles.shape[0]):
        i0, i1, i2 = triangles[t, 0], triangles[t, 1], triangles[t, 2]
        au, av = uvs[i0, 0], uvs[i0, 1]
        bu, bv = uvs[i1, 0], uvs[i1, 1]
        cu, cv = uvs[i2, 0], uvs[i2, 1]
        # edge opposite each vertex: e0 = b->c, e1 = c->a, e2 = a->b
        lo0u, lo0v, d0u, d0v, s0, acc0 = _canonical_edge(bu, bv, cu, cv)
        lo1u, lo1v, d1u, d1v, s1, acc1 = _canonical_edge(cu, cv, au, av)
        lo2u, lo2v, d2u, d2v, s2, acc2 = _canonical_edge(au, av, bu, bv)
        # texel-index window padded one texel against float rounding
        umin = min(au, min(bu, cu))
        umax = max(au, max(bu, cu))
        vmin = min(av, min(bv, cv))
        vmax = max(av, max(bv, cv))
        x0 = max(int(np.floor(umin * width - 0.5)) - 1, 0)
        x1 = min(int(np.ceil(umax * width - 0.5)) + 1, width - 1)
        y0 = max(int(np.floor((1.0 - vmax) * height - 0.5)) - 1, 0)
        y1 = min(int(np.ceil((1.0 - vmin) * height - 0.5)) + 1, height - 1)
        for y in range(y0, y1 + 1):
            pv = one - (np.float32(y) + half) / h32
            for x in range(x0, x1 + 1):
                pu = (np.float32(x) + half) / w32
                e0 = s0 * (d0u * (pv - lo0v) - d0v * (pu - lo0u))
                if not (e0 > 0 or (acc0 and e0 == 0)):
                    continue
                e1 = s1 * (d1u * (pv - lo1v) - d1v * (pu - lo1u))
                if not (e1 > 0 or (acc1 and e1 == 0)):
                    continue
                e2 = s2 * (d2u * (pv - lo2v) - d2v * (pu - lo2u))
                if not (e2 > 0 or (acc2 and e2 == 0)):
                    continue
                esum = e0 + e1 + e2
                if not esum > 0:
                    continue
                claims[y, x] += 1
                if write_attrs and claims[y, x] == 1:
                    l0 = e0 / esum
                    l1 = e1 / esum
                    l2 = e2 / esum
                    writes += 1
                    nx = l0 * normals[i0, 0] + l1 * normals[i1, 0] + l2 * normals[i2, 0]
                    ny = l0 * normals[i0, 1] + l1 * normals[i1, 1] + l2 * normals[i2, 1]
                    nz = l0 * normals[i0, 2] + l1 * normals[i1, 2] + l2 * normals[i2, 2]
                    length = np.sqrt(nx * nx + ny * ny + nz * nz)
                    if length > zero:  # zero-length interpolation stays uncovered
                        position[y, x, 0] = (
                            l0 * positions[i0, 0] + l1 * positions[i1, 0] + l2 * positions[i2, 0]
                        )
                        position[y, x, 1] = (
                            l0 * positions[i0, 1] + l1 * positions[i1, 1] + l2 * positions[i2, 1]
                        )
                        position[y, x, 2] = (
                            l0 * positions[i0, 2] + l1 * positions[i1, 2] + l2 * positions[i2, 2]
                        )
                        normal[y, x, 0] = nx / length
                        normal[y, x, 1] = ny / length
                        normal[y, x, 2] = nz / length
                        coverage[y, x] = True
    return writes


_ATTR_DUMMY = np.zeros((1, 1, 3), dtype=np.float32)
_COV_DUMMY = np.zeros((1, 1), dtype=np.bool_)


def texel_claim_counts(mesh: Mesh, width: int, height: int) -> np.ndarray:
    """How many triangles claim each texel center. The uniqueness check
    in validate_mesh reads this; a valid mesh never exceeds 1 anywhere."""
    claims = np.zeros((height, width), dtype=np.uint32)
    _raster_kernel(
        mesh.uvs, mesh.triangles, mesh.positions, mesh.normals, width, height,
        _ATTR_DUMMY, _ATTR_DUMMY, claims, _COV_DUMMY, False,
    )
    return claims


def generate_local_space_maps(mesh: Mesh, width: int, height: int) -> LocalSpaceMaps:
    """Rasterize the mesh's UV layout into position/normal maps.

    Each texel is written at most once; the triangle budget and texel
    uniqueness limits are enforced and violations raise. Texels whose
    interpolated normal cancels to zero length are left uncovered.
    """
    if width < 1 or height < 1:
        raise ValueError("map dimensions must be >= 1")
    if mesh.triangle_count > width * height:
        raise BudgetExceeded(mesh.triangle_count, width, height)

    position = np.zeros((height, width, 3), dtype=np.float32)
    normal = np.zeros((height, width, 3), dtype=np.float32)
    claims = np.zeros((height, width), dtype=np.uint32)
    coverage = np.zeros((height, width), dtype=np.bool_)
    writes = _raster_kernel(
        mesh.uvs, mesh.triangles, mesh.positions, mesh.normals, width, height,
        position, normal, claims, coverage, True,
    )

    if (claims > 1).any():
        ys, xs = np.nonzero(claims > 1)
        order = np.lexsort((xs, ys))
        raise OverlapDetected(TexelCoord(int(xs[order[0]]), int(ys[order[0]])))

    return LocalSpaceMaps(
        width=width,
        height=height,
        position_map=position,
        normal_map=normal,
        coverage=coverage,
        dilated=np.zeros((height, width), dtype=bool),
        mesh_fingerprint=mesh.fingerprint(),
        texel_writes=writes,
    )


def _shift2d(arr: np.ndarray, dy: int, dx: int, fill) -> np.ndarray:
    """out[y, x] = arr[y+dy, x+dx] where in bounds, else fill."""
    out = np.full_like(arr, fill)
    h, w = arr.shape[:2]
    ys = slice(max(0, -dy), min(h, h - dy))
    xs = slice(max(0, -dx), min(w, w - dx))
    src_ys = slice(max(0, dy), min(h, h + dy))
    src_xs = slice(max(0, dx), min(w, w + dx))
    out[ys, xs] = arr[src_ys, src_xs]
    return out


def dilate_maps(maps: LocalSpaceMaps, radius: int) -> LocalSpaceMaps:
    """Pad UV-island borders: every uncovered texel within Chebyshev
    distance `radius` of coverage copies its nearest covered texel
    (ties broken by smallest y, then smallest x) and is marked dilated.

    The dilated set is always recomputed from the original coverage, so
    re-dilating with a different radius never leaves stale texels.
    """
    if radius < 0:
        raise ValueError("radius must be >= 0")
    if radius == 0:
        return maps

    position = maps.position_map.copy()
    normal = maps.normal_map.copy()
    position[~maps.coverage] = 0.0
    normal[~maps.coverage] = 0.0
    assigned = maps.coverage.copy()
    dilated = np.zeros_like(maps.coverage)

    for d in range(1, radius + 1):
        ring = sorted(
            (dy, dx)
            for dy in range(-d, d + 1)
            for dx in range(-d, d + 1)
            if max(abs(dy), abs(dx)) == d
        )
        for dy, dx in ring:
            src_cov = _shift2d(maps.coverage, dy, dx, False)
            take = ~assigned & src_cov
            if not take.any():
                continue
            position[take] = _shift2d(position, dy, dx, np.float32(0))[take]
            normal[take] = _shift2d(normal, dy, dx, np.float32(0))[take]
            assigned |= take
            dilated |= take

    return replace(
        maps,
        position_map=position,
        normal_map=normal,
        coverage=maps.coverage.copy(),
        dilated=dilated,
    )


class MapsCache:
    """Content-addressed cache of baked maps; generation_count observes
    how many times rasterization actually ran."""

    def __init__(self):
        self._store: dict[tuple[int, int, int], LocalSpaceMaps] = {}
        self._lock = threading.Lock()
        self.generation_count = 0

    def get_or_generate(self, mesh: Mesh, width: int, height: int) -> LocalSpaceMaps:
        key = (mesh.fingerprint(), width, height)
        with self._lock:
            cached = self._store.get(key)
            if cached is not None:
                return cached
            maps = generate_local_space_maps(mesh, width, height)
            self.generation_count += 1
            self._store[key] = maps
            return maps


def maps_cache_get_or_generate(
    cache: MapsCache, mesh: Mesh, width: int, height: int
) -> LocalSpaceMaps:
    return cache.get_or_generate(mesh, width, height)


def encode_lsmap(maps: LocalSpaceMaps) -> bytes:
    """Serialize to the LSM1 format (little-endian, rows from the top)."""
    if maps.width > MAX_MAP_DIM or maps.height > MAX_MAP_DIM:
        raise DimensionOverflow(f"{maps.width}x{maps.height} exceeds {MAX_MAP_DIM}")
    has_dilation = bool(maps.dilated.any())
    coverage_bytes = np.zeros((maps.height, maps.width), dtype=np.uint8)
    coverage_bytes[maps.coverage] = 1
    coverage_bytes[maps.dilated] = 2
    parts = [
        LSM_MAGIC,
        struct.pack("<IIB", maps.width, maps.height, 1 if has_dilation else 0),
        np.ascontiguousarray(maps.position_map, dtype="<f4").tobytes(),
        np.ascontiguousarray(maps.normal_map, dtype="<f4").tobytes(),
        coverage_bytes.tobytes(),
        struct.pack("<Q", maps.mesh_fingerprint),
    ]
    return b"".join(parts)


def decode_lsmap(data: bytes) -> LocalSpaceMaps:
    """Inverse of encode_lsmap; bit-exact round trip."""
    if len(data) < 4:
        raise TruncatedPayload("shorter than the magic")
    if data[:4] != LSM_MAGIC:
        raise BadMagic(f"expected {LSM_MAGIC!r}, got {data[:4]!r}")
    if len(data) < 13:
        raise TruncatedPayload("header incomplete")
    width, height, flags = struct.unpack("<IIB", data[4:13])
    if not (1 <= width <= MAX_MAP_DIM and 1 <= height <= MAX_MAP_DIM):
        raise DimensionOverflow(f"dimensions {width}x{height} out of range")
    n = width * height
    expected = 13 + n * 12 * 2 + n + 8
    if len(data) != expected:
        raise TruncatedPayload(f"expected {expected} bytes, got {len(data)}")
    offset = 13
    position = np.frombuffer(data, dtype="<f4", count=n * 3, offset=offset).reshape(
        height, width, 3
    )
    offset += n * 12
    normal = np.frombuffer(data, dtype="<f4", count=n * 3, offset=offset).reshape(
        height, width, 3
    )
    offset += n * 12
    coverage_bytes = np.frombuffer(data, dtype=np.uint8, count=n, offset=offset).reshape(
        height, width
    )
    offset += n
    (fingerprint,) = struct.unpack("<Q", data[offset : offset + 8])
    coverage = coverage_bytes == 1
    dilated = (coverage_bytes == 2) if flags & 1 else np.zeros((height, width), dtype=bool)
    return LocalSpaceMaps(
        width=width,
        height=height,
        position_map=position.copy(),
        normal_map=normal.copy(),
        coverage=coverage,
        dilated=dilated,
        mesh_fingerprint=fingerprint,
        texel_writes=int(coverage.sum()),
    )


def map_debug_png(
    values: np.ndarray, lo: float, hi: float, mask: Optional[np.ndarray] = None
) -> bytes:
    """Visualize a (H, W, 3) float map: components remapped from [lo, hi]
    to [0, 255], alpha 255 where mask (default: everywhere)."""
    from .imageio import Texture, save_png

    if hi <= lo:
        raise ValueError("hi must exceed lo")
    scaled = np.clip((values.astype(np.float64) - lo) / (hi - lo), 0.0, 1.0)
    rgb = np.floor(scaled * 255.0 + 0.5).astype(np.uint8)
    alpha = np.full(values.shape[:2], 255, dtype=np.uint8)
    if mask is not None:
        alpha[~mask] = 0
    pixels = np.dstack([rgb, alpha])
    return save_png(Texture(values.shape[1], values.shape[0], pixels))
