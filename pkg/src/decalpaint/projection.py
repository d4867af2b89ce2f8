"""Stamp decals into a texture by per-texel reverse projection.

Every paintable texel carries a local-space position and normal (from
the baked maps). A stamp transforms that position into the projector's
unit box, which is mathematically the same ray cast the texel would
perform toward the decal plane, then samples the decal and blends the
color in. Texels facing away from the projector are culled first.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from numba import njit

from .imageio import Texture
from .localmaps import LocalSpaceMaps


class DimensionMismatch(Exception):
    """Target texture and maps disagree on size."""


class BlendMode(str, Enum):
    COPY = "copy"
    ALPHA_OVER = "alpha_over"


class Filter(str, Enum):
    NEAREST = "nearest"
    BILINEAR = "bilinear"


def quaternion_basis(q: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Right/up/forward axes of a unit quaternion (x, y, z, w) frame.

    Forward is the rotated -Z axis: the direction the projector looks.
    """
    x, y, z, w = (float(c) for c in q)
    right = np.array([1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y + z * w), 2.0 * (x * z - y * w)])
    up = np.array([2.0 * (x * y - z * w), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z + x * w)])
    back = np.array([2.0 * (x * z + y * w), 2.0 * (y * z - x * w), 1.0 - 2.0 * (x * x + y * y)])
    return right, up, -back


@dataclass(frozen=True)
class DecalProjector:
    """Oriented box that maps model-space points onto a decal image.

    position is the box center, scale the half-extents (x/y span the
    decal plane, z the projection depth), orientation a quaternion
    (x, y, z, w) normalized at construction.
    """

    position: np.ndarray
    orientation: np.ndarray
    scale: np.ndarray
    decal: Texture

    def __post_init__(self):
        position = np.asarray(self.position, dtype=np.float64).reshape(3)
        orientation = np.asarray(self.orientation, dtype=np.float64).reshape(4)
        scale = np.asarray(self.scale, dtype=np.float64).reshape(3)
        if not np.all(np.isfinite(position)):
            raise ValueError("projector position must be finite")
        if not np.all(np.isfinite(scale)) or np.any(scale <= 0.0):
            raise ValueError("projector scale components must be > 0")
        norm = float(np.linalg.norm(orientation))
        if not np.isfinite(norm) or norm == 0.0:
            raise ValueError("projector orientation must be a nonzero quaternion")
        object.__setattr__(self, "position", position)
        object.__setattr__(self, "orientation", orientation / norm)
        object.__setattr__(self, "scale", scale)

    @property
    def basis(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return quaternion_basis(self.orientation)

    @property
    def forward(self) -> np.ndarray:
        return self.basis[2]


@dataclass(frozen=True)
class StampOptions:
    blend_mode: BlendMode = BlendMode.COPY
    filter: Filter = Filter.NEAREST
    cull_cosine: float = 0.0
    alpha_threshold: float = 0.0

    def __post_init__(self):
        if not -1.0 <= self.cull_cosine <= 1.0:
            raise ValueError("cull_cosine must be in [-1, 1]")
        if not 0.0 <= self.alpha_threshold <= 1.0:
            raise ValueError("alpha_threshold must be in [0, 1]")


@dataclass
class StampStats:
    """Per-stamp texel accounting; the five buckets partition W*H."""

    painted: int = 0
    culled_backface: int = 0
    out_of_bounds: int = 0
    uncovered: int = 0
    transparent_skipped: int = 0

    @property
    def texels_visited(self) -> int:
        return (
            self.painted
            + self.culled_backface
            + self.out_of_bounds
            + self.uncovered
            + self.transparent_skipped
        )

    def to_dict(self) -> dict:
        return {
            "painted": self.painted,
            "culled_backface": self.culled_backface,
            "out_of_bounds": self.out_of_bounds,
            "uncovered": self.uncovered,
            "transparent_skipped": self.transparent_skipped,
        }


def _project_points(pos: np.ndarray, nrm: np.ndarray, projector: DecalProjector, cull_cosine: float):
    """Vectorized projector-box transform. pos/nrm are (n, 3) float32 or
    float64; math runs in float64 (float32 inputs widen exactly).

    Returns (keep, inbox, u, v, depth): keep is the front-facing mask,
    inbox the unit-box bounds mask, (u, v) the decal coordinates and
    depth the signed fraction of the half-depth, all only meaningful
    where keep & inbox.
    """
    right, up, fwd = projector.basis
    c = projector.position
    s = projector.scale
    dx = pos[:, 0] - c[0]
    dy = pos[:, 1] - c[1]
    dz = pos[:, 2] - c[2]
    ndotf = nrm[:, 0] * fwd[0] + nrm[:, 1] * fwd[1] + nrm[:, 2] * fwd[2]
    keep = ndotf < cull_cosine
    px = (dx * right[0] + dy * right[1] + dz * right[2]) / s[0]
    py = (dx * up[0] + dy * up[1] + dz * up[2]) / s[1]
    pz = (dx * fwd[0] + dy * fwd[1] + dz * fwd[2]) / s[2]
    inbox = (np.abs(px) <= 1.0) & (np.abs(py) <= 1.0) & (np.abs(pz) <= 1.0)
    u = (px + 1.0) / 2.0
    v = (1.0 - py) / 2.0
    return keep, inbox, u, v, pz


def project_texel(position, normal, projector: DecalProjector, cull_cosine: float = 0.0):
    """Project one surface point onto the decal.

    Returns (decal_uv, depth) with decal_uv in [0,1]^2, or None when the
    point faces away (dot(normal, forward) >= cull_cosine) or falls
    outside the projector box.
    """
    pos = np.asarray(position, dtype=np.float64).reshape(1, 3)
    nrm = np.asarray(normal, dtype=np.float64).reshape(1, 3)
    keep, inbox, u, v, depth = _project_points(pos, nrm, projector, cull_cosine)
    if not (keep[0] and inbox[0]):
        return None
    return np.array([u[0], v[0]]), float(depth[0])


def _sample_nearest(image: Texture, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    ix = np.clip(np.floor(u * image.width).astype(np.int64), 0, image.width - 1)
    iy = np.clip(np.floor(v * image.height).astype(np.int64), 0, image.height - 1)
    return image.pixels[iy, ix]


def _sample_bilinear(image: Texture, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    # float32 math per the sampling contract
    fx = u.astype(np.float32) * np.float32(image.width) - np.float32(0.5)
    fy = v.astype(np.float32) * np.float32(image.height) - np.float32(0.5)
    x0f = np.floor(fx)
    y0f = np.floor(fy)
    tx = fx - x0f
    ty = fy - y0f
    x0 = np.clip(x0f.astype(np.int64), 0, image.width - 1)
    x1 = np.clip(x0f.astype(np.int64) + 1, 0, image.width - 1)
    y0 = np.clip(y0f.astype(np.int64), 0, image.height - 1)
    y1 = np.clip(y0f.astype(np.int64) + 1, 0, image.height - 1)
    c00 = image.pixels[y0, x0].astype(np.float32)
    c10 = image.pixels[y0, x1].astype(np.float32)
    c01 = image.pixels[y1, x0].astype(np.float32)
    c11 = image.pixels[y1, x1].astype(np.float32)
    w00 = ((1 - tx) * (1 - ty))[:, None]
    w10 = (tx * (1 - ty))[:, None]
    w01 = ((1 - tx) * ty)[:, None]
    w11 = (tx * ty)[:, None]
    out = w00 * c00 + w10 * c10 + w01 * c01 + w11 * c11
    return np.minimum(np.floor(out + np.float32(0.5)), 255).astype(np.uint8)


def sample_decal(image: Texture, uv, filter: Filter = Filter.NEAREST) -> np.ndarray:
    """Sample one RGBA8 value at uv in [0,1]^2 (v=0 is the top row)."""
    u = np.asarray([uv[0]], dtype=np.float64)
    v = np.asarray([uv[1]], dtype=np.float64)
    if filter == Filter.NEAREST:
        return _sample_nearest(image, u, v)[0]
    return _sample_bilinear(image, u, v)[0]


def _blend_alpha_over(dst: np.ndarray, src: np.ndarray) -> np.ndarray:
    """Source-over in float32 on (n, 4) uint8 arrays, rounded half away
    from zero."""
    sa = src[:, 3].astype(np.float32) / np.float32(255.0)
    da = dst[:, 3].astype(np.float32) / np.float32(255.0)
    rest = da * (1 - sa)
    oa = sa + rest
    num = src[:, :3].astype(np.float32) * sa[:, None] + dst[:, :3].astype(np.float32) * rest[:, None]
    with np.errstate(invalid="ignore", divide="ignore"):
        rgb = np.where(oa[:, None] > 0, num / oa[:, None], np.float32(0.0))
    out = np.empty_like(dst)
    out[:, :3] = np.minimum(np.floor(rgb + np.float32(0.5)), 255).astype(np.uint8)
    out[:, 3] = np.minimum(np.floor(oa * np.float32(255.0) + np.float32(0.5)), 255).astype(np.uint8)
    return out


def blend_pixel(dst, src, mode: BlendMode, alpha_threshold: float = 0.0) -> np.ndarray:
    """Combine one RGBA8 source pixel into a destination pixel."""
    dst = np.asarray(dst, dtype=np.uint8).reshape(1, 4)
    src = np.asarray(src, dtype=np.uint8).reshape(1, 4)
    if mode == BlendMode.COPY:
        return (src if float(src[0, 3]) > alpha_threshold * 255.0 else dst)[0].copy()
    return _blend_alpha_over(dst, src)[0]


@njit(cache=True)
def _stamp_kernel(
    position, normal, paintable, pixels, decal,
    r0, r1, r2, u0, u1, u2, f0, f1, f2, c0, c1, c2, s0, s1, s2,
    cull, thr255, copy_blend, nearest,
):
    """Per-texel projection, sampling and blending, single-threaded.

    Geometry runs in float64 (float32 map values widen exactly); bilinear
    sampling and alpha blending use float32 per their contracts. Returns
    the five stat counters.
    """
    half32 = np.float32(0.5)
    one32 = np.float32(1.0)
    zero32 = np.float32(0.0)
    v255 = np.float32(255.0)
    height, width = paintable.shape
    dh, dw = decal.shape[0], decal.shape[1]
    dw32 = np.float32(dw)
    dh32 = np.float32(dh)
    painted = 0
    culled = 0
    oob = 0
    uncovered = 0
    transparent = 0
    for y in range(height):
        for x in range(width):
            if not paintable[y, x]:
                uncovered += 1
                continue
            px = np.float64(position[y, x, 0])
            py = np.float64(position[y, x, 1])
            pz = np.float64(position[y, x, 2])
            nx = np.float64(normal[y, x, 0])
            ny = np.float64(normal[y, x, 1])
            nz = np.float64(normal[y, x, 2])
            if nx * f0 + ny * f1 + nz * f2 >= cull:
                culled += 1
                continue
            dx = px - c0
            dy = py - c1
            dz = pz - c2
            bx = (dx * r0 + dy * r1 + dz * r2) / s0
            by = (dx * u0 + dy * u1 + dz * u2) / s1
            bz = (dx * f0 + dy * f1 + dz * f2) / s2
            if abs(bx) > 1.0 or abs(by) > 1.0 or abs(bz) > 1.0:
                oob += 1
                continue
            du = (bx + 1.0) / 2.0
            dv = (1.0 - by) / 2.0
            if nearest:
                ix = min(max(int(np.floor(du * dw)), 0), dw - 1)
                iy = min(max(int(np.floor(dv * dh)), 0), dh - 1)
                sr = int(decal[iy, ix, 0])
                sg = int(decal[iy, ix, 1])
                sb = int(decal[iy, ix, 2])
                sa = int(decal[iy, ix, 3])
            else:
                fx = np.float32(du) * dw32 - half32
                fy = np.float32(dv) * dh32 - half32
                x0f = np.floor(fx)
                y0f = np.floor(fy)
                tx = fx - x0f
                ty = fy - y0f
                ix0 = min(max(int(x0f), 0), dw - 1)
                ix1 = min(max(int(x0f) + 1, 0), dw - 1)
                iy0 = min(max(int(y0f), 0), dh - 1)
                iy1 = min(max(int(y0f) + 1, 0), dh - 1)
                w00 = (one32 - tx) * (one32 - ty)
                w10 = tx * (one32 - ty)
                w01 = (one32 - tx) * ty
                w11 = tx * ty
                sr = min(int(np.floor(
                    w00 * np.float32(decal[iy0, ix0, 0]) + w10 * np.float32(decal[iy0, ix1, 0])
                    + w01 * np.float32(decal[iy1, ix0, 0]) + w11 * np.float32(decal[iy1, ix1, 0])
                    + half32)), 255)
                sg = min(int(np.floor(
                    w00 * np.float32(decal[iy0, ix0, 1]) + w10 * np.float32(decal[iy0, ix1, 1])
                    + w01 * np.float32(decal[iy1, ix0, 1]) + w11 * np.float32(decal[iy1, ix1, 1])
                    + half32)), 255)
                sb = min(int(np.floor(
                    w00 * np.float32(decal[iy0, ix0, 2]) + w10 * np.float32(decal[iy0, ix1, 2])
                    + w01 * np.float32(decal[iy1, ix0, 2]) + w11 * np.float32(decal[iy1, ix1, 2])
                    + half32)), 255)
                sa = min(int(np.floor(
                    w00 * np.float32(decal[iy0, ix0, 3]) + w10 * np.float32(decal[iy0, ix1, 3])
                    + w01 * np.float32(decal[iy1, ix0, 3]) + w11 * np.float32(decal[iy1, ix1, 3])
                    + half32)), 255)
            if copy_blend:
                if np.float64(sa) > thr255:
                    pixels[y, x, 0] = sr
                    pixels[y, x, 1] = sg
                    pixels[y, x, 2] = sb
                    pixels[y, x, 3] = sa
                    painted += 1
                else:
                    transparent += 1
            else:
                if sa > 0:
                    sa32 = np.float32(sa) / v255
                    da32 = np.float32(pixels[y, x, 3]) / v255
                    rest = da32 * (one32 - sa32)
                    oa = sa32 + rest
                    num_r = np.float32(sr) * sa32 + np.float32(pixels[y, x, 0]) * rest
                    num_g = np.float32(sg) * sa32 + np.float32(pixels[y, x, 1]) * rest
                    num_b = np.float32(sb) * sa32 + np.float32(pixels[y, x, 2]) * rest
                    if oa > zero32:
                        out_r, out_g, out_b = num_r / oa, num_g / oa, num_b / oa
                    else:
                        out_r, out_g, out_b = zero32, zero32, zero32
                    pixels[y, x, 0] = min(int(np.floor(out_r + half32)), 255)
                    pixels[y, x, 1] = min(int(np.floor(out_g + half32)), 255)
                    pixels[y, x, 2] = min(int(np.floor(out_b + half32)), 255)
                    pixels[y, x, 3] = min(int(np.floor(oa * v255 + half32)), 255)
                    painted += 1
                else:
                    transparent += 1
    return painted, culled, oob, uncovered, transparent


def apply_stamp(
    texture: Texture,
    maps: LocalSpaceMaps,
    projector: DecalProjector,
    options: StampOptions = StampOptions(),
) -> StampStats:
    """Paint one stamp into `texture` in place, visiting each texel once.

    Covered and dilated texels run the projection; everything else is
    counted uncovered and left untouched.
    """
    if (texture.width, texture.height) != (maps.width, maps.height):
        raise DimensionMismatch(
            f"texture {texture.width}x{texture.height} != maps {maps.width}x{maps.height}"
        )

    right, up, fwd = projector.basis
    c = projector.position
    s = projector.scale
    painted, culled, oob, uncovered, transparent = _stamp_kernel(
        maps.position_map,
        maps.normal_map,
        maps.paintable,
        texture.pixels,
        projector.decal.pixels,
        right[0], right[1], right[2],
        up[0], up[1], up[2],
        fwd[0], fwd[1], fwd[2],
        c[0], c[1], c[2],
        s[0], s[1], s[2],
        float(options.cull_cosine),
        float(options.alpha_threshold) * 255.0,
        options.blend_mode == BlendMode.COPY,
        options.filter == Filter.NEAREST,
    )
    return StampStats(
        painted=painted,
        culled_backface=culled,
        out_of_bounds=oob,
        uncovered=uncovered,
        transparent_skipped=transparent,
    )
