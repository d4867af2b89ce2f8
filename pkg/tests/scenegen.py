"""Seeded random scenes with pairwise interior-disjoint UV triangles.

The layouts come from a jittered k x k grid: every grid point moves by
less than 0.15 of a cell, which keeps each cell convex, so splitting
cells along a diagonal yields disjoint triangles by construction.
"""

from __future__ import annotations

import numpy as np

import decalpaint as dp


def jittered_grid_mesh(
    rng: np.random.Generator,
    k: int,
    cell_probability: float = 0.7,
    jitter: float = 0.12,
    max_triangles: int | None = None,
) -> dp.Mesh:
    """Random mesh whose UV triangles never overlap.

    Positions are arbitrary random points and normals random unit
    vectors; geometric plausibility is irrelevant to the pipeline.
    """
    grid = np.empty((k + 1, k + 1, 2), dtype=np.float64)
    for j in range(k + 1):
        for i in range(k + 1):
            grid[j, i] = (
                i / k + rng.uniform(-jitter, jitter) / k,
                j / k + rng.uniform(-jitter, jitter) / k,
            )
    np.clip(grid, 0.0, 1.0, out=grid)

    positions = []
    normals = []
    uvs = []
    triangles = []

    def add_triangle(corners):
        base = len(positions)
        for uv in corners:
            positions.append(rng.uniform(-2.0, 2.0, 3))
            n = rng.normal(size=3)
            n /= np.linalg.norm(n)
            normals.append(n)
            uvs.append(uv)
        triangles.append((base, base + 1, base + 2))

    cells = [(i, j) for j in range(k) for i in range(k)]
    rng.shuffle(cells)
    for i, j in cells:
        if rng.uniform() > cell_probability:
            continue
        a = grid[j, i]
        b = grid[j, i + 1]
        c = grid[j + 1, i + 1]
        d = grid[j + 1, i]
        if rng.uniform() < 0.5:
            tris = [(a, b, c), (a, c, d)]
        else:
            tris = [(a, b, d), (b, c, d)]
        for corners in tris:
            if max_triangles is not None and len(triangles) >= max_triangles:
                break
            add_triangle(corners)

    if not triangles:  # guarantee at least one cell
        a, b, c, d = grid[0, 0], grid[0, 1], grid[1, 1], grid[1, 0]
        add_triangle((a, b, c))
        add_triangle((a, c, d))

    return dp.build_mesh(
        np.array(positions, dtype=np.float32),
        np.array(normals, dtype=np.float32),
        np.array(uvs, dtype=np.float32),
        np.array(triangles, dtype=np.int32),
    )


def random_unit_quaternion(rng: np.random.Generator) -> np.ndarray:
    q = rng.normal(size=4)
    return q / np.linalg.norm(q)


def random_decal(
    rng: np.random.Generator, max_size: int = 32, transparent_fraction: float = 0.2
) -> dp.Texture:
    w = int(rng.integers(1, max_size + 1))
    h = int(rng.integers(1, max_size + 1))
    pixels = rng.integers(0, 256, (h, w, 4)).astype(np.uint8)
    transparent = rng.uniform(size=(h, w)) < transparent_fraction
    pixels[transparent, 3] = 0
    return dp.Texture(w, h, pixels)


def random_projector(
    rng: np.random.Generator, maps: dp.LocalSpaceMaps, decal: dp.Texture
) -> dp.DecalProjector:
    """Projector aimed into the scene: centered near a random paintable
    texel so stamps reliably intersect surface texels."""
    mask = maps.paintable
    ys, xs = np.nonzero(mask)
    if len(ys):
        pick = int(rng.integers(0, len(ys)))
        anchor = maps.position_map[ys[pick], xs[pick]].astype(np.float64)
        span = maps.position_map[mask].astype(np.float64)
        diag = float(np.linalg.norm(span.max(axis=0) - span.min(axis=0)))
        diag = max(diag, 1e-3)
    else:
        anchor = np.zeros(3)
        diag = 1.0
    position = anchor + rng.uniform(-0.3, 0.3, 3) * diag
    scale = rng.uniform(0.15, 1.5, 3) * diag
    return dp.DecalProjector(
        position=position,
        orientation=random_unit_quaternion(rng),
        scale=scale,
        decal=decal,
    )


def random_options(rng: np.random.Generator) -> dp.StampOptions:
    return dp.StampOptions(
        blend_mode=dp.BlendMode.ALPHA_OVER if rng.uniform() < 0.5 else dp.BlendMode.COPY,
        filter=dp.Filter.BILINEAR if rng.uniform() < 0.5 else dp.Filter.NEAREST,
        cull_cosine=float(rng.uniform(-0.3, 0.3)),
        alpha_threshold=float(rng.uniform(0.0, 0.5)),
    )


def random_scene(rng: np.random.Generator, max_grid: int = 6, max_map: int = 64):
    """One full stamping scene: maps, target texture, projector, options."""
    k = int(rng.integers(2, max_grid + 1))
    mesh = jittered_grid_mesh(rng, k, max_triangles=32)
    width = int(rng.integers(8, max_map + 1))
    height = int(rng.integers(8, max_map + 1))
    maps = dp.generate_local_space_maps(mesh, width, height)
    if rng.uniform() < 0.3:
        maps = dp.dilate_maps(maps, int(rng.integers(1, 3)))
    texture = dp.Texture(
        width, height, rng.integers(0, 256, (height, width, 4)).astype(np.uint8)
    )
    decal = random_decal(rng)
    projector = random_projector(rng, maps, decal)
    options = random_options(rng)
    return mesh, maps, texture, projector, options
