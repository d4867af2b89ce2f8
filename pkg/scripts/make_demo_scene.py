#!/usr/bin/env python3
"""Build a small demo: a UV-mapped cube, a ring decal, baked maps, and a
few stamps applied to its texture. Outputs land in --out-dir and are a
convenient smoke test for the whole pipeline (plus fixtures for driving
the UI without modeling anything)."""

import argparse
from pathlib import Path

import numpy as np

import decalpaint as dp

GUTTER = 0.03

# unit cube faces: (corner positions, outward normal), UV island per face
CUBE_FACES = [
    ([(0, 0, 1), (1, 0, 1), (1, 1, 1), (0, 1, 1)], (0, 0, 1)),
    ([(1, 0, 0), (0, 0, 0), (0, 1, 0), (1, 1, 0)], (0, 0, -1)),
    ([(1, 0, 1), (1, 0, 0), (1, 1, 0), (1, 1, 1)], (1, 0, 0)),
    ([(0, 0, 0), (0, 0, 1), (0, 1, 1), (0, 1, 0)], (-1, 0, 0)),
    ([(0, 1, 1), (1, 1, 1), (1, 1, 0), (0, 1, 0)], (0, 1, 0)),
    ([(0, 0, 0), (1, 0, 0), (1, 0, 1), (0, 0, 1)], (0, -1, 0)),
]


def cube_obj() -> bytes:
    lines = []
    for face_index, (corners, normal) in enumerate(CUBE_FACES):
        col, row = face_index % 3, face_index // 3
        u0 = col / 3 + GUTTER
        u1 = (col + 1) / 3 - GUTTER
        v0 = row / 2 + GUTTER
        v1 = (row + 1) / 2 - GUTTER
        island = [(u0, v0), (u1, v0), (u1, v1), (u0, v1)]
        for p in corners:
            lines.append(f"v {p[0]} {p[1]} {p[2]}")
        for uv in island:
            lines.append(f"vt {uv[0]:.6f} {uv[1]:.6f}")
        lines.append(f"vn {normal[0]} {normal[1]} {normal[2]}")
        base = face_index * 4
        n = face_index + 1
        ids = [f"{base + k + 1}/{base + k + 1}/{n}" for k in range(4)]
        lines.append("f " + " ".join(ids))
    return ("\n".join(lines) + "\n").encode()


def ring_decal(size: int = 128) -> dp.Texture:
    yy, xx = np.mgrid[0:size, 0:size]
    r = np.hypot(xx - size / 2 + 0.5, yy - size / 2 + 0.5) / (size / 2)
    pixels = np.zeros((size, size, 4), dtype=np.uint8)
    ring = (r > 0.55) & (r < 0.85)
    dot = r < 0.25
    pixels[ring] = (230, 60, 40, 255)
    pixels[dot] = (40, 90, 220, 255)
    return dp.Texture(size, size, pixels)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", type=Path, default=Path("demo_out"))
    parser.add_argument("--size", type=int, default=256)
    args = parser.parse_args()
    out = args.out_dir
    out.mkdir(parents=True, exist_ok=True)

    obj = cube_obj()
    (out / "cube.obj").write_bytes(obj)
    mesh = dp.parse_obj(obj)
    report = dp.validate_mesh(mesh, args.size, args.size)
    assert report.ok, report

    maps = dp.dilate_maps(dp.generate_local_space_maps(mesh, args.size, args.size), 2)
    (out / "cube.lsm1").write_bytes(dp.encode_lsmap(maps))
    pos = maps.position_map[maps.paintable]
    (out / "cube.pos.png").write_bytes(
        dp.localmaps.map_debug_png(
            maps.position_map, float(pos.min()), float(pos.max()), maps.paintable
        )
    )
    (out / "cube.nrm.png").write_bytes(
        dp.localmaps.map_debug_png(maps.normal_map, -1.0, 1.0, maps.paintable)
    )

    decal = ring_decal()
    (out / "decal.png").write_bytes(dp.save_png(decal))
    base = dp.Texture.filled(args.size, args.size, (200, 200, 190, 255))
    (out / "texture.png").write_bytes(dp.save_png(base))

    # one stamp per visible axis, aimed at face centers
    stamps = [
        ([0.5, 0.5, 1.6], [0.0, 0.0, 0.0, 1.0]),  # looking down -Z at the +Z face
        ([1.6, 0.5, 0.5], [0.0, 0.7071067811865476, 0.0, 0.7071067811865476]),  # +X face
        ([0.5, 1.6, 0.5], [-0.7071067811865476, 0.0, 0.0, 0.7071067811865476]),  # +Y face
    ]
    for position, orientation in stamps:
        projector = dp.DecalProjector(
            position=position, orientation=orientation, scale=[0.35, 0.35, 1.0], decal=decal
        )
        stats = dp.apply_stamp(
            base, maps, projector, dp.StampOptions(blend_mode=dp.BlendMode.ALPHA_OVER)
        )
        print(f"stamp at {position}: {stats.to_dict()}")
    (out / "painted.png").write_bytes(dp.save_png(base))
    print(f"demo written to {out}/")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
