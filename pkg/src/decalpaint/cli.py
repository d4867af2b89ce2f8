"""Batch entry points: bake maps, apply scripted stamps, benchmark, serve.

Exit codes: 0 success, 2 validation/contract failure (budget, overlap,
dimension mismatch, invalid script), 1 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import statistics
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import imageio, localmaps, mesh as meshmod, projection


def _err(message: str) -> None:
    print(message, file=sys.stderr)


def _load_mesh(path: str) -> meshmod.Mesh:
    data = Path(path).read_bytes()
    return meshmod.parse_obj(data)


def _write_debug_pngs(maps: localmaps.LocalSpaceMaps, out_base: Path) -> None:
    mask = maps.paintable
    if mask.any():
        covered_pos = maps.position_map[mask]
        lo = float(covered_pos.min())
        hi = float(covered_pos.max())
        if hi <= lo:
            hi = lo + 1.0
    else:
        lo, hi = 0.0, 1.0
    pos_png = localmaps.map_debug_png(maps.position_map, lo, hi, mask)
    nrm_png = localmaps.map_debug_png(maps.normal_map, -1.0, 1.0, mask)
    pos_path = out_base.with_suffix(out_base.suffix + ".pos.png")
    nrm_path = out_base.with_suffix(out_base.suffix + ".nrm.png")
    pos_path.write_bytes(pos_png)
    nrm_path.write_bytes(nrm_png)
    print(f"debug position map (remap [{lo:g}, {hi:g}]) -> {pos_path}")
    print(f"debug normal map (remap [-1, 1]) -> {nrm_path}")


def cmd_genmaps(args: argparse.Namespace) -> int:
    try:
        mesh = _load_mesh(args.mesh)
    except OSError as exc:
        _err(f"cannot read mesh: {exc}")
        return 1
    except meshmod.MeshError as exc:
        _err(f"invalid mesh: {exc}")
        return 2

    report = meshmod.validate_mesh(mesh, args.size, args.size)
    if not report.ok:
        _err("mesh validation failed:")
        _err(json.dumps(report.to_dict()))
        return 2

    maps = None
    cache_path = None
    if args.cache_dir:
        cache_dir = Path(args.cache_dir)
        cache_dir.mkdir(parents=True, exist_ok=True)
        key = f"{mesh.fingerprint():016x}-{args.size}x{args.size}.lsm1"
        cache_path = cache_dir / key
        if cache_path.exists():
            try:
                maps = localmaps.decode_lsmap(cache_path.read_bytes())
                print(f"maps cache hit: {cache_path}")
            except localmaps.LocalMapsError:
                maps = None  # stale or corrupt entry; regenerate

    if maps is None:
        maps = localmaps.generate_local_space_maps(mesh, args.size, args.size)
        if cache_path is not None:
            cache_path.write_bytes(localmaps.encode_lsmap(maps))

    if args.dilate_radius > 0:
        maps = localmaps.dilate_maps(maps, args.dilate_radius)

    out = Path(args.out)
    try:
        out.write_bytes(localmaps.encode_lsmap(maps))
    except OSError as exc:
        _err(f"cannot write maps: {exc}")
        return 1
    if args.debug_png:
        _write_debug_pngs(maps, out)
    print(
        f"baked {args.size}x{args.size} maps: {int(maps.coverage.sum())} covered, "
        f"{int(maps.dilated.sum())} dilated -> {out}"
    )
    return 0


def _load_script(path: str) -> tuple[list[dict], dict[str, imageio.Texture]]:
    doc = json.loads(Path(path).read_text())
    stamps = doc.get("stamps")
    if not isinstance(stamps, list) or not stamps:
        raise ValueError("script must contain a non-empty 'stamps' list")
    decal_paths = doc.get("decals", {})
    base = Path(path).parent
    decals = {}
    for name, decal_path in decal_paths.items():
        p = Path(decal_path)
        if not p.is_absolute():
            p = base / p
        decals[name] = imageio.load_png(p.read_bytes())
    return stamps, decals


def _stamp_from_record(record: dict, decals: dict[str, imageio.Texture]):
    decal_id = record.get("decal_id")
    if decal_id not in decals:
        raise ValueError(f"stamp references unknown decal_id {decal_id!r}")
    scale = list(record["scale"])
    if len(scale) == 2:  # projection half-depth defaults to the smaller plane half-extent
        scale.append(min(scale))
    projector = projection.DecalProjector(
        position=record["position"],
        orientation=record["orientation"],
        scale=scale,
        decal=decals[decal_id],
    )
    options = projection.StampOptions(
        blend_mode=projection.BlendMode(record.get("blend_mode", "copy")),
        filter=projection.Filter(record.get("filter", "nearest")),
        cull_cosine=float(record.get("cull_cosine", 0.0)),
        alpha_threshold=float(record.get("alpha_threshold", 0.0)),
    )
    return projector, options


def cmd_stamp(args: argparse.Namespace) -> int:
    try:
        maps = localmaps.decode_lsmap(Path(args.maps).read_bytes())
    except OSError as exc:
        _err(f"cannot read maps: {exc}")
        return 1
    except localmaps.LocalMapsError as exc:
        _err(f"invalid maps file: {exc}")
        return 2
    try:
        texture = imageio.load_png(Path(args.texture).read_bytes())
    except OSError as exc:
        _err(f"cannot read texture: {exc}")
        return 1
    except imageio.DecodeError as exc:
        _err(f"invalid texture: {exc}")
        return 2
    try:
        stamps, decals = _load_script(args.script)
    except OSError as exc:
        _err(f"cannot read script: {exc}")
        return 1
    except (ValueError, KeyError, json.JSONDecodeError, imageio.DecodeError) as exc:
        _err(f"invalid script: {exc}")
        return 2

    try:
        prepared = [_stamp_from_record(r, decals) for r in stamps]
    except (ValueError, KeyError, TypeError) as exc:
        _err(f"invalid script: {exc}")
        return 2

    try:
        for index, (projector, options) in enumerate(prepared):
            stats = projection.apply_stamp(texture, maps, projector, options)
            print(json.dumps({"stamp": index, "stats": stats.to_dict()}))
    except projection.DimensionMismatch as exc:
        _err(f"dimension mismatch: {exc}")
        return 2

    try:
        Path(args.out).write_bytes(imageio.save_png(texture))
    except OSError as exc:
        _err(f"cannot write output: {exc}")
        return 1
    return 0


@dataclass
class BenchReport:
    width: int
    height: int
    triangle_count: int
    genmaps_mean: float
    genmaps_std: float
    stamp_mean: float
    stamp_std: float
    genmaps_writes: int
    stamp_visits: int

    @property
    def visit_bound(self) -> int:
        return 2 * self.width * self.height

    @property
    def within_bound(self) -> bool:
        return self.genmaps_writes + self.stamp_visits <= self.visit_bound

    def to_dict(self) -> dict:
        return {
            "width": self.width,
            "height": self.height,
            "triangle_count": self.triangle_count,
            "genmaps": {"mean_s": self.genmaps_mean, "std_s": self.genmaps_std},
            "stamp": {"mean_s": self.stamp_mean, "std_s": self.stamp_std},
            "genmaps_writes": self.genmaps_writes,
            "stamp_visits": self.stamp_visits,
            "visit_bound": self.visit_bound,
            "within_bound": self.within_bound,
        }


def full_coverage_projector(
    maps: localmaps.LocalSpaceMaps, decal: imageio.Texture
) -> projection.DecalProjector:
    """Axis-aligned projector whose box encloses every paintable texel,
    looking along -Z."""
    mask = maps.paintable
    if mask.any():
        pos = maps.position_map[mask]
        lo = pos.min(axis=0).astype(np.float64)
        hi = pos.max(axis=0).astype(np.float64)
    else:
        lo = np.zeros(3)
        hi = np.ones(3)
    center = (lo + hi) / 2.0
    half = np.maximum((hi - lo) / 2.0 * 1.1, 1e-3)
    return projection.DecalProjector(
        position=center, orientation=[0.0, 0.0, 0.0, 1.0], scale=half, decal=decal
    )


def checker_decal(size: int, cell: int = 8) -> imageio.Texture:
    yy, xx = np.mgrid[0:size, 0:size]
    check = ((xx // cell + yy // cell) % 2).astype(np.uint8)
    pixels = np.empty((size, size, 4), dtype=np.uint8)
    pixels[..., 0] = 255 * check
    pixels[..., 1] = 64
    pixels[..., 2] = 255 * (1 - check)
    pixels[..., 3] = 255
    return imageio.Texture(size, size, pixels)


def run_bench(
    mesh: meshmod.Mesh, size: int, iterations: int, warmup: int = 1
) -> BenchReport:
    """Time the two pipeline stages single-threaded and record the texel
    counters that witness the 2*W*H work bound."""
    for _ in range(warmup):
        localmaps.generate_local_space_maps(mesh, size, size)
    gen_times = []
    maps = None
    for _ in range(iterations):
        t0 = time.perf_counter()
        maps = localmaps.generate_local_space_maps(mesh, size, size)
        gen_times.append(time.perf_counter() - t0)

    decal = checker_decal(size)
    projector = full_coverage_projector(maps, decal)
    base = imageio.Texture.filled(size, size, (16, 16, 16, 255))
    stamp_times = []
    stats = None
    for i in range(warmup + iterations):
        texture = base.copy()
        t0 = time.perf_counter()
        stats = projection.apply_stamp(texture, maps, projector)
        elapsed = time.perf_counter() - t0
        if i >= warmup:
            stamp_times.append(elapsed)

    return BenchReport(
        width=size,
        height=size,
        triangle_count=mesh.triangle_count,
        genmaps_mean=statistics.fmean(gen_times),
        genmaps_std=statistics.stdev(gen_times) if len(gen_times) > 1 else 0.0,
        stamp_mean=statistics.fmean(stamp_times),
        stamp_std=statistics.stdev(stamp_times) if len(stamp_times) > 1 else 0.0,
        genmaps_writes=maps.texel_writes,
        stamp_visits=stats.texels_visited,
    )


def cmd_bench(args: argparse.Namespace) -> int:
    try:
        mesh = _load_mesh(args.mesh)
    except OSError as exc:
        _err(f"cannot read mesh: {exc}")
        return 1
    except meshmod.MeshError as exc:
        _err(f"invalid mesh: {exc}")
        return 2
    report = meshmod.validate_mesh(mesh, args.size, args.size)
    if not report.ok:
        _err("mesh validation failed:")
        _err(json.dumps(report.to_dict()))
        return 2

    bench = run_bench(mesh, args.size, args.iterations, args.warmup)
    if args.json:
        print(json.dumps(bench.to_dict()))
        return 0
    print(
        f"scene: {bench.triangle_count} triangles at {bench.width}x{bench.height}, "
        f"{args.iterations} iterations (single-threaded)"
    )
    print(f"genmaps: {bench.genmaps_mean:.4f} ± {bench.genmaps_std:.4f} s")
    print(f"stamp:   {bench.stamp_mean:.4f} ± {bench.stamp_std:.4f} s")
    print(
        f"visits <= 2*W*H: {str(bench.within_bound).lower()} "
        f"(genmaps writes {bench.genmaps_writes} + stamp visits {bench.stamp_visits} "
        f"= {bench.genmaps_writes + bench.stamp_visits}, bound {bench.visit_bound})"
    )
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(dilate_radius=args.dilate_radius, static_dir=args.ui)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="decalpaint")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("genmaps", help="bake local-space position/normal maps from an OBJ")
    p.add_argument("mesh", help="OBJ file (v/vt/vn with p/t/n faces)")
    p.add_argument("--size", type=int, required=True, help="map width=height in texels")
    p.add_argument("--out", required=True, help="output .lsm1 path")
    p.add_argument("--dilate-radius", type=int, default=2, help="seam padding radius (0 = raw)")
    p.add_argument("--cache-dir", default=None, help="reuse baked maps for unchanged meshes")
    p.add_argument("--debug-png", action="store_true", help="also write remapped map previews")
    p.set_defaults(func=cmd_genmaps)

    p = sub.add_parser("stamp", help="apply a JSON stamp script to a texture")
    p.add_argument("--maps", required=True, help=".lsm1 maps file")
    p.add_argument("--texture", required=True, help="target texture PNG")
    p.add_argument("--script", required=True, help="stamp script JSON")
    p.add_argument("--out", required=True, help="painted texture PNG")
    p.set_defaults(func=cmd_stamp)

    p = sub.add_parser("bench", help="time map generation and a full-coverage stamp")
    p.add_argument("mesh", help="OBJ file")
    p.add_argument("--size", type=int, default=512)
    p.add_argument("--iterations", type=int, default=20)
    p.add_argument("--warmup", type=int, default=2)
    p.add_argument("--json", action="store_true", help="machine-readable report")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("serve", help="run the painting service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--dilate-radius", type=int, default=2)
    p.add_argument("--ui", default=None, help="static directory to serve at / (the web UI)")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
