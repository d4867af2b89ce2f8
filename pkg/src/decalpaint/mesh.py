"""Indexed triangle meshes: OBJ parsing, validation, and serialization.

A mesh here is the raw material for texture-space baking: per-vertex
local-space position, unit normal, and a UV coordinate in [0,1]^2.
Faces are deduplicated per (position, uv, normal) index triple so UV
seams survive parsing, and every stored triangle is counter-clockwise
in UV space with nonzero UV area.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

NORMAL_TOLERANCE = 1e-4


class MeshError(Exception):
    """Base for mesh ingestion failures."""


class MalformedRecord(MeshError):
    """An OBJ line that should parse but does not."""

    def __init__(self, line_number: int, message: str):
        self.line_number = line_number
        super().__init__(f"line {line_number}: {message}")


class MissingAttribute(MeshError):
    """A face corner lacks a texture-coordinate or normal index."""

    def __init__(self, line_number: int, message: str):
        self.line_number = line_number
        super().__init__(f"line {line_number}: {message}")


class EmptyMesh(MeshError):
    """The OBJ stream contains no faces."""


@dataclass(frozen=True)
class Vertex:
    """One deduplicated mesh vertex."""

    position: tuple[float, float, float]
    normal: tuple[float, float, float]
    uv: tuple[float, float]


@dataclass(frozen=True)
class Mesh:
    """Immutable triangle mesh, struct-of-arrays.

    positions/normals are (N,3) float32, uvs (N,2) float32, triangles
    (M,3) int32. ``dropped_degenerate`` counts UV-degenerate triangles
    removed at construction.
    """

    positions: np.ndarray
    normals: np.ndarray
    uvs: np.ndarray
    triangles: np.ndarray
    dropped_degenerate: int = 0

    def __post_init__(self):
        if self.triangles.size and (
            self.triangles.min() < 0 or self.triangles.max() >= len(self.positions)
        ):
            raise MeshError("triangle index out of range")

    @property
    def vertex_count(self) -> int:
        return len(self.positions)

    @property
    def triangle_count(self) -> int:
        return len(self.triangles)

    def vertex(self, i: int) -> Vertex:
        return Vertex(
            tuple(float(c) for c in self.positions[i]),
            tuple(float(c) for c in self.normals[i]),
            tuple(float(c) for c in self.uvs[i]),
        )

    def fingerprint(self) -> int:
        """64-bit content hash; stable across serialize/parse round trips."""
        h = hashlib.blake2b(digest_size=8)
        h.update(np.int64(self.vertex_count).tobytes())
        h.update(np.ascontiguousarray(self.positions, dtype=np.float32).tobytes())
        h.update(np.ascontiguousarray(self.normals, dtype=np.float32).tobytes())
        h.update(np.ascontiguousarray(self.uvs, dtype=np.float32).tobytes())
        h.update(np.int64(self.triangle_count).tobytes())
        h.update(np.ascontiguousarray(self.triangles, dtype=np.int32).tobytes())
        return int.from_bytes(h.digest(), "little")


@dataclass
class ValidationReport:
    """Result of checking a mesh against a map size. Never raises."""

    triangle_count: int
    dropped_degenerate: int
    uv_overlap_texels: list[tuple[int, int]]
    budget_ok: bool

    @property
    def ok(self) -> bool:
        return self.budget_ok and not self.uv_overlap_texels

    def to_dict(self) -> dict:
        return {
            "triangle_count": self.triangle_count,
            "dropped_degenerate": self.dropped_degenerate,
            "uv_overlap_texels": [list(t) for t in self.uv_overlap_texels],
            "budget_ok": self.budget_ok,
        }


def build_mesh(positions, normals, uvs, triangles) -> Mesh:
    """Assemble a Mesh, dropping UV-degenerate triangles and orienting
    the survivors counter-clockwise in UV space."""
    positions = np.ascontiguousarray(positions, dtype=np.float32).reshape(-1, 3)
    normals = np.ascontiguousarray(normals, dtype=np.float32).reshape(-1, 3)
    uvs = np.ascontiguousarray(uvs, dtype=np.float32).reshape(-1, 2)
    triangles = np.ascontiguousarray(triangles, dtype=np.int32).reshape(-1, 3)

    if len(triangles):
        a = uvs[triangles[:, 0]]
        b = uvs[triangles[:, 1]]
        c = uvs[triangles[:, 2]]
        area2 = (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (
            c[:, 0] - a[:, 0]
        )
        keep = area2 != 0.0
        dropped = int((~keep).sum())
        triangles = triangles[keep].copy()
        flip = area2[keep] < 0.0
        triangles[flip] = triangles[flip][:, [0, 2, 1]]
    else:
        dropped = 0

    return Mesh(positions, normals, uvs, triangles, dropped_degenerate=dropped)


def _renormalize(n: np.ndarray, line_number: int) -> np.ndarray:
    length = float(np.sqrt(np.float64(n[0]) ** 2 + np.float64(n[1]) ** 2 + np.float64(n[2]) ** 2))
    if length == 0.0:
        raise MalformedRecord(line_number, "zero-length normal")
    # Skip the divide when already unit-length so serialize/parse round
    # trips are bit-exact.
    if abs(length - 1.0) <= NORMAL_TOLERANCE:
        return n
    return (n / np.float32(length)).astype(np.float32)


def parse_obj(data: bytes) -> Mesh:
    """Parse a Wavefront OBJ subset: v/vt/vn records and f faces whose
    corners all carry p/t/n indices. Quads (and larger fans) triangulate
    as (0,1,2), (0,2,3), ...; vertices deduplicate on the index triple."""
    positions: list[np.ndarray] = []
    uvs: list[np.ndarray] = []
    normals: list[np.ndarray] = []
    corner_ids: dict[tuple[int, int, int], int] = {}
    out_pos: list[np.ndarray] = []
    out_uv: list[np.ndarray] = []
    out_nrm: list[np.ndarray] = []
    tris: list[tuple[int, int, int]] = []

    def parse_floats(parts, n, lineno, what):
        if len(parts) < n:
            raise MalformedRecord(lineno, f"{what} needs {n} components")
        try:
            return np.array([float(p) for p in parts[:n]], dtype=np.float32)
        except ValueError as exc:
            raise MalformedRecord(lineno, f"bad {what} component: {exc}") from None

    def corner_index(token, lineno):
        fields = token.split("/")
        if len(fields) != 3 or not fields[1] or not fields[2]:
            raise MissingAttribute(lineno, f"face corner {token!r} must be p/t/n")
        if not fields[0]:
            raise MalformedRecord(lineno, f"face corner {token!r} lacks a position index")
        try:
            pi, ti, ni = (int(f) for f in fields)
        except ValueError:
            raise MalformedRecord(lineno, f"non-integer face indices in {token!r}") from None
        if not (1 <= pi <= len(positions)):
            raise MalformedRecord(lineno, f"position index {pi} out of range")
        if not (1 <= ti <= len(uvs)):
            raise MalformedRecord(lineno, f"uv index {ti} out of range")
        if not (1 <= ni <= len(normals)):
            raise MalformedRecord(lineno, f"normal index {ni} out of range")
        key = (pi - 1, ti - 1, ni - 1)
        idx = corner_ids.get(key)
        if idx is None:
            idx = len(out_pos)
            corner_ids[key] = idx
            out_pos.append(positions[key[0]])
            out_uv.append(uvs[key[1]])
            out_nrm.append(normals[key[2]])
        return idx

    for lineno, raw in enumerate(data.splitlines(), start=1):
        try:
            line = raw.decode("utf-8").strip()
        except UnicodeDecodeError:
            raise MalformedRecord(lineno, "undecodable bytes") from None
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        keyword = parts[0]
        if keyword == "v":
            positions.append(parse_floats(parts[1:], 3, lineno, "vertex position"))
        elif keyword == "vt":
            uv = parse_floats(parts[1:], 2, lineno, "texture coordinate")
            if not (0.0 <= uv[0] <= 1.0 and 0.0 <= uv[1] <= 1.0):
                raise MalformedRecord(lineno, f"uv ({uv[0]}, {uv[1]}) outside [0,1]^2")
            uvs.append(uv)
        elif keyword == "vn":
            normals.append(_renormalize(parse_floats(parts[1:], 3, lineno, "normal"), lineno))
        elif keyword == "f":
            corners = [corner_index(tok, lineno) for tok in parts[1:]]
            if len(corners) < 3:
                raise MalformedRecord(lineno, "face needs at least 3 corners")
            for k in range(1, len(corners) - 1):
                tris.append((corners[0], corners[k], corners[k + 1]))
        # Other keywords (o, g, s, usemtl, mtllib, ...) carry no geometry
        # for this pipeline and are skipped.

    if not tris:
        raise EmptyMesh("OBJ stream contains no faces")

    return build_mesh(
        np.array(out_pos, dtype=np.float32),
        np.array(out_nrm, dtype=np.float32),
        np.array(out_uv, dtype=np.float32),
        np.array(tris, dtype=np.int32),
    )


def _fmt(x: np.float32) -> str:
    return np.format_float_positional(np.float32(x), unique=True, trim="0")


def serialize_obj(mesh: Mesh) -> bytes:
    """Write the mesh back as OBJ. parse_obj(serialize_obj(m)) reproduces
    positions/uvs/normals/topology bit-exactly."""
    lines = []
    for p in mesh.positions:
        lines.append(f"v {_fmt(p[0])} {_fmt(p[1])} {_fmt(p[2])}")
    for t in mesh.uvs:
        lines.append(f"vt {_fmt(t[0])} {_fmt(t[1])}")
    for n in mesh.normals:
        lines.append(f"vn {_fmt(n[0])} {_fmt(n[1])} {_fmt(n[2])}")
    for tri in mesh.triangles:
        lines.append("f " + " ".join(f"{i + 1}/{i + 1}/{i + 1}" for i in tri))
    return ("\n".join(lines) + "\n").encode("utf-8")


def validate_mesh(mesh: Mesh, map_width: int, map_height: int) -> ValidationReport:
    """Check the triangle budget and per-texel UV uniqueness at the exact
    granularity the rasterizer consumes. Reports, never raises."""
    from .localmaps import texel_claim_counts

    claims = texel_claim_counts(mesh, map_width, map_height)
    ys, xs = np.nonzero(claims >= 2)
    overlap = [(int(x), int(y)) for y, x in sorted(zip(ys.tolist(), xs.tolist()))]
    return ValidationReport(
        triangle_count=mesh.triangle_count,
        dropped_degenerate=mesh.dropped_degenerate,
        uv_overlap_texels=overlap,
        budget_ok=mesh.triangle_count <= map_width * map_height,
    )
