"""decalpaint: bake local-space surface maps once, then paint decals
into a model's texture by per-texel reverse projection."""

from .imageio import DecodeError, Texture, load_png, save_png
from .localmaps import (
    BadMagic,
    BudgetExceeded,
    DimensionOverflow,
    LocalSpaceMaps,
    MapsCache,
    OverlapDetected,
    TexelCoord,
    TruncatedPayload,
    decode_lsmap,
    dilate_maps,
    encode_lsmap,
    generate_local_space_maps,
    maps_cache_get_or_generate,
)
from .mesh import (
    EmptyMesh,
    MalformedRecord,
    Mesh,
    MeshError,
    MissingAttribute,
    ValidationReport,
    Vertex,
    build_mesh,
    parse_obj,
    serialize_obj,
    validate_mesh,
)
from .projection import (
    BlendMode,
    DecalProjector,
    DimensionMismatch,
    Filter,
    StampOptions,
    StampStats,
    apply_stamp,
    blend_pixel,
    project_texel,
    sample_decal,
)

__version__ = "0.1.0"
