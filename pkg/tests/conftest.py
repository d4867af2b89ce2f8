import hypothesis
import numpy as np
import pytest

import decalpaint as dp

hypothesis.settings.register_profile("ci", max_examples=50, deadline=None)
hypothesis.settings.load_profile("ci")


CANONICAL_QUAD_OBJ = b"""\
v 0 0 0
v 1 0 0
v 1 1 0
v 0 1 0
vt 0 0
vt 1 0
vt 1 1
vt 0 1
vn 0 0 1
f 1/1/1 2/2/1 3/3/1 4/4/1
"""


@pytest.fixture
def quad_mesh() -> dp.Mesh:
    """Unit quad whose position is (u, v, 0) and normal (0, 0, 1)."""
    return dp.parse_obj(CANONICAL_QUAD_OBJ)


@pytest.fixture
def quad_maps(quad_mesh) -> dp.LocalSpaceMaps:
    return dp.generate_local_space_maps(quad_mesh, 4, 4)


def full_quad_projector(decal: dp.Texture) -> dp.DecalProjector:
    """Axis-aligned projector whose box spans the whole canonical quad."""
    return dp.DecalProjector(
        position=[0.5, 0.5, 1.0],
        orientation=[0.0, 0.0, 0.0, 1.0],
        scale=[0.5, 0.5, 2.0],
        decal=decal,
    )


def opaque_noise_decal(rng: np.random.Generator, width: int, height: int) -> dp.Texture:
    pixels = rng.integers(0, 256, (height, width, 4)).astype(np.uint8)
    pixels[..., 3] = 255
    return dp.Texture(width, height, pixels)
