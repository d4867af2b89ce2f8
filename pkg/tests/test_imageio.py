import io

import numpy as np
import pytest
from hypothesis import given, strategies as st
from PIL import Image

import decalpaint as dp


def _png_of(mode: str, size, color) -> bytes:
    buf = io.BytesIO()
    Image.new(mode, size, color).save(buf, format="PNG")
    return buf.getvalue()


def test_load_1x1_opaque_red():
    tex = dp.load_png(_png_of("RGBA", (1, 1), (255, 0, 0, 255)))
    assert (tex.width, tex.height) == (1, 1)
    assert tex.pixels.reshape(4).tolist() == [255, 0, 0, 255]


def test_load_rgb_promotes_alpha_255():
    tex = dp.load_png(_png_of("RGB", (3, 2), (10, 20, 30)))
    assert np.all(tex.pixels[..., 3] == 255)
    assert np.all(tex.pixels[..., :3] == (10, 20, 30))


def test_load_grayscale_promotes():
    tex = dp.load_png(_png_of("L", (2, 2), 77))
    assert np.all(tex.pixels[..., :3] == 77)
    assert np.all(tex.pixels[..., 3] == 255)


def test_corrupt_header_raises():
    with pytest.raises(dp.DecodeError):
        dp.load_png(b"\x89PNG\r\n\x1a\nnot really a png")
    with pytest.raises(dp.DecodeError):
        dp.load_png(b"")


def test_round_trip_canonical(quad_maps):
    rng = np.random.default_rng(1)
    tex = dp.Texture(4, 4, rng.integers(0, 256, (4, 4, 4)).astype(np.uint8))
    assert dp.load_png(dp.save_png(tex)) == tex


def test_round_trip_transparent_black():
    tex = dp.Texture.filled(1, 1, (0, 0, 0, 0))
    assert dp.load_png(dp.save_png(tex)) == tex


def test_round_trip_random_noise():
    rng = np.random.default_rng(42)
    tex = dp.Texture(16, 16, rng.integers(0, 256, (16, 16, 4)).astype(np.uint8))
    assert dp.load_png(dp.save_png(tex)) == tex


@given(seed=st.integers(0, 2**32 - 1), w=st.integers(1, 12), h=st.integers(1, 12))
def test_round_trip_property(seed, w, h):
    rng = np.random.default_rng(seed)
    tex = dp.Texture(w, h, rng.integers(0, 256, (h, w, 4)).astype(np.uint8))
    assert dp.load_png(dp.save_png(tex)) == tex


def test_texture_validates_shape():
    with pytest.raises(ValueError):
        dp.Texture(2, 2, np.zeros((2, 3, 4), dtype=np.uint8))
    with pytest.raises(ValueError):
        dp.Texture(0, 1, np.zeros((1, 0, 4), dtype=np.uint8))
