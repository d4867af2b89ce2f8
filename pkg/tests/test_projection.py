import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import decalpaint as dp
from conftest import full_quad_projector, opaque_noise_decal
from oracles import project_texel_reference, stamp_reference
from scenegen import random_scene, random_unit_quaternion


@pytest.fixture
def basic_projector():
    return dp.DecalProjector(
        position=[0.5, 0.5, 1.0],
        orientation=[0.0, 0.0, 0.0, 1.0],
        scale=[0.5, 0.5, 2.0],
        decal=dp.Texture.filled(4, 4, (255, 0, 0, 255)),
    )


class TestProjectTexel:
    def test_center_on_axis(self, basic_projector):
        uv, depth = dp.project_texel([0.5, 0.5, 0.0], [0.0, 0.0, 1.0], basic_projector)
        assert uv == pytest.approx([0.5, 0.5])
        assert depth == pytest.approx(0.5)

    def test_off_center(self, basic_projector):
        uv, depth = dp.project_texel([0.9, 0.5, 0.0], [0.0, 0.0, 1.0], basic_projector)
        assert uv == pytest.approx([0.9, 0.5])
        assert depth == pytest.approx(0.5)

    def test_back_face_culled(self, basic_projector):
        assert dp.project_texel([0.5, 0.5, 0.0], [0.0, 0.0, -1.0], basic_projector) is None

    def test_outside_box(self, basic_projector):
        assert dp.project_texel([1.1, 0.5, 0.0], [0.0, 0.0, 1.0], basic_projector) is None

    def test_perpendicular_normal_is_culled(self, basic_projector):
        # dot(normal, forward) == 0 exactly; the >= comparison culls it
        assert dp.project_texel([0.5, 0.5, 0.0], [1.0, 0.0, 0.0], basic_projector) is None

    def test_cull_cosine_threshold(self, basic_projector):
        grazing = np.array([1.0, 0.0, 0.2])  # barely front-facing: dot = -0.196
        grazing /= np.linalg.norm(grazing)
        assert dp.project_texel([0.5, 0.5, 0.0], grazing, basic_projector) is not None
        assert (
            dp.project_texel([0.5, 0.5, 0.0], grazing, basic_projector, cull_cosine=-0.5)
            is None
        )

    @given(seed=st.integers(0, 2**32 - 1))
    @settings(max_examples=50)
    def test_matches_ray_cast_reference(self, seed):
        rng = np.random.default_rng(seed)
        projector = dp.DecalProjector(
            position=rng.uniform(-1, 1, 3),
            orientation=random_unit_quaternion(rng),
            scale=rng.uniform(0.2, 2.0, 3),
            decal=dp.Texture.filled(2, 2, (1, 2, 3, 255)),
        )
        position = rng.uniform(-2, 2, 3)
        normal = rng.normal(size=3)
        normal /= np.linalg.norm(normal)
        ours = dp.project_texel(position, normal, projector)
        ref = project_texel_reference(position, normal, projector)
        if ours is None:
            assert ref is None
        else:
            assert ref is not None
            assert ours[0] == pytest.approx(ref[0], abs=1e-12)
            assert ours[1] == pytest.approx(ref[1], abs=1e-12)


class TestSampleDecal:
    @pytest.fixture
    def two_by_two(self):
        pixels = np.array(
            [
                [[255, 0, 0, 255], [0, 255, 0, 255]],
                [[0, 0, 255, 255], [255, 255, 255, 255]],
            ],
            dtype=np.uint8,
        )
        return dp.Texture(2, 2, pixels)

    def test_nearest_top_left(self, two_by_two):
        assert dp.sample_decal(two_by_two, (0.1, 0.1)).tolist() == [255, 0, 0, 255]

    def test_nearest_clamps_at_one(self, two_by_two):
        assert dp.sample_decal(two_by_two, (1.0, 1.0)).tolist() == [255, 255, 255, 255]

    def test_bilinear_center_is_mean(self, two_by_two):
        out = dp.sample_decal(two_by_two, (0.5, 0.5), dp.Filter.BILINEAR)
        assert out.tolist() == [128, 128, 128, 255]

    def test_bilinear_corner_clamps_to_edge_texel(self, two_by_two):
        out = dp.sample_decal(two_by_two, (0.0, 0.0), dp.Filter.BILINEAR)
        assert out.tolist() == [255, 0, 0, 255]


class TestBlendPixel:
    def test_copy_opaque(self):
        out = dp.blend_pixel((1, 2, 3, 4), (9, 8, 7, 255), dp.BlendMode.COPY)
        assert out.tolist() == [9, 8, 7, 255]

    def test_copy_respects_threshold(self):
        dst = (1, 2, 3, 4)
        kept = dp.blend_pixel(dst, (9, 8, 7, 100), dp.BlendMode.COPY, alpha_threshold=0.5)
        assert kept.tolist() == list(dst)
        copied = dp.blend_pixel(dst, (9, 8, 7, 200), dp.BlendMode.COPY, alpha_threshold=0.5)
        assert copied.tolist() == [9, 8, 7, 200]

    def test_copy_zero_threshold_copies_barely_visible(self):
        out = dp.blend_pixel((1, 2, 3, 255), (9, 8, 7, 1), dp.BlendMode.COPY)
        assert out.tolist() == [9, 8, 7, 1]

    def test_alpha_over_transparent_src_is_identity(self):
        out = dp.blend_pixel((10, 20, 30, 200), (99, 99, 99, 0), dp.BlendMode.ALPHA_OVER)
        assert out.tolist() == [10, 20, 30, 200]

    def test_alpha_over_half_white_on_black(self):
        out = dp.blend_pixel((0, 0, 0, 255), (255, 255, 255, 128), dp.BlendMode.ALPHA_OVER)
        assert out.tolist() == [128, 128, 128, 255]

    @given(
        dst=st.tuples(*[st.integers(0, 255)] * 4),
        src=st.tuples(*[st.integers(0, 255)] * 4),
    )
    def test_alpha_over_stays_in_range_and_alpha_grows(self, dst, src):
        out = dp.blend_pixel(dst, src, dp.BlendMode.ALPHA_OVER)
        assert out.dtype == np.uint8
        assert int(out[3]) >= max(0, int(dst[3]) - 1)  # coverage never shrinks


class TestApplyStamp:
    def test_full_coverage_paints_decal_exactly(self, quad_maps):
        rng = np.random.default_rng(5)
        decal = opaque_noise_decal(rng, 4, 4)
        texture = dp.Texture.filled(4, 4, (0, 0, 0, 255))
        stats = dp.apply_stamp(texture, quad_maps, full_quad_projector(decal))
        assert stats.to_dict() == {
            "painted": 16,
            "culled_backface": 0,
            "out_of_bounds": 0,
            "uncovered": 0,
            "transparent_skipped": 0,
        }
        assert np.array_equal(texture.pixels, decal.pixels)

    def test_negated_normals_all_culled(self, quad_mesh):
        flipped = dp.build_mesh(
            quad_mesh.positions, -quad_mesh.normals, quad_mesh.uvs, quad_mesh.triangles
        )
        maps = dp.generate_local_space_maps(flipped, 4, 4)
        rng = np.random.default_rng(5)
        decal = opaque_noise_decal(rng, 4, 4)
        texture = dp.Texture.filled(4, 4, (7, 7, 7, 255))
        before = texture.pixels.copy()
        stats = dp.apply_stamp(texture, maps, full_quad_projector(decal))
        assert stats.culled_backface == 16
        assert stats.painted == 0
        assert np.array_equal(texture.pixels, before)

    def test_uncovered_map_untouched(self):
        maps = dp.LocalSpaceMaps(
            4,
            4,
            np.zeros((4, 4, 3), np.float32),
            np.zeros((4, 4, 3), np.float32),
            np.zeros((4, 4), bool),
            np.zeros((4, 4), bool),
            0,
        )
        texture = dp.Texture.filled(4, 4, (1, 2, 3, 4))
        before = texture.pixels.copy()
        stats = dp.apply_stamp(texture, maps, full_quad_projector(dp.Texture.filled(4, 4)))
        assert stats.uncovered == 16
        assert np.array_equal(texture.pixels, before)

    def test_dimension_mismatch(self, quad_maps):
        with pytest.raises(dp.DimensionMismatch):
            dp.apply_stamp(
                dp.Texture.filled(8, 8),
                quad_maps,
                full_quad_projector(dp.Texture.filled(4, 4)),
            )

    def test_copy_is_idempotent(self, quad_maps):
        rng = np.random.default_rng(11)
        decal = opaque_noise_decal(rng, 7, 5)
        projector = full_quad_projector(decal)
        once = dp.Texture.filled(4, 4, (9, 9, 9, 255))
        dp.apply_stamp(once, quad_maps, projector)
        twice = once.copy()
        dp.apply_stamp(twice, quad_maps, projector)
        assert np.array_equal(once.pixels, twice.pixels)

    def test_transparent_texels_skipped_and_untouched(self, quad_maps):
        pixels = np.zeros((4, 4, 4), dtype=np.uint8)
        pixels[:2, :, :] = (200, 100, 50, 255)  # top half opaque
        decal = dp.Texture(4, 4, pixels)
        texture = dp.Texture.filled(4, 4, (1, 2, 3, 4))
        before = texture.pixels.copy()
        stats = dp.apply_stamp(texture, quad_maps, full_quad_projector(decal))
        assert stats.painted == 8
        assert stats.transparent_skipped == 8
        assert np.array_equal(texture.pixels[2:], before[2:])  # bottom rows untouched

    @given(seed=st.integers(0, 2**32 - 1))
    @settings(max_examples=15)
    def test_matches_ray_cast_oracle(self, seed):
        rng = np.random.default_rng(seed)
        _, maps, texture, projector, options = random_scene(rng, max_map=32)
        ours = texture.copy()
        theirs = texture.copy()
        stats = dp.apply_stamp(ours, maps, projector, options)
        ref_stats = stamp_reference(theirs, maps, projector, options)
        assert stats == ref_stats
        assert np.array_equal(ours.pixels, theirs.pixels)
        assert stats.texels_visited == maps.width * maps.height

    @given(seed=st.integers(0, 2**32 - 1))
    @settings(max_examples=15)
    def test_untouched_outside_footprint(self, seed):
        rng = np.random.default_rng(seed)
        _, maps, texture, projector, options = random_scene(rng, max_map=24)
        before = texture.pixels.copy()
        dp.apply_stamp(texture, maps, projector, options)
        touched = np.zeros((maps.height, maps.width), dtype=bool)
        ys, xs = np.nonzero(maps.paintable)
        for y, x in zip(ys, xs):
            hit = dp.project_texel(
                maps.position_map[y, x], maps.normal_map[y, x], projector, options.cull_cosine
            )
            if hit is not None:
                touched[y, x] = True
        assert np.array_equal(texture.pixels[~touched], before[~touched])

    @given(seed=st.integers(0, 2**32 - 1))
    @settings(max_examples=15)
    def test_projector_equivariance(self, seed):
        rng = np.random.default_rng(seed)
        h, w = int(rng.integers(4, 17)), int(rng.integers(4, 17))
        coverage = rng.uniform(size=(h, w)) < 0.7
        position = rng.uniform(-1, 1, (h, w, 3)).astype(np.float32)
        normal = rng.normal(size=(h, w, 3))
        normal /= np.linalg.norm(normal, axis=-1, keepdims=True)
        normal = normal.astype(np.float32)
        position[~coverage] = 0
        normal[~coverage] = 0
        maps = dp.LocalSpaceMaps(
            w, h, position, normal, coverage, np.zeros_like(coverage), 0
        )
        decal = opaque_noise_decal(rng, 6, 6)
        projector = dp.DecalProjector(
            position=rng.uniform(-1, 1, 3),
            orientation=random_unit_quaternion(rng),
            scale=rng.uniform(0.3, 2.0, 3),
            decal=decal,
        )
        texture = dp.Texture(w, h, rng.integers(0, 256, (h, w, 4)).astype(np.uint8))

        # rigid motion: rotation R (from quaternion) plus translation
        q = random_unit_quaternion(rng)
        t = rng.uniform(-3, 3, 3)
        rx, ry, fz = dp.projection.quaternion_basis(q)
        R = np.stack([rx, ry, -fz], axis=1)  # column basis: world = R @ local

        moved_position = (position.reshape(-1, 3) @ R.T + t).astype(np.float32).reshape(h, w, 3)
        moved_normal = (normal.reshape(-1, 3) @ R.T).astype(np.float32).reshape(h, w, 3)
        moved_position[~coverage] = 0
        moved_normal[~coverage] = 0
        moved_maps = dp.LocalSpaceMaps(
            w, h, moved_position, moved_normal, coverage, np.zeros_like(coverage), 0
        )

        def quat_mul(a, b):  # (x,y,z,w) Hamilton product a*b
            ax, ay, az, aw = a
            bx, by, bz, bw = b
            return np.array(
                [
                    aw * bx + ax * bw + ay * bz - az * by,
                    aw * by - ax * bz + ay * bw + az * bx,
                    aw * bz + ax * by - ay * bx + az * bw,
                    aw * bw - ax * bx - ay * by - az * bz,
                ]
            )

        moved_projector = dp.DecalProjector(
            position=R @ projector.position + t,
            orientation=quat_mul(q, projector.orientation),
            scale=projector.scale,
            decal=decal,
        )

        base = texture.copy()
        moved = texture.copy()
        stats_base = dp.apply_stamp(base, maps, projector)
        stats_moved = dp.apply_stamp(moved, moved_maps, moved_projector)
        assert stats_base == stats_moved
        assert np.array_equal(base.pixels, moved.pixels)


def test_projector_validation():
    decal = dp.Texture.filled(1, 1)
    with pytest.raises(ValueError):
        dp.DecalProjector([0, 0, 0], [0, 0, 0, 1], [-1, 1, 1], decal)
    with pytest.raises(ValueError):
        dp.DecalProjector([0, 0, 0], [0, 0, 0, 0], [1, 1, 1], decal)
    proj = dp.DecalProjector([0, 0, 0], [0, 0, 0, 2], [1, 1, 1], decal)
    assert np.linalg.norm(proj.orientation) == pytest.approx(1.0)


def test_stamp_options_validation():
    with pytest.raises(ValueError):
        dp.StampOptions(cull_cosine=1.5)
    with pytest.raises(ValueError):
        dp.StampOptions(alpha_threshold=-0.1)
