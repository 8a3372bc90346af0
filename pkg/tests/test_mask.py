"""Edge extraction, region transport, and mask composition."""

import math
import zlib

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import uigc
from uigc.errors import CorruptRegion, DimensionMismatch, ImageTooSmall
from uigc.grid import group_of


def grids(max_side=24):
    return st.tuples(
        st.integers(1, max_side), st.integers(1, max_side), st.integers(0, 2**32 - 1)
    ).map(
        lambda t: (np.random.default_rng(t[2]).random((t[0], t[1])) < 0.3).astype(
            np.uint8
        )
    )


class TestExtractEdges:
    def test_constant_image_has_no_edges(self):
        img = np.full((32, 32, 3), 77, dtype=np.uint8)
        region = uigc.extract_edges(img, 90.0, 0.05, 8)
        assert region.shape == (4, 4) and (region == 0).all()

    def test_vertical_step_inside_one_patch_column(self):
        # step at pixel column 12: gradient lives on columns 11 and 12,
        # both inside token column 1; hand-computed Sobel response = 4*255
        img = np.zeros((32, 32, 3), dtype=np.uint8)
        img[:, 12:] = 255
        region = uigc.extract_edges(img, 90.0, 0.05, 8)
        expected = np.zeros((4, 4), dtype=np.uint8)
        expected[:, 1] = 1
        assert region.tolist() == expected.tolist()

    def test_median_threshold_on_noise(self):
        rng = np.random.default_rng(0)
        img = rng.integers(0, 256, (128, 128, 3)).astype(np.uint8)
        luma = (
            img[:, :, 0].astype(np.int64) * 299
            + img[:, :, 1].astype(np.int64) * 587
            + img[:, :, 2].astype(np.int64) * 114
        ) // 1000
        from uigc.kernels import sobel_magnitude

        mag = sobel_magnitude(luma)
        flat = np.sort(mag, axis=None)
        threshold = flat[int(math.floor(0.5 * (flat.size - 1)))]
        frac = float((mag > threshold).mean())
        assert abs(frac - 0.5) <= 0.05

    @pytest.mark.parametrize("q", [0.0, -3.0, 100.0, 120.0])
    def test_percentile_domain(self, q):
        img = np.zeros((16, 16, 3), dtype=np.uint8)
        with pytest.raises(ValueError):
            uigc.extract_edges(img, q, 0.05, 8)

    def test_cell_threshold_domain(self):
        img = np.zeros((16, 16, 3), dtype=np.uint8)
        with pytest.raises(ValueError):
            uigc.extract_edges(img, 90.0, 0.0, 8)
        with pytest.raises(ValueError):
            uigc.extract_edges(img, 90.0, 1.5, 8)

    def test_image_too_small(self):
        with pytest.raises(ImageTooSmall):
            uigc.extract_edges(np.zeros((4, 40, 3), dtype=np.uint8), 90.0, 0.05, 8)


class TestResample:
    def test_zero_region_stays_zero(self):
        low = uigc.downsample_region(np.zeros((8, 8), dtype=np.uint8))
        assert low.shape == (4, 4) and (low == 0).all()

    def test_single_bit_position(self):
        region = np.zeros((8, 8), dtype=np.uint8)
        region[3, 5] = 1
        low = uigc.downsample_region(region)
        expected = np.zeros((4, 4), dtype=np.uint8)
        expected[1, 2] = 1
        assert low.tolist() == expected.tolist()

    def test_odd_dimensions(self):
        rng = np.random.default_rng(4)
        region = (rng.random((9, 9)) < 0.4).astype(np.uint8)
        low = uigc.downsample_region(region)
        assert low.shape == (5, 5)
        # brute-force oracle: every set bit must map to a set low bit
        for i in range(9):
            for j in range(9):
                if region[i, j]:
                    assert low[i // 2, j // 2] == 1

    def test_upsample_all_ones(self):
        assert (uigc.upsample_region(np.ones((4, 4), dtype=np.uint8), 8, 8) == 1).all()

    def test_upsample_single_bit(self):
        low = np.zeros((4, 4), dtype=np.uint8)
        low[1, 2] = 1
        high = uigc.upsample_region(low, 8, 8)
        want = np.zeros((8, 8), dtype=np.uint8)
        want[2:4, 4:6] = 1
        assert high.tolist() == want.tolist()

    def test_upsample_dimension_check(self):
        with pytest.raises(DimensionMismatch):
            uigc.upsample_region(np.zeros((3, 3), dtype=np.uint8), 8, 8)

    @given(grids())
    @settings(max_examples=80, deadline=None)
    def test_superset_property(self, region):
        h, w = region.shape
        rebuilt = uigc.upsample_region(uigc.downsample_region(region), h, w)
        assert (rebuilt >= region).all()

    def test_superset_exhaustive_small(self):
        for h in range(1, 5):
            for w in range(1, 5):
                for bits in range(1 << (h * w)):
                    region = np.array(
                        [(bits >> n) & 1 for n in range(h * w)], dtype=np.uint8
                    ).reshape(h, w)
                    rebuilt = uigc.upsample_region(
                        uigc.downsample_region(region), h, w
                    )
                    assert (rebuilt >= region).all()


class TestTemplate:
    def test_two_by_two(self):
        assert uigc.checkerboard_template(2, 2).tolist() == [[1, 0], [0, 1]]

    def test_count_on_default_window(self):
        assert int(uigc.checkerboard_template(18, 18).sum()) == 162

    def test_matches_anchor_groups_exhaustively(self):
        for h, w in [(1, 1), (2, 3), (5, 5), (64, 64)]:
            t = uigc.checkerboard_template(h, w)
            assert int(t.sum()) == math.ceil(h * w / 2)
            for i in range(h):
                for j in range(w):
                    assert bool(t[i, j]) == (group_of(i, j) in (0, 1))


class TestCompose:
    def test_empty_region_yields_template(self):
        t = uigc.checkerboard_template(6, 6)
        assert (uigc.compose_mask(t, np.zeros((6, 6))) == t).all()

    def test_full_region_keeps_everything(self):
        t = uigc.checkerboard_template(6, 6)
        assert (uigc.compose_mask(t, np.ones((6, 6))) == 1).all()

    @given(grids(12), st.integers(0, 2**32 - 1))
    @settings(max_examples=50, deadline=None)
    def test_popcount_matches_brute_force(self, region, seed):
        h, w = region.shape
        roi = (np.random.default_rng(seed).random((h, w)) < 0.2).astype(np.uint8)
        t = uigc.checkerboard_template(h, w)
        m = uigc.compose_mask(t, region, roi)
        assert int(m.sum()) == int((t | region | roi).sum())
        assert int(m.sum()) >= math.ceil(h * w / 2)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            uigc.compose_mask(np.ones((2, 2)), np.ones((3, 2)))
        with pytest.raises(DimensionMismatch):
            uigc.compose_mask(np.ones((2, 2)), np.ones((2, 2)), np.ones((1, 2)))


class TestRegionTransport:
    def test_zero_grid_packs_to_zero_plaintext(self):
        packed = uigc.pack_region(np.zeros((4, 4), dtype=np.uint8))
        assert zlib.decompress(packed) == b"\x00\x00"

    def test_all_ones_compresses_below_packed_size(self):
        data = uigc.pack_region(np.ones((16, 16), dtype=np.uint8))
        assert len(data) < 32  # 256 bits = 32 packed bytes

    @given(grids())
    @settings(max_examples=200, deadline=None)
    def test_roundtrip_exact(self, region):
        data = uigc.pack_region(region)
        assert (uigc.unpack_region(data, region.shape) == region).all()

    def test_corrupt_stream_rejected(self):
        with pytest.raises(CorruptRegion):
            uigc.unpack_region(b"not zlib at all", (4, 4))

    def test_wrong_length_rejected(self):
        data = uigc.pack_region(np.zeros((4, 4), dtype=np.uint8))
        with pytest.raises(CorruptRegion):
            uigc.unpack_region(data, (40, 40))
