import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from PIL import Image as PILImage

from covidx.imageprep import (
    DecodeError,
    Image,
    PrepConfig,
    contrast_stretch,
    decode_image,
    median_denoise,
    preprocess,
    resize,
)


def encode(arr: np.ndarray, fmt: str, mode: str = "L", **save_kwargs) -> bytes:
    buf = io.BytesIO()
    PILImage.fromarray(arr, mode=mode).save(buf, format=fmt, **save_kwargs)
    return buf.getvalue()


class TestImageType:
    def test_pixels_are_read_only_and_copied(self):
        src = np.full((4, 4), 9.0)
        img = Image(src)
        src[0, 0] = 200.0
        assert img.pixels[0, 0] == 9.0
        with pytest.raises(ValueError):
            img.pixels[0, 0] = 1.0

    def test_rejects_bad_shapes_and_ranges(self):
        with pytest.raises(ValueError):
            Image(np.zeros((2, 2, 3)))
        with pytest.raises(ValueError):
            Image(np.full((2, 2), -1.0))
        with pytest.raises(ValueError):
            Image(np.full((2, 2), 256.0))
        with pytest.raises(ValueError):
            Image(np.full((2, 2), np.nan))

    def test_dimensions(self):
        img = Image(np.zeros((3, 5)))
        assert (img.height, img.width, img.channels) == (3, 5, 1)


class TestDecode:
    def test_gray_png_round_trip_exact(self):
        arr = np.arange(64, dtype=np.uint8).reshape(8, 8)
        img = decode_image(encode(arr, "PNG"))
        assert np.array_equal(img.pixels, arr.astype(np.float64))

    def test_constant_jpeg_within_tolerance(self):
        arr = np.full((32, 32), 200, dtype=np.uint8)
        img = decode_image(encode(arr, "JPEG", quality=95))
        assert np.all(np.abs(img.pixels - 200.0) <= 2.0)

    def test_rgb_collapses_to_luma(self):
        rgb = np.zeros((4, 4, 3), dtype=np.uint8)
        rgb[..., 0] = 100  # pure red
        img = decode_image(encode(rgb, "PNG", mode="RGB"))
        assert np.allclose(img.pixels, 0.299 * 100.0)

    def test_garbage_bytes_raise(self):
        with pytest.raises(DecodeError):
            decode_image(b"not an image at all")

    def test_empty_bytes_raise(self):
        with pytest.raises(DecodeError):
            decode_image(b"")

    def test_truncated_png_raises(self):
        data = encode(np.zeros((16, 16), dtype=np.uint8), "PNG")
        with pytest.raises(DecodeError):
            decode_image(data[: len(data) // 2])

    def test_unsupported_format_raises(self):
        data = encode(np.zeros((8, 8), dtype=np.uint8), "BMP")
        with pytest.raises(DecodeError):
            decode_image(data)


class TestResize:
    def test_identity_when_size_matches(self):
        img = Image(np.random.default_rng(0).uniform(0, 255, (7, 9)))
        out = resize(img, 9, 7)
        assert out is img

    def test_constant_preserved_exactly(self):
        img = Image(np.full((5, 7), 131.7))
        out = resize(img, 313, 313)
        assert np.all(out.pixels == 131.7)

    @settings(max_examples=25, deadline=None)
    @given(
        value=st.floats(min_value=0.0, max_value=255.0, allow_nan=False),
        in_w=st.integers(1, 12),
        in_h=st.integers(1, 12),
        out_w=st.integers(1, 40),
        out_h=st.integers(1, 40),
    )
    def test_constant_preserved_for_any_geometry(self, value, in_w, in_h, out_w, out_h):
        out = resize(Image(np.full((in_h, in_w), value)), out_w, out_h)
        assert out.pixels.shape == (out_h, out_w)
        assert np.all(out.pixels == value)

    def test_two_by_two_average(self):
        img = Image(np.array([[0.0, 100.0], [50.0, 250.0]]))
        out = resize(img, 1, 1)
        assert out.pixels[0, 0] == pytest.approx(100.0)

    def test_upsample_stays_in_input_range(self):
        rng = np.random.default_rng(1)
        img = Image(rng.uniform(10.0, 90.0, (6, 6)))
        out = resize(img, 19, 23)
        assert out.pixels.min() >= 10.0 - 1e-9
        assert out.pixels.max() <= 90.0 + 1e-9

    def test_rejects_nonpositive_target(self):
        img = Image(np.zeros((4, 4)))
        with pytest.raises(ValueError):
            resize(img, 0, 4)


class TestMedianDenoise:
    def test_constant_unchanged(self):
        img = Image(np.full((6, 6), 42.0))
        assert np.array_equal(median_denoise(img, 3).pixels, img.pixels)

    def test_single_impulse_removed(self):
        arr = np.full((7, 7), 10.0)
        arr[3, 3] = 250.0
        out = median_denoise(Image(arr), 3)
        assert np.all(out.pixels == 10.0)

    def test_kernel_one_is_identity(self):
        img = Image(np.random.default_rng(2).uniform(0, 255, (5, 5)))
        assert median_denoise(img, 1) is img

    def test_even_kernel_rejected(self):
        with pytest.raises(ValueError):
            median_denoise(Image(np.zeros((5, 5))), 2)

    def test_oversized_kernel_rejected(self):
        with pytest.raises(ValueError):
            median_denoise(Image(np.zeros((3, 3))), 5)

    def test_edge_replication(self):
        # A bright left column survives at the border because clamped
        # neighborhoods replicate it.
        arr = np.zeros((5, 5))
        arr[:, 0] = 240.0
        arr[:, 1] = 240.0
        out = median_denoise(Image(arr), 3)
        assert np.all(out.pixels[:, 0] == 240.0)


class TestContrastStretch:
    def test_constant_returned_unchanged(self):
        img = Image(np.full((8, 8), 77.0))
        assert contrast_stretch(img, 2.0, 98.0) is img

    def test_full_range_mapping(self):
        arr = np.linspace(0.0, 255.0, 101).reshape(-1)
        img = Image(np.tile(arr, (3, 1)))
        out = contrast_stretch(img, 0.0, 100.0)
        assert out.pixels.min() == pytest.approx(0.0)
        assert out.pixels.max() == pytest.approx(255.0)

    def test_percentiles_map_to_extremes(self):
        rng = np.random.default_rng(3)
        img = Image(rng.uniform(40.0, 200.0, (32, 32)))
        out = contrast_stretch(img, 2.0, 98.0)
        a = np.percentile(img.pixels, 2.0)
        b = np.percentile(img.pixels, 98.0)
        expected = np.clip(255.0 * (img.pixels - a) / (b - a), 0.0, 255.0)
        assert np.allclose(out.pixels, expected)

    def test_monotone_nondecreasing(self):
        rng = np.random.default_rng(4)
        img = Image(rng.uniform(0, 255, (16, 16)))
        out = contrast_stretch(img, 5.0, 95.0)
        order_in = np.argsort(img.pixels.ravel(), kind="stable")
        sorted_out = out.pixels.ravel()[order_in]
        assert np.all(np.diff(sorted_out) >= -1e-12)

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 10_000))
    def test_output_bounds(self, seed):
        rng = np.random.default_rng(seed)
        img = Image(rng.uniform(0, 255, (10, 10)))
        out = contrast_stretch(img, 2.0, 98.0)
        assert out.pixels.min() >= 0.0
        assert out.pixels.max() <= 255.0

    def test_bad_percentiles_rejected(self):
        img = Image(np.zeros((4, 4)))
        with pytest.raises(ValueError):
            contrast_stretch(img, 50.0, 50.0)


class TestPrepConfig:
    def test_defaults(self):
        cfg = PrepConfig()
        assert cfg.target_size == 313
        assert cfg.median_kernel == 3
        assert (cfg.stretch_low_pct, cfg.stretch_high_pct) == (2.0, 98.0)

    def test_round_trip_dict(self):
        cfg = PrepConfig(target_size=128, median_kernel=5, stretch_low_pct=1.0, stretch_high_pct=99.0)
        assert PrepConfig.from_dict(cfg.to_dict()) == cfg

    def test_validation(self):
        with pytest.raises(ValueError):
            PrepConfig(target_size=0)
        with pytest.raises(ValueError):
            PrepConfig(median_kernel=4)
        with pytest.raises(ValueError):
            PrepConfig(stretch_low_pct=98.0, stretch_high_pct=2.0)


class TestPreprocess:
    def test_output_geometry_and_range(self):
        rng = np.random.default_rng(5)
        data = encode(rng.integers(0, 256, (96, 128), dtype=np.uint8).astype(np.uint8), "PNG")
        img = preprocess(data)
        assert img.pixels.shape == (313, 313)
        assert img.pixels.dtype == np.float64
        assert img.pixels.min() >= 0.0 and img.pixels.max() <= 255.0

    def test_deterministic(self):
        data = encode(np.random.default_rng(6).integers(0, 256, (64, 64)).astype(np.uint8), "PNG")
        a = preprocess(data)
        b = preprocess(data)
        assert np.array_equal(a.pixels, b.pixels)

    def test_custom_config(self):
        data = encode(np.full((40, 40), 90, dtype=np.uint8), "PNG")
        img = preprocess(data, PrepConfig(target_size=64, median_kernel=1))
        assert img.pixels.shape == (64, 64)

    def test_decode_error_propagates(self):
        with pytest.raises(DecodeError):
            preprocess(b"junk")
