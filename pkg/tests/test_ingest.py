import numpy as np
import pytest
from PIL import Image

from tomouq import FormatError
from tomouq.harness import bilinear_resample, center_crop, ingest_image
from tomouq.image_io import load_pgm, load_raw_image, save_pgm, save_raw_image


def test_all_white_png_reads_as_ones(tmp_path):
    path = tmp_path / "white.png"
    Image.fromarray(np.full((12, 12), 255, dtype=np.uint8), mode="L").save(path)
    image = ingest_image(path)
    assert np.all(image == 1.0)


def test_16bit_pgm_roundtrip_exact(tmp_path):
    rng = np.random.default_rng(0)
    codes = rng.integers(0, 65536, size=(20, 24))
    image = codes / 65535.0
    path = tmp_path / "img.pgm"
    save_pgm(path, image, bit_depth=16)
    again = ingest_image(path)
    assert np.array_equal(np.rint(again * 65535).astype(int), codes)


def test_8bit_pgm_roundtrip(tmp_path):
    image = np.linspace(0, 1, 64).reshape(8, 8)
    path = tmp_path / "img8.pgm"
    save_pgm(path, image, bit_depth=8)
    again = load_pgm(path)
    assert np.allclose(again, image, atol=1.0 / 255)


def test_pgm_comments_skipped(tmp_path):
    path = tmp_path / "c.pgm"
    payload = bytes(range(4))
    path.write_bytes(b"P5\n# a comment\n2 2\n# another\n255\n" + payload)
    image = load_pgm(path)
    assert image.shape == (2, 2)
    assert image[0, 1] == pytest.approx(1 / 255)


def test_color_png_rejected(tmp_path):
    path = tmp_path / "color.png"
    Image.fromarray(np.zeros((8, 8, 3), dtype=np.uint8), mode="RGB").save(path)
    with pytest.raises(FormatError):
        ingest_image(path)


def test_unknown_extension_rejected(tmp_path):
    path = tmp_path / "image.tiff"
    path.write_bytes(b"II*\x00")
    with pytest.raises(FormatError):
        ingest_image(path)


def test_center_crop():
    image = np.arange(30.0).reshape(5, 6)
    cropped = center_crop(image, 3)
    assert cropped.shape == (3, 3)
    assert cropped[0, 0] == image[1, 1]


def _bilinear_oracle(image, out_shape):
    in_h, in_w = image.shape
    out = np.zeros(out_shape)
    for r in range(out_shape[0]):
        for c in range(out_shape[1]):
            y = min(max((r + 0.5) * in_h / out_shape[0] - 0.5, 0), in_h - 1)
            x = min(max((c + 0.5) * in_w / out_shape[1] - 0.5, 0), in_w - 1)
            y0, x0 = int(np.floor(y)), int(np.floor(x))
            y1, x1 = min(y0 + 1, in_h - 1), min(x0 + 1, in_w - 1)
            wy, wx = y - y0, x - x0
            out[r, c] = (
                image[y0, x0] * (1 - wy) * (1 - wx)
                + image[y0, x1] * (1 - wy) * wx
                + image[y1, x0] * wy * (1 - wx)
                + image[y1, x1] * wy * wx
            )
    return out


def test_bilinear_checkerboard_matches_loop_oracle():
    board = np.indices((16, 16)).sum(axis=0) % 2.0
    resampled = bilinear_resample(board, (10, 10))
    assert np.allclose(resampled, _bilinear_oracle(board, (10, 10)), atol=1e-12)


def test_ingest_with_target_size(tmp_path):
    rng = np.random.default_rng(1)
    image = rng.random((40, 30))
    path = tmp_path / "img.pgm"
    save_pgm(path, image, bit_depth=16)
    out = ingest_image(path, target_size=16)
    assert out.shape == (16, 16)
    assert out.min() >= 0.0 and out.max() <= 1.0


def test_raw_image_roundtrip(tmp_path):
    rng = np.random.default_rng(2)
    image = rng.random((7, 9))
    path = tmp_path / "img.f64"
    save_raw_image(path, image)
    assert np.array_equal(load_raw_image(path, (7, 9)), image)
    with pytest.raises(FormatError):
        load_raw_image(path, (9, 9))
