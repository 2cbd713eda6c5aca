import numpy as np
import pytest
from PIL import Image as PILImage

from selfrect.errors import ImageFormatError
from selfrect.geometry import Homography
from selfrect.imaging import Image, load_image, save_image, warp


@pytest.fixture
def gray(rng):
    return Image(rng.integers(0, 256, (40, 60), dtype=np.uint8))


@pytest.fixture
def rgb(rng):
    return Image(rng.integers(0, 256, (40, 60, 3), dtype=np.uint8))


def test_image_validation():
    with pytest.raises(ValueError):
        Image(np.zeros((4, 4, 2), np.uint8))
    with pytest.raises(ValueError):
        Image(np.zeros((4, 4), np.uint8), np.ones((3, 4), bool))
    assert Image(np.full((2, 2), 300.0)).pixels.max() == 255


def test_identity_warp_is_exact(gray, rgb):
    assert warp(gray, Homography.identity()) == gray
    assert warp(rgb, Homography.identity()) == rgb


def test_integer_shift_is_exact(gray):
    out = warp(gray, Homography.translation(3.0, -2.0))
    assert np.array_equal(out.pixels[0:38, 3:], gray.pixels[2:40, 0:57])
    assert not out.mask[:, :3].any() and not out.mask[38:].any()
    assert np.all(out.pixels[~out.mask] == 0)


def test_half_pixel_shift_averages():
    img = Image(np.tile(np.array([0, 100, 200, 100], np.uint8), (3, 1)))
    out = warp(img, Homography.translation(0.5, 0.0))
    assert list(out.pixels[1, 1:]) == [50, 150, 150]


def test_invalid_source_pixels_propagate(gray):
    mask = np.ones(gray.pixels.shape, bool)
    mask[10, 10] = False
    out = warp(Image(gray.pixels, mask), Homography.translation(0.5, 0.0))
    assert not out.mask[10, 10] and not out.mask[10, 11]
    assert out.mask[10, 12]


@pytest.mark.parametrize("ext", [".png", ".pgm"])
def test_gray_round_trip(gray, tmp_path, ext):
    save_image(gray, tmp_path / f"g{ext}")
    assert load_image(tmp_path / f"g{ext}") == gray


@pytest.mark.parametrize("ext", [".png", ".ppm"])
def test_rgb_round_trip(rgb, tmp_path, ext):
    save_image(rgb, tmp_path / f"c{ext}")
    assert load_image(tmp_path / f"c{ext}") == rgb


def test_mask_stored_as_alpha(gray, rgb, tmp_path):
    for img in (gray, rgb):
        mask = np.ones(img.pixels.shape[:2], bool)
        mask[:5] = False
        partial = Image(np.where(mask[..., None] if img.channels == 3 else mask, img.pixels, 0), mask)
        save_image(partial, tmp_path / "m.png")
        assert load_image(tmp_path / "m.png") == partial
        with pytest.raises(ImageFormatError):
            save_image(partial, tmp_path / ("m.pgm" if img.channels == 1 else "m.ppm"))


def test_unsupported_inputs(gray, tmp_path):
    (tmp_path / "junk.png").write_bytes(b"not an image")
    with pytest.raises(ImageFormatError):
        load_image(tmp_path / "junk.png")
    PILImage.fromarray(gray.pixels).save(tmp_path / "g.bmp")
    with pytest.raises(ImageFormatError):
        load_image(tmp_path / "g.bmp")
    with pytest.raises(ImageFormatError):
        save_image(gray, tmp_path / "g.tif")
    with pytest.raises(OSError):
        load_image(tmp_path / "missing.png")


def test_gray_luminance(rgb):
    g = rgb.gray()
    p = rgb.pixels.astype(float)
    assert np.allclose(g, 0.299 * p[..., 0] + 0.587 * p[..., 1] + 0.114 * p[..., 2])


def test_translation_minus_five_columns(gray):
    out = warp(gray, Homography.translation(-5.0, 0.0))
    w = gray.width
    assert np.array_equal(out.pixels[:, : w - 5], gray.pixels[:, 5:])
    assert out.mask[:, : w - 5].all() and not out.mask[:, w - 5 :].any()


def test_composition_consistency():
    from selfrect.synth import render_pair, RigPerturbation

    img, _ = render_pair(RigPerturbation(), texture_seed=3)
    a = Homography.vertical_alignment(0.004, 1.003, -2.5, 2e-6, -3e-6)
    b = Homography.shear(1.002, 0.003) @ Homography.translation(4.3, 0.0)
    twice = warp(warp(img, a), b)
    once = warp(img, b @ a)
    both = twice.mask & once.mask
    assert both.mean() > 0.9
    assert np.abs(twice.pixels[both].astype(int) - once.pixels[both].astype(int)).mean() <= 2.0


def test_corrupt_header(tmp_path):
    (tmp_path / "bad.pgm").write_bytes(b"P5\n60 abc\n255\n" + bytes(100))
    with pytest.raises(ImageFormatError):
        load_image(tmp_path / "bad.pgm")
