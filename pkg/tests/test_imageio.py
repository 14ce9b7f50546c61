import struct

import numpy as np
import pytest
from PIL import Image

from scorekit.errors import DomainError, ImageReadError
from scorekit.grid import byte_to_model
from scorekit.imageio import encode_scr, list_images, read_image, write_image


def test_scr_layout():
    x = np.arange(12, dtype=np.float64).reshape(2, 2, 3) / 12
    data = encode_scr(x)
    assert data[:4] == b"SCR1"
    assert struct.unpack("<III", data[4:16]) == (2, 2, 3)
    assert len(data) == 16 + 4 * 12
    vals = struct.unpack("<12f", data[16:])
    np.testing.assert_allclose(vals, x.ravel(), rtol=1e-7)


def test_scr_roundtrip_exact_for_float32(tmp_path, rng):
    x = rng.standard_normal((5, 6, 3)).astype(np.float32).astype(np.float64)
    write_image(tmp_path / "a.scr", x)
    np.testing.assert_array_equal(read_image(tmp_path / "a.scr"), x)


@pytest.mark.parametrize("data", [b"SCR", b"XXXX" + bytes(12), encode_scr(np.zeros((2, 2, 1)))[:-1]])
def test_scr_rejects_corrupt(tmp_path, data):
    p = tmp_path / "bad.scr"
    p.write_bytes(data)
    with pytest.raises(ImageReadError, match="bad.scr"):
        read_image(p)


@pytest.mark.parametrize("suffix,channels", [(".png", 1), (".png", 3), (".pgm", 1)])
def test_byte_formats_roundtrip(tmp_path, suffix, channels):
    b = np.random.default_rng(0).integers(0, 256, (6, 5, channels))
    x = byte_to_model(b)
    p = tmp_path / f"img{suffix}"
    write_image(p, x)
    np.testing.assert_array_equal(read_image(p), x)


def test_pgm_is_binary_graymap(tmp_path):
    write_image(tmp_path / "g.pgm", np.zeros((3, 4, 1)))
    assert (tmp_path / "g.pgm").read_bytes()[:2] == b"P5"


def test_byte_export_needs_clamp_for_out_of_range(tmp_path):
    x = np.full((4, 4, 1), 1.2)
    with pytest.raises(DomainError):
        write_image(tmp_path / "o.png", x)
    write_image(tmp_path / "o.png", x, clamp=True)
    assert np.all(read_image(tmp_path / "o.png") == 1.0)


def test_rgba_png_drops_alpha(tmp_path):
    Image.new("RGBA", (4, 3), (255, 0, 0, 10)).save(tmp_path / "c.png")
    x = read_image(tmp_path / "c.png")
    assert x.shape == (3, 4, 3)
    assert np.all(x[:, :, 0] == 1.0)


def test_list_images_filters_and_sorts(tmp_path):
    for n in ["b.scr", "a.png", "notes.txt", "c.pgm"]:
        (tmp_path / n).write_bytes(b"")
    assert [p.name for p in list_images(tmp_path)] == ["a.png", "b.scr", "c.pgm"]
