import struct

import numpy as np
import pytest

from bgsplit import InputError, frameio


class TestPgm:
    def test_round_trip_8bit(self, tmp_path):
        levels = np.arange(12, dtype=np.uint8).reshape(3, 4)
        path = tmp_path / "a.pgm"
        frameio.write_pgm(path, levels, maxval=255)
        back, maxval = frameio.read_pgm(path)
        assert maxval == 255
        assert back.dtype == np.uint8
        assert np.array_equal(back, levels)

    def test_round_trip_16bit(self, tmp_path):
        rng = np.random.default_rng(0)
        levels = rng.integers(0, 65536, size=(5, 7)).astype(np.uint16)
        path = tmp_path / "b.pgm"
        frameio.write_pgm(path, levels, maxval=65535)
        back, maxval = frameio.read_pgm(path)
        assert maxval == 65535
        assert back.dtype == np.uint16
        assert np.array_equal(back, levels)

    def test_16bit_samples_are_big_endian(self, tmp_path):
        path = tmp_path / "c.pgm"
        frameio.write_pgm(path, np.array([[0x0102]], dtype=np.uint16), maxval=65535)
        data = path.read_bytes()
        assert data.endswith(b"\x01\x02")

    def test_header_comments_are_skipped(self, tmp_path):
        path = tmp_path / "d.pgm"
        path.write_bytes(b"P5 # comment\n# another\n2 1\n255\n\x07\x09")
        back, maxval = frameio.read_pgm(path)
        assert np.array_equal(back, [[7, 9]])

    def test_wrong_magic_rejected(self, tmp_path):
        path = tmp_path / "e.pgm"
        path.write_bytes(b"P2\n1 1\n255\n0")
        with pytest.raises(InputError):
            frameio.read_pgm(path)

    def test_truncated_raster_rejected(self, tmp_path):
        path = tmp_path / "f.pgm"
        path.write_bytes(b"P5\n2 2\n255\n\x00\x01")
        with pytest.raises(InputError):
            frameio.read_pgm(path)


class TestQuantize:
    def test_affine_map_round_half_up(self):
        levels = frameio.quantize_levels(np.array([-1.0, 0.0, 1.0]), -1.0, 1.0)
        assert np.array_equal(levels, [0, 32768, 65535])

    def test_out_of_range_values_are_clamped(self):
        levels = frameio.quantize_levels(np.array([-2.0, 2.0]), -1.0, 1.0)
        assert np.array_equal(levels, [0, 65535])

    def test_round_trip_error_within_half_step(self):
        rng = np.random.default_rng(1)
        values = rng.uniform(-1, 1, size=1000)
        levels = frameio.quantize_levels(values, -1.0, 1.0)
        back = frameio.levels_to_values(levels, -1.0, 1.0)
        assert np.abs(back - values).max() <= (2.0 / 65535) / 2 + 1e-12


class TestManifest:
    def test_load_normalizes_and_orders(self, tmp_path):
        frameio.write_pgm(tmp_path / "f0.pgm", np.array([[0, 65535]], dtype=np.uint16), 65535)
        frameio.write_pgm(tmp_path / "f1.pgm", np.array([[32767, 0]], dtype=np.uint16), 65535)
        manifest = tmp_path / "manifest.json"
        frameio.write_manifest(manifest, ["f0.pgm", "f1.pgm"], 1, 2, 16)
        fs, meta = frameio.load_manifest(manifest)
        assert meta == {"height": 1, "width": 2, "bit_depth": 16, "frame_count": 2}
        assert np.array_equal(fs[0], [[0.0, 1.0]])
        assert fs[1][0, 0] == 32767 / 65535

    def test_missing_frame_file_errors_with_path(self, tmp_path):
        manifest = tmp_path / "manifest.json"
        frameio.write_manifest(manifest, ["gone.pgm", "gone2.pgm"], 1, 1, 8)
        with pytest.raises(OSError, match="gone.pgm"):
            frameio.load_manifest(manifest)

    def test_frame_size_mismatch_rejected(self, tmp_path):
        frameio.write_pgm(tmp_path / "f0.pgm", np.zeros((2, 2), dtype=np.uint8), 255)
        frameio.write_pgm(tmp_path / "f1.pgm", np.zeros((2, 2), dtype=np.uint8), 255)
        manifest = tmp_path / "manifest.json"
        frameio.write_manifest(manifest, ["f0.pgm", "f1.pgm"], 3, 2, 8)
        with pytest.raises(InputError, match="f0.pgm"):
            frameio.load_manifest(manifest)

    def test_missing_key_rejected(self, tmp_path):
        manifest = tmp_path / "manifest.json"
        manifest.write_text('{"height": 1, "width": 1, "frames": ["a", "b"]}')
        with pytest.raises(InputError, match="bit_depth"):
            frameio.load_manifest(manifest)


class TestRawMatrix:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(2)
        M = rng.standard_normal((7, 3))
        path = tmp_path / "m.raw"
        frameio.write_matrix(path, M)
        assert np.array_equal(frameio.read_matrix(path), M)

    def test_layout_is_header_then_column_major(self, tmp_path):
        M = np.array([[1.0, 3.0], [2.0, 4.0]])
        path = tmp_path / "m.raw"
        frameio.write_matrix(path, M)
        data = path.read_bytes()
        assert struct.unpack_from("<QQ", data) == (2, 2)
        assert struct.unpack_from("<4d", data, 16) == (1.0, 2.0, 3.0, 4.0)

    def test_size_mismatch_rejected(self, tmp_path):
        path = tmp_path / "bad.raw"
        path.write_bytes(struct.pack("<QQ", 2, 2) + b"\x00" * 8)
        with pytest.raises(InputError):
            frameio.read_matrix(path)
