"""Field container round trips and validation."""

import json

import numpy as np
import pytest

from halfwave_lab.ensembles import band_limited_field
from halfwave_lab.spectral import Field, Grid
from halfwave_lab.storage import ContainerError, load_field, save_field


class TestContainer:
    def test_round_trip_preserves_everything(self, tmp_path):
        grid = Grid(2, 3.5, 32)
        f = band_limited_field(grid, seed=1)
        f = Field(grid, f.values, time_tag=1.25)
        path = save_field(tmp_path / "field.hwf", f)
        g = load_field(path)
        assert g.grid == grid
        assert g.time_tag == 1.25
        assert np.array_equal(g.values, f.values)

    def test_round_trip_without_time_tag(self, tmp_path):
        grid = Grid(1, 1.0, 16)
        f = Field(grid, np.arange(16, dtype=complex))
        g = load_field(save_field(tmp_path / "f.hwf", f))
        assert g.time_tag is None
        assert np.array_equal(g.values, f.values)

    def test_sidecar_contents(self, tmp_path):
        grid = Grid(1, 2.0, 16)
        f = Field(grid, np.ones(16))
        save_field(tmp_path / "f.hwf", f)
        sidecar = json.loads((tmp_path / "f.hwf.json").read_text())
        assert sidecar["dim"] == 1
        assert sidecar["points_per_axis"] == 16
        assert sidecar["half_length"] == 2.0
        assert len(sidecar["payload_sha256"]) == 64

    def test_rejects_corrupted_payload(self, tmp_path):
        grid = Grid(1, 1.0, 16)
        f = Field(grid, np.ones(16))
        path = save_field(tmp_path / "f.hwf", f)
        blob = bytearray(path.read_bytes())
        blob[-1] ^= 0xFF
        path.write_bytes(bytes(blob))
        with pytest.raises(ContainerError):
            load_field(path)

    def test_rejects_wrong_magic(self, tmp_path):
        p = tmp_path / "junk.hwf"
        p.write_bytes(b"NOTAFILE" + b"\x00" * 64)
        with pytest.raises(ContainerError):
            load_field(p)

    def test_rejects_truncation(self, tmp_path):
        grid = Grid(1, 1.0, 16)
        f = Field(grid, np.ones(16))
        path = save_field(tmp_path / "f.hwf", f)
        blob = path.read_bytes()
        path.write_bytes(blob[:-8])
        with pytest.raises(ContainerError):
            load_field(path, verify=False)
