from __future__ import annotations

import struct
from pathlib import Path

import numpy as np
import pytest

from visquant import CheckpointError, load_checkpoint, save_checkpoint


@pytest.fixture
def saved(tmp_path: Path, rng: np.random.Generator) -> Path:
    tensors = {
        "embed.table": rng.normal(size=(7, 3)),
        "bias": rng.normal(size=5),
        "scalar": np.float64(2.5),
        "empty": np.zeros((0, 4)),
    }
    return save_checkpoint(tmp_path / "model.vqck", tensors, {"architecture": "bow", "epochs": 3})


class TestCheckpoint:
    def test_round_trip(self, saved: Path) -> None:
        tensors, meta = load_checkpoint(saved)
        expected = np.random.default_rng(1234)

        assert list(tensors) == ["embed.table", "bias", "scalar", "empty"]
        np.testing.assert_array_equal(tensors["embed.table"], expected.normal(size=(7, 3)))
        np.testing.assert_array_equal(tensors["bias"], expected.normal(size=5))
        assert tensors["scalar"].shape == ()
        assert tensors["scalar"] == 2.5
        assert tensors["empty"].shape == (0, 4)
        assert meta == {"architecture": "bow", "epochs": 3}

    def test_layout(self, saved: Path) -> None:
        data = saved.read_bytes()

        assert data[:4] == b"VQCK"
        assert struct.unpack("<I", data[4:8]) == (1,)

    def test_missing(self, tmp_path: Path) -> None:
        with pytest.raises(CheckpointError):
            load_checkpoint(tmp_path / "nothing.vqck")

    def test_bad_magic(self, saved: Path) -> None:
        saved.write_bytes(b"XXXX" + saved.read_bytes()[4:])

        with pytest.raises(CheckpointError, match="not a checkpoint"):
            load_checkpoint(saved)

    def test_bad_version(self, saved: Path) -> None:
        data = saved.read_bytes()
        saved.write_bytes(data[:4] + struct.pack("<I", 9) + data[8:])

        with pytest.raises(CheckpointError, match="version"):
            load_checkpoint(saved)

    @pytest.mark.parametrize("cut", [4, 8, 20, 60])
    def test_truncated(self, saved: Path, cut: int) -> None:
        data = saved.read_bytes()
        saved.write_bytes(data[:-cut])

        with pytest.raises(CheckpointError):
            load_checkpoint(saved)

    def test_trailing_bytes(self, saved: Path) -> None:
        saved.write_bytes(saved.read_bytes() + b"\x00")

        with pytest.raises(CheckpointError, match="Trailing"):
            load_checkpoint(saved)
