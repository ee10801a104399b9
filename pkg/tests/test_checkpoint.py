import struct

import numpy as np
import pytest

from stagsrl.autodiff import parameter
from stagsrl.errors import CheckpointFormatError, CheckpointVersionError, InputFileError
from stagsrl.tagging.checkpoint import MAGIC, Checkpoint, is_checkpoint, load_checkpoint, save_checkpoint


@pytest.fixture
def checkpoint():
    params = {
        "b.W": parameter(np.arange(6, dtype=np.float32).reshape(2, 3)),
        "a.bias": parameter(np.array([0.5, -1.25], dtype=np.float32)),
    }
    return Checkpoint.from_nodes(
        "tagger",
        {"d_h": 4, "dtype": "float32"},
        {"words": ["cat", "dog"], "labels": ["ROOT", "SBJ/R"]},
        params,
        {"epochs": 2.0},
    )


def test_bytes_start_with_magic_and_version(checkpoint):
    data = checkpoint.to_bytes()
    assert data[:8] == MAGIC
    assert struct.unpack("<I", data[8:12])[0] == 1


def test_round_trip_preserves_everything(checkpoint):
    loaded = Checkpoint.from_bytes(checkpoint.to_bytes())
    assert loaded.kind == "tagger"
    assert loaded.config == checkpoint.config
    assert loaded.vocabs == checkpoint.vocabs
    assert loaded.metadata == {"epochs": 2.0}
    assert sorted(loaded.params) == ["a.bias", "b.W"]
    for name, value in checkpoint.params.items():
        np.testing.assert_array_equal(loaded.params[name], value)


def test_serialization_is_canonical(checkpoint):
    reordered = Checkpoint(
        checkpoint.kind,
        dict(reversed(list(checkpoint.config.items()))),
        dict(reversed(list(checkpoint.vocabs.items()))),
        dict(reversed(list(checkpoint.params.items()))),
        checkpoint.metadata,
    )
    assert reordered.to_bytes() == checkpoint.to_bytes()


def test_bad_magic(checkpoint):
    data = b"NOTACKPT" + checkpoint.to_bytes()[8:]
    with pytest.raises(CheckpointFormatError):
        Checkpoint.from_bytes(data)


def test_unsupported_version(checkpoint):
    data = bytearray(checkpoint.to_bytes())
    data[8:12] = struct.pack("<I", 99)
    with pytest.raises(CheckpointVersionError):
        Checkpoint.from_bytes(bytes(data))


def test_truncated_and_trailing_bytes(checkpoint):
    data = checkpoint.to_bytes()
    with pytest.raises(CheckpointFormatError):
        Checkpoint.from_bytes(data[:-3])
    with pytest.raises(CheckpointFormatError):
        Checkpoint.from_bytes(data + b"\x00")


def test_restore_checks_parameter_set(checkpoint):
    with pytest.raises(CheckpointFormatError):
        checkpoint.restore_into({"b.W": parameter(np.zeros((2, 3), dtype=np.float32))})
    with pytest.raises(CheckpointFormatError):
        checkpoint.restore_into({
            "b.W": parameter(np.zeros((3, 2), dtype=np.float32)),
            "a.bias": parameter(np.zeros(2, dtype=np.float32)),
        })


def test_file_helpers(tmp_path, checkpoint):
    path = tmp_path / "model.ckpt"
    save_checkpoint(path, checkpoint)
    assert is_checkpoint(path)
    assert load_checkpoint(path, "tagger").vocabs == checkpoint.vocabs
    with pytest.raises(CheckpointFormatError):
        load_checkpoint(path, "srl")


def test_plain_text_is_not_a_checkpoint(tmp_path):
    path = tmp_path / "dev.stags"
    path.write_text("1\tROOT\n")
    assert not is_checkpoint(path)
    assert not is_checkpoint(tmp_path / "absent")
    with pytest.raises(InputFileError):
        load_checkpoint(tmp_path / "absent")
