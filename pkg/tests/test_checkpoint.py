import numpy as np
import pytest

from gapinn.checkpoint import CheckpointError, load_checkpoint, save_checkpoint


def test_round_trip(tmp_path):
    arrays = {"a": np.random.default_rng(0).normal(size=(3, 4)), "b": np.arange(5.0), "s": np.array(2.5)}
    save_checkpoint(tmp_path / "c.ckpt", {"epoch": 7, "k": [1, 2]}, arrays)
    meta, back = load_checkpoint(tmp_path / "c.ckpt")
    assert meta == {"epoch": 7, "k": [1, 2]}
    for k, v in arrays.items():
        assert back[k].shape == v.shape and back[k].tobytes() == v.tobytes()


def test_rejects_foreign_file(tmp_path):
    (tmp_path / "x").write_bytes(b"not a checkpoint at all")
    with pytest.raises(CheckpointError):
        load_checkpoint(tmp_path / "x")


def test_rejects_other_version(tmp_path):
    p = tmp_path / "c.ckpt"
    save_checkpoint(p, {}, {"a": np.zeros(1)})
    raw = bytearray(p.read_bytes())
    raw[8] = 99
    p.write_bytes(bytes(raw))
    with pytest.raises(CheckpointError, match="version"):
        load_checkpoint(p)
