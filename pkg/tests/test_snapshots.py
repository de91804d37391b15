"""Binary snapshot format round-trips and validation."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mrelab.snapshots import read_snapshot, write_snapshot


@settings(deadline=None, max_examples=20)
@given(st.integers(2, 9), st.integers(2, 9), st.integers(1, 3),
       st.integers(0, 2 ** 31))
def test_round_trip(tmp_path_factory, n1, n2, ncomp, seed):
    rng = np.random.default_rng(seed)
    data = rng.standard_normal((ncomp, n1, n2)) if ncomp > 1 \
        else rng.standard_normal((n1, n2))
    path = tmp_path_factory.mktemp("snap") / "f.mrl"
    write_snapshot(path, data)
    back = read_snapshot(path)
    assert back.shape == (ncomp, n1, n2)
    assert np.array_equal(back, data if data.ndim == 3 else data[None])


def test_bad_magic_rejected(tmp_path):
    path = tmp_path / "f.mrl"
    write_snapshot(path, np.zeros((4, 5)))
    raw = bytearray(path.read_bytes())
    raw[:4] = b"XXXX"
    path.write_bytes(bytes(raw))
    with pytest.raises(ValueError):
        read_snapshot(path)


def test_truncated_payload_rejected(tmp_path):
    path = tmp_path / "f.mrl"
    write_snapshot(path, np.zeros((4, 5)))
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(ValueError):
        read_snapshot(path)
