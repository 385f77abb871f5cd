import os
import stat

import pytest

from affectlog.utils import atomic_write, parallel_map


@pytest.fixture
def umask_022():
    previous = os.umask(0o022)
    yield
    os.umask(previous)


@pytest.mark.skipif(os.name != "posix", reason="POSIX permissions")
def test_atomic_write_follows_the_umask(tmp_path, umask_022):
    path = tmp_path / "out.txt"
    atomic_write(path, "hello\n")
    assert stat.S_IMODE(path.stat().st_mode) == 0o644
    atomic_write(path, b"bytes")
    assert stat.S_IMODE(path.stat().st_mode) == 0o644
    assert path.read_bytes() == b"bytes"


def test_atomic_write_leaves_no_temp_file_on_failure(tmp_path):
    with pytest.raises(TypeError):
        atomic_write(tmp_path / "out.txt", 42)
    assert list(tmp_path.iterdir()) == []


def test_parallel_map_keeps_input_order():
    items = list(range(50))
    assert parallel_map(lambda x: x * x, items, threads=8) == [x * x for x in items]
