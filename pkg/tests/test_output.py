import hashlib
import json
import os
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from floq.floquet import Variant
from floq.output import AtomicOutput, digest, exact_text, jsonable, to_csv, to_json
from floq.polycore import GaussianRational


# ----------------------------------------------------------------------------------------------------------------------
# Tests for exact_text() and jsonable()
# ----------------------------------------------------------------------------------------------------------------------


def test_exact_text():
    assert exact_text(3) == "3"
    assert exact_text(Fraction(-1, 2)) == "-1/2"
    assert exact_text(GaussianRational(Fraction(1, 2), 0)) == "1/2"
    assert exact_text(GaussianRational(1, -1)) == str(GaussianRational(1, -1))


def test_jsonable_converts_nested_values():
    """
    Complex values become ``[re, im]`` pairs, exact values strings, and numpy
    scalars and arrays plain Python values.
    """
    data = {
        1: [1 + 2j, np.complex128(3 - 1j)],
        "exact": (Fraction(2, 3), GaussianRational(0, 1)),
        "np": [np.int64(4), np.float64(0.5), np.bool_(True), np.array([1, 2])],
        "variant": Variant.SPECIALIZED,
        "path": Path("a/b.json"),
    }
    out = jsonable(data)
    assert out["1"] == [[1.0, 2.0], [3.0, -1.0]]
    assert out["exact"] == ["2/3", str(GaussianRational(0, 1))]
    assert out["np"] == [4, 0.5, True, [1, 2]]
    assert type(out["np"][0]) is int and type(out["np"][2]) is bool
    assert out["variant"] == "specialized"
    assert out["path"] == str(Path("a/b.json"))


def test_to_json_is_sorted_and_terminated():
    text = to_json({"b": 1, "a": [1j]})
    assert text.endswith("\n")
    assert text.index('"a"') < text.index('"b"')
    assert json.loads(text) == {"a": [[0.0, 1.0]], "b": 1}


def test_to_csv_keeps_the_field_order():
    rows = [{"re": 1.0, "point_id": 0, "extra": "x"}, {"point_id": 1}]
    text = to_csv(rows, ["point_id", "re"])
    assert text == "point_id,re\n0,1.0\n1,\n"


# ----------------------------------------------------------------------------------------------------------------------
# Tests for digest()
# ----------------------------------------------------------------------------------------------------------------------


@pytest.mark.parametrize("algorithm", ["sha256", "md5", "sha3_256"])
def test_digest_matches_hashlib(algorithm):
    """
    Text is hashed as its UTF-8 encoding; bytes are hashed as given.

    :param algorithm: Name of the hashlib algorithm.
    :return: None
    """
    expected = hashlib.new(algorithm, "période".encode()).hexdigest()
    assert digest("période", algorithm) == expected
    assert digest("période".encode(), algorithm) == expected


def test_digest_rejects_unknown_algorithms():
    with pytest.raises(ValueError):
        digest("x", "no-such-hash")


# ----------------------------------------------------------------------------------------------------------------------
# Tests for AtomicOutput
# ----------------------------------------------------------------------------------------------------------------------


def test_atomic_output_commits_on_success(tmp_path):
    """
    The target appears only when the context exits, and no temporary file is
    left behind.

    :param tmp_path: Temporary directory fixture.
    :return: None
    """
    target = tmp_path / "out" / "result.json"
    with AtomicOutput(target) as out:
        out.write('{"a": 1}\n')
        assert out.tmp_path.exists()
        assert not target.exists()
    assert target.read_text() == '{"a": 1}\n'
    assert out.content == '{"a": 1}\n'
    assert list(target.parent.iterdir()) == [target]


def test_atomic_output_survives_short_writes(tmp_path, monkeypatch):
    """
    ``os.write`` may accept fewer bytes than offered; every byte still reaches
    the committed file.

    :param tmp_path: Temporary directory fixture.
    :param monkeypatch: Used to cap each ``os.write`` call at 3 bytes.
    :return: None
    """
    real_write = os.write
    calls = []

    def short_write(fd, data):
        calls.append(len(data))
        return real_write(fd, bytes(data[:3]))

    monkeypatch.setattr("floq.output.os.write", short_write)
    target = tmp_path / "result.csv"
    text = "a,b\n" + "".join(f"{k},{k * k}\n" for k in range(50)) + "π\n"
    with AtomicOutput(target) as out:
        out.write(text)
    assert target.read_text(encoding="utf-8") == text
    assert len(calls) > 1


def test_atomic_output_rolls_back_on_error(tmp_path):
    """
    An exception inside the context removes the temporary file and leaves an
    existing target untouched.

    :param tmp_path: Temporary directory fixture.
    :return: None
    """
    target = tmp_path / "result.json"
    target.write_text("old")
    with pytest.raises(RuntimeError):
        with AtomicOutput(target) as out:
            out.write("new")
            raise RuntimeError("boom")
    assert target.read_text() == "old"
    assert not out.tmp_path.exists()


def test_atomic_output_refuses_a_stale_temporary_file(tmp_path):
    target = tmp_path / "result.json"
    out = AtomicOutput(target)
    out.tmp_path.write_text("stale")
    with pytest.raises(FileExistsError):
        out.acquire()


def test_atomic_output_without_path_writes_stdout(capsys):
    with AtomicOutput() as out:
        out.write("hello\n")
    assert capsys.readouterr().out == "hello\n"
    assert out.content == "hello\n"
