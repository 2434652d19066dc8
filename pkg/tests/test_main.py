import csv
import json
import logging
from pathlib import Path
from typing import Any, Dict, List

import pytest

import floq.main as main_mod
from floq.floquet import dump_potential, explicit_potential


# ----------------------------------------------------------------------------------------------------------------------
# Helper utilities
# ----------------------------------------------------------------------------------------------------------------------


@pytest.fixture(autouse=True)
def restore_root_logger():
    """
    Remove the handlers installed by `main` so that every test starts from
    the same logging state.

    :return: None
    """
    root = logging.getLogger()
    handlers, level = list(root.handlers), root.level
    yield
    for handler in [h for h in root.handlers if h not in handlers]:
        root.removeHandler(handler)
        handler.close()
    root.setLevel(level)


def write_potential(path: Path, values: List[Any]) -> Path:
    """
    Writes a potential file in the format read by the ``verify``, ``orbit``
    and extended commands.

    Arguments:
        path (Path): Target file.
        values (List[Any]): Coordinates; exact values are written as ``"p/q"`` strings.

    Returns:
        Path: The written file.
    """
    path.write_text(json.dumps(dump_potential(values)))
    return path


def run_json(tmp_path: Path, argv: List[str]) -> Dict[str, Any]:
    """
    Runs `main` with the artifact redirected to a file and returns the parsed
    JSON artifact.

    Arguments:
        tmp_path (Path): Directory of the artifact.
        argv (List[str]): Command line without the program name.

    Returns:
        Dict[str, Any]: The decoded artifact.
    """
    out = tmp_path / "artifact.json"
    assert main_mod.main(argv + ["--output", str(out)]) == 0
    return json.loads(out.read_text())


# ----------------------------------------------------------------------------------------------------------------------
# Tests for init()
# ----------------------------------------------------------------------------------------------------------------------


def test_init_builds_the_configuration(tmp_path):
    """
    Tests that `init` turns the parsed arguments into a validated `RunConfig`
    and keeps the symbolic Floquet mode of the invariants command.

    :param tmp_path: Temporary directory fixture.
    :return: None
    """
    main_mod.init(["invariants", "--n", "5", "--z", "symbolic", "--seed", "4", "--output", str(tmp_path / "x.json")])

    assert main_mod.config.command == "invariants"
    assert main_mod.config.n == 5
    assert main_mod.config.seed == 4
    assert main_mod.config.format == "json"
    assert main_mod.config.output == tmp_path / "x.json"
    assert main_mod.z_mode is main_mod.ZMode.SYMBOLIC


def test_init_defaults_figures_to_csv():
    main_mod.init(["figures", "--n", "4"])
    assert main_mod.config.format == "csv"


def test_init_ignores_unknown_arguments():
    main_mod.init(["groebner", "--n", "4", "--frobnicate"])
    assert main_mod.config.command == "groebner"


@pytest.mark.parametrize("argv", [[], ["zip"], ["solve"], ["hilbert", "--n", "4"], ["solve", "--n", "four"]])
def test_usage_errors_exit_with_status_2(argv):
    with pytest.raises(SystemExit) as excinfo:
        main_mod.main(argv)
    assert excinfo.value.code == 2


# ----------------------------------------------------------------------------------------------------------------------
# Tests for the commands
# ----------------------------------------------------------------------------------------------------------------------


def test_invariants_command(tmp_path):
    data = run_json(tmp_path, ["invariants", "--n", "3"])
    assert data["n"] == 3
    assert data["variant"] == "full"
    assert data["variables"] == ["v1", "v2", "v3"]
    assert len(data["generators"]) == 3


def test_invariants_text_format(tmp_path):
    out = tmp_path / "invariants.txt"
    assert main_mod.main(["invariants", "--n", "4", "--variant", "specialized", "--format", "text",
                          "--output", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert [line.split(" = ")[0] for line in lines] == ["p'_1", "p'_2"]


def test_invariants_to_stdout(capsys):
    assert main_mod.main(["invariants", "--n", "3"]) == 0
    assert json.loads(capsys.readouterr().out)["n"] == 3


def test_groebner_command(tmp_path):
    data = run_json(tmp_path, ["groebner", "--n", "4"])
    assert data["leading_terms"] == ["v1^1", "v2^2", "v3^3", "v4^4"]
    assert data["basis_size"] == 24
    assert data["hilbert_polynomial"] == [0, 24]
    assert data["sign_convention"] == "signed"


def test_hilbert_command_extended(tmp_path):
    """
    Tests the affine Hilbert function of the extended system for ``n = 4``:
    ``HF(10) = 24 * 10 - 48``.

    :param tmp_path: Temporary directory fixture.
    :return: None
    """
    vprime = write_potential(tmp_path / "vprime.json", [1, 2, 3, 5])
    data = run_json(tmp_path, ["hilbert", "--n", "4", "--variant", "extended", "--potential", str(vprime),
                               "--s", "10"])
    assert data["value"] == 192
    assert data["polynomial"] == [24, -48]


def test_hilbert_command_extended_without_a_vprime_file(tmp_path):
    """
    Tests that the extended Hilbert function needs no V' file: the default
    ``V' = (1, ..., n)`` gives the same ``HF(10) = 192``.

    :param tmp_path: Temporary directory fixture.
    :return: None
    """
    data = run_json(tmp_path, ["hilbert", "--n", "4", "--s", "10", "--variant", "extended"])
    assert data["value"] == 192
    assert data["polynomial"] == [24, -48]


def test_solve_command(tmp_path, caplog):
    """
    Tests that solving ``n = 4`` reports nine points with the origin of
    multiplicity 16 and logs the result line at CRITICAL level.

    :param tmp_path: Temporary directory fixture.
    :param caplog: Log capture fixture.
    :return: None
    """
    data = run_json(tmp_path, ["solve", "--n", "4", "--threads", "2"])
    assert data["summary"]["unique"] == 9
    assert data["summary"]["mult_counts"] == {"1": 8, "16": 1}
    assert sum(p["multiplicity"] for p in data["points"]) == 24
    assert any(r.levelno == logging.CRITICAL and "multiplicity at 0 = 16" in r.getMessage() for r in caplog.records)


def test_solve_command_csv(tmp_path):
    out = tmp_path / "summary.csv"
    assert main_mod.main(["solve", "--n", "3", "--format", "csv", "--output", str(out)]) == 0
    rows = list(csv.DictReader(out.read_text().splitlines()))
    assert len(rows) == 1
    assert rows[0]["mult_at_zero"] == "6"
    assert rows[0]["unique"] == "1"


def test_figures_command(tmp_path):
    """
    Tests that the figure table of ``n = 4`` lists the 32 nonzero coordinate
    values and writes one extra file per point.

    :param tmp_path: Temporary directory fixture.
    :return: None
    """
    out = tmp_path / "fig.csv"
    assert main_mod.main(["figures", "--n", "4", "--output", str(out)]) == 0
    rows = list(csv.DictReader(out.read_text().splitlines()))
    assert len(rows) == 32
    assert list(rows[0]) == main_mod.FIGURE_FIELDS
    assert len(list(tmp_path.glob("fig.point*.csv"))) == 8


def test_verify_command(tmp_path):
    potential = write_potential(tmp_path / "v.json", explicit_potential(4))
    data = run_json(tmp_path, ["verify", "--potential", str(potential), "--exact"])
    assert data["isospectral"] is True
    assert data["mode"] == "exact"
    assert data["residuals"] == ["0", "0", "0", "0"]


def test_verify_command_rejects_other_potentials(tmp_path):
    potential = write_potential(tmp_path / "v.json", [1.0, 0.0, 0.0, -1.0])
    data = run_json(tmp_path, ["verify", "--potential", str(potential), "--n", "4"])
    assert data["isospectral"] is False
    assert data["mode"] == "numeric"


def test_orbit_command(tmp_path):
    potential = write_potential(tmp_path / "v.json", explicit_potential(4))
    data = run_json(tmp_path, ["orbit", "--potential", str(potential)])
    assert data["size"] == 8
    assert len(data["orbit"]) == 8
    assert data["canonical"] in data["orbit"]


def test_orbit_command_names_the_elements(tmp_path):
    """
    Every image of the orbit artifact comes with the description of the first
    group element that produces it, the identity leading.
    """
    potential = write_potential(tmp_path / "v.json", explicit_potential(4))
    data = run_json(tmp_path, ["orbit", "--potential", str(potential)])
    assert len(data["elements"]) == data["size"] == 8
    assert data["elements"][0] == "rot0"
    assert len(set(data["elements"])) == 8
    assert data["orbit"][0] == dump_potential(explicit_potential(4))["values"]


def test_lattice_rigidity_command(tmp_path):
    data = run_json(tmp_path, ["lattice", "rigidity", "--gens", "4 0; 1 1"])
    assert data["hnf"] == {"a": 4, "b": 1, "c": 1}
    assert data["verdict"] == "rigid"


# ----------------------------------------------------------------------------------------------------------------------
# Tests for the error path of main()
# ----------------------------------------------------------------------------------------------------------------------


@pytest.mark.parametrize("argv, error", [
    (["verify", "--potential", "/nonexistent/v.json"], "PotentialFileError"),
    (["solve", "--n", "8"], "ValueError"),
    (["lattice", "rigidity", "--gens", "1 2; 2 4"], "LatticeError"),
    (["solve", "--n", "5", "--basis-ceiling", "10"], "CeilingExceededError"),
])
def test_failures_return_status_1(capsys, argv, error):
    """
    Tests that a failing command prints a JSON error object on stdout and
    returns exit status 1.

    :param capsys: Output capture fixture.
    :param argv: Failing command line.
    :param error: Expected error class name.
    :return: None
    """
    assert main_mod.main(argv) == 1
    report = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert report["error"] == error
    assert report["message"]


def test_failed_write_leaves_no_artifact(tmp_path, monkeypatch):
    """
    Tests that an error raised while the artifact is produced leaves neither
    the target nor a temporary file behind.

    :param tmp_path: Temporary directory fixture.
    :param monkeypatch: Pytest monkeypatch fixture.
    :return: None
    """
    def failing_to_json(data):
        raise RuntimeError("serialization failed")

    monkeypatch.setattr(main_mod, "to_json", failing_to_json)
    out = tmp_path / "artifact.json"
    assert main_mod.main(["invariants", "--n", "3", "--output", str(out)]) == 1
    assert list(tmp_path.iterdir()) == []
