import runpy

import pytest

import floq.main as main_mod


def test_package_entrypoint_invokes_main(monkeypatch):
    """
    Test that the package entry point calls the `main` function and exits
    with its return value.

    Parameters:
        monkeypatch: pytest.MonkeyPatch
            A fixture that allows dynamic modification of code at runtime.

    Raises:
        SystemExit: This is raised when `runpy.run_module` is executed,
        as it mimics the behavior of a script's execution causing an
        exit in the runtime.

    Returns:
        None
    """
    called = {"called": False}

    def fake_main() -> int:
        called["called"] = True
        return 1

    monkeypatch.setattr(main_mod, "main", fake_main)

    # Simulate: python -m floq  -> executes floq.__main__ with __name__ == "__main__"
    with pytest.raises(SystemExit) as excinfo:
        runpy.run_module("floq.__main__", run_name="__main__")

    assert excinfo.value.code == 1
    assert called["called"] is True
