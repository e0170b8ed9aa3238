from __future__ import annotations

from pathlib import Path

import pytest

from gallager3.tanner import read_alist_file

FIXTURES = Path(__file__).resolve().parent / "fixtures"
SMALL = sorted(p.stem for p in FIXTURES.glob("*.alist") if p.stem != "girth6")


def load(name: str):
    return read_alist_file(FIXTURES / f"{name}.alist")


@pytest.fixture(params=SMALL)
def small_graph(request):
    g = load(request.param)
    assert g.n <= 16
    return g


@pytest.fixture(scope="session")
def girth6_code():
    return load("girth6")


@pytest.fixture(scope="session")
def clean_code(tmp_path_factory):
    """n = 200 code passing every structural gate; built once per session."""
    from gallager3.construct import ConstructionParams, build_code

    g, _ = build_code(ConstructionParams(200, 100))
    return g



# -- acceptance report ---------------------------------------------------------------

ACCEPTANCE: list[tuple[int, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num, ok, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"criterion {num}: {'PASS' if ok else 'FAIL'} - {detail}")
