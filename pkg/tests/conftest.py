"""Suite-wide hooks.

Every locate_zeros call made anywhere in the suite is checked against an
independent winding count of its region (hard assertion), and the
acceptance criteria lines are echoed in the terminal summary.
"""
import pytest

from transmission_census import census, cli, winding

LOCATE_CHECKS = {"calls": 0}
ACCEPTANCE = {}

_original = winding.locate_zeros


def _checked_locate(f, region, **kw):
    records = _original(f, region, **kw)
    expected = winding.winding_number(f, region).count
    got = sum(z.multiplicity for z in records)
    assert got == expected, f"locate_zeros multiplicities {got} != winding count {expected}"
    LOCATE_CHECKS["calls"] += 1
    return records


@pytest.fixture(autouse=True, scope="session")
def _conservation_guard():
    mp = pytest.MonkeyPatch()
    for mod in (winding, census, cli):
        mp.setattr(mod, "locate_zeros", _checked_locate)
    yield
    mp.undo()


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
