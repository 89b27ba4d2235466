from math import gcd

import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def coprime_pairs(max_p: int):
    return [(p, q) for p in range(2, max_p + 1) for q in range(1, p) if gcd(p, q) == 1]


@pytest.fixture(scope="session")
def z_env():
    from surgery_calc.dsl import load_dataset
    return load_dataset("z_lattice")


@pytest.fixture(scope="session")
def ztilde_env():
    from surgery_calc.dsl import load_dataset
    return load_dataset("ztilde_lattice")


# acceptance criteria: one PASS/FAIL line each at the end of the run

_CRITERIA: dict[int, list] = {}


def pytest_runtest_logreport(report):
    mark = _CRITERION_OF.get(report.nodeid)
    if mark is None:
        return
    entry = _CRITERIA.setdefault(mark[0], [mark[1], True, False])
    if report.failed:
        entry[1] = False
    if report.when == "call":
        entry[2] = True


_CRITERION_OF: dict[str, tuple[int, str]] = {}


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            _CRITERION_OF[item.nodeid] = (m.args[0], m.args[1])


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        title, ok, ran = _CRITERIA[num]
        status = "PASS" if ok and ran else "FAIL"
        terminalreporter.write_line(f"criterion {num}: {status}  {title}")
