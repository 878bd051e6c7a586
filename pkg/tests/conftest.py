import numpy as np
import pytest

from berezin.rkhs import BERGMAN, HARDY, FiniteRankOperator

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    entry = _CRITERIA.setdefault(number, {"title": title, "ok": True, "ran": False})
    if rep.when == "call":
        entry["ran"] = True
    if rep.failed:
        entry["ok"] = False


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        e = _CRITERIA[number]
        status = "PASS" if e["ok"] and e["ran"] else "FAIL"
        terminalreporter.write_line(f"criterion {number:2d}: {status}  {e['title']}")


def rank_one(space, g, h):
    return FiniteRankOperator.rank_one(space, g, h)


@pytest.fixture
def hardy():
    return HARDY


@pytest.fixture
def bergman():
    return BERGMAN


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_complex(rng, shape, scale=1.0):
    return scale * (rng.uniform(-1, 1, shape) + 1j * rng.uniform(-1, 1, shape))


def random_hermitian(rng, n):
    a = random_complex(rng, (n, n))
    return 0.5 * (a + a.conj().T)


def random_spd(rng, n, floor=0.1):
    a = random_complex(rng, (n, n))
    return a @ a.conj().T + floor * np.eye(n)
