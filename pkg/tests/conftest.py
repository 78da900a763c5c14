import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


# one line per acceptance criterion, echoed after the run
_ACCEPTANCE = {}


@pytest.fixture
def record():
    def _record(cid, ok, text):
        _ACCEPTANCE[cid] = f"{'PASS' if ok else 'FAIL'}  {cid:<4} {text}"
        return ok
    return _record


def _cid_key(cid):
    num = "".join(c for c in cid if c.isdigit())
    return int(num or 0), cid


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(_ACCEPTANCE, key=_cid_key):
        terminalreporter.write_line(_ACCEPTANCE[cid])
