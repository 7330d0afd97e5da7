import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from gfbt.bounds import ChannelParams  # noqa: E402
from gfbt.codes import canned_code, weight_enumerator  # noqa: E402

_ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def report():
    """Record one summary line per acceptance criterion."""
    return _ACCEPTANCE_LINES.append


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def spectra():
    names = ["hamming_7_4", "ext_hamming_8_4", "golay_23_12", "hamming_15_11", "repetition_3", "spc_3"]
    return {name: weight_enumerator(canned_code(name)) for name in names}


def channel(name, ebn0_db):
    g = canned_code(name)
    return ChannelParams.from_ebn0_db(ebn0_db, g.n, g.rate)
