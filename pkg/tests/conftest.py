from __future__ import annotations

import logging
from pathlib import Path

import pytest

from soltestgen.program import Program

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"

# 4-bit variants: every input space is small enough to enumerate.
SAFE_ADD4 = """
contract SafeMath4 {
    uint4 sum1;
    function add(uint4 a1, uint4 b1) public returns (uint8) {
        uint8 a2 = uint8(a1);
        uint8 b2 = uint8(b1);
        if (a1 < 8 && b1 < 8) {
            sum1 = a1 + b1;
            return 1;
            return 0;
        }
        require(a2 + b2 <= 15);
        sum1 = a1 + b1;
    }
}
"""

LOOP4 = """
contract Loop4 {
    uint8 total;
    function run(uint4 n, int4 k) public returns (uint8) {
        uint8 s = 0;
        uint4 i = 0;
        while (i < n) {
            if (k < 0) {
                s = s + 2;
            } else {
                s = s + uint8(i);
            }
            i = i + 1;
        }
        require(s != 7);
        total = s;
        return s;
    }
}
"""

CALLS4 = """
contract Calls4 {
    int8 acc;
    uint4 hits;
    function entry(int4 a, int4 b, uint4 c) public returns (int8) {
        int8 q = ratio(a, b);
        require(c > 2);
        bump(c);
        if (q > 0) {
            acc = acc + q;
        }
        return acc;
    }
    function ratio(int4 a, int4 b) public returns (int8) {
        int8 r = int8(a) / int8(b);
        require(r < 5);
        return r;
    }
    function bump(uint4 c) public {
        hits = hits + c;
        acc = int8(hits);
    }
}
"""

NARROW_PROGRAMS = {"safe_add4": SAFE_ADD4, "loop4": LOOP4, "calls4": CALLS4}


@pytest.fixture(autouse=True)
def _quiet_logs(caplog):
    caplog.set_level(logging.ERROR)


@pytest.fixture(scope="session")
def safe_add() -> Program:
    return Program.from_file(CORPUS / "safe_add.sol")


def narrow(name: str, **kw) -> Program:
    return Program.from_source(NARROW_PROGRAMS[name], name=name, narrow_widths=True, **kw)


# -- acceptance summary -------------------------------------------------------------------

_criteria: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    marker = _criterion_of.get(report.nodeid)
    if marker is not None:
        _criteria[marker] = ("PASS" if report.passed else "FAIL", report.duration)


_criterion_of: dict = {}


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            _criterion_of[item.nodeid] = m.args


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for (number, title), (status, secs) in sorted(_criteria.items()):
        terminalreporter.write_line(f"criterion {number}: {status}  {title} ({secs:.2f} s)")
