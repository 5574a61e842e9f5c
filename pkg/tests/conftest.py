from collections import defaultdict
from pathlib import Path

import numpy as np
import pytest

from sarnet import SarParameters, SarState, load_network
from sarnet.scenario import load_bundled_scenario

DATA = Path(__file__).parent / "data"

_criteria = defaultdict(list)


@pytest.fixture(scope="session")
def data_dir():
    return DATA


@pytest.fixture(scope="session")
def sample_net():
    return load_network((DATA / "sample.graph").read_text())


@pytest.fixture(scope="session")
def baseline():
    return load_bundled_scenario("table2")


def one_set_params(**kw):
    base = dict(lam=[[0.0]], rho=[[0.0]], b=[0.0], c=[0.0], beta=[1.0], gamma=[1.0], eta=[1.0], population=15.0)
    base.update(kw)
    return SarParameters(**base)


def state(s, a, r, t=0.0):
    return SarState(np.atleast_1d(s), np.atleast_1d(a), np.atleast_1d(r), t)


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    for key, nums in report.user_properties:
        if key == "criteria":
            for num in nums:
                _criteria[num].append((report.nodeid.split("::")[-1], report.passed))


def pytest_collection_modifyitems(items):
    for item in items:
        nums = tuple(m.args[0] for m in item.iter_markers("criterion"))
        if nums:
            item.user_properties.append(("criteria", nums))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for num in sorted(_criteria):
        checks = _criteria[num]
        ok = all(passed for _, passed in checks)
        failed = [name for name, passed in checks if not passed]
        line = f"criterion {num}: {'PASS' if ok else 'FAIL'} ({len(checks) - len(failed)}/{len(checks)} checks)"
        if failed:
            line += " failing: " + ", ".join(failed)
        tr.write_line(line)
