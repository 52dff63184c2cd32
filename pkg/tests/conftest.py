import os

import pytest
from hypothesis import settings

settings.register_profile("fixed", derandomize=True, deadline=None, max_examples=40)
settings.load_profile("fixed")

LONG = os.environ.get("GPTLAB_LONG") == "1"


def pytest_collection_modifyitems(config, items):
    if LONG:
        return
    skip = pytest.mark.skip(reason="long tier; set GPTLAB_LONG=1")
    for item in items:
        if "long" in item.keywords:
            item.add_marker(skip)


ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in range(1, 19):
        status, detail = ACCEPTANCE.get(n, ("SKIP", "not run"))
        terminalreporter.write_line(f"criterion {n:2d}: {status} {detail}")
