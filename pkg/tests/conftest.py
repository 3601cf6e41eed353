import os
import re

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(params=["numba", "numpy"])
def backend(request):
    return request.param


# -- acceptance reporting ----------------------------------------------------------

ACCEPTANCE_KEY = pytest.StashKey[dict]()
_CRITERION = re.compile(r"test_criterion_(\d+)_")


@pytest.fixture
def record(request):
    """``record(n, ok, detail)`` stores the verdict line for criterion ``n``."""
    lines = request.config.stash.setdefault(ACCEPTANCE_KEY, {})

    def f(n: int, ok: bool, detail: str):
        if lines.get(n, "").startswith(f"criterion {n}: FAIL"):
            return
        lines[n] = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"

    return f


@pytest.hookimpl(wrapper=True)
def pytest_runtest_makereport(item, call):
    report = yield
    m = _CRITERION.match(item.name)
    if m and report.when == "call" and report.failed:
        n = int(m.group(1))
        lines = item.config.stash.setdefault(ACCEPTANCE_KEY, {})
        msg = str(call.excinfo.value).splitlines()[0][:160] if call.excinfo else ""
        lines[n] = f"criterion {n}: FAIL  {item.name}: {msg}"
    return report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_KEY, {})
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(lines):
        terminalreporter.write_line(lines[n])
