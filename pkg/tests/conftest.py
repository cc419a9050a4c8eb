import pytest

from ptstable import kernels
from ptstable._accel import NUMBA_OK

BACKENDS = ["numba", "numpy"] if NUMBA_OK else ["numpy"]


@pytest.fixture(params=BACKENDS)
def backend(request):
    with kernels.use_backend(request.param):
        yield request.param


def pytest_report_header(config):
    return f"ptstable kernels: default backend {kernels.backend()}, numba available: {NUMBA_OK}"


# one summary line per acceptance criterion, collected from tests that call
# record_property("criterion", n)
_criteria = {}


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    if "criterion" not in props or report.when != "call":
        return
    details = [v for k, v in report.user_properties if k == "detail"]
    _criteria[props["criterion"]] = (report.outcome, "; ".join(details))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        outcome, detail = _criteria[n]
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {n:2d}: {status}  {detail}")
