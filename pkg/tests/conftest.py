import numpy as np
import pytest

from gaussvarlp.kernels import ALTERNATIVE, GENERAL, certify, expression_profile, hermite_profile
from gaussvarlp.operators import OperatorSpec


@pytest.fixture(scope="session")
def F_z1():
    # H_1(z_1) / 2 = z_1
    return certify(hermite_profile([[1, 0]], [0.5]))


@pytest.fixture(scope="session")
def F_z1sq():
    return certify(expression_profile("x1**2 - 1/2", 2))


@pytest.fixture(scope="session")
def F_z1z2():
    return certify(expression_profile("x1*x2", 2))


@pytest.fixture(scope="session")
def alt_spec(F_z1):
    return OperatorSpec(ALTERNATIVE, F_z1, 2, 2)


@pytest.fixture(scope="session")
def gen_spec(F_z1):
    return OperatorSpec(GENERAL, F_z1, 2, 2)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    rows = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            props = dict(getattr(rep, "user_properties", ()))
            if "criterion" in props and rep.when == "call":
                rows.append((props["criterion"], outcome, rep.duration, props.get("detail", "")))
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for num, outcome, dur, detail in sorted(rows):
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {num:2d}: {status}  {dur:7.1f} s  {detail}")
