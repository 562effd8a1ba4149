import numpy as np
import pytest

from orlicz import kernels
from orlicz.dissipative import DissipativeStructure
from orlicz.dynamics import CompositionSystem
from orlicz.space import AtomicMeasureSpace
from orlicz.transform import AtomTransformation
from orlicz.young import YoungFunction

BACKENDS = ["numpy"] + (["numba"] if kernels.numba_kernels is not None else [])


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    """Run the test once per kernel backend."""
    impl = kernels.numpy_kernels if request.param == "numpy" else kernels.numba_kernels
    monkeypatch.setattr(kernels, "active", impl)
    return request.param


def make_system(space, phi=None, step=1, transform=None):
    if isinstance(space, dict):
        space = AtomicMeasureSpace.from_spec(space)
    tr = transform if transform is not None else AtomTransformation.shift(step)
    return CompositionSystem(space, tr, phi or YoungFunction.power(2))


def geometric(r, p=2, window=(-256, 256)):
    return make_system(AtomicMeasureSpace("geometric", window=window, r=r), YoungFunction.power(p))


def two_sided(base=2.0, p=2):
    return make_system(AtomicMeasureSpace("two_sided_exp", base=base), YoungFunction.power(p))


def structure(system, W=(0,), k_window=64):
    return DissipativeStructure(system, list(W), k_window)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE = {}


@pytest.fixture
def criterion(request):
    """Record PASS/FAIL for an acceptance criterion, keyed by its number."""
    def record(number, title):
        ACCEPTANCE[number] = (title, None)
        request.node.acceptance_key = number
    yield record
    key = getattr(request.node, "acceptance_key", None)
    if key is not None:
        title, _ = ACCEPTANCE[key]
        rep = getattr(request.node, "rep_call", None)
        ACCEPTANCE[key] = (title, rep is not None and rep.passed)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, ok = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}")
