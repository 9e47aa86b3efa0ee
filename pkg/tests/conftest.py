import pytest

from fgzlb import StructuralParams, build_two_country_model, solve_reference

_ACCEPTANCE: dict[str, tuple[bool, str]] = {}


@pytest.fixture(scope="session")
def defaults():
    return StructuralParams()


@pytest.fixture(scope="session")
def model(defaults):
    return build_two_country_model(defaults)


@pytest.fixture(scope="session")
def rule(model):
    return solve_reference(model)


@pytest.fixture
def criterion(request):
    """Record one acceptance criterion's outcome for the terminal summary."""
    name = request.node.get_closest_marker("criterion").args[0]
    state = {"detail": ""}
    yield state
    rep = getattr(request.node, "rep_call", None)
    passed = rep is not None and rep.passed
    _ACCEPTANCE[name] = (passed, state["detail"])


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion id")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE, key=lambda s: int(s.split()[0][1:])):
        ok, detail = _ACCEPTANCE[name]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
