import pytest

TITLES = {
    1: "operator identities",
    2: "weak/strong bending consistency",
    3: "energy identity",
    4: "static layered-bar oracle",
    5: "stiff-regime homogenization trend",
    6: "critical-regime corrector trend",
    7: "measure-moment convergence",
    8: "key inequality constant stability",
    9: "a-priori bounds",
    10: "stochastic density limit",
    11: "constraint regimes",
    12: "cell-symmetry oracle",
}

_outcomes = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number n")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or rep.failed or rep.skipped:
        n = mark.args[0]
        ok = rep.passed and rep.when == "call"
        _outcomes[n] = _outcomes.get(n, True) and ok


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_outcomes):
        status = "PASS" if _outcomes[n] else "FAIL"
        terminalreporter.write_line(f"criterion {n:2d} {status}  {TITLES.get(n, '')}")
