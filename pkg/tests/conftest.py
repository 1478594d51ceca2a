import pytest

# acceptance test function name prefix -> criterion label
_CRITERIA = {
    "test_c01": "C1 certificate boundary",
    "test_c02": "C2 curve identities and shapes",
    "test_c03": "C3 SNR anchor at delta=0",
    "test_c04": "C4 delta=0 chain values",
    "test_c05": "C5 lifted distance sandwich audit",
    "test_c06": "C6 gradient finite differences",
    "test_c07": "C7 noiseless Gaussian recovery",
    "test_c08": "C8 certified-regime contraction",
    "test_c09": "C9 spectral initialisation quality",
    "test_c10": "C10 noise scaling",
    "test_c11": "C11 determinism",
}
_outcomes: dict[str, str] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    name = item.originalname or item.name
    key = name[:8]
    if key in _CRITERIA and item.module.__name__.endswith("test_acceptance"):
        if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
            prev = _outcomes.get(key)
            if prev != "FAIL":
                _outcomes[key] = "PASS" if rep.passed else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for key, label in _CRITERIA.items():
        if key in _outcomes:
            terminalreporter.write_line(f"{_outcomes[key]}  {label}")
